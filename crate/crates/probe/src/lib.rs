//! A toolkit for a probabilistic process algebra with data.
//!
//! `probe` parses a small mCRL2-flavoured process language with
//! probabilistic choice (`dist`), generalised sums over data domains,
//! conditions and guarded recursion; builds the alternating probabilistic
//! transition system of its finite fragment; decides probabilistic strong
//! bisimulation; runs seeded Monte Carlo simulations where state spaces are
//! infinite or continuous; and analyses the grouped-room hotel family whose
//! light-on probability 1 - (1 - 1/n)^n converges to 1 - 1/e.

pub mod ast;
pub mod bisim;
pub mod data;
mod lexer;
pub mod parser;
pub mod plts;
pub mod pmf;
pub mod pretty;
pub mod rng;
pub mod sampling;
pub mod semantics;
pub mod validate;

pub use ast::{ActionDecl, DataExpr, DensitySpec, ProcEq, ProcExpr, Sort, Spec};
pub use bisim::{equivalent, minimize, Partition, Verdict};
pub use data::{enumerate_sort, eval_expr, Env, Value};
pub use parser::{parse_density, parse_spec, ParseError};
pub use plts::{
    bounded_trace_distribution, explore, parse_plts, write_plts, ExploreLimits, Plts,
};
pub use pmf::{pmf_from_expr, FinitePmf, Prob};
pub use pretty::pretty_print;
pub use rng::RngStream;
pub use sampling::sample;
pub use semantics::{behavioural_distribution, enabled_transitions, ActionLabel, StateTerm};
pub use validate::{has_errors, validate, Diagnostic, Severity};
