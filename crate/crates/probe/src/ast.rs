//! Abstract syntax for the process language: sorts, data expressions,
//! density specifications, process expressions and whole specifications.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use ordered_float::OrderedFloat;

/// A data sort. `Bool` and `Range` are the only finite sorts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Bool,
    Nat,
    Int,
    Real,
    /// Inclusive integer interval `[lo..hi]`, `lo <= hi`.
    Range(i64, i64),
}

impl Sort {
    pub fn is_finite(&self) -> bool {
        matches!(self, Sort::Bool | Sort::Range(_, _))
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Nat => write!(f, "Nat"),
            Sort::Int => write!(f, "Int"),
            Sort::Real => write!(f, "Real"),
            Sort::Range(lo, hi) => write!(f, "[{lo}..{hi}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

/// A data expression. Integer literals are arbitrary precision; decimal
/// literals are 64-bit floats (they force float evaluation downstream).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataExpr {
    BoolLit(bool),
    IntLit(BigInt),
    RealLit(OrderedFloat<f64>),
    Var(String),
    Unary(UnOp, Box<DataExpr>),
    Binary(BinOp, Box<DataExpr>, Box<DataExpr>),
    /// `if(c, x, y)` — lazy in the untaken branch.
    If(Box<DataExpr>, Box<DataExpr>, Box<DataExpr>),
}

impl DataExpr {
    pub fn int(n: i64) -> Self {
        DataExpr::IntLit(BigInt::from(n))
    }

    pub fn var(name: &str) -> Self {
        DataExpr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: DataExpr, rhs: DataExpr) -> Self {
        DataExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            DataExpr::BoolLit(_) | DataExpr::IntLit(_) | DataExpr::RealLit(_) => {}
            DataExpr::Var(v) => {
                if !bound.iter().any(|b| b == v) {
                    out.insert(v.clone());
                }
            }
            DataExpr::Unary(_, e) => e.free_vars_into(bound, out),
            DataExpr::Binary(_, a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            DataExpr::If(c, x, y) => {
                c.free_vars_into(bound, out);
                x.free_vars_into(bound, out);
                y.free_vars_into(bound, out);
            }
        }
    }
}

/// How the value bound by a `dist` operator is distributed.
///
/// `PmfExpr` gives the mass of each element of a finite sort; the named
/// constructors are the supported continuous families over `Real`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DensitySpec {
    PmfExpr(DataExpr),
    Uniform(DataExpr, DataExpr),
    Exponential(DataExpr),
    NormalTrunc(DataExpr, DataExpr, DataExpr, DataExpr),
}

impl DensitySpec {
    pub fn param_exprs(&self) -> Vec<&DataExpr> {
        match self {
            DensitySpec::PmfExpr(e) => vec![e],
            DensitySpec::Uniform(a, b) => vec![a, b],
            DensitySpec::Exponential(a) => vec![a],
            DensitySpec::NormalTrunc(a, b, c, d) => vec![a, b, c, d],
        }
    }
}

/// A process expression.
///
/// `Terminated` is the internal successful-termination marker; it has no
/// concrete syntax. A bare action `a` denotes "do `a`, then terminate".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcExpr {
    Delta,
    Terminated,
    Action(String, Vec<DataExpr>),
    Seq(Box<ProcExpr>, Box<ProcExpr>),
    Alt(Box<ProcExpr>, Box<ProcExpr>),
    /// `(c) -> p <> q`; an omitted else-branch is stored as `Delta`.
    Cond(DataExpr, Box<ProcExpr>, Box<ProcExpr>),
    Sum(String, Sort, Box<ProcExpr>),
    Dist(String, Sort, DensitySpec, Box<ProcExpr>),
    ProcRef(String, Vec<DataExpr>),
}

impl ProcExpr {
    pub fn seq(p: ProcExpr, q: ProcExpr) -> Self {
        ProcExpr::Seq(Box::new(p), Box::new(q))
    }

    pub fn alt(p: ProcExpr, q: ProcExpr) -> Self {
        ProcExpr::Alt(Box::new(p), Box::new(q))
    }

    pub fn cond(c: DataExpr, p: ProcExpr, q: ProcExpr) -> Self {
        ProcExpr::Cond(c, Box::new(p), Box::new(q))
    }

    /// Free data variables of the expression (binders and the density
    /// restriction of `dist` taken into account).
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            ProcExpr::Delta | ProcExpr::Terminated => {}
            ProcExpr::Action(_, args) | ProcExpr::ProcRef(_, args) => {
                for a in args {
                    a.free_vars_into(bound, out);
                }
            }
            ProcExpr::Seq(p, q) | ProcExpr::Alt(p, q) => {
                p.free_vars_into(bound, out);
                q.free_vars_into(bound, out);
            }
            ProcExpr::Cond(c, p, q) => {
                c.free_vars_into(bound, out);
                p.free_vars_into(bound, out);
                q.free_vars_into(bound, out);
            }
            ProcExpr::Sum(v, _, body) => {
                bound.push(v.clone());
                body.free_vars_into(bound, out);
                bound.pop();
            }
            ProcExpr::Dist(v, _, density, body) => {
                // A mass expression is a function of the bound variable; the
                // parameters of a named continuous family are not.
                match density {
                    DensitySpec::PmfExpr(e) => {
                        bound.push(v.clone());
                        e.free_vars_into(bound, out);
                        bound.pop();
                    }
                    named => {
                        for e in named.param_exprs() {
                            e.free_vars_into(bound, out);
                        }
                    }
                }
                bound.push(v.clone());
                body.free_vars_into(bound, out);
                bound.pop();
            }
        }
    }
}

/// An action declaration: name plus argument sorts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDecl {
    pub name: String,
    pub sorts: Vec<Sort>,
}

/// A recursive process equation `proc Name(params) = body;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcEq {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub body: ProcExpr,
}

/// A parsed specification: action declarations, process equations and the
/// initial process expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spec {
    pub actions: Vec<ActionDecl>,
    pub equations: Vec<ProcEq>,
    pub init: ProcExpr,
}

impl Spec {
    pub fn action(&self, name: &str) -> Option<&ActionDecl> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn equation(&self, name: &str) -> Option<&ProcEq> {
        self.equations.iter().find(|e| e.name == name)
    }
}
