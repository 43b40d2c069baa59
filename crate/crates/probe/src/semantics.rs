//! Distribution-valued semantics of the finite fragment.
//!
//! A process expression denotes a finite probability distribution over
//! resolved *state terms*; a state term offers action transitions that lead
//! back to distributions. Choice resolves jointly: the residual of `p + q`
//! (and of a finite `sum`) keeps one resolved summand per operand, combined
//! into a canonical `Combine` term, which realizes the product of the
//! operand distributions.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::BigRational;
use thiserror::Error;

use crate::ast::{DensitySpec, ProcExpr, Sort, Spec};
use crate::data::{enumerate_sort, eval_expr, Env, EvalError, Value};
use crate::pmf::{pmf_from_expr, DistError, FinitePmf, Prob};

/// An action with its evaluated data arguments, e.g. `read(42)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionLabel {
    pub name: String,
    pub args: Vec<Value>,
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A process expression paired with the environment it runs in, restricted
/// to the expression's free variables so equal continuations compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Closure {
    pub expr: ProcExpr,
    pub env: Env,
}

impl Closure {
    pub fn new(expr: ProcExpr, env: &Env) -> Self {
        let free = expr.free_vars();
        let env = if free.is_empty() { Env::new() } else { env.restrict(&free) };
        Closure { expr, env }
    }
}

/// A resolved state: every probabilistic choice reachable without an action
/// has been made.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateTerm {
    Deadlock,
    Terminated,
    /// An action is offered; afterwards the closure's distribution is entered.
    Prefix(ActionLabel, Closure),
    /// Joint residual of `+`/finite `sum`: flattened, canonically sorted,
    /// deadlock units removed, duplicates kept.
    Combine(Vec<StateTerm>),
    /// A residual still followed by a sequential continuation.
    SeqTail(Box<StateTerm>, Closure),
}

/// Canonical combination of residuals.
pub fn combine(parts: Vec<StateTerm>) -> StateTerm {
    let mut flat = Vec::with_capacity(parts.len());
    for part in parts {
        match part {
            StateTerm::Combine(inner) => flat.extend(inner),
            StateTerm::Deadlock => {}
            other => flat.push(other),
        }
    }
    flat.sort();
    match flat.len() {
        0 => StateTerm::Deadlock,
        1 => flat.pop().expect("length checked"),
        _ => StateTerm::Combine(flat),
    }
}

fn seq_tail(state: StateTerm, continuation: &Closure) -> StateTerm {
    match state {
        // A deadlocked residual never reaches its continuation.
        StateTerm::Deadlock => StateTerm::Deadlock,
        other => StateTerm::SeqTail(Box::new(other), continuation.clone()),
    }
}

/// A stable structural fingerprint of a state term within one process run.
pub fn fingerprint(term: &StateTerm) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    term.hash(&mut hasher);
    hasher.finish()
}

/// Bounds for distribution construction.
#[derive(Debug, Clone)]
pub struct SemanticsOptions {
    /// Product constructions fail above this many outcomes.
    pub max_support: usize,
    /// Process unfoldings per distribution computation; a safety net for
    /// unguarded parameterised recursion that never revisits the same term.
    pub max_unfold_depth: usize,
}

impl Default for SemanticsOptions {
    fn default() -> Self {
        SemanticsOptions { max_support: 1_000_000, max_unfold_depth: 4096 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticsError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("sum over infinite sort {sort} (variable `{var}`) cannot be finitely explored")]
    InfiniteSum { var: String, sort: Sort },
    #[error("continuous distribution for `{0}` cannot be finitely explored")]
    ContinuousDist(String),
    #[error("unguarded recursion at {0}: process unfolds without an action prefix")]
    Unguarded(String),
    #[error("distribution support exceeds {0} outcomes")]
    SupportExceeded(usize),
    #[error("reference to undefined process `{0}`")]
    UndefinedProcess(String),
    #[error("condition did not evaluate to a boolean: {0}")]
    NonBoolCondition(String),
}

/// The distribution over state terms denoted by `p` in `env`.
pub fn behavioural_distribution(
    p: &ProcExpr,
    env: &Env,
    spec: &Spec,
) -> Result<FinitePmf<StateTerm>, SemanticsError> {
    behavioural_distribution_with(p, env, spec, &SemanticsOptions::default())
}

pub fn behavioural_distribution_with(
    p: &ProcExpr,
    env: &Env,
    spec: &Spec,
    options: &SemanticsOptions,
) -> Result<FinitePmf<StateTerm>, SemanticsError> {
    let mut ctx = Ctx { spec, options, unfolding: Vec::new() };
    ctx.dist(p, env)
}

/// The action transitions a state term offers. Deadlock and termination
/// offer none; a combined residual offers the transitions of every member.
pub fn enabled_transitions(
    state: &StateTerm,
    spec: &Spec,
) -> Result<Vec<(ActionLabel, FinitePmf<StateTerm>)>, SemanticsError> {
    enabled_transitions_with(state, spec, &SemanticsOptions::default())
}

pub fn enabled_transitions_with(
    state: &StateTerm,
    spec: &Spec,
    options: &SemanticsOptions,
) -> Result<Vec<(ActionLabel, FinitePmf<StateTerm>)>, SemanticsError> {
    let mut ctx = Ctx { spec, options, unfolding: Vec::new() };
    ctx.transitions(state)
}

struct Ctx<'a> {
    spec: &'a Spec,
    options: &'a SemanticsOptions,
    unfolding: Vec<(String, Vec<Value>)>,
}

impl<'a> Ctx<'a> {
    fn dist(&mut self, p: &ProcExpr, env: &Env) -> Result<FinitePmf<StateTerm>, SemanticsError> {
        match p {
            ProcExpr::Delta => Ok(FinitePmf::dirac(StateTerm::Deadlock)),
            ProcExpr::Terminated => Ok(FinitePmf::dirac(StateTerm::Terminated)),
            ProcExpr::Action(name, args) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(eval_expr(a, env)?);
                }
                let label = ActionLabel { name: name.clone(), args: values };
                let after = Closure::new(ProcExpr::Terminated, &Env::new());
                Ok(FinitePmf::dirac(StateTerm::Prefix(label, after)))
            }
            ProcExpr::Seq(first, rest) => {
                let d = self.dist(first, env)?;
                let continuation = Closure::new(rest.as_ref().clone(), env);
                self.seq_wrap(d, &continuation)
            }
            ProcExpr::Alt(left, right) => {
                let dl = self.dist(left, env)?;
                let dr = self.dist(right, env)?;
                self.product(&[dl, dr])
            }
            ProcExpr::Cond(c, then, els) => {
                let v = eval_expr(c, env)?;
                match v.as_bool() {
                    Some(true) => self.dist(then, env),
                    Some(false) => self.dist(els, env),
                    None => Err(SemanticsError::NonBoolCondition(v.to_string())),
                }
            }
            ProcExpr::Sum(var, sort, body) => {
                if !sort.is_finite() {
                    return Err(SemanticsError::InfiniteSum {
                        var: var.clone(),
                        sort: sort.clone(),
                    });
                }
                let mut factors = Vec::new();
                for value in enumerate_sort(sort)? {
                    factors.push(self.dist(body, &env.bind(var, value))?);
                }
                self.product(&factors)
            }
            ProcExpr::Dist(var, sort, density, body) => {
                let DensitySpec::PmfExpr(mass) = density else {
                    return Err(SemanticsError::ContinuousDist(var.clone()));
                };
                let weights = pmf_from_expr(var, sort, mass, env)?;
                let mut entries = Vec::new();
                for (value, weight) in weights.iter() {
                    let branch = self.dist(body, &env.bind(var, value.clone()))?;
                    for (term, mass) in branch.iter() {
                        entries.push((term.clone(), weight.mul(mass)));
                    }
                    if entries.len() > self.options.max_support {
                        return Err(SemanticsError::SupportExceeded(self.options.max_support));
                    }
                }
                Ok(FinitePmf::from_entries(entries).map_err(DistError::from)?)
            }
            ProcExpr::ProcRef(name, args) => {
                let eq = self
                    .spec
                    .equation(name)
                    .ok_or_else(|| SemanticsError::UndefinedProcess(name.clone()))?;
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(eval_expr(a, env)?);
                }
                let frame = (name.clone(), values.clone());
                if self.unfolding.contains(&frame) || self.unfolding.len() >= self.options.max_unfold_depth
                {
                    return Err(SemanticsError::Unguarded(name.clone()));
                }
                let inner = Env::from_bindings(
                    eq.params
                        .iter()
                        .map(|(p, _)| p.clone())
                        .zip(values.into_iter()),
                );
                self.unfolding.push(frame);
                let result = self.dist(&eq.body, &inner);
                self.unfolding.pop();
                result
            }
        }
    }

    /// Sequential wrapping: residuals gain the continuation, successful
    /// termination steps straight into the continuation's distribution.
    fn seq_wrap(
        &mut self,
        d: FinitePmf<StateTerm>,
        continuation: &Closure,
    ) -> Result<FinitePmf<StateTerm>, SemanticsError> {
        let mut entries = Vec::with_capacity(d.len());
        for (term, mass) in d.iter() {
            if *term == StateTerm::Terminated {
                let follow = self.dist(&continuation.expr, &continuation.env)?;
                for (t, m) in follow.iter() {
                    entries.push((t.clone(), mass.mul(m)));
                }
            } else {
                entries.push((seq_tail(term.clone(), continuation), mass.clone()));
            }
            if entries.len() > self.options.max_support {
                return Err(SemanticsError::SupportExceeded(self.options.max_support));
            }
        }
        Ok(FinitePmf::from_entries(entries).map_err(DistError::from)?)
    }

    /// Independent product of factor distributions, combining residuals.
    fn product(
        &mut self,
        factors: &[FinitePmf<StateTerm>],
    ) -> Result<FinitePmf<StateTerm>, SemanticsError> {
        let mut acc: Vec<(Vec<StateTerm>, Prob)> = vec![(Vec::new(), Prob::one())];
        for factor in factors {
            let projected = factor.len().saturating_mul(acc.len());
            if projected > self.options.max_support {
                return Err(SemanticsError::SupportExceeded(self.options.max_support));
            }
            let mut next = Vec::with_capacity(projected);
            for (parts, mass) in &acc {
                for (term, weight) in factor.iter() {
                    let mut parts = parts.clone();
                    parts.push(term.clone());
                    next.push((parts, mass.mul(weight)));
                }
            }
            acc = next;
        }
        Ok(FinitePmf::from_entries(
            acc.into_iter().map(|(parts, mass)| (combine(parts), mass)),
        )
        .map_err(DistError::from)?)
    }

    fn transitions(
        &mut self,
        state: &StateTerm,
    ) -> Result<Vec<(ActionLabel, FinitePmf<StateTerm>)>, SemanticsError> {
        match state {
            StateTerm::Deadlock | StateTerm::Terminated => Ok(Vec::new()),
            StateTerm::Prefix(label, after) => {
                let d = self.dist(&after.expr, &after.env)?;
                Ok(vec![(label.clone(), d)])
            }
            StateTerm::Combine(members) => {
                let mut out = Vec::new();
                for member in members {
                    out.extend(self.transitions(member)?);
                }
                Ok(out)
            }
            StateTerm::SeqTail(inner, continuation) => {
                let inner_transitions = self.transitions(inner)?;
                let mut out = Vec::with_capacity(inner_transitions.len());
                for (label, d) in inner_transitions {
                    out.push((label, self.seq_wrap(d, continuation)?));
                }
                Ok(out)
            }
        }
    }
}

/// The exact rational carried by a probability, if it is exact.
pub fn prob_as_rational(p: &Prob) -> Option<&BigRational> {
    match p {
        Prob::Rat(r) => Some(r),
        Prob::Float(_) => None,
    }
}

/// Convenience: all action names observable anywhere in a distribution's
/// immediate transitions (used by reporting code).
pub fn support_action_names(
    d: &FinitePmf<StateTerm>,
    spec: &Spec,
) -> Result<BTreeSet<String>, SemanticsError> {
    let mut names = BTreeSet::new();
    for (term, _) in d.iter() {
        for (label, _) in enabled_transitions(term, spec)? {
            names.insert(label.name);
        }
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_spec;
    use num_bigint::BigInt;

    fn ratio(n: i64, d: i64) -> Prob {
        Prob::Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    fn throw_spec() -> Spec {
        parse_spec(
            "act head,tail; proc Throw = dist b:Bool[1/2].((b) -> head <> tail).Throw; init Throw;",
        )
        .unwrap()
    }

    fn label(name: &str) -> ActionLabel {
        ActionLabel { name: name.into(), args: vec![] }
    }

    #[test]
    fn throw_body_is_the_fair_coin_distribution() {
        let spec = throw_spec();
        let d = behavioural_distribution(&spec.init, &Env::new(), &spec).unwrap();
        assert_eq!(d.len(), 2);
        for (term, mass) in d.iter() {
            assert_eq!(*mass, ratio(1, 2));
            let StateTerm::SeqTail(inner, continuation) = term else {
                panic!("expected a sequential residual, got {term:?}");
            };
            assert!(matches!(inner.as_ref(), StateTerm::Prefix(_, _)));
            assert_eq!(continuation.expr, ProcExpr::ProcRef("Throw".into(), vec![]));
        }
        let labels: BTreeSet<String> = support_action_names(&d, &spec).unwrap();
        assert_eq!(labels, BTreeSet::from(["head".to_string(), "tail".to_string()]));
    }

    #[test]
    fn delta_plus_delta_is_deadlock() {
        let spec = parse_spec("init delta + delta;").unwrap();
        let d = behavioural_distribution(&spec.init, &Env::new(), &spec).unwrap();
        assert_eq!(d.entries(), &[(StateTerm::Deadlock, Prob::one())]);
    }

    #[test]
    fn hotel_two_product_outcomes() {
        let spec = parse_spec("act a; init sum i:[1..2].dist j:[1..2][1/2].(i = j) -> a;").unwrap();
        let d = behavioural_distribution(&spec.init, &Env::new(), &spec).unwrap();

        // Independent oracle: enumerate the four draw vectors (j1, j2) by
        // hand and combine the residuals.
        let prefix_a = StateTerm::Prefix(label("a"), Closure::new(ProcExpr::Terminated, &Env::new()));
        let mut expected = Vec::new();
        for j1 in 1..=2 {
            for j2 in 1..=2 {
                let mut parts = Vec::new();
                if j1 == 1 {
                    parts.push(prefix_a.clone());
                }
                if j2 == 2 {
                    parts.push(prefix_a.clone());
                }
                expected.push((combine(parts), ratio(1, 4)));
            }
        }
        let expected = FinitePmf::from_entries(expected).unwrap();
        assert_eq!(d, expected);

        // P(some `a` enabled) = 3/4: only the (2,1) vector deadlocks.
        let enabled_mass = d
            .iter()
            .filter(|(t, _)| *t != StateTerm::Deadlock)
            .fold(Prob::zero(), |acc, (_, m)| acc.add(m));
        assert_eq!(enabled_mass, ratio(3, 4));
    }

    #[test]
    fn prefix_transitions_return_to_sigma() {
        let spec = throw_spec();
        let sigma = behavioural_distribution(&spec.init, &Env::new(), &spec).unwrap();
        let (head_term, _) = sigma
            .iter()
            .find(|(t, _)| {
                matches!(t, StateTerm::SeqTail(inner, _)
                    if matches!(inner.as_ref(), StateTerm::Prefix(l, _) if l.name == "head"))
            })
            .unwrap();
        let transitions = enabled_transitions(head_term, &spec).unwrap();
        assert_eq!(transitions.len(), 1);
        assert_eq!(transitions[0].0, label("head"));
        // After `head` the sequential tail re-enters Throw: the original σ.
        assert_eq!(transitions[0].1, sigma);
    }

    #[test]
    fn deadlock_and_termination_offer_nothing() {
        let spec = parse_spec("init delta;").unwrap();
        assert!(enabled_transitions(&StateTerm::Deadlock, &spec).unwrap().is_empty());
        assert!(enabled_transitions(&StateTerm::Terminated, &spec).unwrap().is_empty());
    }

    #[test]
    fn combined_residual_is_nondeterministic() {
        // a.delta + a.b.delta: two `a` transitions to different distributions.
        let spec = parse_spec("act a, b; init a.delta + a.b.delta;").unwrap();
        let d = behavioural_distribution(&spec.init, &Env::new(), &spec).unwrap();
        assert_eq!(d.len(), 1);
        let (term, _) = &d.entries()[0];
        let transitions = enabled_transitions(term, &spec).unwrap();
        assert_eq!(transitions.len(), 2);
        assert_eq!(transitions[0].0, label("a"));
        assert_eq!(transitions[1].0, label("a"));
        assert_ne!(transitions[0].1, transitions[1].1);
    }

    #[test]
    fn bare_action_terminates_after_one_step() {
        let spec = parse_spec("act a; init a;").unwrap();
        let d = behavioural_distribution(&spec.init, &Env::new(), &spec).unwrap();
        let (term, _) = &d.entries()[0];
        let transitions = enabled_transitions(term, &spec).unwrap();
        assert_eq!(transitions.len(), 1);
        assert_eq!(
            transitions[0].1.entries(),
            &[(StateTerm::Terminated, Prob::one())]
        );
    }

    #[test]
    fn seq_unit_law() {
        // dist(a.q) is the Dirac on the prefixed residual carrying q.
        let spec = parse_spec("act a, b; init a.b.delta;").unwrap();
        let d = behavioural_distribution(&spec.init, &Env::new(), &spec).unwrap();
        assert_eq!(d.len(), 1);
        assert!(matches!(&d.entries()[0].0, StateTerm::SeqTail(_, _)));
    }

    #[test]
    fn finite_sum_equals_expanded_choice() {
        let sum = parse_spec("act a:Nat; init sum i:[1..2].a(i);").unwrap();
        let alt = parse_spec("act a:Nat; init a(1) + a(2);").unwrap();
        let ds = behavioural_distribution(&sum.init, &Env::new(), &sum).unwrap();
        let da = behavioural_distribution(&alt.init, &Env::new(), &alt).unwrap();
        assert_eq!(ds, da);
    }

    #[test]
    fn choice_is_commutative_and_associative() {
        let pq = parse_spec("act a, b; init (dist x:Bool[1/2].(x) -> a) + b.delta;").unwrap();
        let qp = parse_spec("act a, b; init b.delta + (dist x:Bool[1/2].(x) -> a);").unwrap();
        let d1 = behavioural_distribution(&pq.init, &Env::new(), &pq).unwrap();
        let d2 = behavioural_distribution(&qp.init, &Env::new(), &qp).unwrap();
        assert_eq!(d1, d2);

        let abc = parse_spec("act a, b, c; init (a + b) + c;").unwrap();
        let acb = parse_spec("act a, b, c; init a + (b + c);").unwrap();
        let d1 = behavioural_distribution(&abc.init, &Env::new(), &abc).unwrap();
        let d2 = behavioural_distribution(&acb.init, &Env::new(), &acb).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn duplicate_summands_are_kept() {
        // p + p resolves to a Combine with two copies, not to p.
        let spec = parse_spec("act a; init a.delta + a.delta;").unwrap();
        let d = behavioural_distribution(&spec.init, &Env::new(), &spec).unwrap();
        let (term, _) = &d.entries()[0];
        let StateTerm::Combine(members) = term else {
            panic!("expected a combined residual, got {term:?}");
        };
        assert_eq!(members.len(), 2);
        assert_eq!(members[0], members[1]);
    }

    #[test]
    fn unguarded_recursion_is_detected_dynamically() {
        let spec = Spec {
            actions: vec![],
            equations: vec![crate::ast::ProcEq {
                name: "X".into(),
                params: vec![],
                body: ProcExpr::ProcRef("X".into(), vec![]),
            }],
            init: ProcExpr::ProcRef("X".into(), vec![]),
        };
        assert!(matches!(
            behavioural_distribution(&spec.init, &Env::new(), &spec),
            Err(SemanticsError::Unguarded(name)) if name == "X"
        ));
    }

    #[test]
    fn support_bound_is_enforced() {
        let spec = parse_spec("act a:Nat; init sum i:[1..8].dist j:[1..8][1/8].a(j);").unwrap();
        let options = SemanticsOptions { max_support: 100, ..Default::default() };
        assert!(matches!(
            behavioural_distribution_with(&spec.init, &Env::new(), &spec, &options),
            Err(SemanticsError::SupportExceeded(100))
        ));
    }

    #[test]
    fn continuous_dist_cannot_be_explored() {
        let spec = parse_spec("act w:Real; init dist t:Real[Exp(1)].w(t);").unwrap();
        assert!(matches!(
            behavioural_distribution(&spec.init, &Env::new(), &spec),
            Err(SemanticsError::ContinuousDist(v)) if v == "t"
        ));
    }

    #[test]
    fn infinite_sum_cannot_be_explored() {
        let spec = parse_spec("act w:Real; init sum t:Real.w(t);").unwrap();
        assert!(matches!(
            behavioural_distribution(&spec.init, &Env::new(), &spec),
            Err(SemanticsError::InfiniteSum { var, .. }) if var == "t"
        ));
    }
}
