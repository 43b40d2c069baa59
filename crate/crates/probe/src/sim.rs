//! Monte Carlo execution of specifications.
//!
//! Probabilistic choices are sampled; nondeterministic choices are resolved
//! by an explicit [`Scheduler`]. A run samples the behavioural distribution
//! step by step, mirroring the product semantics: every summand of `+` and
//! of a finite `sum` resolves its probabilistic choices independently before
//! the scheduler picks among the enabled transitions. Run `k` draws from
//! stream `k` of the seed, so reports are reproducible and independent of
//! the degree of parallelism.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::ast::{DensitySpec, ProcExpr, Sort, Spec};
use crate::data::{enumerate_sort, eval_expr, Env, EvalError, Value};
use crate::pmf::FinitePmf;
use crate::rng::RngStream;
use crate::sampling::{sample, sample_pmf, SampleError};
use crate::semantics::{combine, ActionLabel, Closure, StateTerm};

/// Policy resolving nondeterminism during simulation.
#[derive(Debug, Clone)]
pub enum Scheduler {
    /// Uniformly random among the enabled transitions.
    UniformChoice,
    /// Always the k-th enabled transition in canonical order, modulo the
    /// number enabled (so a run never stalls on a short transition list).
    FixedIndex(usize),
    /// Resolves infinite-sort `sum` binders by sampling the named variable
    /// from the given density; transition choice is uniform.
    SumResolver(BTreeMap<String, DensitySpec>),
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Worker threads; results do not depend on this.
    pub jobs: usize,
    pub record_traces: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { jobs: 1, record_traces: false }
    }
}

/// Aggregated outcome of a batch of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub runs: u64,
    pub max_steps: u64,
    pub seed: u64,
    /// Runs in which the action occurred at least once, per declared action.
    pub action_runs: BTreeMap<String, u64>,
    pub traces: Option<Vec<Vec<ActionLabel>>>,
}

impl fmt::Display for SimulationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "runs = {}", self.runs)?;
        writeln!(f, "max_steps = {}", self.max_steps)?;
        writeln!(f, "seed = {}", self.seed)?;
        for (action, count) in &self.action_runs {
            let est = wilson_interval(*count, self.runs);
            writeln!(
                f,
                "action {action}: count={count} estimate={:.6} ci_low={:.6} ci_high={:.6}",
                *count as f64 / self.runs as f64,
                est.0,
                est.1
            )?;
        }
        Ok(())
    }
}

/// A point estimate with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub count: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("unresolved infinite sum over variable `{0}`: no scheduler resolver for it")]
    UnresolvedSum(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("unguarded recursion at {0}: process unfolds without an action prefix")]
    Unguarded(String),
    #[error("reference to undefined process `{0}`")]
    UndefinedProcess(String),
    #[error("condition did not evaluate to a boolean: {0}")]
    NonBoolCondition(String),
    #[error("unknown action label `{0}`")]
    UnknownAction(String),
    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
}

/// Runs `runs` independent simulations of `spec` and aggregates run-level
/// action occurrences.
pub fn simulate(
    spec: &Spec,
    scheduler: &Scheduler,
    runs: u64,
    max_steps: u64,
    seed: u64,
) -> Result<SimulationReport, SimError> {
    simulate_with(spec, scheduler, runs, max_steps, seed, &SimOptions::default())
}

pub fn simulate_with(
    spec: &Spec,
    scheduler: &Scheduler,
    runs: u64,
    max_steps: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<SimulationReport, SimError> {
    let outcomes: Vec<Result<RunOutcome, SimError>> = if options.jobs <= 1 {
        let mut sampler = Sampler::new(spec, scheduler);
        (0..runs)
            .map(|run| sampler.run_once(run, max_steps, seed, options.record_traces))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))?;
        pool.install(|| {
            (0..runs as usize)
                .into_par_iter()
                .map_init(
                    || Sampler::new(spec, scheduler),
                    |sampler, run| {
                        sampler.run_once(run as u64, max_steps, seed, options.record_traces)
                    },
                )
                .collect()
        })
    };

    let mut action_runs: BTreeMap<String, u64> =
        spec.actions.iter().map(|a| (a.name.clone(), 0)).collect();
    let mut traces = options.record_traces.then(Vec::new);
    for outcome in outcomes {
        let outcome = outcome?;
        for name in outcome.occurred {
            *action_runs.entry(name).or_insert(0) += 1;
        }
        if let Some(traces) = traces.as_mut() {
            traces.push(outcome.trace);
        }
    }
    Ok(SimulationReport { runs, max_steps, seed, action_runs, traces })
}

/// Point estimate and Wilson 95% interval for "action occurred in a run".
pub fn estimate_action_probability(
    report: &SimulationReport,
    action: &str,
) -> Result<Estimate, SimError> {
    let count = *report
        .action_runs
        .get(action)
        .ok_or_else(|| SimError::UnknownAction(action.to_string()))?;
    let (ci_low, ci_high) = wilson_interval(count, report.runs);
    Ok(Estimate {
        count,
        estimate: count as f64 / report.runs as f64,
        ci_low,
        ci_high,
    })
}

const Z95: f64 = 1.959963984540054;

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "wilson interval of zero trials");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

struct RunOutcome {
    occurred: BTreeSet<String>,
    trace: Vec<ActionLabel>,
}

/// One enabled transition: the label, the continuation behind the action,
/// and the stack of sequential continuations around it, innermost first.
struct Transition {
    label: ActionLabel,
    base: Closure,
    wrappers: Vec<Closure>,
}

#[derive(PartialEq, Eq, Hash)]
struct PmfKey {
    var: String,
    sort: Sort,
    expr: crate::ast::DataExpr,
    bindings: Vec<(String, Value)>,
}

struct Sampler<'a> {
    spec: &'a Spec,
    scheduler: &'a Scheduler,
    // Sample tables for finite mass expressions, keyed by the expression and
    // the values of its outer free variables.
    pmf_cache: HashMap<PmfKey, FinitePmf<Value>>,
    unfolding: Vec<(String, Vec<Value>)>,
}

const MAX_UNFOLD: usize = 4096;

impl<'a> Sampler<'a> {
    fn new(spec: &'a Spec, scheduler: &'a Scheduler) -> Self {
        Sampler { spec, scheduler, pmf_cache: HashMap::new(), unfolding: Vec::new() }
    }

    fn run_once(
        &mut self,
        run: u64,
        max_steps: u64,
        seed: u64,
        record: bool,
    ) -> Result<RunOutcome, SimError> {
        let mut rng = RngStream::new(seed, run);
        let init = self.spec.init.clone();
        let mut term = self.sample_state(&init, &Env::new(), &mut rng)?;
        let mut occurred = BTreeSet::new();
        let mut trace = Vec::new();
        for _ in 0..max_steps {
            let mut transitions = Vec::new();
            collect_transitions(&term, &mut Vec::new(), &mut transitions);
            if transitions.is_empty() {
                break;
            }
            let index = match self.scheduler {
                Scheduler::FixedIndex(k) => k % transitions.len(),
                _ => rng.below(transitions.len() as u64) as usize,
            };
            let transition = transitions.swap_remove(index);
            occurred.insert(transition.label.name.clone());
            if record {
                trace.push(transition.label.clone());
            }
            term = self.step(&transition, &mut rng)?;
        }
        Ok(RunOutcome { occurred, trace })
    }

    /// Takes a chosen transition: samples the continuation behind the action
    /// and re-applies the sequential wrappers.
    fn step(&mut self, transition: &Transition, rng: &mut RngStream) -> Result<StateTerm, SimError> {
        let mut term =
            self.sample_state(&transition.base.expr.clone(), &transition.base.env.clone(), rng)?;
        for wrapper in &transition.wrappers {
            term = match term {
                StateTerm::Terminated => {
                    self.sample_state(&wrapper.expr.clone(), &wrapper.env.clone(), rng)?
                }
                StateTerm::Deadlock => StateTerm::Deadlock,
                other => StateTerm::SeqTail(Box::new(other), wrapper.clone()),
            };
        }
        Ok(term)
    }

    /// Samples one resolved state term for a process expression: the
    /// single-sample analogue of the behavioural distribution.
    fn sample_state(
        &mut self,
        p: &ProcExpr,
        env: &Env,
        rng: &mut RngStream,
    ) -> Result<StateTerm, SimError> {
        match p {
            ProcExpr::Delta => Ok(StateTerm::Deadlock),
            ProcExpr::Terminated => Ok(StateTerm::Terminated),
            ProcExpr::Action(name, args) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(eval_expr(a, env)?);
                }
                Ok(StateTerm::Prefix(
                    ActionLabel { name: name.clone(), args: values },
                    Closure::new(ProcExpr::Terminated, &Env::new()),
                ))
            }
            ProcExpr::Seq(first, rest) => {
                let state = self.sample_state(first, env, rng)?;
                let continuation = Closure::new(rest.as_ref().clone(), env);
                Ok(match state {
                    StateTerm::Terminated => {
                        self.sample_state(&continuation.expr.clone(), &continuation.env.clone(), rng)?
                    }
                    StateTerm::Deadlock => StateTerm::Deadlock,
                    other => StateTerm::SeqTail(Box::new(other), continuation),
                })
            }
            ProcExpr::Alt(left, right) => {
                let l = self.sample_state(left, env, rng)?;
                let r = self.sample_state(right, env, rng)?;
                Ok(combine(vec![l, r]))
            }
            ProcExpr::Cond(c, then, els) => {
                let v = eval_expr(c, env)?;
                match v.as_bool() {
                    Some(true) => self.sample_state(then, env, rng),
                    Some(false) => self.sample_state(els, env, rng),
                    None => Err(SimError::NonBoolCondition(v.to_string())),
                }
            }
            ProcExpr::Sum(var, sort, body) => {
                if sort.is_finite() {
                    let mut parts = Vec::new();
                    for value in enumerate_sort(sort)? {
                        parts.push(self.sample_state(body, &env.bind(var, value), rng)?);
                    }
                    Ok(combine(parts))
                } else {
                    // Nondeterminism over an infinite domain: the scheduler
                    // must name a density for the bound variable.
                    let Scheduler::SumResolver(resolvers) = self.scheduler else {
                        return Err(SimError::UnresolvedSum(var.clone()));
                    };
                    let Some(density) = resolvers.get(var) else {
                        return Err(SimError::UnresolvedSum(var.clone()));
                    };
                    let value = sample(var, sort, density, env, rng)?;
                    self.sample_state(body, &env.bind(var, value), rng)
                }
            }
            ProcExpr::Dist(var, sort, density, body) => {
                let value = match density {
                    DensitySpec::PmfExpr(expr) => {
                        let pmf = self.cached_pmf(var, sort, expr, env)?;
                        sample_pmf(&pmf, rng)
                    }
                    named => sample(var, sort, named, env, rng)?,
                };
                self.sample_state(body, &env.bind(var, value), rng)
            }
            ProcExpr::ProcRef(name, args) => {
                let eq = self
                    .spec
                    .equation(name)
                    .ok_or_else(|| SimError::UndefinedProcess(name.clone()))?;
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(eval_expr(a, env)?);
                }
                let frame = (name.clone(), values.clone());
                if self.unfolding.contains(&frame) || self.unfolding.len() >= MAX_UNFOLD {
                    return Err(SimError::Unguarded(name.clone()));
                }
                let inner = Env::from_bindings(
                    eq.params.iter().map(|(p, _)| p.clone()).zip(values),
                );
                let body = eq.body.clone();
                self.unfolding.push(frame);
                let result = self.sample_state(&body, &inner, rng);
                self.unfolding.pop();
                result
            }
        }
    }

    fn cached_pmf(
        &mut self,
        var: &str,
        sort: &Sort,
        expr: &crate::ast::DataExpr,
        env: &Env,
    ) -> Result<FinitePmf<Value>, SimError> {
        let mut outer = expr.free_vars();
        outer.remove(var);
        let mut bindings = Vec::with_capacity(outer.len());
        for name in outer {
            bindings.push((name.clone(), env.lookup(&name)?.clone()));
        }
        let key = PmfKey {
            var: var.to_string(),
            sort: sort.clone(),
            expr: expr.clone(),
            bindings,
        };
        if let Some(pmf) = self.pmf_cache.get(&key) {
            return Ok(pmf.clone());
        }
        let pmf = crate::pmf::pmf_from_expr(var, sort, expr, env)
            .map_err(SampleError::from)?;
        self.pmf_cache.insert(key, pmf.clone());
        Ok(pmf)
    }
}

/// Enumerates the enabled transitions of a resolved state term in canonical
/// order, tracking the sequential wrappers around each.
fn collect_transitions(term: &StateTerm, wrappers: &mut Vec<Closure>, out: &mut Vec<Transition>) {
    match term {
        StateTerm::Deadlock | StateTerm::Terminated => {}
        StateTerm::Prefix(label, after) => out.push(Transition {
            label: label.clone(),
            base: after.clone(),
            wrappers: wrappers.clone(),
        }),
        StateTerm::Combine(members) => {
            for member in members {
                collect_transitions(member, wrappers, out);
            }
        }
        StateTerm::SeqTail(inner, continuation) => {
            // Wrappers apply innermost-first when the action fires.
            let mut inner_wrappers = vec![continuation.clone()];
            inner_wrappers.extend(wrappers.iter().cloned());
            collect_transitions(inner, &mut inner_wrappers, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_spec;

    const THROW: &str =
        "act head,tail; proc Throw = dist b:Bool[1/2].((b) -> head <> tail).Throw; init Throw;";

    #[test]
    fn coin_estimate_within_three_sigma() {
        let spec = parse_spec(THROW).unwrap();
        let report = simulate(&spec, &Scheduler::UniformChoice, 100_000, 1, 1).unwrap();
        let est = estimate_action_probability(&report, "head").unwrap();
        let band = 3.0 * 0.5 / (100_000f64).sqrt();
        assert!(
            (est.estimate - 0.5).abs() <= band,
            "head estimate {} outside 0.5 ± {band}",
            est.estimate
        );
        assert!(est.ci_low <= 0.5 && 0.5 <= est.ci_high);
    }

    #[test]
    fn deadlock_never_acts() {
        let spec = parse_spec("act a; init delta;").unwrap();
        let report = simulate(&spec, &Scheduler::UniformChoice, 500, 10, 7).unwrap();
        assert_eq!(report.action_runs["a"], 0);
        let est = estimate_action_probability(&report, "a").unwrap();
        assert_eq!(est.estimate, 0.0);
        assert_eq!(est.ci_low, 0.0);
    }

    #[test]
    fn always_enabled_action_hits_every_run() {
        let spec = parse_spec("act a; proc X = a.X; init X;").unwrap();
        let report = simulate(&spec, &Scheduler::UniformChoice, 200, 3, 9).unwrap();
        assert_eq!(report.action_runs["a"], 200);
        let est = estimate_action_probability(&report, "a").unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.ci_high, 1.0);
    }

    #[test]
    fn reproducible_and_parallelism_independent() {
        let spec = parse_spec(THROW).unwrap();
        let a = simulate(&spec, &Scheduler::UniformChoice, 2_000, 4, 42).unwrap();
        let b = simulate(&spec, &Scheduler::UniformChoice, 2_000, 4, 42).unwrap();
        assert_eq!(a, b);
        let parallel = simulate_with(
            &spec,
            &Scheduler::UniformChoice,
            2_000,
            4,
            42,
            &SimOptions { jobs: 4, record_traces: true },
        )
        .unwrap();
        assert_eq!(a.action_runs, parallel.action_runs);
        // Different seed, different counts (overwhelmingly likely).
        let c = simulate(&spec, &Scheduler::UniformChoice, 2_000, 4, 43).unwrap();
        assert_ne!(a.action_runs, c.action_runs);
    }

    #[test]
    fn fixed_index_scheduler_is_deterministic_per_run() {
        // a.b + a.c: the scheduler decides which branch the `a` commits to.
        let spec = parse_spec("act a, b, c; init a.b.delta + a.c.delta;").unwrap();
        let left = simulate(&spec, &Scheduler::FixedIndex(0), 100, 2, 5).unwrap();
        assert_eq!(left.action_runs["b"], 100);
        assert_eq!(left.action_runs["c"], 0);
        let right = simulate(&spec, &Scheduler::FixedIndex(1), 100, 2, 5).unwrap();
        assert_eq!(right.action_runs["b"], 0);
        assert_eq!(right.action_runs["c"], 100);
        // Out-of-range indices wrap around instead of stalling.
        let wrapped = simulate(&spec, &Scheduler::FixedIndex(2), 100, 2, 5).unwrap();
        assert_eq!(wrapped.action_runs["b"], 100);
    }

    #[test]
    fn unresolved_infinite_sum_names_the_variable() {
        let spec =
            parse_spec("act wait:Real; proc S = sum t:Real.wait(t).S; init S;").unwrap();
        let err = simulate(&spec, &Scheduler::UniformChoice, 10, 2, 1).unwrap_err();
        assert!(matches!(err, SimError::UnresolvedSum(v) if v == "t"));
    }

    #[test]
    fn sum_resolver_drives_infinite_sums() {
        let spec =
            parse_spec("act wait:Real; proc S = sum t:Real.wait(t).S; init S;").unwrap();
        let mut resolvers = BTreeMap::new();
        resolvers.insert("t".to_string(), crate::parser::parse_density("Exp(1)").unwrap());
        let report = simulate(&spec, &Scheduler::SumResolver(resolvers), 200, 3, 11).unwrap();
        assert_eq!(report.action_runs["wait"], 200);
    }

    #[test]
    fn traces_are_recorded_when_asked() {
        let spec = parse_spec(THROW).unwrap();
        let report = simulate_with(
            &spec,
            &Scheduler::UniformChoice,
            10,
            3,
            1,
            &SimOptions { jobs: 1, record_traces: true },
        )
        .unwrap();
        let traces = report.traces.as_ref().unwrap();
        assert_eq!(traces.len(), 10);
        assert!(traces.iter().all(|t| t.len() == 3));
        assert!(traces
            .iter()
            .flatten()
            .all(|l| l.name == "head" || l.name == "tail"));
    }

    #[test]
    fn unknown_action_is_an_error() {
        let spec = parse_spec(THROW).unwrap();
        let report = simulate(&spec, &Scheduler::UniformChoice, 10, 1, 1).unwrap();
        assert!(matches!(
            estimate_action_probability(&report, "flip"),
            Err(SimError::UnknownAction(_))
        ));
    }

    #[test]
    fn wilson_interval_reference_values() {
        // Oracle: independent direct formula evaluation.
        let z: f64 = 1.959963984540054;
        let (n, x) = (100_000u64, 63_000u64);
        let p = x as f64 / n as f64;
        let nf = n as f64;
        let denom = 1.0 + z * z / nf;
        let center = (p + z * z / (2.0 * nf)) / denom;
        let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
        let (lo, hi) = wilson_interval(x, n);
        assert!((lo - (center - half)).abs() < 1e-12);
        assert!((hi - (center + half)).abs() < 1e-12);
        // Frozen from the oracle: ~[0.627, 0.633].
        assert!((lo - 0.627005).abs() < 5e-6, "lo = {lo}");
        assert!((hi - 0.632985).abs() < 5e-6, "hi = {hi}");

        assert_eq!(wilson_interval(0, 1000).0, 0.0);
        assert_eq!(wilson_interval(1000, 1000).1, 1.0);
    }
}
