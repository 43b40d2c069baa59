//! The alternating probabilistic labelled transition system: probabilistic
//! states are distributions over nondeterministic states; nondeterministic
//! states carry action transitions back to probabilistic states.
//!
//! [`explore`] reifies the behavioural semantics as a finite graph by BFS
//! with structural deduplication. Exploration limits are not errors: states
//! cut off by a limit are flagged `unexplored`, and both bisimulation and
//! trace operations treat that flag as a distinct absorbing observation, so
//! truncation never silently equates systems.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::ast::Spec;
use crate::data::Env;
use crate::pmf::{FinitePmf, PmfError, Prob};
use crate::semantics::{
    behavioural_distribution_with, enabled_transitions_with, fingerprint, ActionLabel,
    SemanticsError, SemanticsOptions, StateTerm,
};

pub type ProbId = usize;
pub type NdId = usize;

/// A nondeterministic state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdState {
    /// Structural fingerprint of the originating state term.
    pub fingerprint: u64,
    pub transitions: Vec<(ActionLabel, ProbId)>,
    pub terminated: bool,
    /// Cut off by an exploration limit before its transitions were computed.
    pub unexplored: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plts {
    pub prob_states: Vec<FinitePmf<NdId>>,
    pub nd_states: Vec<NdState>,
    pub initial: ProbId,
    pub truncated: bool,
}

impl Plts {
    pub fn transition_count(&self) -> usize {
        self.nd_states.iter().map(|s| s.transitions.len()).sum()
    }
}

/// Bounds on exploration. `max_depth` counts action steps from the initial
/// distribution.
#[derive(Debug, Clone)]
pub struct ExploreLimits {
    pub max_nd_states: usize,
    pub max_depth: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits { max_nd_states: 10_000, max_depth: 1_000 }
    }
}

/// Explores a specification breadth-first into a PLTS.
///
/// Deterministic: the same spec and limits produce the same system, ids and
/// order included.
pub fn explore(spec: &Spec, limits: &ExploreLimits) -> Result<Plts, SemanticsError> {
    explore_with(spec, limits, &SemanticsOptions::default())
}

pub fn explore_with(
    spec: &Spec,
    limits: &ExploreLimits,
    options: &SemanticsOptions,
) -> Result<Plts, SemanticsError> {
    let mut terms: Vec<StateTerm> = Vec::new();
    let mut depths: Vec<usize> = Vec::new();
    let mut term_ids: HashMap<StateTerm, NdId> = HashMap::new();
    let mut prob_states: Vec<FinitePmf<NdId>> = Vec::new();
    let mut prob_ids: HashMap<FinitePmf<NdId>, ProbId> = HashMap::new();
    let mut queue: VecDeque<NdId> = VecDeque::new();
    let mut transitions: Vec<Vec<(ActionLabel, ProbId)>> = Vec::new();
    let mut unexplored: Vec<bool> = Vec::new();

    let mut intern_term = |term: &StateTerm,
                           depth: usize,
                           terms: &mut Vec<StateTerm>,
                           depths: &mut Vec<usize>,
                           transitions: &mut Vec<Vec<(ActionLabel, ProbId)>>,
                           unexplored: &mut Vec<bool>,
                           queue: &mut VecDeque<NdId>|
     -> NdId {
        if let Some(&id) = term_ids.get(term) {
            return id;
        }
        let id = terms.len();
        term_ids.insert(term.clone(), id);
        terms.push(term.clone());
        depths.push(depth);
        transitions.push(Vec::new());
        unexplored.push(false);
        queue.push_back(id);
        id
    };

    let mut intern_pmf = |pmf: FinitePmf<NdId>, prob_states: &mut Vec<FinitePmf<NdId>>| -> ProbId {
        if let Some(&id) = prob_ids.get(&pmf) {
            return id;
        }
        let id = prob_states.len();
        prob_ids.insert(pmf.clone(), id);
        prob_states.push(pmf);
        id
    };

    let initial_dist = behavioural_distribution_with(&spec.init, &Env::new(), spec, options)?;
    let initial_pmf = initial_dist
        .map(|term| {
            intern_term(
                term,
                0,
                &mut terms,
                &mut depths,
                &mut transitions,
                &mut unexplored,
                &mut queue,
            )
        })
        .map_err(crate::pmf::DistError::from)?;
    let initial = intern_pmf(initial_pmf, &mut prob_states);

    while let Some(id) = queue.pop_front() {
        let term = terms[id].clone();
        if matches!(term, StateTerm::Deadlock | StateTerm::Terminated) {
            continue;
        }
        if depths[id] >= limits.max_depth || terms.len() >= limits.max_nd_states {
            unexplored[id] = true;
            continue;
        }
        let next_depth = depths[id] + 1;
        for (label, dist) in enabled_transitions_with(&term, spec, options)? {
            let pmf = dist
                .map(|t| {
                    intern_term(
                        t,
                        next_depth,
                        &mut terms,
                        &mut depths,
                        &mut transitions,
                        &mut unexplored,
                        &mut queue,
                    )
                })
                .map_err(crate::pmf::DistError::from)?;
            let pid = intern_pmf(pmf, &mut prob_states);
            transitions[id].push((label, pid));
        }
    }

    let truncated = unexplored.iter().any(|u| *u);
    let nd_states = terms
        .iter()
        .enumerate()
        .map(|(i, term)| NdState {
            fingerprint: fingerprint(term),
            transitions: transitions[i].clone(),
            terminated: *term == StateTerm::Terminated,
            unexplored: unexplored[i],
        })
        .collect();

    Ok(Plts { prob_states, nd_states, initial, truncated })
}

/// One step of a trace: an observed action, or the mark left when a run
/// enters a state the exploration never expanded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TraceStep {
    Label(ActionLabel),
    Unexplored,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStep::Label(l) => write!(f, "{l}"),
            TraceStep::Unexplored => write!(f, "<unexplored>"),
        }
    }
}

pub fn format_trace(trace: &[TraceStep]) -> String {
    if trace.is_empty() {
        "(empty)".to_string()
    } else {
        trace
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("nondeterministic system: nd-state {0} has multiple transitions")]
    Nondeterministic(NdId),
}

/// The distribution over traces of length at most `len` of a deterministic
/// PLTS (at most one transition per nd-state). Runs that stop early
/// (deadlock or termination) contribute their full shorter trace; reaching
/// an unexplored state appends the [`TraceStep::Unexplored`] mark. The
/// returned masses sum to 1.
pub fn bounded_trace_distribution(
    plts: &Plts,
    len: usize,
) -> Result<BTreeMap<Vec<TraceStep>, Prob>, TraceError> {
    for (id, state) in plts.nd_states.iter().enumerate() {
        if state.transitions.len() > 1 {
            return Err(TraceError::Nondeterministic(id));
        }
    }
    let mut out: BTreeMap<Vec<TraceStep>, Prob> = BTreeMap::new();
    let mut record = |trace: Vec<TraceStep>, mass: Prob| {
        out.entry(trace)
            .and_modify(|m| *m = m.add(&mass))
            .or_insert(mass);
    };

    // Depth capped at `len`, so plain recursion is fine.
    fn go(
        plts: &Plts,
        pid: ProbId,
        prefix: &mut Vec<TraceStep>,
        mass: Prob,
        len: usize,
        record: &mut impl FnMut(Vec<TraceStep>, Prob),
    ) {
        for (nd, weight) in plts.prob_states[pid].iter() {
            let mass = mass.mul(weight);
            let state = &plts.nd_states[*nd];
            if prefix.len() == len {
                record(prefix.clone(), mass);
            } else if state.unexplored {
                prefix.push(TraceStep::Unexplored);
                record(prefix.clone(), mass);
                prefix.pop();
            } else if let Some((label, next)) = state.transitions.first() {
                prefix.push(TraceStep::Label(label.clone()));
                go(plts, *next, prefix, mass, len, record);
                prefix.pop();
            } else {
                record(prefix.clone(), mass);
            }
        }
    }

    go(plts, plts.initial, &mut Vec::new(), Prob::one(), len, &mut record);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------
//
//   pdes (<initial>, <#prob-states>, <#nd-states>)
//   P <pid> <ndid> <probability>      one line per distribution entry
//   T <ndid> "<label>" <pid>          one line per transition
//   F <ndid> terminated|unexplored    one line per flag
//
// Probabilities print as exact fractions (`1/2`, `1`) for rational masses
// and as round-trip decimals (`0.5`) for float masses.

/// Serializes a PLTS bit-exactly.
pub fn write_plts(plts: &Plts) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    writeln!(
        out,
        "pdes ({}, {}, {})",
        plts.initial,
        plts.prob_states.len(),
        plts.nd_states.len()
    )
    .unwrap();
    for (pid, pmf) in plts.prob_states.iter().enumerate() {
        for (nd, mass) in pmf.iter() {
            writeln!(out, "P {pid} {nd} {mass}").unwrap();
        }
    }
    for (nd, state) in plts.nd_states.iter().enumerate() {
        for (label, pid) in &state.transitions {
            writeln!(out, "T {nd} \"{label}\" {pid}").unwrap();
        }
    }
    for (nd, state) in plts.nd_states.iter().enumerate() {
        if state.terminated {
            writeln!(out, "F {nd} terminated").unwrap();
        }
        if state.unexplored {
            writeln!(out, "F {nd} unexplored").unwrap();
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PltsParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    BadDistribution {
        line: usize,
        #[source]
        source: PmfError,
    },
}

impl PltsParseError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        PltsParseError::Malformed { line, message: message.into() }
    }
}

/// Parses the text format written by [`write_plts`].
pub fn parse_plts(text: &str) -> Result<Plts, PltsParseError> {
    let mut lines = text.lines().enumerate();
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| PltsParseError::at(1, "empty input"))?;
    let header = header.trim();
    let body = header
        .strip_prefix("pdes (")
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| PltsParseError::at(lineno + 1, "expected `pdes (i, p, n)` header"))?;
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(PltsParseError::at(lineno + 1, "header needs three fields"));
    }
    let parse_num = |s: &str, line: usize| -> Result<usize, PltsParseError> {
        s.parse()
            .map_err(|_| PltsParseError::at(line, format!("invalid number `{s}`")))
    };
    let initial = parse_num(parts[0], lineno + 1)?;
    let n_prob = parse_num(parts[1], lineno + 1)?;
    let n_nd = parse_num(parts[2], lineno + 1)?;

    let mut entries: Vec<Vec<(NdId, Prob)>> = vec![Vec::new(); n_prob];
    let mut transitions: Vec<Vec<(ActionLabel, ProbId)>> = vec![Vec::new(); n_nd];
    let mut terminated = vec![false; n_nd];
    let mut unexplored = vec![false; n_nd];

    for (idx, raw) in lines {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() {
            continue;
        }
        let (kind, rest) = text
            .split_once(' ')
            .ok_or_else(|| PltsParseError::at(line, "expected `P`, `T` or `F` record"))?;
        match kind {
            "P" => {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(PltsParseError::at(line, "P record needs `pid ndid mass`"));
                }
                let pid = parse_num(fields[0], line)?;
                let nd = parse_num(fields[1], line)?;
                if pid >= n_prob || nd >= n_nd {
                    return Err(PltsParseError::at(line, "P record id out of bounds"));
                }
                entries[pid].push((nd, parse_prob(fields[2], line)?));
            }
            "T" => {
                let rest = rest.trim();
                let (nd_text, rest) = rest
                    .split_once(' ')
                    .ok_or_else(|| PltsParseError::at(line, "T record needs `ndid \"label\" pid`"))?;
                let nd = parse_num(nd_text, line)?;
                let rest = rest.trim();
                if !rest.starts_with('"') {
                    return Err(PltsParseError::at(line, "transition label must be quoted"));
                }
                let end = rest[1..]
                    .rfind('"')
                    .ok_or_else(|| PltsParseError::at(line, "unterminated transition label"))?;
                let label_text = &rest[1..1 + end];
                let pid = parse_num(rest[2 + end..].trim(), line)?;
                if nd >= n_nd || pid >= n_prob {
                    return Err(PltsParseError::at(line, "T record id out of bounds"));
                }
                transitions[nd].push((parse_label(label_text, line)?, pid));
            }
            "F" => {
                let (nd_text, flag) = rest
                    .trim()
                    .split_once(' ')
                    .ok_or_else(|| PltsParseError::at(line, "F record needs `ndid flag`"))?;
                let nd = parse_num(nd_text, line)?;
                if nd >= n_nd {
                    return Err(PltsParseError::at(line, "F record id out of bounds"));
                }
                match flag.trim() {
                    "terminated" => terminated[nd] = true,
                    "unexplored" => unexplored[nd] = true,
                    other => {
                        return Err(PltsParseError::at(line, format!("unknown flag `{other}`")));
                    }
                }
            }
            other => {
                return Err(PltsParseError::at(line, format!("unknown record `{other}`")));
            }
        }
    }

    if initial >= n_prob {
        return Err(PltsParseError::at(1, "initial prob-state out of bounds"));
    }
    let mut prob_states = Vec::with_capacity(n_prob);
    for (pid, pmf_entries) in entries.into_iter().enumerate() {
        let pmf = FinitePmf::from_entries(pmf_entries)
            .map_err(|source| PltsParseError::BadDistribution { line: pid + 1, source })?;
        prob_states.push(pmf);
    }
    let nd_states: Vec<NdState> = transitions
        .into_iter()
        .enumerate()
        .map(|(i, transitions)| NdState {
            fingerprint: i as u64,
            transitions,
            terminated: terminated[i],
            unexplored: unexplored[i],
        })
        .collect();
    for (i, state) in nd_states.iter().enumerate() {
        if (state.terminated || state.unexplored) && !state.transitions.is_empty() {
            return Err(PltsParseError::at(
                1,
                format!("nd-state {i} is flagged absorbing but has transitions"),
            ));
        }
    }
    let truncated = nd_states.iter().any(|s| s.unexplored);
    Ok(Plts { prob_states, nd_states, initial, truncated })
}

fn parse_prob(text: &str, line: usize) -> Result<Prob, PltsParseError> {
    if text.contains('.') || text.contains('e') || text.contains('E') {
        let x: f64 = text
            .parse()
            .map_err(|_| PltsParseError::at(line, format!("invalid probability `{text}`")))?;
        return Ok(Prob::Float(x));
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let parse_int = |s: &str| -> Result<BigInt, PltsParseError> {
        s.parse()
            .map_err(|_| PltsParseError::at(line, format!("invalid probability `{text}`")))
    };
    let den = parse_int(den)?;
    if den == BigInt::from(0) {
        return Err(PltsParseError::at(line, "zero denominator"));
    }
    Ok(Prob::Rat(BigRational::new(parse_int(num)?, den)))
}

/// Parses a printed action label `name` or `name(v1, v2)` back into a label.
/// Data arguments reuse the value syntax: booleans, integers, fractions and
/// decimals.
fn parse_label(text: &str, line: usize) -> Result<ActionLabel, PltsParseError> {
    let text = text.trim();
    let Some(open) = text.find('(') else {
        return Ok(ActionLabel { name: text.to_string(), args: vec![] });
    };
    let name = text[..open].to_string();
    let inner = text[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| PltsParseError::at(line, format!("malformed label `{text}`")))?;
    let mut args = Vec::new();
    for piece in inner.split(',') {
        let piece = piece.trim();
        args.push(parse_value(piece, line)?);
    }
    Ok(ActionLabel { name, args })
}

fn parse_value(text: &str, line: usize) -> Result<crate::data::Value, PltsParseError> {
    use crate::data::Value;
    match text {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    if text.contains('.') || text.contains('e') || text.contains('E') {
        if let Ok(x) = text.parse::<f64>() {
            return Ok(Value::Real(x));
        }
    }
    if let Some((n, d)) = text.split_once('/') {
        if let (Ok(n), Ok(d)) = (n.parse::<BigInt>(), d.parse::<BigInt>()) {
            if d != BigInt::from(0) {
                return Ok(Value::rat(BigRational::new(n, d)));
            }
        }
    }
    if let Ok(n) = text.parse::<BigInt>() {
        return Ok(Value::Int(n));
    }
    Err(PltsParseError::at(line, format!("malformed value `{text}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_spec;

    fn ratio(n: i64, d: i64) -> Prob {
        Prob::Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    fn throw() -> Spec {
        parse_spec(
            "act head,tail; proc Throw = dist b:Bool[1/2].((b) -> head <> tail).Throw; init Throw;",
        )
        .unwrap()
    }

    fn throw_sequence() -> Spec {
        parse_spec(concat!(
            "act head, tail;\n",
            "proc ThrowSequence = dist b:Bool[1/2].((b) -> (head.Heads(1)) <> (tail.ThrowSequence));\n",
            "proc Heads(n: Nat) = dist b:Bool[1/2].((b) -> (head.Heads(n+1)) <> (tail.ThrowSequence));\n",
            "init ThrowSequence;"
        ))
        .unwrap()
    }

    #[test]
    fn throw_is_the_two_state_loop() {
        let plts = explore(&throw(), &ExploreLimits::default()).unwrap();
        assert_eq!(plts.prob_states.len(), 1);
        assert_eq!(plts.nd_states.len(), 2);
        assert_eq!(plts.transition_count(), 2);
        assert!(!plts.truncated);
        assert_eq!(plts.initial, 0);
        for (_, mass) in plts.prob_states[0].iter() {
            assert_eq!(*mass, ratio(1, 2));
        }
        let mut labels: Vec<String> = plts
            .nd_states
            .iter()
            .flat_map(|s| s.transitions.iter().map(|(l, pid)| {
                assert_eq!(*pid, 0, "every action loops back to sigma");
                l.to_string()
            }))
            .collect();
        labels.sort();
        assert_eq!(labels, ["head", "tail"]);
    }

    #[test]
    fn deadlock_spec_is_a_single_silent_state() {
        let plts = explore(&parse_spec("init delta;").unwrap(), &ExploreLimits::default()).unwrap();
        assert_eq!(plts.prob_states.len(), 1);
        assert_eq!(plts.nd_states.len(), 1);
        assert_eq!(plts.transition_count(), 0);
        assert!(!plts.nd_states[0].terminated);
    }

    #[test]
    fn exploration_is_deterministic() {
        let spec = parse_spec("act a; init sum i:[1..3].dist j:[1..3][1/3].(i = j) -> a;").unwrap();
        let a = explore(&spec, &ExploreLimits::default()).unwrap();
        let b = explore(&spec, &ExploreLimits::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn throw_sequence_truncates_with_frontier_states() {
        let limits = ExploreLimits { max_nd_states: 10_000, max_depth: 10 };
        let plts = explore(&throw_sequence(), &limits).unwrap();
        assert!(plts.truncated);
        assert!(plts.nd_states.iter().any(|s| s.unexplored));
        // Unexplored states keep no transitions.
        for s in &plts.nd_states {
            if s.unexplored {
                assert!(s.transitions.is_empty());
            }
        }
    }

    #[test]
    fn throw_sequence_mass_law() {
        // P(head^k . tail) = (1/2)^(k+1) in the depth-10 truncation.
        let limits = ExploreLimits { max_nd_states: 10_000, max_depth: 10 };
        let plts = explore(&throw_sequence(), &limits).unwrap();
        for k in 0..=9usize {
            let traces = bounded_trace_distribution(&plts, k + 1).unwrap();
            let mut want: Vec<TraceStep> = Vec::new();
            for _ in 0..k {
                want.push(TraceStep::Label(ActionLabel { name: "head".into(), args: vec![] }));
            }
            want.push(TraceStep::Label(ActionLabel { name: "tail".into(), args: vec![] }));
            let mass = traces.get(&want).unwrap_or_else(|| {
                panic!("missing trace head^{k}.tail in {traces:?}")
            });
            assert_eq!(*mass, ratio(1, 2i64.pow(k as u32 + 1)));
        }
    }

    #[test]
    fn throw_trace_distribution_length_two() {
        let plts = explore(&throw(), &ExploreLimits::default()).unwrap();
        let traces = bounded_trace_distribution(&plts, 2).unwrap();
        assert_eq!(traces.len(), 4);
        for (trace, mass) in &traces {
            assert_eq!(trace.len(), 2);
            assert_eq!(*mass, ratio(1, 4));
        }
    }

    #[test]
    fn delta_trace_distribution_is_empty_trace() {
        let plts = explore(&parse_spec("init delta;").unwrap(), &ExploreLimits::default()).unwrap();
        for len in [0, 1, 5] {
            let traces = bounded_trace_distribution(&plts, len).unwrap();
            assert_eq!(traces.len(), 1);
            assert_eq!(traces.get(&Vec::new()), Some(&Prob::one()));
        }
    }

    #[test]
    fn trace_masses_sum_to_one() {
        let limits = ExploreLimits { max_nd_states: 10_000, max_depth: 6 };
        let plts = explore(&throw_sequence(), &limits).unwrap();
        for len in [0, 3, 8, 12] {
            let traces = bounded_trace_distribution(&plts, len).unwrap();
            let total = traces.values().fold(Prob::zero(), |acc, m| acc.add(m));
            assert_eq!(total, Prob::one(), "len {len}");
        }
    }

    #[test]
    fn nondeterministic_systems_are_rejected_for_traces() {
        let spec = parse_spec("act a, b; init a.delta + b.delta;").unwrap();
        let plts = explore(&spec, &ExploreLimits::default()).unwrap();
        assert!(matches!(
            bounded_trace_distribution(&plts, 3),
            Err(TraceError::Nondeterministic(_))
        ));
    }

    #[test]
    fn text_format_round_trips() {
        for spec in [
            throw(),
            parse_spec("init delta;").unwrap(),
            parse_spec("act a; init sum i:[1..3].dist j:[1..3][1/3].(i = j) -> a;").unwrap(),
        ] {
            let plts = explore(&spec, &ExploreLimits::default()).unwrap();
            let text = write_plts(&plts);
            let loaded = parse_plts(&text).unwrap();
            assert_eq!(loaded.prob_states, plts.prob_states);
            assert_eq!(loaded.initial, plts.initial);
            assert_eq!(loaded.truncated, plts.truncated);
            assert_eq!(loaded.nd_states.len(), plts.nd_states.len());
            for (a, b) in loaded.nd_states.iter().zip(&plts.nd_states) {
                assert_eq!(a.transitions, b.transitions);
                assert_eq!(a.terminated, b.terminated);
                assert_eq!(a.unexplored, b.unexplored);
            }
            // And the serialization itself is stable.
            assert_eq!(write_plts(&loaded), text);
        }
    }

    #[test]
    fn truncated_format_round_trips() {
        let limits = ExploreLimits { max_nd_states: 10_000, max_depth: 4 };
        let plts = explore(&throw_sequence(), &limits).unwrap();
        let text = write_plts(&plts);
        let loaded = parse_plts(&text).unwrap();
        assert!(loaded.truncated);
        assert_eq!(write_plts(&loaded), text);
    }

    #[test]
    fn labels_with_arguments_round_trip() {
        let spec = parse_spec("act read:Nat; init sum n:[0..3].read(n).delta;").unwrap();
        let plts = explore(&spec, &ExploreLimits::default()).unwrap();
        let text = write_plts(&plts);
        let loaded = parse_plts(&text).unwrap();
        assert_eq!(write_plts(&loaded), text);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(parse_plts("").is_err());
        assert!(parse_plts("pdes (0, 1)").is_err());
        assert!(parse_plts("pdes (0, 1, 1)\nP 0 0 1\nQ 0").is_err());
        assert!(parse_plts("pdes (0, 1, 1)\nP 0 5 1").is_err());
        // Distribution that does not sum to one.
        assert!(matches!(
            parse_plts("pdes (0, 1, 2)\nP 0 0 1/3\nP 0 1 1/3"),
            Err(PltsParseError::BadDistribution { .. })
        ));
        // Terminated state with a transition.
        assert!(parse_plts("pdes (0, 1, 1)\nP 0 0 1\nT 0 \"a\" 0\nF 0 terminated").is_err());
    }
}
