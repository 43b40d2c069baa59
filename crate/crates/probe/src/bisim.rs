//! Probabilistic strong bisimulation on finite PLTSs by signature-based
//! partition refinement.
//!
//! Two nondeterministic states are bisimilar iff they agree on the
//! terminated/unexplored status and, for every action, offer the same set of
//! lifted probability vectors over blocks. Refinement iterates until stable;
//! rational masses compare exactly, float masses within [`MASS_TOL`].
//!
//! [`MASS_TOL`]: crate::pmf::MASS_TOL

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::plts::{NdState, Plts, ProbId};
use crate::pmf::{FinitePmf, Prob};
use crate::semantics::ActionLabel;

/// A stable partition of the nd-states of a PLTS. Blocks are numbered by
/// their first member in state order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub block_of: Vec<usize>,
    pub block_count: usize,
}

/// Outcome of an equivalence check between two systems.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Equivalent,
    Distinguished { block: usize, mass_a: Prob, mass_b: Prob },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equivalent => write!(f, "EQUIVALENT"),
            Verdict::Distinguished { block, mass_a, mass_b } => {
                write!(f, "DISTINGUISHED block={block} massA={mass_a} massB={mass_b}")
            }
        }
    }
}

// One transition's observation: the action and the lifted mass per block.
type Signature = Vec<(ActionLabel, Vec<(usize, Prob)>)>;

fn lift(pmf: &FinitePmf<usize>, block_of: &[usize]) -> Vec<(usize, Prob)> {
    let mut by_block: Vec<(usize, Prob)> = Vec::new();
    for (nd, mass) in pmf.iter() {
        let block = block_of[*nd];
        match by_block.iter_mut().find(|(b, _)| *b == block) {
            Some((_, acc)) => *acc = acc.add(mass),
            None => by_block.push((block, mass.clone())),
        }
    }
    by_block.sort_by(|a, b| a.0.cmp(&b.0));
    by_block
}

fn cmp_lifted(a: &[(usize, Prob)], b: &[(usize, Prob)]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for ((ba, pa), (bb, pb)) in a.iter().zip(b) {
            let ord = ba.cmp(bb).then_with(|| pa.cmp_with_tol(pb));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    })
}

fn cmp_signature(a: &Signature, b: &Signature) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for ((la, va), (lb, vb)) in a.iter().zip(b) {
            let ord = la.cmp(lb).then_with(|| cmp_lifted(va, vb));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    })
}

fn signature(state: &NdState, prob_states: &[FinitePmf<usize>], block_of: &[usize]) -> Signature {
    let mut sig: Signature = state
        .transitions
        .iter()
        .map(|(label, pid)| (label.clone(), lift(&prob_states[*pid], block_of)))
        .collect();
    // Signatures are sets: order and multiplicity of transitions must not
    // distinguish states.
    sig.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| cmp_lifted(&a.1, &b.1)));
    sig.dedup_by(|a, b| a.0 == b.0 && cmp_lifted(&a.1, &b.1) == Ordering::Equal);
    sig
}

/// Renumbers an arbitrary block assignment so blocks appear in first-member
/// order; returns the canonical partition.
fn canonicalize(raw: Vec<usize>) -> Partition {
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut block_of = Vec::with_capacity(raw.len());
    for old in raw {
        let next = remap.len();
        let id = *remap.entry(old).or_insert(next);
        block_of.push(id);
    }
    Partition { block_count: remap.len(), block_of }
}

/// The coarsest probabilistic strong bisimulation partition of a PLTS.
pub fn refine(plts: &Plts) -> Partition {
    let n = plts.nd_states.len();
    // Seed blocks by observable status; deadlock separates from action
    // states at the first refinement step via its empty signature.
    let seed: Vec<usize> = plts
        .nd_states
        .iter()
        .map(|s| match (s.terminated, s.unexplored) {
            (false, false) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (true, true) => 3,
        })
        .collect();
    let mut partition = canonicalize(seed);

    loop {
        let signatures: Vec<Signature> = plts
            .nd_states
            .iter()
            .map(|s| signature(s, &plts.prob_states, &partition.block_of))
            .collect();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            partition.block_of[a]
                .cmp(&partition.block_of[b])
                .then_with(|| cmp_signature(&signatures[a], &signatures[b]))
        });

        let mut ids = vec![usize::MAX; n];
        let mut next = 0usize;
        for (i, &state) in order.iter().enumerate() {
            if i == 0 {
                ids[state] = 0;
                next = 1;
                continue;
            }
            let prev = order[i - 1];
            let same = partition.block_of[prev] == partition.block_of[state]
                && cmp_signature(&signatures[prev], &signatures[state]) == Ordering::Equal;
            if same {
                ids[state] = ids[prev];
            } else {
                ids[state] = next;
                next += 1;
            }
        }
        let refined = canonicalize(ids);
        if refined == partition {
            return partition;
        }
        partition = refined;
    }
}

/// Minimizes a PLTS to its bisimulation quotient.
///
/// Distributions are lifted to blocks, duplicate transitions merge, and the
/// partition used is returned alongside the quotient.
pub fn minimize(plts: &Plts) -> (Plts, Partition) {
    let partition = refine(plts);
    let representatives: Vec<usize> = {
        let mut reps = vec![usize::MAX; partition.block_count];
        for (state, &block) in partition.block_of.iter().enumerate() {
            if reps[block] == usize::MAX {
                reps[block] = state;
            }
        }
        reps
    };

    let mut prob_states: Vec<FinitePmf<usize>> = Vec::new();
    let mut prob_ids: HashMap<FinitePmf<usize>, ProbId> = HashMap::new();
    let mut intern = |pmf: FinitePmf<usize>, prob_states: &mut Vec<FinitePmf<usize>>| -> ProbId {
        if let Some(&id) = prob_ids.get(&pmf) {
            return id;
        }
        let id = prob_states.len();
        prob_ids.insert(pmf.clone(), id);
        prob_states.push(pmf);
        id
    };

    let lift_pmf = |pmf: &FinitePmf<usize>| -> FinitePmf<usize> {
        pmf.map(|nd| partition.block_of[*nd])
            .expect("lifting preserves total mass")
    };

    let initial = intern(lift_pmf(&plts.prob_states[plts.initial]), &mut prob_states);

    let mut nd_states = Vec::with_capacity(partition.block_count);
    for (block, &rep) in representatives.iter().enumerate() {
        let source = &plts.nd_states[rep];
        let mut transitions: Vec<(ActionLabel, ProbId)> = source
            .transitions
            .iter()
            .map(|(label, pid)| {
                (label.clone(), intern(lift_pmf(&plts.prob_states[*pid]), &mut prob_states))
            })
            .collect();
        transitions.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        transitions.dedup();
        nd_states.push(NdState {
            fingerprint: block as u64,
            transitions,
            terminated: source.terminated,
            unexplored: source.unexplored,
        });
    }

    let truncated = nd_states.iter().any(|s| s.unexplored);
    (Plts { prob_states, nd_states, initial, truncated }, partition)
}

/// Decides probabilistic strong bisimilarity of two systems by refining
/// their disjoint union and comparing the lifted initial distributions
/// block by block. The witness is the first block with differing mass.
pub fn equivalent(a: &Plts, b: &Plts) -> Verdict {
    let union = disjoint_union(a, b);
    let partition = refine(&union);

    let lift_initial = |pmf: &FinitePmf<usize>, nd_offset: usize| -> Vec<Prob> {
        let mut masses = vec![Prob::zero(); partition.block_count];
        for (nd, mass) in pmf.iter() {
            let block = partition.block_of[nd + nd_offset];
            masses[block] = masses[block].add(mass);
        }
        masses
    };

    let mass_a = lift_initial(&a.prob_states[a.initial], 0);
    let mass_b = lift_initial(&b.prob_states[b.initial], a.nd_states.len());
    for block in 0..partition.block_count {
        if !mass_a[block].approx_eq(&mass_b[block]) {
            return Verdict::Distinguished {
                block,
                mass_a: mass_a[block].clone(),
                mass_b: mass_b[block].clone(),
            };
        }
    }
    Verdict::Equivalent
}

/// Side-by-side union of two systems; `b`'s ids are shifted.
pub fn disjoint_union(a: &Plts, b: &Plts) -> Plts {
    let nd_offset = a.nd_states.len();
    let prob_offset = a.prob_states.len();
    let mut prob_states = a.prob_states.clone();
    for pmf in &b.prob_states {
        prob_states.push(
            pmf.map(|nd| nd + nd_offset)
                .expect("shifting ids preserves mass"),
        );
    }
    let mut nd_states = a.nd_states.clone();
    for state in &b.nd_states {
        nd_states.push(NdState {
            fingerprint: state.fingerprint,
            transitions: state
                .transitions
                .iter()
                .map(|(label, pid)| (label.clone(), pid + prob_offset))
                .collect(),
            terminated: state.terminated,
            unexplored: state.unexplored,
        });
    }
    Plts {
        prob_states,
        nd_states,
        initial: a.initial,
        truncated: a.truncated || b.truncated,
    }
}
