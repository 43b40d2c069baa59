//! Exact-or-float probabilities and normalized finite probability mass
//! functions.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::ast::{DataExpr, Sort};
use crate::data::{enumerate_sort, eval_expr, Env, EvalError, Value};

/// Absolute tolerance for float probability comparisons and normalization
/// checks. Rational probabilities are always compared exactly.
pub const MASS_TOL: f64 = 1e-9;

/// A probability: exact rational while every input is exact, float once a
/// float enters the computation.
#[derive(Debug, Clone)]
pub enum Prob {
    Rat(BigRational),
    Float(f64),
}

impl Prob {
    pub fn zero() -> Self {
        Prob::Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Prob::Rat(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Prob::Rat(r) => r.is_zero(),
            Prob::Float(x) => *x == 0.0,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Prob::Rat(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Prob::Float(x) => *x,
        }
    }

    pub fn mul(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Rat(a), Prob::Rat(b)) => Prob::Rat(a * b),
            _ => Prob::Float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn add(&self, other: &Prob) -> Prob {
        match (self, other) {
            (Prob::Rat(a), Prob::Rat(b)) => Prob::Rat(a + b),
            _ => Prob::Float(self.to_f64() + other.to_f64()),
        }
    }

    /// Equality up to [`MASS_TOL`] when a float is involved, exact otherwise.
    pub fn approx_eq(&self, other: &Prob) -> bool {
        match (self, other) {
            (Prob::Rat(a), Prob::Rat(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= MASS_TOL,
        }
    }

    /// Total order that treats probabilities within [`MASS_TOL`] as equal
    /// when a float is involved. Used to group bisimulation signatures.
    pub fn cmp_with_tol(&self, other: &Prob) -> Ordering {
        match (self, other) {
            (Prob::Rat(a), Prob::Rat(b)) => a.cmp(b),
            _ => {
                let (x, y) = (self.to_f64(), other.to_f64());
                if (x - y).abs() <= MASS_TOL {
                    Ordering::Equal
                } else {
                    x.total_cmp(&y)
                }
            }
        }
    }
}

// Structural identity (used for interning probabilistic states): exact for
// rationals, bit-exact for floats. Probabilities are never NaN.
impl PartialEq for Prob {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Prob::Rat(a), Prob::Rat(b)) => a == b,
            (Prob::Float(a), Prob::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Prob {}

impl Hash for Prob {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Prob::Rat(r) => {
                0u8.hash(state);
                r.hash(state);
            }
            Prob::Float(x) => {
                1u8.hash(state);
                x.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Rat(r) => write!(f, "{r}"),
            Prob::Float(x) => write!(f, "{x:?}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PmfError {
    #[error("not normalized: probability mass sums to {sum}, expected 1")]
    NotNormalized { sum: String },
    #[error("negative mass {mass} at outcome {outcome}")]
    NegativeMass { outcome: String, mass: String },
    #[error("probability {mass} above 1 at outcome {outcome}")]
    MassAboveOne { outcome: String, mass: String },
}

/// A normalized finite probability mass function with pairwise-distinct
/// outcomes, sorted by outcome. Zero-mass entries are dropped on
/// construction, duplicate outcomes are merged, and the total mass is
/// checked: exactly 1 for rational masses, within [`MASS_TOL`] otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinitePmf<T> {
    entries: Vec<(T, Prob)>,
}

impl<T: Ord + Clone + fmt::Debug> FinitePmf<T> {
    pub fn dirac(outcome: T) -> Self {
        FinitePmf { entries: vec![(outcome, Prob::one())] }
    }

    pub fn from_entries(
        entries: impl IntoIterator<Item = (T, Prob)>,
    ) -> Result<Self, PmfError> {
        let mut merged: Vec<(T, Prob)> = Vec::new();
        let mut sorted: Vec<(T, Prob)> = entries.into_iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (outcome, mass) in sorted {
            match merged.last_mut() {
                Some((last, acc)) if *last == outcome => *acc = acc.add(&mass),
                _ => merged.push((outcome, mass)),
            }
        }

        let mut total = Prob::zero();
        for (outcome, mass) in &merged {
            let negative = match mass {
                Prob::Rat(r) => r.is_negative(),
                Prob::Float(x) => *x < 0.0,
            };
            if negative {
                return Err(PmfError::NegativeMass {
                    outcome: format!("{outcome:?}"),
                    mass: mass.to_string(),
                });
            }
            let above_one = match mass {
                Prob::Rat(r) => r > &BigRational::one(),
                Prob::Float(x) => *x > 1.0 + MASS_TOL,
            };
            if above_one {
                return Err(PmfError::MassAboveOne {
                    outcome: format!("{outcome:?}"),
                    mass: mass.to_string(),
                });
            }
            total = total.add(mass);
        }
        let normalized = match &total {
            Prob::Rat(r) => r.is_one(),
            Prob::Float(x) => (x - 1.0).abs() <= MASS_TOL,
        };
        if !normalized {
            return Err(PmfError::NotNormalized { sum: total.to_string() });
        }
        merged.retain(|(_, mass)| !mass.is_zero());
        Ok(FinitePmf { entries: merged })
    }

    pub fn entries(&self) -> &[(T, Prob)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &(T, Prob)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> Prob {
        self.entries
            .iter()
            .fold(Prob::zero(), |acc, (_, p)| acc.add(p))
    }

    /// Re-checks the construction invariant; the acceptance suite sweeps
    /// every PMF the pipelines produce through this.
    pub fn is_normalized(&self) -> bool {
        match self.total() {
            Prob::Rat(r) => r.is_one(),
            Prob::Float(x) => (x - 1.0).abs() <= MASS_TOL,
        }
    }

    /// Maps outcomes, merging any that collide. Mass is preserved, so the
    /// result stays normalized.
    pub fn map<U: Ord + Clone + fmt::Debug>(
        &self,
        mut f: impl FnMut(&T) -> U,
    ) -> Result<FinitePmf<U>, PmfError> {
        FinitePmf::from_entries(self.entries.iter().map(|(t, p)| (f(t), p.clone())))
    }
}

/// Evaluates a mass expression at every element of a finite sort and builds
/// the corresponding PMF over values.
pub fn pmf_from_expr(
    var: &str,
    sort: &Sort,
    expr: &DataExpr,
    env: &Env,
) -> Result<FinitePmf<Value>, DistError> {
    let values = enumerate_sort(sort)?;
    let mut entries = Vec::with_capacity(values.len());
    for value in values {
        let mass = eval_expr(expr, &env.bind(var, value.clone()))?;
        let prob = match mass {
            Value::Int(n) => Prob::Rat(BigRational::from_integer(n)),
            Value::Rat(r) => Prob::Rat(r),
            Value::Real(x) => Prob::Float(x),
            Value::Bool(_) => {
                return Err(DistError::NonNumericMass(value.to_string()));
            }
        };
        entries.push((value, prob));
    }
    Ok(FinitePmf::from_entries(entries)?)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Pmf(#[from] PmfError),
    #[error("probability mass at {0} is not a number")]
    NonNumericMass(String),
}
