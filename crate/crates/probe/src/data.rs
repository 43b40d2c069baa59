//! Runtime values, variable environments and evaluation of data expressions.
//!
//! Arithmetic is exact (arbitrary-precision integers and rationals) as long
//! as every leaf is an integer literal or a value derived from one; a float
//! literal anywhere forces 64-bit float evaluation of the whole operation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::ast::{BinOp, DataExpr, Sort, UnOp};

/// A runtime value.
#[derive(Debug, Clone)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Rat(BigRational),
    Real(f64),
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Int(BigInt::from(n))
    }

    /// Builds a rational value, canonicalizing integral ratios to `Int` so
    /// that equal quantities compare equal structurally.
    pub fn rat(r: BigRational) -> Self {
        if r.is_integer() {
            Value::Int(r.to_integer())
        } else {
            Value::Rat(r)
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, Value::Bool(_))
    }

    pub fn to_f64(&self) -> Option<f64> {
        match self {
            Value::Bool(_) => None,
            Value::Int(n) => n.to_f64(),
            Value::Rat(r) => r.to_f64(),
            Value::Real(x) => Some(*x),
        }
    }

    fn variant_rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Int(_) => 1,
            Value::Rat(_) => 2,
            Value::Real(_) => 3,
        }
    }
}

// Structural equality: `Real` compares by total order on bits, so state
// terms containing floats can live in ordered containers. Semantic (numeric)
// comparison is `compare_values`.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Rat(a), Value::Rat(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.total_cmp(b) == Ordering::Equal,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Rat(a), Value::Rat(b)) => a.cmp(b),
            (Value::Real(a), Value::Real(b)) => a.total_cmp(b),
            _ => self.variant_rank().cmp(&other.variant_rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.variant_rank().hash(state);
        match self {
            Value::Bool(b) => b.hash(state),
            Value::Int(n) => n.hash(state),
            Value::Rat(r) => r.hash(state),
            Value::Real(x) => x.to_bits().hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Rat(r) => write!(f, "{r}"),
            Value::Real(x) => write!(f, "{x:?}"),
        }
    }
}

/// Evaluation failure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent must be a non-negative integer, got {0}")]
    BadExponent(String),
    #[error("exponent too large")]
    ExponentTooLarge,
    #[error("cannot enumerate infinite sort {0}")]
    InfiniteSort(Sort),
}

/// A variable environment. Lookup of an unbound name is an error, never a
/// default value.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Env(BTreeMap<String, Value>);

impl Env {
    pub fn new() -> Self {
        Env(BTreeMap::new())
    }

    pub fn from_bindings(bindings: impl IntoIterator<Item = (String, Value)>) -> Self {
        Env(bindings.into_iter().collect())
    }

    pub fn bind(&self, name: &str, value: Value) -> Env {
        let mut map = self.0.clone();
        map.insert(name.to_string(), value);
        Env(map)
    }

    pub fn lookup(&self, name: &str) -> Result<&Value, EvalError> {
        self.0
            .get(name)
            .ok_or_else(|| EvalError::UnboundVariable(name.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The environment restricted to the given names.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> Env {
        Env(self
            .0
            .iter()
            .filter(|(k, _)| keep.contains(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect())
    }
}

/// Evaluates a data expression in an environment.
pub fn eval_expr(expr: &DataExpr, env: &Env) -> Result<Value, EvalError> {
    match expr {
        DataExpr::BoolLit(b) => Ok(Value::Bool(*b)),
        DataExpr::IntLit(n) => Ok(Value::Int(n.clone())),
        DataExpr::RealLit(x) => Ok(Value::Real(x.0)),
        DataExpr::Var(v) => env.lookup(v).cloned(),
        DataExpr::Unary(op, e) => {
            let v = eval_expr(e, env)?;
            match op {
                UnOp::Neg => match v {
                    Value::Int(n) => Ok(Value::Int(-n)),
                    Value::Rat(r) => Ok(Value::Rat(-r)),
                    Value::Real(x) => Ok(Value::Real(-x)),
                    Value::Bool(_) => Err(EvalError::SortMismatch("cannot negate a boolean".into())),
                },
                UnOp::Not => match v {
                    Value::Bool(b) => Ok(Value::Bool(!b)),
                    other => Err(EvalError::SortMismatch(format!("`!` applied to {other}"))),
                },
            }
        }
        DataExpr::Binary(op, a, b) => eval_binary(*op, a, b, env),
        DataExpr::If(c, x, y) => {
            let cond = eval_expr(c, env)?;
            match cond.as_bool() {
                Some(true) => eval_expr(x, env),
                Some(false) => eval_expr(y, env),
                None => Err(EvalError::SortMismatch(format!(
                    "if-condition must be boolean, got {cond}"
                ))),
            }
        }
    }
}

fn eval_binary(op: BinOp, a: &DataExpr, b: &DataExpr, env: &Env) -> Result<Value, EvalError> {
    // Short-circuit booleans so a dead branch cannot raise.
    if matches!(op, BinOp::And | BinOp::Or) {
        let lhs = expect_bool(eval_expr(a, env)?)?;
        return match (op, lhs) {
            (BinOp::And, false) => Ok(Value::Bool(false)),
            (BinOp::Or, true) => Ok(Value::Bool(true)),
            _ => Ok(Value::Bool(expect_bool(eval_expr(b, env)?)?)),
        };
    }

    let lhs = eval_expr(a, env)?;
    let rhs = eval_expr(b, env)?;
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => arith(op, lhs, rhs),
        BinOp::Pow => pow(lhs, rhs),
        BinOp::Eq => Ok(Value::Bool(values_equal(&lhs, &rhs)?)),
        BinOp::Ne => Ok(Value::Bool(!values_equal(&lhs, &rhs)?)),
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let ord = compare_values(&lhs, &rhs)?;
            Ok(Value::Bool(match op {
                BinOp::Lt => ord == Ordering::Less,
                BinOp::Le => ord != Ordering::Greater,
                BinOp::Gt => ord == Ordering::Greater,
                BinOp::Ge => ord != Ordering::Less,
                _ => unreachable!(),
            }))
        }
        BinOp::And | BinOp::Or => unreachable!("handled above"),
    }
}

fn expect_bool(v: Value) -> Result<bool, EvalError> {
    v.as_bool()
        .ok_or_else(|| EvalError::SortMismatch(format!("expected a boolean, got {v}")))
}

enum NumPair {
    Int(BigInt, BigInt),
    Rat(BigRational, BigRational),
    Real(f64, f64),
}

/// Promotes two numeric values to a common representation: any float makes
/// the pair float, otherwise ints are widened to rationals as needed.
fn promote(a: Value, b: Value) -> Result<NumPair, EvalError> {
    match (a, b) {
        (Value::Bool(x), y) => Err(EvalError::SortMismatch(format!(
            "arithmetic on boolean {x} and {y}"
        ))),
        (x, Value::Bool(y)) => Err(EvalError::SortMismatch(format!(
            "arithmetic on {x} and boolean {y}"
        ))),
        (Value::Int(x), Value::Int(y)) => Ok(NumPair::Int(x, y)),
        (Value::Real(x), y) => {
            let yf = y.to_f64().expect("numeric by the match above");
            Ok(NumPair::Real(x, yf))
        }
        (x, Value::Real(y)) => {
            let xf = x.to_f64().expect("numeric by the match above");
            Ok(NumPair::Real(xf, y))
        }
        (Value::Rat(x), Value::Rat(y)) => Ok(NumPair::Rat(x, y)),
        (Value::Rat(x), Value::Int(y)) => Ok(NumPair::Rat(x, BigRational::from_integer(y))),
        (Value::Int(x), Value::Rat(y)) => Ok(NumPair::Rat(BigRational::from_integer(x), y)),
    }
}

fn arith(op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
    match promote(a, b)? {
        NumPair::Int(x, y) => match op {
            BinOp::Add => Ok(Value::Int(x + y)),
            BinOp::Sub => Ok(Value::Int(x - y)),
            BinOp::Mul => Ok(Value::Int(x * y)),
            BinOp::Div => {
                if y.is_zero() {
                    Err(EvalError::DivisionByZero)
                } else {
                    Ok(Value::rat(BigRational::new(x, y)))
                }
            }
            _ => unreachable!(),
        },
        NumPair::Rat(x, y) => match op {
            BinOp::Add => Ok(Value::rat(x + y)),
            BinOp::Sub => Ok(Value::rat(x - y)),
            BinOp::Mul => Ok(Value::rat(x * y)),
            BinOp::Div => {
                if y.is_zero() {
                    Err(EvalError::DivisionByZero)
                } else {
                    Ok(Value::rat(x / y))
                }
            }
            _ => unreachable!(),
        },
        NumPair::Real(x, y) => match op {
            BinOp::Add => Ok(Value::Real(x + y)),
            BinOp::Sub => Ok(Value::Real(x - y)),
            BinOp::Mul => Ok(Value::Real(x * y)),
            BinOp::Div => {
                if y == 0.0 {
                    Err(EvalError::DivisionByZero)
                } else {
                    Ok(Value::Real(x / y))
                }
            }
            _ => unreachable!(),
        },
    }
}

/// `base ^ exponent` with a non-negative integer exponent.
fn pow(base: Value, exponent: Value) -> Result<Value, EvalError> {
    let exp = match &exponent {
        Value::Int(n) if !n.is_negative() => n
            .to_u32()
            .ok_or(EvalError::ExponentTooLarge)?,
        other => return Err(EvalError::BadExponent(other.to_string())),
    };
    match base {
        Value::Int(n) => Ok(Value::Int(Pow::pow(n, exp))),
        Value::Rat(r) => Ok(Value::rat(BigRational::new(
            Pow::pow(r.numer().clone(), exp),
            Pow::pow(r.denom().clone(), exp),
        ))),
        Value::Real(x) => Ok(Value::Real(if exp <= i32::MAX as u32 {
            x.powi(exp as i32)
        } else {
            x.powf(exp as f64)
        })),
        Value::Bool(_) => Err(EvalError::SortMismatch("cannot exponentiate a boolean".into())),
    }
}

/// Numeric (or boolean) equality: `2 = 2/1` holds, `1 = 1.0` holds.
pub fn values_equal(a: &Value, b: &Value) -> Result<bool, EvalError> {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => Ok(x == y),
        (Value::Bool(_), _) | (_, Value::Bool(_)) => Err(EvalError::SortMismatch(format!(
            "cannot compare {a} and {b}"
        ))),
        _ => Ok(compare_values(a, b)? == Ordering::Equal),
    }
}

/// Numeric comparison across representations. Exact when both sides are
/// exact; via f64 when a float is involved.
pub fn compare_values(a: &Value, b: &Value) -> Result<Ordering, EvalError> {
    match promote(a.clone(), b.clone())? {
        NumPair::Int(x, y) => Ok(x.cmp(&y)),
        NumPair::Rat(x, y) => Ok(x.cmp(&y)),
        NumPair::Real(x, y) => x.partial_cmp(&y).ok_or_else(|| {
            EvalError::SortMismatch("incomparable float values".into())
        }),
    }
}

/// Enumerates a finite sort in ascending order.
pub fn enumerate_sort(sort: &Sort) -> Result<Vec<Value>, EvalError> {
    match sort {
        Sort::Bool => Ok(vec![Value::Bool(false), Value::Bool(true)]),
        Sort::Range(lo, hi) => Ok((*lo..=*hi).map(Value::int).collect()),
        infinite => Err(EvalError::InfiniteSort(infinite.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::DataExpr as E;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn half_to_the_k_plus_one() {
        // (1/2)^(k+1) with k = 3 is exactly 1/16.
        let expr = E::binary(
            BinOp::Pow,
            E::binary(BinOp::Div, E::int(1), E::int(2)),
            E::binary(BinOp::Add, E::var("k"), E::int(1)),
        );
        let env = Env::new().bind("k", Value::int(3));
        assert_eq!(eval_expr(&expr, &env).unwrap(), Value::Rat(ratio(1, 16)));
    }

    #[test]
    fn if_selects_branch() {
        let expr = E::If(
            Box::new(E::var("b")),
            Box::new(E::var("p")),
            Box::new(E::binary(BinOp::Sub, E::int(1), E::var("p"))),
        );
        let env = Env::new()
            .bind("b", Value::Bool(true))
            .bind("p", Value::rat(ratio(1, 2)));
        assert_eq!(eval_expr(&expr, &env).unwrap(), Value::Rat(ratio(1, 2)));
    }

    #[test]
    fn comparison_boundary() {
        let expr = E::binary(BinOp::Lt, E::var("n"), E::int(100));
        let at = |n: i64| {
            eval_expr(&expr, &Env::new().bind("n", Value::int(n)))
                .unwrap()
                .as_bool()
                .unwrap()
        };
        assert!(at(99));
        assert!(!at(100));
    }

    #[test]
    fn unbound_variable_is_an_error() {
        assert_eq!(
            eval_expr(&E::var("x"), &Env::new()),
            Err(EvalError::UnboundVariable("x".into()))
        );
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let expr = E::binary(BinOp::Div, E::int(1), E::int(0));
        assert_eq!(eval_expr(&expr, &Env::new()), Err(EvalError::DivisionByZero));
        let expr = E::binary(BinOp::Div, E::RealLit(1.0.into()), E::RealLit(0.0.into()));
        assert_eq!(eval_expr(&expr, &Env::new()), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn negative_exponent_is_an_error() {
        let expr = E::binary(BinOp::Pow, E::int(2), E::Unary(UnOp::Neg, Box::new(E::int(1))));
        assert!(matches!(
            eval_expr(&expr, &Env::new()),
            Err(EvalError::BadExponent(_))
        ));
    }

    #[test]
    fn integral_ratio_canonicalizes_to_int() {
        let expr = E::binary(BinOp::Div, E::int(4), E::int(2));
        assert_eq!(eval_expr(&expr, &Env::new()).unwrap(), Value::int(2));
    }

    #[test]
    fn float_contaminates() {
        let expr = E::binary(BinOp::Add, E::binary(BinOp::Div, E::int(1), E::int(2)), E::RealLit(0.25.into()));
        assert_eq!(eval_expr(&expr, &Env::new()).unwrap(), Value::Real(0.75));
    }

    #[test]
    fn short_circuit_protects_dead_branch() {
        // false && (1/0 > 0) must not divide by zero.
        let bad = E::binary(BinOp::Gt, E::binary(BinOp::Div, E::int(1), E::int(0)), E::int(0));
        let expr = E::binary(BinOp::And, E::BoolLit(false), bad.clone());
        assert_eq!(eval_expr(&expr, &Env::new()).unwrap(), Value::Bool(false));
        let expr = E::binary(BinOp::Or, E::BoolLit(true), bad);
        assert_eq!(eval_expr(&expr, &Env::new()).unwrap(), Value::Bool(true));
    }

    #[test]
    fn mixed_equality() {
        assert!(values_equal(&Value::int(2), &Value::Rat(ratio(2, 1))).unwrap());
        assert!(values_equal(&Value::int(1), &Value::Real(1.0)).unwrap());
        assert!(!values_equal(&Value::int(1), &Value::Real(1.5)).unwrap());
        assert!(values_equal(&Value::Bool(true), &Value::int(1)).is_err());
    }

    #[test]
    fn enumerate_finite_sorts() {
        assert_eq!(
            enumerate_sort(&Sort::Bool).unwrap(),
            vec![Value::Bool(false), Value::Bool(true)]
        );
        assert_eq!(
            enumerate_sort(&Sort::Range(1, 4)).unwrap(),
            vec![Value::int(1), Value::int(2), Value::int(3), Value::int(4)]
        );
        assert_eq!(enumerate_sort(&Sort::Range(1, 4)).unwrap().len(), 4);
        assert!(matches!(
            enumerate_sort(&Sort::Real),
            Err(EvalError::InfiniteSort(Sort::Real))
        ));
        assert!(enumerate_sort(&Sort::Nat).is_err());
        assert!(enumerate_sort(&Sort::Int).is_err());
    }

    // Independent exactness oracle: a minimal evaluator that works in
    // BigRational at every node, with none of the Int/Rat promotion logic.
    fn oracle(expr: &E, env: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        match expr {
            E::IntLit(n) => Some(BigRational::from_integer(n.clone())),
            E::Var(v) => env.get(v).cloned(),
            E::Binary(op, a, b) => {
                let x = oracle(a, env)?;
                let y = oracle(b, env)?;
                match op {
                    BinOp::Add => Some(x + y),
                    BinOp::Sub => Some(x - y),
                    BinOp::Mul => Some(x * y),
                    BinOp::Div => (!y.is_zero()).then(|| x / y),
                    BinOp::Pow => {
                        let e = y.to_integer().to_u32()?;
                        y.is_integer().then(|| {
                            BigRational::new(
                                Pow::pow(x.numer().clone(), e),
                                Pow::pow(x.denom().clone(), e),
                            )
                        })
                    }
                    _ => None,
                }
            }
            _ => None,
        }
    }

    #[test]
    fn exactness_matches_rational_oracle() {
        use crate::rng::RngStream;

        let mut rng = RngStream::new(77, 0);
        for _ in 0..500 {
            let expr = random_rational_expr(&mut rng, 3);
            let mut env = BTreeMap::new();
            env.insert("k".to_string(), ratio(3, 1));
            let expected = oracle(&expr, &env);
            let got = eval_expr(&expr, &Env::new().bind("k", Value::int(3)));
            match (expected, got) {
                (Some(want), Ok(v)) => {
                    let as_rat = match v {
                        Value::Int(n) => BigRational::from_integer(n),
                        Value::Rat(r) => r,
                        other => panic!("rational-only expression produced {other}"),
                    };
                    assert_eq!(as_rat, want);
                }
                (None, Err(_)) => {}
                (want, got) => panic!("oracle {want:?} disagrees with eval {got:?}"),
            }
        }
    }

    fn random_rational_expr(rng: &mut crate::rng::RngStream, depth: usize) -> E {
        if depth == 0 || rng.below(3) == 0 {
            return match rng.below(3) {
                0 => E::int(rng.below(7) as i64),
                1 => E::var("k"),
                _ => E::int(rng.below(4) as i64 + 1),
            };
        }
        let op = match rng.below(5) {
            0 => BinOp::Add,
            1 => BinOp::Sub,
            2 => BinOp::Mul,
            3 => BinOp::Div,
            _ => BinOp::Pow,
        };
        let lhs = random_rational_expr(rng, depth - 1);
        let rhs = if op == BinOp::Pow {
            E::int(rng.below(4) as i64)
        } else {
            random_rational_expr(rng, depth - 1)
        };
        E::binary(op, lhs, rhs)
    }
}
