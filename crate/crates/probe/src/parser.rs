//! Recursive descent parser for the specification language.
//!
//! Grammar (whitespace-insensitive, `%` line comments):
//!
//! ```text
//! spec    := { actdecl | procdecl } initdecl
//! actdecl := "act" name {"," name} [":" sort {"#" sort}] ";"
//! procdecl:= "proc" Name ["(" param {"," param} ")"] "=" proc ";"
//! initdecl:= "init" proc ";"
//! proc    := term { "+" term }
//! term    := factor { "." factor }
//! factor  := "delta" | action | procref | "(" proc ")"
//!          | "sum" name ":" sort "." factor
//!          | "dist" name ":" sort "[" density "]" "." factor
//!          | "(" expr ")" "->" factor [ "<>" factor ]
//! sort    := "Bool" | "Nat" | "Int" | "Real" | "[" int ".." int "]"
//! density := expr | "Uniform(" e "," e ")" | "Exp(" e ")"
//!          | "NormalTrunc(" e "," e "," e "," e ")"
//! ```
//!
//! Two passes follow the syntactic parse: leaf applications are resolved to
//! actions or process references, and generalised sums over `Nat` guarded by
//! a top-level upper bound (`n < k`, `n <= k`, conjunctions of those) are
//! narrowed to finite ranges.

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::ast::{
    ActionDecl, BinOp, DataExpr, DensitySpec, ProcEq, ProcExpr, Sort, Spec, UnOp,
};
use crate::lexer::{tokenize, Tok, Token};

/// A parse failure with its source position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(line: u32, col: u32, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::at(line, col, message)
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            other => Err(self.error(format!("expected {what}, found {other}"))),
        }
    }

    // ---- declarations ----

    fn parse_spec(&mut self) -> Result<Spec, ParseError> {
        let mut actions = Vec::new();
        let mut equations = Vec::new();
        loop {
            match self.peek() {
                Tok::Act => {
                    self.bump();
                    self.parse_actdecl(&mut actions)?;
                }
                Tok::Proc => {
                    self.bump();
                    equations.push(self.parse_procdecl()?);
                }
                Tok::Init => break,
                _ => {
                    return Err(self.error(format!(
                        "expected `act`, `proc` or `init`, found {}",
                        self.peek()
                    )))
                }
            }
        }
        self.expect(Tok::Init)?;
        let init = self.parse_proc()?;
        self.expect(Tok::Semi)?;
        if self.peek() != &Tok::Eof {
            return Err(self.error(format!(
                "expected end of input after `init`, found {}",
                self.peek()
            )));
        }
        Ok(Spec { actions, equations, init })
    }

    fn parse_actdecl(&mut self, actions: &mut Vec<ActionDecl>) -> Result<(), ParseError> {
        let mut names = vec![self.ident("action name")?];
        while self.eat(&Tok::Comma) {
            names.push(self.ident("action name")?);
        }
        let mut sorts = Vec::new();
        if self.eat(&Tok::Colon) {
            sorts.push(self.parse_sort()?);
            while self.eat(&Tok::Hash) {
                sorts.push(self.parse_sort()?);
            }
        }
        self.expect(Tok::Semi)?;
        for name in names {
            actions.push(ActionDecl { name, sorts: sorts.clone() });
        }
        Ok(())
    }

    fn parse_procdecl(&mut self) -> Result<ProcEq, ParseError> {
        let name = self.ident("process name")?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                let p = self.ident("parameter name")?;
                self.expect(Tok::Colon)?;
                let s = self.parse_sort()?;
                params.push((p, s));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::Eq)?;
        let body = self.parse_proc()?;
        self.expect(Tok::Semi)?;
        Ok(ProcEq { name, params, body })
    }

    fn parse_sort(&mut self) -> Result<Sort, ParseError> {
        match self.peek().clone() {
            Tok::SortBool => {
                self.bump();
                Ok(Sort::Bool)
            }
            Tok::SortNat => {
                self.bump();
                Ok(Sort::Nat)
            }
            Tok::SortInt => {
                self.bump();
                Ok(Sort::Int)
            }
            Tok::SortReal => {
                self.bump();
                Ok(Sort::Real)
            }
            Tok::LBracket => {
                self.bump();
                let lo = self.parse_range_bound()?;
                self.expect(Tok::DotDot)?;
                let hi = self.parse_range_bound()?;
                self.expect(Tok::RBracket)?;
                if lo > hi {
                    return Err(self.error(format!("empty range [{lo}..{hi}]")));
                }
                Ok(Sort::Range(lo, hi))
            }
            Tok::Ident(name) => Err(self.error(format!("unknown sort name `{name}`"))),
            other => Err(self.error(format!("expected a sort, found {other}"))),
        }
    }

    fn parse_range_bound(&mut self) -> Result<i64, ParseError> {
        let negative = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                let v = n
                    .to_i64()
                    .ok_or_else(|| self.error("range bound out of 64-bit range"))?;
                Ok(if negative { -v } else { v })
            }
            other => Err(self.error(format!("expected an integer range bound, found {other}"))),
        }
    }

    // ---- processes ----

    fn parse_proc(&mut self) -> Result<ProcExpr, ParseError> {
        let mut p = self.parse_term()?;
        while self.eat(&Tok::Plus) {
            let q = self.parse_term()?;
            p = ProcExpr::alt(p, q);
        }
        Ok(p)
    }

    fn parse_term(&mut self) -> Result<ProcExpr, ParseError> {
        let mut p = self.parse_factor()?;
        while self.eat(&Tok::Dot) {
            let q = self.parse_factor()?;
            p = ProcExpr::seq(p, q);
        }
        Ok(p)
    }

    fn parse_factor(&mut self) -> Result<ProcExpr, ParseError> {
        match self.peek().clone() {
            Tok::Delta => {
                self.bump();
                Ok(ProcExpr::Delta)
            }
            Tok::Sum => {
                self.bump();
                let v = self.ident("sum variable")?;
                self.expect(Tok::Colon)?;
                let sort = self.parse_sort()?;
                self.expect(Tok::Dot)?;
                let body = self.parse_factor()?;
                Ok(ProcExpr::Sum(v, sort, Box::new(body)))
            }
            Tok::Dist => {
                self.bump();
                let v = self.ident("dist variable")?;
                self.expect(Tok::Colon)?;
                let sort = self.parse_sort()?;
                self.expect(Tok::LBracket)?;
                let density = self.parse_density()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Dot)?;
                let body = self.parse_factor()?;
                Ok(ProcExpr::Dist(v, sort, density, Box::new(body)))
            }
            Tok::Ident(name) => {
                self.bump();
                let args = self.parse_arg_list()?;
                // Provisionally an action; resolved against the equations
                // after the whole spec is read.
                Ok(ProcExpr::Action(name, args))
            }
            Tok::LParen => {
                // `(expr) -> ...` is a condition, `(proc)` is grouping; decide
                // by attempting the expression path and rewinding on failure.
                let start = self.pos;
                self.bump();
                if let Ok(cond) = self.parse_expr() {
                    if self.eat(&Tok::RParen) && self.eat(&Tok::Arrow) {
                        let then = self.parse_factor()?;
                        let els = if self.eat(&Tok::Diamond) {
                            self.parse_factor()?
                        } else {
                            ProcExpr::Delta
                        };
                        return Ok(ProcExpr::cond(cond, then, els));
                    }
                }
                self.pos = start;
                self.bump();
                let p = self.parse_proc()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            other => Err(self.error(format!("expected a process expression, found {other}"))),
        }
    }

    fn parse_arg_list(&mut self) -> Result<Vec<DataExpr>, ParseError> {
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.parse_expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(args)
    }

    fn parse_density(&mut self) -> Result<DensitySpec, ParseError> {
        // The named families are recognised by name + `(` in this position.
        if let Tok::Ident(name) = self.peek() {
            let kind = name.as_str();
            if matches!(kind, "Uniform" | "Exp" | "NormalTrunc") && self.peek_at(1) == &Tok::LParen
            {
                let kind = kind.to_string();
                self.bump();
                self.bump();
                let mut params = vec![self.parse_expr()?];
                while self.eat(&Tok::Comma) {
                    params.push(self.parse_expr()?);
                }
                self.expect(Tok::RParen)?;
                let arity_err = |p: &Parser, want: usize, got: usize| {
                    p.error(format!(
                        "malformed distribution constructor: {kind} takes {want} parameter(s), got {got}"
                    ))
                };
                return match (kind.as_str(), params.len()) {
                    ("Uniform", 2) => {
                        let hi = params.pop().unwrap();
                        let lo = params.pop().unwrap();
                        Ok(DensitySpec::Uniform(lo, hi))
                    }
                    ("Exp", 1) => Ok(DensitySpec::Exponential(params.pop().unwrap())),
                    ("NormalTrunc", 4) => {
                        let hi = params.pop().unwrap();
                        let lo = params.pop().unwrap();
                        let sigma = params.pop().unwrap();
                        let mu = params.pop().unwrap();
                        Ok(DensitySpec::NormalTrunc(mu, sigma, lo, hi))
                    }
                    ("Uniform", n) => Err(arity_err(self, 2, n)),
                    ("Exp", n) => Err(arity_err(self, 1, n)),
                    (_, n) => Err(arity_err(self, 4, n)),
                };
            }
        }
        Ok(DensitySpec::PmfExpr(self.parse_expr()?))
    }

    // ---- data expressions ----

    fn parse_expr(&mut self) -> Result<DataExpr, ParseError> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> Result<DataExpr, ParseError> {
        let mut e = self.parse_and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.parse_and()?;
            e = DataExpr::binary(BinOp::Or, e, rhs);
        }
        Ok(e)
    }

    fn parse_and(&mut self) -> Result<DataExpr, ParseError> {
        let mut e = self.parse_cmp()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.parse_cmp()?;
            e = DataExpr::binary(BinOp::And, e, rhs);
        }
        Ok(e)
    }

    fn parse_cmp(&mut self) -> Result<DataExpr, ParseError> {
        let lhs = self.parse_add()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.parse_add()?;
        Ok(DataExpr::binary(op, lhs, rhs))
    }

    fn parse_add(&mut self) -> Result<DataExpr, ParseError> {
        let mut e = self.parse_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_mul()?;
            e = DataExpr::binary(op, e, rhs);
        }
        Ok(e)
    }

    fn parse_mul(&mut self) -> Result<DataExpr, ParseError> {
        let mut e = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_unary()?;
            e = DataExpr::binary(op, e, rhs);
        }
        Ok(e)
    }

    fn parse_unary(&mut self) -> Result<DataExpr, ParseError> {
        if self.eat(&Tok::Minus) {
            let operand = self.parse_unary()?;
            // Fold negation into literals so `-5` round-trips structurally.
            return Ok(match operand {
                DataExpr::IntLit(n) => DataExpr::IntLit(-n),
                DataExpr::RealLit(x) => DataExpr::RealLit((-x.0).into()),
                other => DataExpr::Unary(UnOp::Neg, Box::new(other)),
            });
        }
        if self.eat(&Tok::Bang) {
            let operand = self.parse_unary()?;
            return Ok(DataExpr::Unary(UnOp::Not, Box::new(operand)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<DataExpr, ParseError> {
        let base = self.parse_atom()?;
        if self.eat(&Tok::Caret) {
            let exp = self.parse_unary()?;
            return Ok(DataExpr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<DataExpr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(DataExpr::IntLit(n))
            }
            Tok::Real(x) => {
                self.bump();
                Ok(DataExpr::RealLit(x.into()))
            }
            Tok::True => {
                self.bump();
                Ok(DataExpr::BoolLit(true))
            }
            Tok::False => {
                self.bump();
                Ok(DataExpr::BoolLit(false))
            }
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen)?;
                let c = self.parse_expr()?;
                self.expect(Tok::Comma)?;
                let x = self.parse_expr()?;
                self.expect(Tok::Comma)?;
                let y = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                Ok(DataExpr::If(Box::new(c), Box::new(x), Box::new(y)))
            }
            Tok::Ident(v) => {
                self.bump();
                Ok(DataExpr::Var(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(self.error(format!("expected an expression, found {other}"))),
        }
    }
}

/// Parses a full specification.
///
/// Besides the syntactic parse this resolves leaf applications to actions or
/// process references and narrows `sum` binders over `Nat` that are guarded
/// by a literal upper bound to finite ranges.
pub fn parse_spec(text: &str) -> Result<Spec, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut spec = parser.parse_spec()?;

    let proc_names: Vec<String> = spec.equations.iter().map(|e| e.name.clone()).collect();
    for eq in &mut spec.equations {
        resolve_refs(&mut eq.body, &proc_names);
        narrow_sums(&mut eq.body);
    }
    resolve_refs(&mut spec.init, &proc_names);
    narrow_sums(&mut spec.init);
    Ok(spec)
}

/// Parses a density specification on its own (used for scheduler resolvers).
pub fn parse_density(text: &str) -> Result<DensitySpec, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let density = parser.parse_density()?;
    if parser.peek() != &Tok::Eof {
        return Err(parser.error(format!(
            "expected end of density, found {}",
            parser.peek()
        )));
    }
    Ok(density)
}

/// Rewrites provisional `Action` leaves whose name has a process equation
/// into process references.
fn resolve_refs(p: &mut ProcExpr, proc_names: &[String]) {
    match p {
        ProcExpr::Action(name, args) => {
            if proc_names.iter().any(|n| n == name) {
                let name = std::mem::take(name);
                let args = std::mem::take(args);
                *p = ProcExpr::ProcRef(name, args);
            }
        }
        ProcExpr::Seq(a, b) | ProcExpr::Alt(a, b) => {
            resolve_refs(a, proc_names);
            resolve_refs(b, proc_names);
        }
        ProcExpr::Cond(_, a, b) => {
            resolve_refs(a, proc_names);
            resolve_refs(b, proc_names);
        }
        ProcExpr::Sum(_, _, body) | ProcExpr::Dist(_, _, _, body) => {
            resolve_refs(body, proc_names);
        }
        ProcExpr::Delta | ProcExpr::Terminated | ProcExpr::ProcRef(_, _) => {}
    }
}

/// Narrows `sum n:Nat. (c) -> p` to `sum n:[0..k]. (c) -> p` when `c` is a
/// conjunction of literal upper bounds on `n` and the else-branch is `delta`.
/// `Int` sums are left alone: an upper bound does not bound them from below.
fn narrow_sums(p: &mut ProcExpr) {
    match p {
        ProcExpr::Sum(v, sort, body) => {
            narrow_sums(body);
            if *sort == Sort::Nat {
                if let ProcExpr::Cond(c, _, els) = body.as_ref() {
                    if **els == ProcExpr::Delta {
                        if let Some(hi) = upper_bound(c, v) {
                            if hi >= 0 {
                                *sort = Sort::Range(0, hi);
                            }
                        }
                    }
                }
            }
        }
        ProcExpr::Seq(a, b) | ProcExpr::Alt(a, b) => {
            narrow_sums(a);
            narrow_sums(b);
        }
        ProcExpr::Cond(_, a, b) => {
            narrow_sums(a);
            narrow_sums(b);
        }
        ProcExpr::Dist(_, _, _, body) => narrow_sums(body),
        ProcExpr::Delta | ProcExpr::Terminated | ProcExpr::Action(_, _) | ProcExpr::ProcRef(_, _) => {}
    }
}

/// The tightest upper bound a conjunction of `v < k` / `v <= k` literals puts
/// on `v`, if every conjunct is of that shape.
fn upper_bound(cond: &DataExpr, v: &str) -> Option<i64> {
    match cond {
        DataExpr::Binary(BinOp::And, a, b) => {
            let x = upper_bound(a, v)?;
            let y = upper_bound(b, v)?;
            Some(x.min(y))
        }
        DataExpr::Binary(op @ (BinOp::Lt | BinOp::Le), lhs, rhs) => {
            let (DataExpr::Var(name), DataExpr::IntLit(k)) = (lhs.as_ref(), rhs.as_ref()) else {
                return None;
            };
            if name != v {
                return None;
            }
            let k = k.to_i64()?;
            Some(match op {
                BinOp::Lt => k - 1,
                _ => k,
            })
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::DataExpr as E;
    use num_bigint::BigInt;

    #[test]
    fn throw_spec_shape() {
        let spec = parse_spec(
            "act head,tail; proc Throw = dist b:Bool[1/2].((b) -> head <> tail).Throw; init Throw;",
        )
        .unwrap();
        assert_eq!(spec.actions.len(), 2);
        let body = &spec.equation("Throw").unwrap().body;
        let ProcExpr::Seq(first, rest) = body else {
            panic!("expected sequence, got {body:?}");
        };
        let ProcExpr::Dist(v, sort, density, inner) = first.as_ref() else {
            panic!("expected dist, got {first:?}");
        };
        assert_eq!(v, "b");
        assert_eq!(*sort, Sort::Bool);
        assert_eq!(
            *density,
            DensitySpec::PmfExpr(E::binary(BinOp::Div, E::int(1), E::int(2)))
        );
        assert!(matches!(inner.as_ref(), ProcExpr::Cond(_, _, _)));
        assert_eq!(**rest, ProcExpr::ProcRef("Throw".into(), vec![]));
    }

    #[test]
    fn minimal_delta_spec() {
        let spec = parse_spec("init delta;").unwrap();
        assert!(spec.actions.is_empty());
        assert!(spec.equations.is_empty());
        assert_eq!(spec.init, ProcExpr::Delta);
    }

    #[test]
    fn sum_over_range_with_action() {
        let spec = parse_spec("act read:Nat; init sum n:[0..99].read(n).delta;").unwrap();
        let ProcExpr::Seq(sum, delta) = &spec.init else {
            panic!("expected sequence");
        };
        assert_eq!(**delta, ProcExpr::Delta);
        let ProcExpr::Sum(v, sort, body) = sum.as_ref() else {
            panic!("expected sum");
        };
        assert_eq!(v, "n");
        assert_eq!(*sort, Sort::Range(0, 99));
        assert_eq!(**body, ProcExpr::Action("read".into(), vec![E::var("n")]));
    }

    #[test]
    fn cond_default_law() {
        let a = parse_spec("act a; init (true) -> a;").unwrap();
        let b = parse_spec("act a; init (true) -> a <> delta;").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn narrowing_rewrites_bounded_nat_sum() {
        let spec = parse_spec("act read:Nat; init sum n:Nat.(n < 100) -> read(n);").unwrap();
        let ProcExpr::Sum(_, sort, body) = &spec.init else {
            panic!("expected sum");
        };
        assert_eq!(*sort, Sort::Range(0, 99));
        assert!(matches!(body.as_ref(), ProcExpr::Cond(_, _, _)));

        let spec =
            parse_spec("act read:Nat; init sum n:Nat.(n <= 9 && n < 100) -> read(n);").unwrap();
        let ProcExpr::Sum(_, sort, _) = &spec.init else {
            panic!("expected sum");
        };
        assert_eq!(*sort, Sort::Range(0, 9));
    }

    #[test]
    fn narrowing_leaves_other_sums_alone() {
        // No usable bound: stay Nat.
        let spec = parse_spec("act read:Nat; init sum n:Nat.(n > 2) -> read(n);").unwrap();
        assert!(matches!(&spec.init, ProcExpr::Sum(_, Sort::Nat, _)));
        // Int is never narrowed.
        let spec = parse_spec("act read:Int; init sum n:Int.(n < 5) -> read(n);").unwrap();
        assert!(matches!(&spec.init, ProcExpr::Sum(_, Sort::Int, _)));
        // Explicit non-delta else: stay Nat.
        let spec =
            parse_spec("act read:Nat; act b; init sum n:Nat.(n < 5) -> read(n) <> b;").unwrap();
        assert!(matches!(&spec.init, ProcExpr::Sum(_, Sort::Nat, _)));
    }

    #[test]
    fn reference_before_declaration_resolves() {
        let spec = parse_spec("act a; proc X = a.Y; proc Y = a.X; init X;").unwrap();
        let ProcExpr::Seq(_, y) = &spec.equation("X").unwrap().body else {
            panic!()
        };
        assert_eq!(**y, ProcExpr::ProcRef("Y".into(), vec![]));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_spec("init delta").unwrap_err();
        assert!(err.to_string().contains("1:11"), "{err}");
        let err = parse_spec("act a: Foo; init delta;").unwrap_err();
        assert!(err.message.contains("unknown sort name `Foo`"));
        let err = parse_spec("init dist x:Real[Uniform(1)].delta;").unwrap_err();
        assert!(err.message.contains("malformed distribution constructor"));
    }

    #[test]
    fn trailing_tokens_rejected() {
        assert!(parse_spec("init delta; act a;").is_err());
    }

    #[test]
    fn parenthesized_alternative_vs_condition() {
        let grouped = parse_spec("act a, b; init (a + b).delta;").unwrap();
        assert!(matches!(&grouped.init, ProcExpr::Seq(p, _) if matches!(p.as_ref(), ProcExpr::Alt(_, _))));
        let cond = parse_spec("act a; init (1 + 2 = 3) -> a;").unwrap();
        assert!(matches!(&cond.init, ProcExpr::Cond(_, _, _)));
    }

    #[test]
    fn binder_extends_to_one_factor() {
        // `sum` binds only the next factor; the `.delta` is sequenced after it.
        let spec = parse_spec("act a; init sum b:Bool.a.delta;").unwrap();
        assert!(matches!(&spec.init, ProcExpr::Seq(s, _) if matches!(s.as_ref(), ProcExpr::Sum(_, _, _))));
        // `+` binds even looser.
        let spec = parse_spec("act a, b; init sum c:Bool.a + b;").unwrap();
        assert!(matches!(&spec.init, ProcExpr::Alt(_, _)));
    }

    #[test]
    fn density_families_parse() {
        let spec = parse_spec("act w:Real; init dist t:Real[Exp(2)].w(t);").unwrap();
        let ProcExpr::Dist(_, _, DensitySpec::Exponential(_), _) = &spec.init else {
            panic!("expected exponential density");
        };
        let spec =
            parse_spec("act w:Real; init dist t:Real[NormalTrunc(5, 2, 0, 100)].w(t);").unwrap();
        assert!(matches!(
            &spec.init,
            ProcExpr::Dist(_, _, DensitySpec::NormalTrunc(_, _, _, _), _)
        ));
    }

    #[test]
    fn negative_literals_fold() {
        let spec = parse_spec("act a:Int; init a(-5);").unwrap();
        let ProcExpr::Action(_, args) = &spec.init else { panic!() };
        assert_eq!(args[0], E::IntLit(BigInt::from(-5)));
        // But `-x^2` keeps the unary node around the power.
        let spec = parse_spec("act a:Int; init a(-5^2);").unwrap();
        let ProcExpr::Action(_, args) = &spec.init else { panic!() };
        assert!(matches!(&args[0], DataExpr::Unary(UnOp::Neg, _)));
    }
}
