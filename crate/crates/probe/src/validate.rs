//! Static checks: declarations, scoping, sorts, density constraints and
//! guardedness of recursion. Diagnostics are data; errors gate the semantic
//! operations, warnings do not.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{BinOp, DataExpr, DensitySpec, ProcExpr, Sort, Spec, UnOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into() }
    }

    fn warning(message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Error => write!(f, "error: {}", self.message),
            Severity::Warning => write!(f, "warning: {}", self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// Static sort of an expression: boolean, or numeric within Nat ⊆ Int ⊆ Real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Class {
    Boolean,
    Nat,
    Int,
    Real,
}

impl Class {
    fn of_sort(sort: &Sort) -> Class {
        match sort {
            Sort::Bool => Class::Boolean,
            Sort::Nat => Class::Nat,
            Sort::Int => Class::Int,
            Sort::Real => Class::Real,
            Sort::Range(lo, _) => {
                if *lo >= 0 {
                    Class::Nat
                } else {
                    Class::Int
                }
            }
        }
    }

    fn is_numeric(self) -> bool {
        self != Class::Boolean
    }

    fn join(self, other: Class) -> Option<Class> {
        match (self.is_numeric(), other.is_numeric()) {
            (true, true) => Some(self.max(other)),
            (false, false) => Some(Class::Boolean),
            _ => None,
        }
    }

    fn subsumes(self, sub: Class) -> bool {
        sub == self || (sub.is_numeric() && self.is_numeric() && sub <= self)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Boolean => write!(f, "Bool"),
            Class::Nat => write!(f, "Nat"),
            Class::Int => write!(f, "Int"),
            Class::Real => write!(f, "Real"),
        }
    }
}

struct Checker<'a> {
    spec: &'a Spec,
    scope: Vec<(String, Sort)>,
    diags: Vec<Diagnostic>,
}

/// Checks a specification and returns its diagnostics. The empty list means
/// fully well formed; warnings mark specs that are valid but not finitely
/// explorable.
pub fn validate(spec: &Spec) -> Vec<Diagnostic> {
    let mut checker = Checker { spec, scope: Vec::new(), diags: Vec::new() };
    checker.check_declarations();
    for eq in &spec.equations {
        checker.scope = eq.params.clone();
        checker.check_proc(&eq.body, &eq.name);
        checker.scope.clear();
    }
    checker.check_proc(&spec.init, "init");
    checker.check_guardedness();
    checker.diags
}

impl<'a> Checker<'a> {
    fn error(&mut self, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(message));
    }

    fn check_declarations(&mut self) {
        let spec = self.spec;
        let mut seen = BTreeSet::new();
        for a in &spec.actions {
            if !seen.insert(&a.name) {
                self.error(format!("duplicate action declaration `{}`", a.name));
            }
            for sort in &a.sorts {
                self.check_sort(sort, &a.name);
            }
        }
        let mut seen = BTreeSet::new();
        for eq in &spec.equations {
            if !seen.insert(&eq.name) {
                self.error(format!("duplicate process equation `{}`", eq.name));
            }
            if spec.action(&eq.name).is_some() {
                self.error(format!(
                    "`{}` is declared as both an action and a process",
                    eq.name
                ));
            }
            let mut params = BTreeSet::new();
            for (p, sort) in &eq.params {
                if !params.insert(p) {
                    self.error(format!(
                        "duplicate parameter `{p}` of process `{}`",
                        eq.name
                    ));
                }
                self.check_sort(sort, &eq.name);
            }
        }
    }

    fn check_sort(&mut self, sort: &Sort, owner: &str) {
        if let Sort::Range(lo, hi) = sort {
            if lo > hi {
                self.error(format!("empty range [{lo}..{hi}] in `{owner}`"));
            }
        }
    }

    fn lookup(&self, var: &str) -> Option<&Sort> {
        self.scope.iter().rev().find(|(n, _)| n == var).map(|(_, s)| s)
    }

    /// Infers the class of an expression, reporting at most one diagnostic
    /// per ill-sorted subexpression.
    fn class_of(&mut self, expr: &DataExpr, at: &str) -> Option<Class> {
        match expr {
            DataExpr::BoolLit(_) => Some(Class::Boolean),
            DataExpr::IntLit(n) => Some(if n.sign() == num_bigint::Sign::Minus {
                Class::Int
            } else {
                Class::Nat
            }),
            DataExpr::RealLit(_) => Some(Class::Real),
            DataExpr::Var(v) => match self.lookup(v) {
                Some(sort) => Some(Class::of_sort(sort)),
                None => {
                    self.error(format!("unbound variable `{v}` in {at}"));
                    None
                }
            },
            DataExpr::Unary(op, e) => {
                let c = self.class_of(e, at)?;
                match op {
                    UnOp::Neg if c.is_numeric() => Some(c.max(Class::Int)),
                    UnOp::Not if c == Class::Boolean => Some(Class::Boolean),
                    UnOp::Neg => {
                        self.error(format!("cannot negate a boolean in {at}"));
                        None
                    }
                    UnOp::Not => {
                        self.error(format!("`!` needs a boolean in {at}"));
                        None
                    }
                }
            }
            DataExpr::Binary(op, a, b) => {
                let ca = self.class_of(a, at)?;
                let cb = self.class_of(b, at)?;
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => {
                        if ca.is_numeric() && cb.is_numeric() {
                            let joined = ca.max(cb);
                            Some(if *op == BinOp::Sub { joined.max(Class::Int) } else { joined })
                        } else {
                            self.error(format!("arithmetic on a boolean in {at}"));
                            None
                        }
                    }
                    BinOp::Div => {
                        if ca.is_numeric() && cb.is_numeric() {
                            Some(Class::Real)
                        } else {
                            self.error(format!("division on a boolean in {at}"));
                            None
                        }
                    }
                    BinOp::Pow => {
                        if !ca.is_numeric() {
                            self.error(format!("cannot exponentiate a boolean in {at}"));
                            return None;
                        }
                        if !matches!(cb, Class::Nat | Class::Int) {
                            self.error(format!(
                                "exponent must be integer-sorted, got {cb} in {at}"
                            ));
                            return None;
                        }
                        Some(ca)
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if ca.join(cb).is_some() {
                            Some(Class::Boolean)
                        } else {
                            self.error(format!(
                                "cannot compare {ca} with {cb} in {at}"
                            ));
                            None
                        }
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        if ca.is_numeric() && cb.is_numeric() {
                            Some(Class::Boolean)
                        } else {
                            self.error(format!("ordering on a boolean in {at}"));
                            None
                        }
                    }
                    BinOp::And | BinOp::Or => {
                        if ca == Class::Boolean && cb == Class::Boolean {
                            Some(Class::Boolean)
                        } else {
                            self.error(format!("`&&`/`||` need booleans in {at}"));
                            None
                        }
                    }
                }
            }
            DataExpr::If(c, x, y) => {
                let cc = self.class_of(c, at)?;
                if cc != Class::Boolean {
                    self.error(format!("if-condition must be boolean in {at}"));
                    return None;
                }
                let cx = self.class_of(x, at)?;
                let cy = self.class_of(y, at)?;
                match cx.join(cy) {
                    Some(j) => Some(j),
                    None => {
                        self.error(format!(
                            "if-branches have incompatible sorts {cx} and {cy} in {at}"
                        ));
                        None
                    }
                }
            }
        }
    }

    fn expect_class(&mut self, expr: &DataExpr, want: Class, what: &str, at: &str) {
        if let Some(got) = self.class_of(expr, at) {
            if !want.subsumes(got) {
                self.error(format!("{what} must be {want}, got {got} in {at}"));
            }
        }
    }

    fn check_proc(&mut self, p: &ProcExpr, at: &str) {
        match p {
            ProcExpr::Delta => {}
            ProcExpr::Terminated => {
                self.error(format!(
                    "internal termination marker appears in source spec at {at}"
                ));
            }
            ProcExpr::Action(name, args) => match self.spec.action(name) {
                None => self.error(format!("use of undeclared action `{name}` in {at}")),
                Some(decl) => {
                    if decl.sorts.len() != args.len() {
                        self.error(format!(
                            "action `{name}` takes {} argument(s), got {} in {at}",
                            decl.sorts.len(),
                            args.len()
                        ));
                    } else {
                        for (arg, sort) in args.iter().zip(&decl.sorts) {
                            self.expect_class(
                                arg,
                                Class::of_sort(sort),
                                &format!("argument of `{name}`"),
                                at,
                            );
                        }
                    }
                }
            },
            ProcExpr::ProcRef(name, args) => match self.spec.equation(name) {
                None => self.error(format!("reference to undefined process `{name}` in {at}")),
                Some(eq) => {
                    if eq.params.len() != args.len() {
                        self.error(format!(
                            "process `{name}` takes {} argument(s), got {} in {at}",
                            eq.params.len(),
                            args.len()
                        ));
                    } else {
                        for (arg, (pname, sort)) in args.iter().zip(&eq.params) {
                            self.expect_class(
                                arg,
                                Class::of_sort(sort),
                                &format!("argument `{pname}` of `{name}`"),
                                at,
                            );
                        }
                    }
                }
            },
            ProcExpr::Seq(a, b) | ProcExpr::Alt(a, b) => {
                self.check_proc(a, at);
                self.check_proc(b, at);
            }
            ProcExpr::Cond(c, then, els) => {
                self.expect_class(c, Class::Boolean, "condition", at);
                self.check_proc(then, at);
                self.check_proc(els, at);
            }
            ProcExpr::Sum(v, sort, body) => {
                self.check_sort(sort, at);
                if !sort.is_finite() {
                    self.diags.push(Diagnostic::warning(format!(
                        "sum over infinite sort {sort} (variable `{v}`) in {at}: not finitely explorable"
                    )));
                }
                self.scope.push((v.clone(), sort.clone()));
                self.check_proc(body, at);
                self.scope.pop();
            }
            ProcExpr::Dist(v, sort, density, body) => {
                self.check_sort(sort, at);
                // The bound variable is not in scope for the parameters.
                match density {
                    DensitySpec::PmfExpr(e) => {
                        if !sort.is_finite() {
                            self.error(format!(
                                "dist over infinite sort {sort} (variable `{v}`) in {at} requires a named continuous density"
                            ));
                        }
                        self.scope.push((v.clone(), sort.clone()));
                        if let Some(c) = self.class_of(e, at) {
                            if !c.is_numeric() {
                                self.error(format!(
                                    "probability mass expression must be numeric in {at}"
                                ));
                            }
                        }
                        self.scope.pop();
                    }
                    named => {
                        if *sort != Sort::Real {
                            self.error(format!(
                                "continuous density for `{v}` in {at} requires sort Real, got {sort}"
                            ));
                        }
                        for param in named.param_exprs() {
                            if let Some(c) = self.class_of(param, at) {
                                if !c.is_numeric() {
                                    self.error(format!(
                                        "density parameter must be numeric in {at}"
                                    ));
                                }
                            }
                        }
                    }
                }
                self.scope.push((v.clone(), sort.clone()));
                self.check_proc(body, at);
                self.scope.pop();
            }
        }
    }

    /// Guardedness: no cycle of process references outside action prefixes.
    ///
    /// In source specs the left operand of `.` always performs an action
    /// before its continuation runs (successful termination has no concrete
    /// syntax), so only the left spine and non-sequential positions are
    /// unguarded.
    fn check_guardedness(&mut self) {
        let names: Vec<&str> = self.spec.equations.iter().map(|e| e.name.as_str()).collect();
        let edges: Vec<BTreeSet<usize>> = self
            .spec
            .equations
            .iter()
            .map(|eq| {
                let mut refs = BTreeSet::new();
                unguarded_refs(&eq.body, &mut refs);
                refs.into_iter()
                    .filter_map(|r| names.iter().position(|n| *n == r))
                    .collect()
            })
            .collect();

        for start in 0..names.len() {
            // DFS from `start` along unguarded edges; reaching `start` again
            // means a cycle without an action prefix.
            let mut stack: Vec<usize> = edges[start].iter().copied().collect();
            let mut seen = BTreeSet::new();
            let mut cyclic = edges[start].contains(&start);
            while let Some(node) = stack.pop() {
                if node == start {
                    cyclic = true;
                    break;
                }
                if seen.insert(node) {
                    stack.extend(edges[node].iter().copied());
                }
            }
            if cyclic {
                self.error(format!("unguarded recursion at {}", names[start]));
            }
        }
    }
}

fn unguarded_refs(p: &ProcExpr, out: &mut BTreeSet<String>) {
    match p {
        ProcExpr::Delta | ProcExpr::Terminated | ProcExpr::Action(_, _) => {}
        ProcExpr::ProcRef(name, _) => {
            out.insert(name.clone());
        }
        ProcExpr::Seq(first, _) => unguarded_refs(first, out),
        ProcExpr::Alt(a, b) => {
            unguarded_refs(a, out);
            unguarded_refs(b, out);
        }
        ProcExpr::Cond(_, a, b) => {
            unguarded_refs(a, out);
            unguarded_refs(b, out);
        }
        ProcExpr::Sum(_, _, body) | ProcExpr::Dist(_, _, _, body) => unguarded_refs(body, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_spec;

    fn diags(src: &str) -> Vec<Diagnostic> {
        validate(&parse_spec(src).unwrap())
    }

    fn messages(src: &str) -> Vec<String> {
        diags(src).iter().map(|d| d.message.clone()).collect()
    }

    #[test]
    fn unguarded_self_reference() {
        let msgs = messages("proc X = X; init X;");
        assert!(msgs.iter().any(|m| m.contains("unguarded recursion at X")), "{msgs:?}");
    }

    #[test]
    fn unguarded_through_choice_and_cycle() {
        let msgs = messages("act a; proc X = a.X + X; init X;");
        assert!(msgs.iter().any(|m| m.contains("unguarded recursion at X")));
        // Y starts with X, but X itself starts with an action, so every
        // cycle through Y passes an action prefix: guarded.
        let msgs = messages("act a; proc X = a.Y; proc Y = X.a; init X;");
        assert!(msgs.is_empty(), "{msgs:?}");
    }

    #[test]
    fn guarded_recursion_is_clean() {
        let msgs = messages(
            "act head,tail; proc Throw = dist b:Bool[1/2].((b) -> head <> tail).Throw; init Throw;",
        );
        assert!(msgs.is_empty(), "{msgs:?}");
    }

    #[test]
    fn infinite_sum_warns_but_is_not_an_error() {
        let ds = diags("act a; init sum r:Real.dist s:Real[Uniform(0, 1)].(r = s) -> a;");
        assert!(ds.iter().any(|d| d.severity == Severity::Warning
            && d.message.contains("not finitely explorable")));
        assert!(!has_errors(&ds));
    }

    #[test]
    fn pmf_over_infinite_sort_is_an_error() {
        let msgs = messages("act a; init dist k:Nat[(1/2)^(k+1)].a;");
        assert!(msgs.iter().any(|m| m.contains("requires a named continuous density")), "{msgs:?}");
    }

    #[test]
    fn continuous_density_requires_real() {
        let msgs = messages("act a; init dist b:Bool[Uniform(0, 1)].a;");
        assert!(msgs.iter().any(|m| m.contains("requires sort Real")));
    }

    #[test]
    fn scoping_and_sorts() {
        let msgs = messages("act a:Nat; init a(x);");
        assert!(msgs.iter().any(|m| m.contains("unbound variable `x`")));
        let msgs = messages("act a:Nat; init a(true);");
        assert!(msgs.iter().any(|m| m.contains("argument of `a` must be Nat")));
        let msgs = messages("act a; init (1 + 2) -> a;");
        assert!(msgs.iter().any(|m| m.contains("condition must be Bool")));
        let msgs = messages("act a; init b.a;");
        assert!(msgs.iter().any(|m| m.contains("undeclared action `b`")));
        let msgs = messages("act a:Nat; init sum n:[0..3].a(n);");
        assert!(msgs.is_empty(), "{msgs:?}");
    }

    #[test]
    fn arity_mismatches() {
        let msgs = messages("act a:Nat; init a;");
        assert!(msgs.iter().any(|m| m.contains("takes 1 argument(s), got 0")));
        let msgs = messages("act a; proc P(n: Nat) = a; init P;");
        assert!(msgs.iter().any(|m| m.contains("takes 1 argument(s), got 0")));
    }

    #[test]
    fn name_clash_between_action_and_process() {
        let msgs = messages("act X; proc X = delta; init X;");
        assert!(msgs.iter().any(|m| m.contains("both an action and a process")));
    }

    #[test]
    fn negative_argument_for_nat_parameter() {
        let msgs = messages("act a; proc P(n: Nat) = a; init P(-1);");
        assert!(msgs.iter().any(|m| m.contains("must be Nat, got Int")), "{msgs:?}");
    }

    #[test]
    fn exponent_must_be_integer() {
        let msgs = messages("act a:Real; init a(2 ^ 0.5);");
        assert!(msgs.iter().any(|m| m.contains("exponent must be integer-sorted")));
    }
}
