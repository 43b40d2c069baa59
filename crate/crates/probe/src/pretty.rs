//! Canonical printer for specifications. The output of [`pretty_print`]
//! re-parses to a structurally equal AST.

use std::fmt::Write;

use num_traits::Signed;

use crate::ast::{BinOp, DataExpr, DensitySpec, ProcExpr, Spec, UnOp};

// Process precedence levels: + < . < factor.
const ALT: u8 = 1;
const SEQ: u8 = 2;
const FACTOR: u8 = 3;

/// Renders a specification as canonical source text.
///
/// The spec must not contain the internal `Terminated` marker: it has no
/// concrete syntax, and neither the parser nor the generators produce it in
/// a `Spec`.
pub fn pretty_print(spec: &Spec) -> String {
    let mut out = String::new();
    // Consecutive declarations with the same signature share one line.
    let mut i = 0;
    while i < spec.actions.len() {
        let sorts = &spec.actions[i].sorts;
        let mut j = i + 1;
        while j < spec.actions.len() && &spec.actions[j].sorts == sorts {
            j += 1;
        }
        let names: Vec<&str> = spec.actions[i..j].iter().map(|a| a.name.as_str()).collect();
        out.push_str("act ");
        out.push_str(&names.join(", "));
        if !sorts.is_empty() {
            let rendered: Vec<String> = sorts.iter().map(|s| s.to_string()).collect();
            write!(out, ": {}", rendered.join(" # ")).unwrap();
        }
        out.push_str(";\n");
        i = j;
    }
    for eq in &spec.equations {
        write!(out, "proc {}", eq.name).unwrap();
        if !eq.params.is_empty() {
            let params: Vec<String> =
                eq.params.iter().map(|(n, s)| format!("{n}: {s}")).collect();
            write!(out, "({})", params.join(", ")).unwrap();
        }
        out.push_str(" = ");
        write_proc(&mut out, &eq.body, ALT);
        out.push_str(";\n");
    }
    out.push_str("init ");
    write_proc(&mut out, &spec.init, ALT);
    out.push_str(";\n");
    out
}

fn proc_level(p: &ProcExpr) -> u8 {
    match p {
        ProcExpr::Alt(_, _) => ALT,
        ProcExpr::Seq(_, _) => SEQ,
        _ => FACTOR,
    }
}

/// True when the printed form of `p` ends in a conditional that would
/// greedily absorb a following `<>`.
fn ends_open(p: &ProcExpr) -> bool {
    match p {
        ProcExpr::Cond(_, _, els) => matches!(els.as_ref(), ProcExpr::Delta) || ends_open(els),
        ProcExpr::Sum(_, _, body) | ProcExpr::Dist(_, _, _, body) => ends_open(body),
        _ => false,
    }
}

fn write_proc(out: &mut String, p: &ProcExpr, min: u8) {
    if proc_level(p) < min {
        out.push('(');
        write_proc(out, p, ALT);
        out.push(')');
        return;
    }
    match p {
        ProcExpr::Delta => out.push_str("delta"),
        ProcExpr::Terminated => {
            unreachable!("the internal termination marker has no concrete syntax")
        }
        ProcExpr::Action(name, args) | ProcExpr::ProcRef(name, args) => {
            out.push_str(name);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_expr(out, a, 1);
                }
                out.push(')');
            }
        }
        ProcExpr::Seq(a, b) => {
            write_proc(out, a, SEQ);
            out.push('.');
            write_proc(out, b, FACTOR);
        }
        ProcExpr::Alt(a, b) => {
            write_proc(out, a, ALT);
            out.push_str(" + ");
            write_proc(out, b, SEQ);
        }
        ProcExpr::Cond(c, then, els) => {
            out.push('(');
            write_expr(out, c, 1);
            out.push_str(") -> ");
            let has_else = !matches!(els.as_ref(), ProcExpr::Delta);
            if has_else && ends_open(then) {
                out.push('(');
                write_proc(out, then, ALT);
                out.push(')');
            } else {
                write_proc(out, then, FACTOR);
            }
            if has_else {
                out.push_str(" <> ");
                write_proc(out, els, FACTOR);
            }
        }
        ProcExpr::Sum(v, sort, body) => {
            write!(out, "sum {v}:{sort}.").unwrap();
            write_proc(out, body, FACTOR);
        }
        ProcExpr::Dist(v, sort, density, body) => {
            write!(out, "dist {v}:{sort}[").unwrap();
            write_density(out, density);
            out.push_str("].");
            write_proc(out, body, FACTOR);
        }
    }
}

fn write_density(out: &mut String, d: &DensitySpec) {
    match d {
        DensitySpec::PmfExpr(e) => write_expr(out, e, 1),
        DensitySpec::Uniform(lo, hi) => {
            out.push_str("Uniform(");
            write_expr(out, lo, 1);
            out.push_str(", ");
            write_expr(out, hi, 1);
            out.push(')');
        }
        DensitySpec::Exponential(rate) => {
            out.push_str("Exp(");
            write_expr(out, rate, 1);
            out.push(')');
        }
        DensitySpec::NormalTrunc(mu, sigma, lo, hi) => {
            out.push_str("NormalTrunc(");
            for (i, e) in [mu, sigma, lo, hi].iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, e, 1);
            }
            out.push(')');
        }
    }
}

// Expression precedence levels, loosest to tightest.
const OR: u8 = 1;
const AND: u8 = 2;
const CMP: u8 = 3;
const ADD: u8 = 4;
const MUL: u8 = 5;
const UNARY: u8 = 6;
const POW: u8 = 7;
const ATOM: u8 = 8;

fn expr_level(e: &DataExpr) -> u8 {
    match e {
        DataExpr::Binary(op, _, _) => match op {
            BinOp::Or => OR,
            BinOp::And => AND,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => CMP,
            BinOp::Add | BinOp::Sub => ADD,
            BinOp::Mul | BinOp::Div => MUL,
            BinOp::Pow => POW,
        },
        DataExpr::Unary(_, _) => UNARY,
        // Negative literals print with a leading minus, so they bind like a
        // unary expression.
        DataExpr::IntLit(n) if n.is_negative() => UNARY,
        DataExpr::RealLit(x) if x.0 < 0.0 => UNARY,
        _ => ATOM,
    }
}

fn op_symbol(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Pow => "^",
        BinOp::Eq => "=",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Gt => ">",
        BinOp::Ge => ">=",
        BinOp::And => "&&",
        BinOp::Or => "||",
    }
}

fn write_expr(out: &mut String, e: &DataExpr, min: u8) {
    if expr_level(e) < min {
        out.push('(');
        write_expr(out, e, 1);
        out.push(')');
        return;
    }
    match e {
        DataExpr::BoolLit(b) => write!(out, "{b}").unwrap(),
        DataExpr::IntLit(n) => write!(out, "{n}").unwrap(),
        DataExpr::RealLit(x) => write!(out, "{:?}", x.0).unwrap(),
        DataExpr::Var(v) => out.push_str(v),
        DataExpr::Unary(op, operand) => {
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            });
            write_expr(out, operand, UNARY);
        }
        DataExpr::Binary(op, lhs, rhs) => {
            let (level, spaced) = match expr_level(e) {
                MUL => (MUL, false),
                POW => (POW, false),
                l => (l, true),
            };
            // `^` is right-associative (its exponent is a unary expression);
            // the other binaries associate to the left.
            let (lmin, rmin) = if *op == BinOp::Pow {
                (ATOM, UNARY)
            } else {
                (level, level + 1)
            };
            write_expr(out, lhs, lmin);
            if spaced {
                write!(out, " {} ", op_symbol(*op)).unwrap();
            } else {
                out.push_str(op_symbol(*op));
            }
            write_expr(out, rhs, rmin);
        }
        DataExpr::If(c, x, y) => {
            out.push_str("if(");
            write_expr(out, c, 1);
            out.push_str(", ");
            write_expr(out, x, 1);
            out.push_str(", ");
            write_expr(out, y, 1);
            out.push(')');
        }
    }
}
