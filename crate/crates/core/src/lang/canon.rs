//! Canonical rendering of MiniLang syntax.
//!
//! Labels are single-line, single-spaced renderings of one statement or
//! expression; `if`/`while` labels show only the predicate. Expressions
//! keep the minimal parentheses needed to preserve structure, so two
//! statements get equal labels exactly when their ASTs agree (spans
//! aside). The canonical program form is the indented serialization of
//! those labels; the body hash is a SHA-256 of the canonical body text.

use sha2::{Digest, Sha256};

use super::ast::*;

const PREC_UNARY: u8 = 6;

/// Single-line label for a statement. Compound statements render only
/// their header: `if x < 2`, `while n`.
pub fn stmt_label(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::Let { name, value } => format!("let {name} = {};", expr_label(value)),
        StmtKind::Assign { name, value } => format!("{name} = {};", expr_label(value)),
        StmtKind::If { cond, .. } => format!("if {}", expr_label(cond)),
        StmtKind::While { cond, .. } => format!("while {}", expr_label(cond)),
        StmtKind::Return { value } => format!("return {};", expr_label(value)),
        StmtKind::ExprStmt { value } => format!("{};", expr_label(value)),
    }
}

/// Single-line label for an expression.
pub fn expr_label(expr: &Expr) -> String {
    let mut out = String::new();
    fmt_expr(expr, 0, &mut out);
    out
}

fn fmt_expr(expr: &Expr, min_prec: u8, out: &mut String) {
    match &expr.kind {
        ExprKind::Int(v) => out.push_str(&v.to_string()),
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Call { callee, args } => {
            out.push_str(callee);
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                fmt_expr(arg, 0, out);
            }
            out.push(')');
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let parens = prec < min_prec;
            if parens {
                out.push('(');
            }
            fmt_expr(lhs, prec, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            // Same-precedence right children need parentheses: left-assoc.
            fmt_expr(rhs, prec + 1, out);
            if parens {
                out.push(')');
            }
        }
        ExprKind::Unary { op, operand } => {
            let parens = PREC_UNARY < min_prec;
            if parens {
                out.push('(');
            }
            out.push_str(op.symbol());
            fmt_expr(operand, PREC_UNARY, out);
            if parens {
                out.push(')');
            }
        }
    }
}

/// Canonical text of a statement list at indent level 0; the input to
/// [`body_hash`].
pub fn body_text(body: &[Stmt]) -> String {
    let mut out = String::new();
    for stmt in body {
        push_stmt(stmt, 0, &mut out);
    }
    out
}

fn push_stmt(stmt: &Stmt, indent: usize, out: &mut String) {
    let pad = "    ".repeat(indent);
    match &stmt.kind {
        StmtKind::If { then_block, else_block, .. } => {
            out.push_str(&pad);
            out.push_str(&stmt_label(stmt));
            out.push_str(" {\n");
            for s in then_block {
                push_stmt(s, indent + 1, out);
            }
            if let Some(els) = else_block {
                out.push_str(&pad);
                out.push_str("} else {\n");
                for s in els {
                    push_stmt(s, indent + 1, out);
                }
            }
            out.push_str(&pad);
            out.push_str("}\n");
        }
        StmtKind::While { body, .. } => {
            out.push_str(&pad);
            out.push_str(&stmt_label(stmt));
            out.push_str(" {\n");
            for s in body {
                push_stmt(s, indent + 1, out);
            }
            out.push_str(&pad);
            out.push_str("}\n");
        }
        _ => {
            out.push_str(&pad);
            out.push_str(&stmt_label(stmt));
            out.push('\n');
        }
    }
}

/// SHA-256 (hex) of the canonical body text.
pub fn body_hash(body: &[Stmt]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(body_text(body).as_bytes());
    hex::encode(hasher.finalize())
}

/// Canonical text of one function, annotation line included. Requirement
/// ids are a set and render sorted.
pub fn function_text(f: &FunctionDef) -> String {
    let mut out = String::new();
    if !f.reqs.is_empty() {
        let ids: Vec<&str> = f.reqs.iter().map(String::as_str).collect();
        out.push_str(&format!("#[req({})]\n", ids.join(",")));
    }
    out.push_str(&format!("fn {}({}) {{\n", f.name, f.params.join(", ")));
    for stmt in &f.body {
        push_stmt(stmt, 1, &mut out);
    }
    out.push_str("}\n");
    out
}

/// Canonical source form of a whole program. Re-parsing it yields a
/// structurally equal program.
pub fn program_text(prog: &Program) -> String {
    let mut out = String::new();
    for (i, f) in prog.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&function_text(f));
    }
    out
}
