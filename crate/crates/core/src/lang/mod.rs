//! MiniLang frontend: AST, lexer, parser, and canonical rendering.

pub mod ast;
pub mod canon;
mod lexer;
pub mod parser;

pub use ast::{BinOp, Expr, ExprKind, FunctionDef, Program, Span, Stmt, StmtKind, UnOp};
pub use canon::{body_hash, body_text, expr_label, function_text, program_text, stmt_label};
pub use parser::{parse_program, ParseError};
