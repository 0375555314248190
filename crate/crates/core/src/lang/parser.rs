//! Recursive-descent parser for MiniLang with precedence climbing for
//! expressions.
//!
//! Grammar:
//!
//! ```text
//! program    := item*
//! item       := annotation* "fn" IDENT "(" [IDENT ("," IDENT)*] ")" block
//! annotation := "#[req(" REQID ("," REQID)* ")]"
//! block      := "{" stmt* "}"
//! stmt       := "let" IDENT "=" expr ";" | IDENT "=" expr ";"
//!             | "if" expr block ["else" block] | "while" expr block
//!             | "return" expr ";" | expr ";"
//! expr       := precedence climbing over ||, &&, comparisons, + -, * / %,
//!               unary - !, atoms (INT, IDENT, call, parenthesized)
//! ```

use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{lex, SpannedTok, Tok};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{path}:{line}:{col}: {message}")]
    Syntax { path: String, line: u32, col: u32, message: String },
    #[error("{path}:{line}:{col}: duplicate function `{name}`")]
    DuplicateFunction { path: String, line: u32, col: u32, name: String },
    #[error("{path}:{line}:{col}: duplicate parameter `{name}`")]
    DuplicateParam { path: String, line: u32, col: u32, name: String },
}

impl ParseError {
    pub fn line(&self) -> u32 {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::DuplicateFunction { line, .. }
            | ParseError::DuplicateParam { line, .. } => *line,
        }
    }
}

/// Parses one source file. Comments are discarded except `#[req(...)]`
/// annotations, which attach requirement ids to the following function.
pub fn parse_program(source: &str, path: &str) -> Result<Program, ParseError> {
    let toks = lex(source, path)?;
    let mut parser = Parser { toks, pos: 0, path: path.to_string() };
    parser.program()
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
    path: String,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        let i = (self.pos + 1).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> SpannedTok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        let span = self.span();
        ParseError::Syntax {
            path: self.path.clone(),
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.err(format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok((name, span))
            }
            other => Err(self.err(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut functions: Vec<FunctionDef> = Vec::new();
        loop {
            let mut reqs = BTreeSet::new();
            while let Tok::Annotation(ids) = self.peek() {
                reqs.extend(ids.iter().cloned());
                self.bump();
            }
            match self.peek() {
                Tok::Eof => {
                    if !reqs.is_empty() {
                        return Err(self.err("annotation without a following `fn`"));
                    }
                    break;
                }
                Tok::KwFn => {
                    let f = self.function(reqs)?;
                    if functions.iter().any(|g| g.name == f.name) {
                        return Err(ParseError::DuplicateFunction {
                            path: self.path.clone(),
                            line: f.span.line,
                            col: f.span.col,
                            name: f.name,
                        });
                    }
                    functions.push(f);
                }
                other => {
                    return Err(self.err(format!("expected `fn`, found {}", other.describe())))
                }
            }
        }
        Ok(Program { functions, source_path: self.path.clone() })
    }

    fn function(&mut self, reqs: BTreeSet<String>) -> Result<FunctionDef, ParseError> {
        let fn_span = self.expect(Tok::KwFn, "`fn`")?;
        let (name, _) = self.ident("function name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params: Vec<String> = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                match self.peek().clone() {
                    Tok::Ident(p) => {
                        let span = self.bump().span;
                        if params.contains(&p) {
                            return Err(ParseError::DuplicateParam {
                                path: self.path.clone(),
                                line: span.line,
                                col: span.col,
                                name: p,
                            });
                        }
                        params.push(p);
                    }
                    other => {
                        return Err(self.err(format!(
                            "expected parameter or `)`, found {}",
                            other.describe()
                        )))
                    }
                }
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => break,
                    other => {
                        return Err(self.err(format!(
                            "expected `,` or `)`, found {}",
                            other.describe()
                        )))
                    }
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let mut body = self.block()?;
        let mut next_sid = 0;
        assign_sids(&mut body, &mut next_sid);
        Ok(FunctionDef { name, params, body, reqs, span: fn_span })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.err("expected `}` before end of input"));
            }
            stmts.push(self.stmt()?);
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        let kind = match self.peek() {
            Tok::KwLet => {
                self.bump();
                let (name, _) = self.ident("variable name")?;
                self.expect(Tok::Assign, "`=`")?;
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Let { name, value }
            }
            Tok::KwIf => {
                self.bump();
                let cond = self.expr()?;
                let then_block = self.block()?;
                let else_block = if *self.peek() == Tok::KwElse {
                    self.bump();
                    Some(self.block()?)
                } else {
                    None
                };
                StmtKind::If { cond, then_block, else_block }
            }
            Tok::KwWhile => {
                self.bump();
                let cond = self.expr()?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::KwReturn => {
                self.bump();
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Return { value }
            }
            Tok::Ident(_) if *self.peek2() == Tok::Assign => {
                let (name, _) = self.ident("variable name")?;
                self.bump(); // `=`
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Assign { name, value }
            }
            _ => {
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::ExprStmt { value }
            }
        };
        Ok(Stmt { sid: 0, span, kind })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let Some(op) = binop_of(self.peek()) else { break };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span;
            lhs = Expr {
                span,
                kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let op = match self.peek() {
            Tok::Minus => Some(UnOp::Neg),
            Tok::Bang => Some(UnOp::Not),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let operand = self.unary()?;
            return Ok(Expr { span, kind: ExprKind::Unary { op, operand: Box::new(operand) } });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr { span, kind: ExprKind::Int(v) })
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            match self.peek() {
                                Tok::Comma => {
                                    self.bump();
                                }
                                Tok::RParen => break,
                                other => {
                                    return Err(self.err(format!(
                                        "expected `,` or `)`, found {}",
                                        other.describe()
                                    )))
                                }
                            }
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr { span, kind: ExprKind::Call { callee: name, args } })
                } else {
                    Ok(Expr { span, kind: ExprKind::Var(name) })
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            other => Err(self.err(format!("expected expression, found {}", other.describe()))),
        }
    }
}

fn binop_of(tok: &Tok) -> Option<BinOp> {
    let op = match tok {
        Tok::OrOr => BinOp::Or,
        Tok::AndAnd => BinOp::And,
        Tok::Lt => BinOp::Lt,
        Tok::Le => BinOp::Le,
        Tok::Gt => BinOp::Gt,
        Tok::Ge => BinOp::Ge,
        Tok::EqEq => BinOp::Eq,
        Tok::Ne => BinOp::Ne,
        Tok::Plus => BinOp::Add,
        Tok::Minus => BinOp::Sub,
        Tok::Star => BinOp::Mul,
        Tok::Slash => BinOp::Div,
        Tok::Percent => BinOp::Rem,
        _ => return None,
    };
    Some(op)
}

/// Numbers statements in pre-order: a compound statement precedes the
/// statements of its blocks.
fn assign_sids(body: &mut [Stmt], next: &mut u32) {
    for stmt in body {
        stmt.sid = *next;
        *next += 1;
        match &mut stmt.kind {
            StmtKind::If { then_block, else_block, .. } => {
                assign_sids(then_block, next);
                if let Some(els) = else_block {
                    assign_sids(els, next);
                }
            }
            StmtKind::While { body, .. } => assign_sids(body, next),
            _ => {}
        }
    }
}
