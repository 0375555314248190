//! Abstract syntax for MiniLang: integer-valued functions with `let`,
//! assignment, `if`/`else`, `while`, `return`, calls, and requirement
//! annotations of the form `#[req(R1,R2)]` preceding a `fn`.

use std::collections::BTreeSet;

/// Source position of a token, 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A parsed source tree: all functions of a file or project in source order.
///
/// Function names are unique within a `Program`; the parser and the project
/// loader reject duplicates.
#[derive(Debug, Clone)]
pub struct Program {
    pub functions: Vec<FunctionDef>,
    pub source_path: String,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn function_names(&self) -> BTreeSet<String> {
        self.functions.iter().map(|f| f.name.clone()).collect()
    }
}

/// One function definition with its requirement annotations.
#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub name: String,
    /// Parameter names, unique within the function.
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    /// Requirement ids collected from `#[req(...)]` annotations.
    pub reqs: BTreeSet<String>,
    pub span: Span,
}

impl FunctionDef {
    /// Content hash of the canonical body text. Bodies that differ only in
    /// whitespace or comments hash identically.
    pub fn body_hash(&self) -> String {
        super::canon::body_hash(&self.body)
    }
}

/// A statement with a parser-assigned id (`sid`), unique within its
/// function and numbered in pre-order. The CFG builder uses the sid to
/// link graph nodes back to statements.
#[derive(Debug, Clone)]
pub struct Stmt {
    pub sid: u32,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    Let { name: String, value: Expr },
    Assign { name: String, value: Expr },
    If { cond: Expr, then_block: Vec<Stmt>, else_block: Option<Vec<Stmt>> },
    While { cond: Expr, body: Vec<Stmt> },
    Return { value: Expr },
    ExprStmt { value: Expr },
}

impl Stmt {
    /// The single expression a statement evaluates: its value for
    /// `let`/assignment/`return`/expression statements, its predicate for
    /// `if`/`while`.
    pub fn expr(&self) -> &Expr {
        match &self.kind {
            StmtKind::Let { value, .. }
            | StmtKind::Assign { value, .. }
            | StmtKind::Return { value }
            | StmtKind::ExprStmt { value } => value,
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => cond,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Int(i64),
    Var(String),
    Call { callee: String, args: Vec<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        }
    }

    /// Binding strength for rendering and parsing; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "!",
        }
    }
}
