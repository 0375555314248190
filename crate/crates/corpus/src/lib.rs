//! Deterministic random MiniLang corpora: programs with nested control
//! flow and recursion, suites with executed expectations, semantic
//! mutations, and whitespace/comment-only edits. Everything is driven by
//! a seeded ChaCha stream, so a seed pins the corpus.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use abstf_core::cfg::build_cfgs;
use abstf_core::interp::{execute, ExecResult, ExpectedOutcome, TestCase};
use abstf_core::lang::ast::{
    BinOp, Expr, ExprKind, FunctionDef, Program, Span, Stmt, StmtKind, UnOp,
};
use abstf_core::lang::{parse_program, program_text};
use abstf_core::matrix::Requirement;
use abstf_core::selection::{dangerous_edges, DangerousEdgeSet, FunctionDelta};

pub type CorpusRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub functions: RangeInclusive<usize>,
    pub max_params: usize,
    pub max_block_len: usize,
    pub max_depth: usize,
    /// Size of the requirement pool; annotations draw from it.
    pub requirement_pool: usize,
    pub tests: RangeInclusive<usize>,
    /// Step limit used when computing expected outcomes.
    pub step_limit: u64,
    /// Emit while loops.
    pub loops: bool,
    /// Emit calls (including guarded self-recursion).
    pub calls: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            functions: 3..=15,
            max_params: 3,
            max_block_len: 4,
            max_depth: 3,
            requirement_pool: 6,
            tests: 10..=50,
            step_limit: 3_000,
            loops: true,
            calls: true,
        }
    }
}

fn expr(kind: ExprKind) -> Expr {
    Expr { span: Span::default(), kind }
}

fn stmt(kind: StmtKind) -> Stmt {
    Stmt { sid: 0, span: Span::default(), kind }
}

fn int(v: i64) -> Expr {
    expr(ExprKind::Int(v))
}

fn var(name: &str) -> Expr {
    expr(ExprKind::Var(name.to_string()))
}

struct Gen<'a> {
    rng: &'a mut CorpusRng,
    cfg: &'a GenConfig,
    /// (name, arity) of functions callable from the one being generated.
    callable: Vec<(String, usize)>,
    /// Variables in scope within the current function.
    scope: Vec<String>,
    next_local: usize,
}

impl<'a> Gen<'a> {
    fn pick_var(&mut self) -> Option<String> {
        if self.scope.is_empty() {
            return None;
        }
        let i = self.rng.random_range(0..self.scope.len());
        Some(self.scope[i].clone())
    }

    fn gen_expr(&mut self, depth: usize) -> Expr {
        if depth == 0 {
            return match self.rng.random_range(0..3) {
                0 => int(self.rng.random_range(0..=6)),
                _ => self.pick_var().map(|v| var(&v)).unwrap_or_else(|| int(1)),
            };
        }
        match self.rng.random_range(0..10) {
            0 | 1 => int(self.rng.random_range(0..=6)),
            2 | 3 => self.pick_var().map(|v| var(&v)).unwrap_or_else(|| int(2)),
            4 => expr(ExprKind::Unary {
                op: if self.rng.random_bool(0.5) { UnOp::Neg } else { UnOp::Not },
                operand: Box::new(self.gen_expr(depth - 1)),
            }),
            5 if !self.callable.is_empty() => self.gen_call(depth),
            _ => {
                let ops = [
                    BinOp::Add,
                    BinOp::Sub,
                    BinOp::Mul,
                    BinOp::Add,
                    BinOp::Sub,
                    BinOp::Div,
                    BinOp::Rem,
                    BinOp::Lt,
                    BinOp::Le,
                    BinOp::Gt,
                    BinOp::Ge,
                    BinOp::Eq,
                    BinOp::Ne,
                    BinOp::And,
                    BinOp::Or,
                ];
                let op = ops[self.rng.random_range(0..ops.len())];
                expr(ExprKind::Binary {
                    op,
                    lhs: Box::new(self.gen_expr(depth - 1)),
                    rhs: Box::new(self.gen_expr(depth - 1)),
                })
            }
        }
    }

    fn gen_call(&mut self, depth: usize) -> Expr {
        let i = self.rng.random_range(0..self.callable.len());
        let (callee, arity) = self.callable[i].clone();
        let args = (0..arity).map(|_| self.gen_expr(depth.saturating_sub(1))).collect();
        expr(ExprKind::Call { callee, args })
    }

    fn gen_predicate(&mut self) -> Expr {
        // Predicates lean on comparisons over scope variables so branches
        // actually depend on inputs.
        let lhs = self.pick_var().map(|v| var(&v)).unwrap_or_else(|| int(1));
        let ops = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne];
        let op = ops[self.rng.random_range(0..ops.len())];
        let rhs = if self.rng.random_bool(0.7) {
            int(self.rng.random_range(-3..=5))
        } else {
            self.gen_expr(1)
        };
        expr(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) })
    }

    fn fresh_local(&mut self) -> String {
        let name = format!("v{}", self.next_local);
        self.next_local += 1;
        name
    }

    fn gen_block(&mut self, depth: usize) -> Vec<Stmt> {
        let len = self.rng.random_range(1..=self.cfg.max_block_len);
        let scope_mark = self.scope.len();
        let mut body = Vec::new();
        for _ in 0..len {
            body.push(self.gen_stmt(depth));
        }
        self.scope.truncate(scope_mark);
        body
    }

    fn gen_stmt(&mut self, depth: usize) -> Stmt {
        let roll = self.rng.random_range(0..12);
        match roll {
            0 | 1 | 2 => {
                let name = self.fresh_local();
                let value = self.gen_expr(depth.min(2));
                self.scope.push(name.clone());
                stmt(StmtKind::Let { name, value })
            }
            3 | 4 => match self.pick_var() {
                Some(name) => {
                    let value = self.gen_expr(depth.min(2));
                    stmt(StmtKind::Assign { name, value })
                }
                None => {
                    let name = self.fresh_local();
                    let value = self.gen_expr(1);
                    self.scope.push(name.clone());
                    stmt(StmtKind::Let { name, value })
                }
            },
            5 | 6 if depth > 0 => {
                let cond = self.gen_predicate();
                let then_block = self.gen_block(depth - 1);
                let else_block =
                    if self.rng.random_bool(0.6) { Some(self.gen_block(depth - 1)) } else { None };
                stmt(StmtKind::If { cond, then_block, else_block })
            }
            7 if depth > 0 && self.cfg.loops => self.gen_while(depth),
            8 if !self.callable.is_empty() => stmt(StmtKind::ExprStmt { value: self.gen_call(2) }),
            9 => stmt(StmtKind::Return { value: self.gen_expr(depth.min(2)) }),
            _ => {
                let name = self.fresh_local();
                let value = self.gen_expr(depth.min(2));
                self.scope.push(name.clone());
                stmt(StmtKind::Let { name, value })
            }
        }
    }

    /// Counted loop over a fresh counter; usually terminates, and the
    /// step limit covers the cases mutation later breaks.
    fn gen_while(&mut self, depth: usize) -> Stmt {
        let counter = self.fresh_local();
        self.scope.push(counter.clone());
        let init = stmt(StmtKind::Let {
            name: counter.clone(),
            value: int(self.rng.random_range(1..=5)),
        });
        let cond = expr(ExprKind::Binary {
            op: BinOp::Gt,
            lhs: Box::new(var(&counter)),
            rhs: Box::new(int(0)),
        });
        let mut body = self.gen_block(depth - 1);
        body.push(stmt(StmtKind::Assign {
            name: counter.clone(),
            value: expr(ExprKind::Binary {
                op: BinOp::Sub,
                lhs: Box::new(var(&counter)),
                rhs: Box::new(int(1)),
            }),
        }));
        let while_stmt = stmt(StmtKind::While { cond, body });
        // Wrap init + loop under `if 1` so the pair occupies one
        // statement slot.
        stmt(StmtKind::If { cond: int(1), then_block: vec![init, while_stmt], else_block: None })
    }
}

/// Generates a parsed, well-formed program. Functions call only earlier
/// functions or themselves, so every call resolves; self-recursion is
/// guarded by a parameter test so it bottoms out for most inputs.
pub fn gen_program(rng: &mut CorpusRng, cfg: &GenConfig) -> Program {
    let n = rng.random_range(cfg.functions.clone());
    let mut functions: Vec<FunctionDef> = Vec::with_capacity(n);
    let mut callable: Vec<(String, usize)> = Vec::new();
    for i in 0..n {
        let name = format!("f{i}");
        let arity = rng.random_range(0..=cfg.max_params);
        let params: Vec<String> = (0..arity).map(|p| format!("p{p}")).collect();

        let mut gen = Gen {
            rng,
            cfg,
            callable: if cfg.calls { callable.clone() } else { Vec::new() },
            scope: params.clone(),
            next_local: 0,
        };
        let mut body = gen.gen_block(cfg.max_depth);

        if cfg.calls && arity > 0 && rng.random_bool(0.25) {
            let p = params[rng.random_range(0..arity)].clone();
            let rec = stmt(StmtKind::If {
                cond: expr(ExprKind::Binary {
                    op: BinOp::Gt,
                    lhs: Box::new(var(&p)),
                    rhs: Box::new(int(0)),
                }),
                then_block: vec![stmt(StmtKind::Return {
                    value: expr(ExprKind::Call {
                        callee: name.clone(),
                        args: params
                            .iter()
                            .map(|q| {
                                if *q == p {
                                    expr(ExprKind::Binary {
                                        op: BinOp::Sub,
                                        lhs: Box::new(var(q)),
                                        rhs: Box::new(int(1)),
                                    })
                                } else {
                                    var(q)
                                }
                            })
                            .collect(),
                    }),
                })],
                else_block: None,
            });
            body.insert(0, rec);
        }

        body.push(stmt(StmtKind::Return {
            value: if params.is_empty() {
                int(rng.random_range(0..=6))
            } else {
                var(&params[rng.random_range(0..params.len())])
            },
        }));

        let mut reqs = std::collections::BTreeSet::new();
        if cfg.requirement_pool > 0 && rng.random_bool(0.7) {
            for _ in 0..rng.random_range(1..=2) {
                reqs.insert(format!("R{}", rng.random_range(0..cfg.requirement_pool)));
            }
        }

        functions.push(FunctionDef {
            name: name.clone(),
            params: params.clone(),
            body,
            reqs,
            span: Span::default(),
        });
        callable.push((name, arity));
    }

    reparse(&Program { functions, source_path: "<generated>".to_string() })
}

/// Serializes and re-parses so sids, spans, and hashes are the parser's.
pub fn reparse(prog: &Program) -> Program {
    let text = program_text(prog);
    parse_program(&text, "<generated>").expect("generated programs parse")
}

/// The requirement pool R0..R{n-1}.
pub fn gen_requirements(n: usize) -> Vec<Requirement> {
    (0..n)
        .map(|i| Requirement { id: format!("R{i}"), text: format!("behavior {i}") })
        .collect()
}

/// Random tests whose expectations come from executing the program, so
/// the suite passes on the version it was generated against.
pub fn gen_suite(rng: &mut CorpusRng, prog: &Program, cfg: &GenConfig) -> Vec<TestCase> {
    let cfgs = build_cfgs(prog);
    let count = rng.random_range(cfg.tests.clone());
    let mut suite = Vec::with_capacity(count);
    for i in 0..count {
        let f = &prog.functions[rng.random_range(0..prog.functions.len())];
        let args: Vec<i64> = (0..f.params.len()).map(|_| rng.random_range(-5..=5)).collect();
        let (result, _) = execute(prog, &cfgs, &f.name, &args, cfg.step_limit);
        let expected = match result {
            ExecResult::Value(v) => ExpectedOutcome::value(v),
            ExecResult::Error(_) => ExpectedOutcome::error(),
        };
        suite.push(TestCase { name: format!("t{i}"), entry: f.name.clone(), args, expected });
    }
    suite
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    ConstantChange,
    OperatorFlip,
    StatementInsert,
    StatementDelete,
    BranchSwap,
    FunctionAdd,
    FunctionDelete,
}

const ALL_MUTATIONS: [MutationKind; 7] = [
    MutationKind::ConstantChange,
    MutationKind::OperatorFlip,
    MutationKind::StatementInsert,
    MutationKind::StatementDelete,
    MutationKind::BranchSwap,
    MutationKind::FunctionAdd,
    MutationKind::FunctionDelete,
];

fn visit_exprs(e: &mut Expr, f: &mut impl FnMut(&mut Expr)) {
    f(e);
    match &mut e.kind {
        ExprKind::Int(_) | ExprKind::Var(_) => {}
        ExprKind::Call { args, .. } => {
            for a in args {
                visit_exprs(a, f);
            }
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            visit_exprs(lhs, f);
            visit_exprs(rhs, f);
        }
        ExprKind::Unary { operand, .. } => visit_exprs(operand, f),
    }
}

fn visit_stmts(body: &mut Vec<Stmt>, f: &mut impl FnMut(&mut Stmt)) {
    for s in body.iter_mut() {
        f(s);
        match &mut s.kind {
            StmtKind::If { then_block, else_block, .. } => {
                visit_stmts(then_block, f);
                if let Some(els) = else_block {
                    visit_stmts(els, f);
                }
            }
            StmtKind::While { body, .. } => visit_stmts(body, f),
            _ => {}
        }
    }
}

fn visit_blocks(body: &mut Vec<Stmt>, f: &mut impl FnMut(&mut Vec<Stmt>)) {
    f(body);
    for s in body.iter_mut() {
        match &mut s.kind {
            StmtKind::If { then_block, else_block, .. } => {
                visit_blocks(then_block, f);
                if let Some(els) = else_block {
                    visit_blocks(els, f);
                }
            }
            StmtKind::While { body, .. } => visit_blocks(body, f),
            _ => {}
        }
    }
}

fn for_each_expr(prog: &mut Program, f: &mut impl FnMut(&mut Expr)) {
    for func in &mut prog.functions {
        visit_stmts(&mut func.body, &mut |s| {
            let e = match &mut s.kind {
                StmtKind::Let { value, .. }
                | StmtKind::Assign { value, .. }
                | StmtKind::Return { value }
                | StmtKind::ExprStmt { value } => value,
                StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => cond,
            };
            visit_exprs(e, f);
        });
    }
}

fn flip(op: BinOp) -> BinOp {
    match op {
        BinOp::Add => BinOp::Sub,
        BinOp::Sub => BinOp::Add,
        BinOp::Mul => BinOp::Div,
        BinOp::Div => BinOp::Mul,
        BinOp::Rem => BinOp::Div,
        BinOp::Lt => BinOp::Le,
        BinOp::Le => BinOp::Lt,
        BinOp::Gt => BinOp::Ge,
        BinOp::Ge => BinOp::Gt,
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        BinOp::And => BinOp::Or,
        BinOp::Or => BinOp::And,
    }
}

fn try_mutation(rng: &mut CorpusRng, prog: &mut Program, kind: MutationKind) -> bool {
    match kind {
        MutationKind::ConstantChange => {
            let mut total = 0usize;
            for_each_expr(prog, &mut |e| {
                if matches!(e.kind, ExprKind::Int(_)) {
                    total += 1;
                }
            });
            if total == 0 {
                return false;
            }
            let target = rng.random_range(0..total);
            let deltas = [-3i64, -2, -1, 1, 2, 3];
            let delta = deltas[rng.random_range(0..deltas.len())];
            let mut seen = 0usize;
            for_each_expr(prog, &mut |e| {
                if let ExprKind::Int(v) = &mut e.kind {
                    if seen == target {
                        *v = (*v + delta).clamp(-999, 999);
                    }
                    seen += 1;
                }
            });
            true
        }
        MutationKind::OperatorFlip => {
            let mut total = 0usize;
            for_each_expr(prog, &mut |e| {
                if matches!(e.kind, ExprKind::Binary { .. }) {
                    total += 1;
                }
            });
            if total == 0 {
                return false;
            }
            let target = rng.random_range(0..total);
            let mut seen = 0usize;
            for_each_expr(prog, &mut |e| {
                if let ExprKind::Binary { op, .. } = &mut e.kind {
                    if seen == target {
                        *op = flip(*op);
                    }
                    seen += 1;
                }
            });
            true
        }
        MutationKind::StatementInsert => {
            let fi = rng.random_range(0..prog.functions.len());
            let func = &mut prog.functions[fi];
            let insert_var = func.params.first().cloned();
            let mut blocks = 0usize;
            visit_blocks(&mut func.body, &mut |_| blocks += 1);
            let target = rng.random_range(0..blocks);
            let pick = rng.random_range(0..100u32);
            let mut seen = 0usize;
            visit_blocks(&mut func.body, &mut |block| {
                if seen == target {
                    let pos = (pick as usize) % (block.len() + 1);
                    let new_stmt = match &insert_var {
                        Some(p) if pick % 2 == 0 => stmt(StmtKind::Assign {
                            name: p.clone(),
                            value: expr(ExprKind::Binary {
                                op: BinOp::Add,
                                lhs: Box::new(var(p)),
                                rhs: Box::new(int(1)),
                            }),
                        }),
                        _ => stmt(StmtKind::Let {
                            name: "ins".to_string(),
                            value: int((pick % 7) as i64),
                        }),
                    };
                    block.insert(pos, new_stmt);
                }
                seen += 1;
            });
            true
        }
        MutationKind::StatementDelete => {
            let fi = rng.random_range(0..prog.functions.len());
            let func = &mut prog.functions[fi];
            let mut candidates = 0usize;
            visit_blocks(&mut func.body, &mut |block| {
                if !block.is_empty() {
                    candidates += 1;
                }
            });
            if candidates == 0 {
                return false;
            }
            let target = rng.random_range(0..candidates);
            let pick = rng.random_range(0..100u32) as usize;
            let mut seen = 0usize;
            visit_blocks(&mut func.body, &mut |block| {
                if !block.is_empty() {
                    if seen == target {
                        block.remove(pick % block.len());
                    }
                    seen += 1;
                }
            });
            true
        }
        MutationKind::BranchSwap => {
            let mut total = 0usize;
            for func in &mut prog.functions {
                visit_stmts(&mut func.body, &mut |s| {
                    if matches!(s.kind, StmtKind::If { else_block: Some(_), .. }) {
                        total += 1;
                    }
                });
            }
            if total == 0 {
                return false;
            }
            let target = rng.random_range(0..total);
            let mut seen = 0usize;
            for func in &mut prog.functions {
                visit_stmts(&mut func.body, &mut |s| {
                    if let StmtKind::If { then_block, else_block: Some(els), .. } = &mut s.kind {
                        if seen == target {
                            std::mem::swap(then_block, els);
                        }
                        seen += 1;
                    }
                });
            }
            true
        }
        MutationKind::FunctionAdd => {
            // Fresh, never-referenced name: an addition must not capture
            // calls that were dangling in the baseline.
            let mut k = 0usize;
            let name = loop {
                let candidate = format!("addf{k}");
                if prog.function(&candidate).is_none() {
                    break candidate;
                }
                k += 1;
            };
            let body = vec![stmt(StmtKind::Return {
                value: expr(ExprKind::Binary {
                    op: BinOp::Add,
                    lhs: Box::new(var("q0")),
                    rhs: Box::new(int(rng.random_range(0..=5))),
                }),
            })];
            prog.functions.push(FunctionDef {
                name,
                params: vec!["q0".to_string()],
                body,
                reqs: Default::default(),
                span: Span::default(),
            });
            true
        }
        MutationKind::FunctionDelete => {
            if prog.functions.len() <= 1 {
                return false;
            }
            let fi = rng.random_range(0..prog.functions.len());
            prog.functions.remove(fi);
            true
        }
    }
}

/// Applies `count` random mutations (each retried across kinds until one
/// applies) and returns the re-parsed result plus the kinds used.
pub fn mutate(rng: &mut CorpusRng, prog: &Program, count: usize) -> (Program, Vec<MutationKind>) {
    let mut mutated = prog.clone();
    let mut applied = Vec::new();
    for _ in 0..count {
        for _attempt in 0..16 {
            let kind = ALL_MUTATIONS[rng.random_range(0..ALL_MUTATIONS.len())];
            if try_mutation(rng, &mut mutated, kind) {
                applied.push(kind);
                break;
            }
        }
    }
    (reparse(&mutated), applied)
}

/// A whitespace/comment-only rewrite: padding, blank lines, and `//`
/// notes. Tokens and annotations are untouched, so the edit is invisible
/// to canonical hashing.
pub fn whitespace_comment_edit(rng: &mut CorpusRng, source: &str) -> String {
    let mut out = String::new();
    for line in source.lines() {
        if rng.random_bool(0.3) {
            out.push_str("    ");
        }
        out.push_str(line);
        if rng.random_bool(0.3) {
            out.push_str("  // touched");
        }
        out.push('\n');
        if rng.random_bool(0.2) {
            out.push('\n');
        }
    }
    out
}

/// Delta between two in-memory versions, by body hash and params.
pub fn delta_between(old: &Program, new: &Program) -> FunctionDelta {
    FunctionDelta::compute(&summaries(old), &summaries(new))
}

fn summaries(prog: &Program) -> BTreeMap<String, (String, Vec<String>)> {
    prog.functions
        .iter()
        .map(|f| (f.name.clone(), (f.body_hash(), f.params.clone())))
        .collect()
}

/// Dangerous edges between two in-memory versions.
pub fn dangerous_between(old: &Program, new: &Program, delta: &FunctionDelta) -> DangerousEdgeSet {
    let old_cfgs = build_cfgs(old);
    let new_cfgs = build_cfgs(new);
    let params = |p: &Program| -> BTreeMap<String, Vec<String>> {
        p.functions.iter().map(|f| (f.name.clone(), f.params.clone())).collect()
    };
    dangerous_edges(&delta.modified, &old_cfgs, &params(old), &new_cfgs, &params(new))
}

/// Writes a project directory: `src/main.ml0`, `tests.json`,
/// `requirements.json`.
pub fn write_project(
    dir: &Path,
    source: &str,
    suite: &[TestCase],
    reqs: &[Requirement],
) -> std::io::Result<()> {
    use abstf_core::interp::SuiteManifest;
    use abstf_core::matrix::RequirementsFile;
    let src_dir = dir.join("src");
    std::fs::create_dir_all(&src_dir)?;
    std::fs::write(src_dir.join("main.ml0"), source)?;
    let manifest = SuiteManifest { tests: suite.to_vec() };
    std::fs::write(
        dir.join("tests.json"),
        serde_json::to_string_pretty(&manifest).expect("suite json"),
    )?;
    let file = RequirementsFile { requirements: reqs.to_vec() };
    std::fs::write(
        dir.join("requirements.json"),
        serde_json::to_string_pretty(&file).expect("requirements json"),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig::default();
        let a = gen_program(&mut rng_from_seed(7), &cfg);
        let b = gen_program(&mut rng_from_seed(7), &cfg);
        assert_eq!(program_text(&a), program_text(&b));
        let c = gen_program(&mut rng_from_seed(8), &cfg);
        assert_ne!(program_text(&a), program_text(&c));
    }

    #[test]
    fn generated_programs_parse_and_execute() {
        let cfg = GenConfig::default();
        for seed in 0..30 {
            let mut rng = rng_from_seed(seed);
            let prog = gen_program(&mut rng, &cfg);
            assert!(prog.functions.len() >= 3);
            let suite = gen_suite(&mut rng, &prog, &cfg);
            assert!(suite.len() >= 10);
            // Expectations were computed by execution, so the suite
            // passes on its own version.
            let cfgs = build_cfgs(&prog);
            for result in abstf_core::interp::execute_suite(&prog, &cfgs, &suite, cfg.step_limit) {
                assert_eq!(
                    result.outcome.status,
                    abstf_core::interp::TestStatus::Pass,
                    "{result:?}"
                );
            }
        }
    }

    #[test]
    fn mutations_apply_and_reparse() {
        let cfg = GenConfig::default();
        for seed in 0..30 {
            let mut rng = rng_from_seed(seed);
            let prog = gen_program(&mut rng, &cfg);
            let (mutated, kinds) = mutate(&mut rng, &prog, 3);
            assert_eq!(kinds.len(), 3, "every mutation found an applicable site");
            let _ = delta_between(&prog, &mutated);
        }
    }

    #[test]
    fn whitespace_edit_preserves_hashes() {
        let cfg = GenConfig::default();
        let mut rng = rng_from_seed(11);
        let prog = gen_program(&mut rng, &cfg);
        let noisy = whitespace_comment_edit(&mut rng, &program_text(&prog));
        let reparsed = parse_program(&noisy, "<noisy>").unwrap();
        let delta = delta_between(&prog, &reparsed);
        assert!(delta.is_empty(), "{delta:?}");
    }
}
