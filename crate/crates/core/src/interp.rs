//! Deterministic interpreter for MiniLang with per-function edge tracing.
//!
//! Semantics: call-by-value with left-to-right argument evaluation;
//! checked 64-bit arithmetic (overflow is an error outcome, not a wrap);
//! `/` and `%` truncate toward zero and reject a zero divisor; comparisons
//! yield 1/0; `&&` and `||` short-circuit and normalize to 1/0; zero is
//! false, anything else true. Reading a never-assigned variable yields 0;
//! assignment to an undeclared name creates the binding; scope is flat per
//! call frame.
//!
//! Execution walks the function's CFG and records every edge it traverses
//! into a per-function set, starting with the Entry out-edge. The walk is
//! driven by an explicit frame stack (no host recursion), so deep subject
//! recursion hits the step limit instead of exhausting the native stack:
//! every call frame executes at least one statement, so the step limit
//! also bounds frame depth.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cfg::{Cfg, EdgeKey, EdgeLabel, NodeKind};
use crate::lang::ast::{BinOp, Expr, ExprKind, FunctionDef, Program, Stmt, StmtKind, UnOp};

/// Per-function set of traversed `(src, label)` edge keys.
pub type EdgeTrace = BTreeMap<String, BTreeSet<EdgeKey>>;

/// Why an execution stopped without producing a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    DivByZero,
    Overflow,
    StepLimit,
    UndefinedFunction,
    ArityMismatch,
    MissingReturn,
}

/// Raw result of running one entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecResult {
    Value(i64),
    Error(ErrorKind),
}

/// What a test expects: a concrete value, or any error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExpectedOutcome {
    Value { value: i64 },
    Error(ErrorExpectation),
}

/// Serialized as the bare string `"error"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorExpectation {
    #[serde(rename = "error")]
    Error,
}

impl ExpectedOutcome {
    pub fn value(v: i64) -> Self {
        ExpectedOutcome::Value { value: v }
    }

    pub fn error() -> Self {
        ExpectedOutcome::Error(ErrorExpectation::Error)
    }

    pub fn is_error(&self) -> bool {
        matches!(self, ExpectedOutcome::Error(_))
    }
}

/// One suite entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub name: String,
    pub entry: String,
    pub args: Vec<i64>,
    pub expected: ExpectedOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestStatus {
    Pass,
    Fail,
    Error,
}

/// Judged outcome of one test. `Pass`/`Fail` carry the produced value; a
/// test that expected an error and got one passes with its `error_kind`
/// recorded; `Error` means the run errored unexpectedly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub status: TestStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<ErrorKind>,
}

impl TestOutcome {
    pub fn judge(expected: &ExpectedOutcome, actual: ExecResult) -> TestOutcome {
        match actual {
            ExecResult::Value(v) => TestOutcome {
                status: if *expected == ExpectedOutcome::value(v) {
                    TestStatus::Pass
                } else {
                    TestStatus::Fail
                },
                value: Some(v),
                error_kind: None,
            },
            ExecResult::Error(kind) => TestOutcome {
                status: if expected.is_error() { TestStatus::Pass } else { TestStatus::Error },
                value: None,
                error_kind: Some(kind),
            },
        }
    }
}

/// Outcome and trace of one suite entry, in suite order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: String,
    pub outcome: TestOutcome,
    pub trace: EdgeTrace,
}

// --- runtime tables ---

struct FnRt<'p> {
    def: &'p FunctionDef,
    cfg: &'p Cfg,
    /// Statements indexed by sid (dense pre-order within the function).
    stmts: Vec<&'p Stmt>,
}

fn collect_stmts<'p>(body: &'p [Stmt], out: &mut Vec<&'p Stmt>) {
    for stmt in body {
        debug_assert_eq!(stmt.sid as usize, out.len(), "sids must be dense pre-order");
        out.push(stmt);
        match &stmt.kind {
            StmtKind::If { then_block, else_block, .. } => {
                collect_stmts(then_block, out);
                if let Some(els) = else_block {
                    collect_stmts(els, out);
                }
            }
            StmtKind::While { body, .. } => collect_stmts(body, out),
            _ => {}
        }
    }
}

struct Runtime<'p> {
    fns: Vec<FnRt<'p>>,
    by_name: BTreeMap<&'p str, usize>,
}

impl<'p> Runtime<'p> {
    fn new(prog: &'p Program, cfgs: &'p BTreeMap<String, Cfg>) -> Self {
        let mut fns = Vec::with_capacity(prog.functions.len());
        let mut by_name = BTreeMap::new();
        for def in &prog.functions {
            let cfg = cfgs
                .get(&def.name)
                .expect("caller must supply a CFG for every function of the program");
            let mut stmts = Vec::new();
            collect_stmts(&def.body, &mut stmts);
            by_name.insert(def.name.as_str(), fns.len());
            fns.push(FnRt { def, cfg, stmts });
        }
        Runtime { fns, by_name }
    }
}

// --- the VM ---

struct Frame<'p> {
    fn_idx: usize,
    env: Vec<(&'p str, i64)>,
    cur: u32,
    eval: Option<EvalState<'p>>,
}

struct EvalState<'p> {
    work: Vec<Work<'p>>,
    operands: Vec<i64>,
}

impl<'p> EvalState<'p> {
    fn new(expr: &'p Expr) -> Self {
        EvalState { work: vec![Work::Eval(expr)], operands: Vec::new() }
    }
}

enum Work<'p> {
    Eval(&'p Expr),
    Binary(BinOp),
    Unary(UnOp),
    /// Pop a value, push 1 if nonzero else 0.
    Normalize,
    ShortCircuit { op: BinOp, rhs: &'p Expr },
    Call { callee: &'p str, argc: usize },
}

enum EvalStep<'p> {
    Finished(i64),
    Call { fn_idx: usize, env: Vec<(&'p str, i64)> },
}

fn env_get(env: &[(&str, i64)], name: &str) -> i64 {
    env.iter().rev().find(|(n, _)| *n == name).map(|(_, v)| *v).unwrap_or(0)
}

fn env_set<'p>(env: &mut Vec<(&'p str, i64)>, name: &'p str, value: i64) {
    if let Some(slot) = env.iter_mut().find(|(n, _)| *n == name) {
        slot.1 = value;
    } else {
        env.push((name, value));
    }
}

fn truth(v: i64) -> i64 {
    (v != 0) as i64
}

fn apply_binary(op: BinOp, l: i64, r: i64) -> Result<i64, ErrorKind> {
    match op {
        BinOp::Add => l.checked_add(r).ok_or(ErrorKind::Overflow),
        BinOp::Sub => l.checked_sub(r).ok_or(ErrorKind::Overflow),
        BinOp::Mul => l.checked_mul(r).ok_or(ErrorKind::Overflow),
        BinOp::Div => {
            if r == 0 {
                Err(ErrorKind::DivByZero)
            } else {
                l.checked_div(r).ok_or(ErrorKind::Overflow)
            }
        }
        BinOp::Rem => {
            if r == 0 {
                Err(ErrorKind::DivByZero)
            } else {
                l.checked_rem(r).ok_or(ErrorKind::Overflow)
            }
        }
        BinOp::Lt => Ok((l < r) as i64),
        BinOp::Le => Ok((l <= r) as i64),
        BinOp::Gt => Ok((l > r) as i64),
        BinOp::Ge => Ok((l >= r) as i64),
        BinOp::Eq => Ok((l == r) as i64),
        BinOp::Ne => Ok((l != r) as i64),
        BinOp::And | BinOp::Or => unreachable!("short-circuit ops never reach apply_binary"),
    }
}

fn apply_unary(op: UnOp, v: i64) -> Result<i64, ErrorKind> {
    match op {
        UnOp::Neg => v.checked_neg().ok_or(ErrorKind::Overflow),
        UnOp::Not => Ok((v == 0) as i64),
    }
}

/// Advances one expression evaluation until it finishes, needs a callee
/// frame, or errors.
fn step_eval<'p>(
    eval: &mut EvalState<'p>,
    env: &[(&'p str, i64)],
    rt: &Runtime<'p>,
) -> Result<EvalStep<'p>, ErrorKind> {
    loop {
        let Some(work) = eval.work.pop() else {
            let v = eval.operands.pop().expect("finished eval leaves exactly one operand");
            debug_assert!(eval.operands.is_empty());
            return Ok(EvalStep::Finished(v));
        };
        match work {
            Work::Eval(expr) => match &expr.kind {
                ExprKind::Int(v) => eval.operands.push(*v),
                ExprKind::Var(name) => eval.operands.push(env_get(env, name)),
                ExprKind::Unary { op, operand } => {
                    eval.work.push(Work::Unary(*op));
                    eval.work.push(Work::Eval(operand));
                }
                ExprKind::Binary { op: op @ (BinOp::And | BinOp::Or), lhs, rhs } => {
                    eval.work.push(Work::ShortCircuit { op: *op, rhs });
                    eval.work.push(Work::Eval(lhs));
                }
                ExprKind::Binary { op, lhs, rhs } => {
                    eval.work.push(Work::Binary(*op));
                    eval.work.push(Work::Eval(rhs));
                    eval.work.push(Work::Eval(lhs));
                }
                ExprKind::Call { callee, args } => {
                    eval.work.push(Work::Call { callee, argc: args.len() });
                    for arg in args.iter().rev() {
                        eval.work.push(Work::Eval(arg));
                    }
                }
            },
            Work::Binary(op) => {
                let r = eval.operands.pop().expect("binary rhs");
                let l = eval.operands.pop().expect("binary lhs");
                eval.operands.push(apply_binary(op, l, r)?);
            }
            Work::Unary(op) => {
                let v = eval.operands.pop().expect("unary operand");
                eval.operands.push(apply_unary(op, v)?);
            }
            Work::Normalize => {
                let v = eval.operands.pop().expect("normalize operand");
                eval.operands.push(truth(v));
            }
            Work::ShortCircuit { op, rhs } => {
                let l = eval.operands.pop().expect("short-circuit lhs");
                match op {
                    BinOp::And if l == 0 => eval.operands.push(0),
                    BinOp::Or if l != 0 => eval.operands.push(1),
                    _ => {
                        eval.work.push(Work::Normalize);
                        eval.work.push(Work::Eval(rhs));
                    }
                }
            }
            Work::Call { callee, argc } => {
                let at = eval.operands.len() - argc;
                let args = eval.operands.split_off(at);
                let Some(&fn_idx) = rt.by_name.get(callee) else {
                    return Err(ErrorKind::UndefinedFunction);
                };
                let callee_rt = &rt.fns[fn_idx];
                if callee_rt.def.params.len() != argc {
                    return Err(ErrorKind::ArityMismatch);
                }
                let env = callee_rt
                    .def
                    .params
                    .iter()
                    .map(String::as_str)
                    .zip(args)
                    .collect();
                return Ok(EvalStep::Call { fn_idx, env });
            }
        }
    }
}

fn run_vm<'p>(
    rt: &Runtime<'p>,
    entry_idx: usize,
    env: Vec<(&'p str, i64)>,
    step_limit: u64,
) -> (ExecResult, EdgeTrace) {
    let mut traces: Vec<BTreeSet<EdgeKey>> = vec![BTreeSet::new(); rt.fns.len()];
    let mut frames = vec![Frame {
        fn_idx: entry_idx,
        env,
        cur: rt.fns[entry_idx].cfg.entry,
        eval: None,
    }];
    let mut steps: u64 = 0;

    let result = 'vm: loop {
        let depth = frames.len() - 1;
        let frame = &mut frames[depth];
        let fn_rt = &rt.fns[frame.fn_idx];

        if let Some(mut eval) = frame.eval.take() {
            match step_eval(&mut eval, &frame.env, rt) {
                Err(kind) => break 'vm ExecResult::Error(kind),
                Ok(EvalStep::Call { fn_idx, env }) => {
                    // Leave the caller suspended mid-expression.
                    frame.eval = Some(eval);
                    let cur = rt.fns[fn_idx].cfg.entry;
                    frames.push(Frame { fn_idx, env, cur, eval: None });
                }
                Ok(EvalStep::Finished(value)) => {
                    let node = fn_rt.cfg.node(frame.cur);
                    let sid = node.sid.expect("executable CFG carries statement ids");
                    let stmt = fn_rt.stmts[sid as usize];
                    match &stmt.kind {
                        StmtKind::Let { name, .. } | StmtKind::Assign { name, .. } => {
                            env_set(&mut frame.env, name, value);
                            advance(frame, fn_rt, &mut traces, EdgeLabel::E);
                        }
                        StmtKind::ExprStmt { .. } => {
                            advance(frame, fn_rt, &mut traces, EdgeLabel::E);
                        }
                        StmtKind::If { .. } | StmtKind::While { .. } => {
                            let label = if value != 0 { EdgeLabel::T } else { EdgeLabel::F };
                            advance(frame, fn_rt, &mut traces, label);
                        }
                        StmtKind::Return { .. } => {
                            advance(frame, fn_rt, &mut traces, EdgeLabel::E);
                            frames.pop();
                            match frames.last_mut() {
                                None => break 'vm ExecResult::Value(value),
                                Some(parent) => parent
                                    .eval
                                    .as_mut()
                                    .expect("caller suspended mid-eval")
                                    .operands
                                    .push(value),
                            }
                        }
                    }
                }
            }
            continue;
        }

        let node = fn_rt.cfg.node(frame.cur);
        match node.kind {
            NodeKind::Entry => advance(frame, fn_rt, &mut traces, EdgeLabel::E),
            NodeKind::Exit => break 'vm ExecResult::Error(ErrorKind::MissingReturn),
            NodeKind::Statement | NodeKind::Predicate => {
                steps += 1;
                if steps > step_limit {
                    break 'vm ExecResult::Error(ErrorKind::StepLimit);
                }
                let sid = node.sid.expect("executable CFG carries statement ids");
                frame.eval = Some(EvalState::new(fn_rt.stmts[sid as usize].expr()));
            }
        }
    };

    let mut trace = EdgeTrace::new();
    for (idx, edges) in traces.into_iter().enumerate() {
        if !edges.is_empty() {
            trace.insert(rt.fns[idx].def.name.clone(), edges);
        }
    }
    (result, trace)
}

/// Takes the labeled out-edge of the frame's current node, recording it.
fn advance<'p>(
    frame: &mut Frame<'p>,
    fn_rt: &FnRt<'p>,
    traces: &mut [BTreeSet<EdgeKey>],
    label: EdgeLabel,
) {
    let edge = fn_rt
        .cfg
        .out_edge(frame.cur, label)
        .expect("construction guarantees the labeled out-edge exists");
    traces[frame.fn_idx].insert((frame.cur, label));
    frame.cur = edge.dst;
}

/// Runs `entry(args)` and returns the raw result plus the edge trace.
pub fn execute(
    prog: &Program,
    cfgs: &BTreeMap<String, Cfg>,
    entry: &str,
    args: &[i64],
    step_limit: u64,
) -> (ExecResult, EdgeTrace) {
    let rt = Runtime::new(prog, cfgs);
    execute_in(&rt, entry, args, step_limit)
}

fn execute_in<'p>(
    rt: &Runtime<'p>,
    entry: &str,
    args: &[i64],
    step_limit: u64,
) -> (ExecResult, EdgeTrace) {
    let Some(&idx) = rt.by_name.get(entry) else {
        return (ExecResult::Error(ErrorKind::UndefinedFunction), EdgeTrace::new());
    };
    if rt.fns[idx].def.params.len() != args.len() {
        return (ExecResult::Error(ErrorKind::ArityMismatch), EdgeTrace::new());
    }
    let env = rt.fns[idx].def.params.iter().map(String::as_str).zip(args.iter().copied()).collect();
    run_vm(rt, idx, env, step_limit)
}

/// Runs one test: executes it and judges the outcome against the
/// expectation. Errors come back inside the outcome, never as panics.
pub fn run_test(
    prog: &Program,
    cfgs: &BTreeMap<String, Cfg>,
    test: &TestCase,
    step_limit: u64,
) -> (TestOutcome, EdgeTrace) {
    let (result, trace) = execute(prog, cfgs, &test.entry, &test.args, step_limit);
    (TestOutcome::judge(&test.expected, result), trace)
}

/// Runs a whole suite in declared order; each test gets a fresh
/// environment, so one test's failure never affects another.
pub fn execute_suite(
    prog: &Program,
    cfgs: &BTreeMap<String, Cfg>,
    suite: &[TestCase],
    step_limit: u64,
) -> Vec<SuiteResult> {
    let rt = Runtime::new(prog, cfgs);
    suite
        .iter()
        .map(|test| {
            let (result, trace) = execute_in(&rt, &test.entry, &test.args, step_limit);
            SuiteResult {
                name: test.name.clone(),
                outcome: TestOutcome::judge(&test.expected, result),
                trace,
            }
        })
        .collect()
}

// --- suite manifest ---

/// `tests.json`: `{"tests":[{"name","entry","args","expected"}...]}` where
/// `expected` is `{"value": N}` or the string `"error"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub tests: Vec<TestCase>,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("duplicate test name `{name}`")]
    DuplicateName { name: String },
    #[error("test `{test}`: entry `{entry}` takes {expected} argument(s), got {got}")]
    ArityMismatch { test: String, entry: String, expected: usize, got: usize },
}

pub fn parse_suite(json: &str, path: &str) -> Result<Vec<TestCase>, SuiteError> {
    let manifest: SuiteManifest = serde_json::from_str(json)
        .map_err(|source| SuiteError::Json { path: path.to_string(), source })?;
    let mut seen = BTreeSet::new();
    for t in &manifest.tests {
        if !seen.insert(t.name.clone()) {
            return Err(SuiteError::DuplicateName { name: t.name.clone() });
        }
    }
    Ok(manifest.tests)
}

pub fn load_suite(path: &Path) -> Result<Vec<TestCase>, SuiteError> {
    let text = std::fs::read_to_string(path).map_err(|source| SuiteError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_suite(&text, &path.display().to_string())
}

/// Checks declared arity for every test whose entry is defined. Undefined
/// entries are left to execution, which reports them per test.
pub fn validate_suite(suite: &[TestCase], prog: &Program) -> Result<(), SuiteError> {
    for t in suite {
        if let Some(f) = prog.function(&t.entry) {
            if f.params.len() != t.args.len() {
                return Err(SuiteError::ArityMismatch {
                    test: t.name.clone(),
                    entry: t.entry.clone(),
                    expected: f.params.len(),
                    got: t.args.len(),
                });
            }
        }
    }
    Ok(())
}

/// Digest of the suite's canonical JSON form; whitespace edits to the
/// manifest do not change it.
pub fn suite_digest(suite: &[TestCase]) -> String {
    use sha2::{Digest, Sha256};
    let canonical = serde_json::to_string(&SuiteManifest { tests: suite.to_vec() })
        .expect("suite serialization cannot fail");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_cfgs;
    use crate::lang::parse_program;

    fn setup(src: &str) -> (Program, BTreeMap<String, Cfg>) {
        let prog = parse_program(src, "t.ml0").unwrap();
        let cfgs = build_cfgs(&prog);
        (prog, cfgs)
    }

    fn test(name: &str, entry: &str, args: &[i64], expected: ExpectedOutcome) -> TestCase {
        TestCase {
            name: name.into(),
            entry: entry.into(),
            args: args.to_vec(),
            expected,
        }
    }

    #[test]
    fn single_path_trace() {
        let (prog, cfgs) = setup("fn main() { return 1; }");
        let t = test("t", "main", &[], ExpectedOutcome::value(1));
        let (outcome, trace) = run_test(&prog, &cfgs, &t, 1000);
        assert_eq!(outcome.status, TestStatus::Pass);
        assert_eq!(outcome.value, Some(1));
        let main_edges = &trace["main"];
        assert_eq!(
            main_edges,
            &BTreeSet::from([(0, EdgeLabel::E), (1, EdgeLabel::E)])
        );
    }

    #[test]
    fn div_by_zero() {
        let (prog, cfgs) = setup("fn d(x) { return 1 / x; }");
        let t = test("t", "d", &[0], ExpectedOutcome::value(1));
        let (outcome, _) = run_test(&prog, &cfgs, &t, 1000);
        assert_eq!(outcome.status, TestStatus::Error);
        assert_eq!(outcome.error_kind, Some(ErrorKind::DivByZero));
    }

    #[test]
    fn recursive_fib() {
        // fib(6): 0 1 1 2 3 5 8, worked by hand.
        let src = "fn fib(n) { if n < 2 { return n; } return fib(n - 1) + fib(n - 2); }";
        let (prog, cfgs) = setup(src);
        let t = test("t", "fib", &[6], ExpectedOutcome::value(8));
        let (outcome, trace) = run_test(&prog, &cfgs, &t, 10_000);
        assert_eq!(outcome.status, TestStatus::Pass);
        assert_eq!(outcome.value, Some(8));
        // Both branches of the base-case test were taken somewhere in the
        // recursion tree.
        let edges = &trace["fib"];
        assert!(edges.contains(&(1, EdgeLabel::T)));
        assert!(edges.contains(&(1, EdgeLabel::F)));
    }

    #[test]
    fn while_loop_sum() {
        let src = "fn sum(n) { let s = 0; while n > 0 { s = s + n; n = n - 1; } return s; }";
        let (prog, cfgs) = setup(src);
        let (result, _) = execute(&prog, &cfgs, "sum", &[10], 10_000);
        assert_eq!(result, ExecResult::Value(55));
    }

    #[test]
    fn overflow_is_an_error() {
        let (prog, cfgs) = setup("fn f() { return 9223372036854775807 + 1; }");
        let (result, _) = execute(&prog, &cfgs, "f", &[], 100);
        assert_eq!(result, ExecResult::Error(ErrorKind::Overflow));
        let (prog, cfgs) = setup("fn g(x) { return -x / -1; }");
        let (result, _) = execute(&prog, &cfgs, "g", &[i64::MIN], 100);
        assert_eq!(result, ExecResult::Error(ErrorKind::Overflow));
    }

    #[test]
    fn short_circuit_skips_rhs() {
        let src = "fn boom() { return 1 / 0; }\nfn f(x) { return x && boom(); }\nfn g(x) { return x || boom(); }";
        let (prog, cfgs) = setup(src);
        let (result, trace) = execute(&prog, &cfgs, "f", &[0], 100);
        assert_eq!(result, ExecResult::Value(0));
        assert!(!trace.contains_key("boom"), "rhs must not run");
        let (result, _) = execute(&prog, &cfgs, "g", &[7], 100);
        assert_eq!(result, ExecResult::Value(1), "|| normalizes to 1");
        let (result, _) = execute(&prog, &cfgs, "f", &[3], 100);
        assert_eq!(result, ExecResult::Error(ErrorKind::DivByZero));
    }

    #[test]
    fn step_limit_stops_infinite_loop() {
        let (prog, cfgs) = setup("fn f() { while 1 { let x = 0; } return 0; }");
        let (result, _) = execute(&prog, &cfgs, "f", &[], 500);
        assert_eq!(result, ExecResult::Error(ErrorKind::StepLimit));
    }

    #[test]
    fn step_limit_stops_runaway_recursion_without_blowing_the_stack() {
        let (prog, cfgs) = setup("fn f(x) { return f(x + 1); }");
        let (result, _) = execute(&prog, &cfgs, "f", &[0], 200_000);
        assert_eq!(result, ExecResult::Error(ErrorKind::StepLimit));
    }

    #[test]
    fn missing_return() {
        let (prog, cfgs) = setup("fn f(x) { let y = x; }");
        let (result, trace) = execute(&prog, &cfgs, "f", &[1], 100);
        assert_eq!(result, ExecResult::Error(ErrorKind::MissingReturn));
        // The fall-off edge into Exit is part of the trace.
        assert!(trace["f"].contains(&(1, EdgeLabel::E)));
    }

    #[test]
    fn undefined_function_and_arity() {
        let (prog, cfgs) = setup("fn f(x) { return g(x); }\nfn two(a, b) { return a; }");
        let (result, _) = execute(&prog, &cfgs, "f", &[1], 100);
        assert_eq!(result, ExecResult::Error(ErrorKind::UndefinedFunction));
        let (result, _) = execute(&prog, &cfgs, "missing", &[], 100);
        assert_eq!(result, ExecResult::Error(ErrorKind::UndefinedFunction));
        let (prog, cfgs) = setup("fn f() { return two(1); }\nfn two(a, b) { return a; }");
        let (result, _) = execute(&prog, &cfgs, "f", &[], 100);
        assert_eq!(result, ExecResult::Error(ErrorKind::ArityMismatch));
    }

    #[test]
    fn expected_error_passes_on_any_error_kind() {
        let (prog, cfgs) = setup("fn d(x) { return 1 / x; }");
        let t = test("t", "d", &[0], ExpectedOutcome::error());
        let (outcome, _) = run_test(&prog, &cfgs, &t, 100);
        assert_eq!(outcome.status, TestStatus::Pass);
        assert_eq!(outcome.error_kind, Some(ErrorKind::DivByZero));
        // A value when an error was expected is a plain failure.
        let t = test("t", "d", &[2], ExpectedOutcome::error());
        let (outcome, _) = run_test(&prog, &cfgs, &t, 100);
        assert_eq!(outcome.status, TestStatus::Fail);
        assert_eq!(outcome.value, Some(0));
    }

    #[test]
    fn unassigned_variable_reads_zero() {
        let (prog, cfgs) = setup("fn f() { x = x + 1; return x + y; }");
        let (result, _) = execute(&prog, &cfgs, "f", &[], 100);
        assert_eq!(result, ExecResult::Value(1));
    }

    #[test]
    fn suite_runs_in_order_and_isolated() {
        let src = "fn a() { return 1; }\nfn b() { while 1 { let x = 0; } return 0; }";
        let (prog, cfgs) = setup(src);
        let suite = vec![
            test("t1", "a", &[], ExpectedOutcome::value(1)),
            test("t2", "b", &[], ExpectedOutcome::value(0)),
            test("t3", "a", &[], ExpectedOutcome::value(2)),
            test("t4", "nope", &[], ExpectedOutcome::value(0)),
        ];
        let results = execute_suite(&prog, &cfgs, &suite, 200);
        let names: Vec<&str> = results.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["t1", "t2", "t3", "t4"]);
        assert_eq!(results[0].outcome.status, TestStatus::Pass);
        assert_eq!(results[1].outcome.error_kind, Some(ErrorKind::StepLimit));
        assert_eq!(results[2].outcome.status, TestStatus::Fail);
        assert_eq!(results[3].outcome.error_kind, Some(ErrorKind::UndefinedFunction));
    }

    #[test]
    fn empty_suite() {
        let (prog, cfgs) = setup("fn a() { return 1; }");
        assert!(execute_suite(&prog, &cfgs, &[], 100).is_empty());
    }

    #[test]
    fn determinism() {
        let src = "fn f(x) { let s = 0; while x > 0 { if x % 2 { s = s + x; } x = x - 1; } return s; }";
        let (prog, cfgs) = setup(src);
        let t = test("t", "f", &[9], ExpectedOutcome::value(25));
        let a = run_test(&prog, &cfgs, &t, 10_000);
        let b = run_test(&prog, &cfgs, &t, 10_000);
        assert_eq!(a, b);
        assert_eq!(a.0.status, TestStatus::Pass, "9+7+5+3+1 = 25");
    }

    #[test]
    fn traced_edges_exist_and_form_a_walk() {
        let src = "fn f(x) { if x { x = x - 1; } else { x = x + 1; } while x > 0 { x = x - 2; } return x; }";
        let (prog, cfgs) = setup(src);
        for arg in -3..=3 {
            let (_, trace) = execute(&prog, &cfgs, "f", &[arg], 1000);
            for (name, edges) in &trace {
                let cfg = &cfgs[name];
                let mut dsts = BTreeSet::new();
                for &(src_id, label) in edges {
                    let e = cfg.out_edge(src_id, label).expect("traced edge exists in CFG");
                    dsts.insert(e.dst);
                }
                for &(src_id, _) in edges {
                    assert!(
                        src_id == cfg.entry || dsts.contains(&src_id),
                        "every traced edge hangs off Entry or another traced edge"
                    );
                }
            }
        }
    }

    #[test]
    fn expected_outcome_serde_forms() {
        let v: ExpectedOutcome = serde_json::from_str("{\"value\":8}").unwrap();
        assert_eq!(v, ExpectedOutcome::value(8));
        let e: ExpectedOutcome = serde_json::from_str("\"error\"").unwrap();
        assert!(e.is_error());
        assert_eq!(serde_json::to_string(&v).unwrap(), "{\"value\":8}");
        assert_eq!(serde_json::to_string(&e).unwrap(), "\"error\"");
    }

    #[test]
    fn suite_manifest_validation() {
        let json = r#"{"tests":[{"name":"t1","entry":"main","args":[3],"expected":{"value":8}},
                                 {"name":"t1","entry":"main","args":[],"expected":"error"}]}"#;
        let err = parse_suite(json, "tests.json").unwrap_err();
        assert!(matches!(err, SuiteError::DuplicateName { ref name } if name == "t1"));

        let (prog, _) = setup("fn main(x) { return x; }");
        let suite = vec![test("t", "main", &[1, 2], ExpectedOutcome::value(1))];
        assert!(matches!(
            validate_suite(&suite, &prog),
            Err(SuiteError::ArityMismatch { expected: 1, got: 2, .. })
        ));
        let suite = vec![test("t", "ghost", &[1, 2], ExpectedOutcome::value(1))];
        assert!(validate_suite(&suite, &prog).is_ok(), "undefined entries pass load validation");
    }
}
