//! Test synthesis for uncovered dangerous edges: bounded exhaustive
//! search over small integer inputs, accepting the first input whose
//! trace crosses the target edge. Expected outcomes lock in the new
//! version's observed behavior — characterization tests for human
//! review, written to `generated_tests.json` rather than merged into the
//! suite.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::cfg::{CallGraph, Cfg, EdgeKey};
use crate::interp::{execute, ExecResult, ExpectedOutcome, TestCase};
use crate::lang::Program;
use crate::selection::{DangerousEdgeSet, FunctionDelta};

/// An edge of the new version's CFG that no test covers, plus the entry
/// points worth searching: the function itself first, then its
/// transitive callers sorted by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenTarget {
    pub function: String,
    pub edge: EdgeKey,
    pub entry_candidates: Vec<String>,
}

/// A synthesized test. Replaying it on the version it was generated
/// against traverses `provenance.edge` and reproduces `expected`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedTest {
    pub name: String,
    pub entry: String,
    pub args: Vec<i64>,
    pub expected: ExpectedOutcome,
    pub provenance: GenTarget,
}

impl GeneratedTest {
    pub fn to_test_case(&self) -> TestCase {
        TestCase {
            name: self.name.clone(),
            entry: self.entry.clone(),
            args: self.args.clone(),
            expected: self.expected,
        }
    }
}

/// `generated_tests.json`: the `tests.json` schema plus a provenance
/// field per test, so the file also loads as an ordinary suite.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedTestsFile {
    pub tests: Vec<GeneratedTest>,
}

/// Translates old-coordinate edge keys into the new version's ids using
/// the same lockstep walk as the CFG comparison; keys whose source pair
/// has no same-labeled counterpart are dropped.
pub fn map_edges_to_new(old: &Cfg, new: &Cfg, keys: &BTreeSet<EdgeKey>) -> BTreeSet<EdgeKey> {
    let mut mapped = BTreeSet::new();
    let mut visited: HashSet<(u32, u32)> = HashSet::new();
    let mut stack = vec![(old.entry, new.entry)];
    while let Some((n, n2)) = stack.pop() {
        if !visited.insert((n, n2)) {
            continue;
        }
        for edge in old.out_edges(n) {
            let Some(counterpart) = new.out_edge(n2, edge.label) else { continue };
            if keys.contains(&(n, edge.label)) {
                mapped.insert((n2, edge.label));
            }
            let m = old.node(edge.dst);
            let m2 = new.node(counterpart.dst);
            if m.kind == m2.kind && m.label == m2.label {
                stack.push((edge.dst, counterpart.dst));
            }
        }
    }
    mapped
}

/// Edges that still need a test after the selected tests re-ran on the
/// new version: the dangerous edges of modified functions mapped into new
/// coordinates, plus every edge of an added function, minus everything
/// `covered` already crosses.
pub fn find_targets(
    dangerous: &DangerousEdgeSet,
    delta: &FunctionDelta,
    old_cfgs: &BTreeMap<String, Cfg>,
    new_cfgs: &BTreeMap<String, Cfg>,
    new_graph: &CallGraph,
    covered: &BTreeMap<String, BTreeSet<EdgeKey>>,
) -> Vec<GenTarget> {
    let mut targets = Vec::new();
    let push_uncovered = |function: &str, edges: BTreeSet<EdgeKey>, targets: &mut Vec<GenTarget>| {
        let candidates = entry_candidates(new_graph, function);
        for edge in edges {
            let hit = covered.get(function).is_some_and(|set| set.contains(&edge));
            if !hit {
                targets.push(GenTarget {
                    function: function.to_string(),
                    edge,
                    entry_candidates: candidates.clone(),
                });
            }
        }
    };
    for function in &delta.modified {
        let keys = match dangerous.per_function.get(function) {
            Some(keys) if !keys.is_empty() => keys,
            _ => continue,
        };
        let mapped = map_edges_to_new(&old_cfgs[function], &new_cfgs[function], keys);
        push_uncovered(function, mapped, &mut targets);
    }
    for function in &delta.added {
        push_uncovered(function, new_cfgs[function].edge_keys(), &mut targets);
    }
    targets.sort_by(|a, b| a.function.cmp(&b.function).then_with(|| a.edge.cmp(&b.edge)));
    targets
}

fn entry_candidates(graph: &CallGraph, function: &str) -> Vec<String> {
    let mut rest: Vec<String> = graph
        .reverse_reachable(function)
        .into_iter()
        .filter(|f| f != function)
        .collect();
    rest.sort();
    let mut candidates = Vec::with_capacity(rest.len() + 1);
    candidates.push(function.to_string());
    candidates.extend(rest);
    candidates
}

#[derive(Debug, Clone, Copy)]
pub struct SynthesisConfig {
    /// Inclusive per-argument search range.
    pub domain: (i64, i64),
    /// Maximum executions per target.
    pub budget: u64,
    pub step_limit: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig { domain: (-8, 8), budget: 10_000, step_limit: 1_000_000 }
    }
}

/// Lexicographic odometer over `arity` digits in `[lo, hi]`; an arity of
/// zero yields exactly one empty tuple.
struct Tuples {
    digits: Vec<i64>,
    lo: i64,
    hi: i64,
    started: bool,
    done: bool,
}

impl Tuples {
    fn new(arity: usize, lo: i64, hi: i64) -> Self {
        Tuples { digits: vec![lo; arity], lo, hi, started: false, done: lo > hi && arity > 0 }
    }
}

impl Iterator for Tuples {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.digits.clone());
        }
        for i in (0..self.digits.len()).rev() {
            if self.digits[i] < self.hi {
                self.digits[i] += 1;
                for d in &mut self.digits[i + 1..] {
                    *d = self.lo;
                }
                return Some(self.digits.clone());
            }
        }
        self.done = true;
        None
    }
}

/// Searches each target in order. Targets already covered by an earlier
/// generated test's trace are skipped; the rest enumerate entry
/// candidates and argument tuples until the target edge is traversed or
/// the budget/domain runs out. Unmet targets are data, not errors.
pub fn synthesize_tests(
    targets: &[GenTarget],
    prog: &Program,
    cfgs: &BTreeMap<String, Cfg>,
    config: &SynthesisConfig,
    existing_names: &BTreeSet<String>,
) -> (Vec<GeneratedTest>, Vec<GenTarget>) {
    let mut generated: Vec<GeneratedTest> = Vec::new();
    let mut unmet: Vec<GenTarget> = Vec::new();
    let mut covered: BTreeMap<String, BTreeSet<EdgeKey>> = BTreeMap::new();
    let mut taken: BTreeSet<String> = existing_names.clone();
    let (lo, hi) = config.domain;

    'targets: for target in targets {
        if covered.get(&target.function).is_some_and(|set| set.contains(&target.edge)) {
            continue;
        }
        let mut trials: u64 = 0;
        for entry in &target.entry_candidates {
            let Some(def) = prog.function(entry) else { continue };
            for args in Tuples::new(def.params.len(), lo, hi) {
                trials += 1;
                if trials > config.budget {
                    unmet.push(target.clone());
                    continue 'targets;
                }
                let (result, trace) = execute(prog, cfgs, entry, &args, config.step_limit);
                let hit = trace
                    .get(&target.function)
                    .is_some_and(|edges| edges.contains(&target.edge));
                if !hit {
                    continue;
                }
                let expected = match result {
                    ExecResult::Value(v) => ExpectedOutcome::value(v),
                    ExecResult::Error(_) => ExpectedOutcome::error(),
                };
                let name = unique_name(&mut taken, target);
                for (function, edges) in trace {
                    covered.entry(function).or_default().extend(edges);
                }
                generated.push(GeneratedTest {
                    name,
                    entry: entry.clone(),
                    args,
                    expected,
                    provenance: target.clone(),
                });
                continue 'targets;
            }
        }
        unmet.push(target.clone());
    }
    (generated, unmet)
}

fn unique_name(taken: &mut BTreeSet<String>, target: &GenTarget) -> String {
    let base = format!("gen_{}_{}_{}", target.function, target.edge.0, target.edge.1);
    let mut name = base.clone();
    let mut n = 2;
    while taken.contains(&name) {
        name = format!("{base}_{n}");
        n += 1;
    }
    taken.insert(name.clone());
    name
}
