//! Safe regression test selection: lockstep CFG comparison computes the
//! dangerous edges of each modified function, and a test is selected when
//! its recorded trace crosses a dangerous edge or enters a deleted
//! function. Node identity across versions is never positional — the
//! synchronous walk pairs nodes by canonical label, so insertions and
//! deletions shift ids without breaking the comparison.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::cfg::{Cfg, EdgeKey};
use crate::interp::EdgeTrace;

/// Name-level diff between two program versions. The four sets are
/// disjoint and cover both versions' names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDelta {
    pub added: BTreeSet<String>,
    pub deleted: BTreeSet<String>,
    pub modified: BTreeSet<String>,
    pub unchanged: BTreeSet<String>,
}

impl FunctionDelta {
    /// Diff of `(body_hash, params)` summaries keyed by function name.
    pub fn compute(
        old: &BTreeMap<String, (String, Vec<String>)>,
        new: &BTreeMap<String, (String, Vec<String>)>,
    ) -> Self {
        let mut delta = FunctionDelta::default();
        for (name, summary) in new {
            match old.get(name) {
                None => {
                    delta.added.insert(name.clone());
                }
                Some(old_summary) if old_summary == summary => {
                    delta.unchanged.insert(name.clone());
                }
                Some(_) => {
                    delta.modified.insert(name.clone());
                }
            }
        }
        for name in old.keys() {
            if !new.contains_key(name) {
                delta.deleted.insert(name.clone());
            }
        }
        delta
    }

    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.deleted.is_empty() && self.modified.is_empty()
    }
}

/// Dangerous edges per modified function, in the OLD version's
/// coordinates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DangerousEdgeSet {
    pub per_function: BTreeMap<String, BTreeSet<EdgeKey>>,
}

impl DangerousEdgeSet {
    pub fn is_empty(&self) -> bool {
        self.per_function.values().all(BTreeSet::is_empty)
    }
}

/// Synchronous traversal of two CFG versions from their entries. For
/// every old edge `(n, L)` whose counterpart is missing or leads to a
/// node with a different kind or label, `(n, L)` is dangerous and the
/// walk does not descend; matching targets recurse. Each node pair is
/// visited at most once, so the walk takes at most |old|·|new| steps.
pub fn compare_cfgs(old: &Cfg, new: &Cfg) -> BTreeSet<EdgeKey> {
    compare_cfgs_counted(old, new).0
}

pub(crate) fn compare_cfgs_counted(old: &Cfg, new: &Cfg) -> (BTreeSet<EdgeKey>, usize) {
    let mut dangerous = BTreeSet::new();
    let mut visited: HashSet<(u32, u32)> = HashSet::new();
    let mut stack = vec![(old.entry, new.entry)];
    while let Some((n, n2)) = stack.pop() {
        if !visited.insert((n, n2)) {
            continue;
        }
        for edge in old.out_edges(n) {
            match new.out_edge(n2, edge.label) {
                None => {
                    dangerous.insert((n, edge.label));
                }
                Some(counterpart) => {
                    let m = old.node(edge.dst);
                    let m2 = new.node(counterpart.dst);
                    if m.kind != m2.kind || m.label != m2.label {
                        dangerous.insert((n, edge.label));
                    } else {
                        stack.push((edge.dst, counterpart.dst));
                    }
                }
            }
        }
    }
    let pairs = visited.len();
    (dangerous, pairs)
}

/// Dangerous edges for every modified function. A parameter-list change
/// conservatively marks all old edges of the function dangerous — the
/// binding change is invisible to the graph walk.
pub fn dangerous_edges(
    modified: &BTreeSet<String>,
    old_cfgs: &BTreeMap<String, Cfg>,
    old_params: &BTreeMap<String, Vec<String>>,
    new_cfgs: &BTreeMap<String, Cfg>,
    new_params: &BTreeMap<String, Vec<String>>,
) -> DangerousEdgeSet {
    let mut per_function = BTreeMap::new();
    for name in modified {
        let old_cfg = &old_cfgs[name];
        let edges = if old_params.get(name) != new_params.get(name) {
            old_cfg.edge_keys()
        } else {
            compare_cfgs(old_cfg, &new_cfgs[name])
        };
        per_function.insert(name.clone(), edges);
    }
    DangerousEdgeSet { per_function }
}

/// Why a test was selected: it traversed a dangerous edge, or it entered
/// a function that no longer exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Reason {
    Edge { function: String, edge: EdgeKey },
    Deleted { deleted: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Selected test names, sorted.
    pub selected: BTreeSet<String>,
    /// Every qualifying hit per selected test.
    pub reasons: BTreeMap<String, Vec<Reason>>,
    /// Reserved; this technique never falls back to retest-all.
    #[serde(default, skip_serializing)]
    pub retest_all_required: bool,
    /// Functions new in this version, which no existing test can cover.
    #[serde(rename = "added")]
    pub new_functions_needing_tests: BTreeSet<String>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum SelectError {
    #[error(
        "trace for test `{test}` references edge ({src},{label}) of `{function}`, which is not \
         in the baseline CFGs; the baseline is stale — take a new snapshot"
    )]
    TraceVersionMismatch { test: String, function: String, src: u32, label: String },
}

/// Selects every test whose trace intersects a dangerous edge (rule a) or
/// enters a deleted function (rule b). Traces must have been recorded
/// against the old version; a trace that references an unknown edge key
/// fails with [`SelectError::TraceVersionMismatch`].
pub fn select_tests(
    delta: &FunctionDelta,
    dangerous: &DangerousEdgeSet,
    traces: &BTreeMap<String, EdgeTrace>,
    old_cfgs: &BTreeMap<String, Cfg>,
) -> Result<SelectionReport, SelectError> {
    for (test, trace) in traces {
        for (function, edges) in trace {
            for &(src, label) in edges {
                let known = old_cfgs
                    .get(function)
                    .map(|cfg| cfg.has_edge((src, label)))
                    .unwrap_or(false);
                if !known {
                    return Err(SelectError::TraceVersionMismatch {
                        test: test.clone(),
                        function: function.clone(),
                        src,
                        label: label.to_string(),
                    });
                }
            }
        }
    }

    let mut report = SelectionReport {
        new_functions_needing_tests: delta.added.clone(),
        ..SelectionReport::default()
    };
    for (test, trace) in traces {
        let mut reasons: Vec<Reason> = Vec::new();
        for (function, edges) in trace {
            if let Some(dangerous_edges) = dangerous.per_function.get(function) {
                for key in edges.intersection(dangerous_edges) {
                    reasons.push(Reason::Edge { function: function.clone(), edge: *key });
                }
            }
        }
        for function in &delta.deleted {
            if trace.get(function).is_some_and(|edges| !edges.is_empty()) {
                reasons.push(Reason::Deleted { deleted: function.clone() });
            }
        }
        if !reasons.is_empty() {
            report.selected.insert(test.clone());
            report.reasons.insert(test.clone(), reasons);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::{build_cfg, build_cfgs, EdgeLabel};
    use crate::lang::parse_program;

    fn cfg_of(src: &str) -> Cfg {
        let prog = parse_program(src, "t.ml0").unwrap();
        build_cfg(&prog.functions[0])
    }

    #[test]
    fn self_diff_is_empty() {
        for src in [
            "fn f() { return 1; }",
            "fn f(x) { if x { return 1; } else { return 2; } }",
            "fn f(x) { while x { x = x - 1; } return x; }",
        ] {
            let g = cfg_of(src);
            assert!(compare_cfgs(&g, &g).is_empty(), "self-diff of {src:?}");
        }
    }

    #[test]
    fn changed_return_marks_entry_edge() {
        // Hand-walk: the Entry out-edge leads to "return 1;" vs "return 2;",
        // whose labels differ, so (Entry, E) is dangerous and nothing else
        // is visited.
        let old = cfg_of("fn f() { return 1; }");
        let new = cfg_of("fn f() { return 2; }");
        assert_eq!(compare_cfgs(&old, &new), BTreeSet::from([(0, EdgeLabel::E)]));
    }

    #[test]
    fn changed_else_branch_marks_false_edge_only() {
        // Hand-walk: predicate labels match, T targets match, F targets
        // differ ("return 2;" vs "return 3;"), so only (predicate, F) is
        // dangerous.
        let old = cfg_of("fn f(x) { if x { return 1; } else { return 2; } }");
        let new = cfg_of("fn f(x) { if x { return 1; } else { return 3; } }");
        assert_eq!(compare_cfgs(&old, &new), BTreeSet::from([(1, EdgeLabel::F)]));
    }

    #[test]
    fn statement_insertion_marks_predecessor_edge() {
        let old = cfg_of("fn f(x) { x = x + 1; return x; }");
        let new = cfg_of("fn f(x) { x = x + 1; x = x * 2; return x; }");
        assert_eq!(compare_cfgs(&old, &new), BTreeSet::from([(1, EdgeLabel::E)]));
    }

    #[test]
    fn missing_branch_label_is_dangerous() {
        let old = cfg_of("fn f(x) { if x { return 1; } return 0; }");
        let new = cfg_of("fn f(x) { return 0; }");
        // Entry edge now leads to "return 0;" instead of the predicate.
        assert_eq!(compare_cfgs(&old, &new), BTreeSet::from([(0, EdgeLabel::E)]));
    }

    #[test]
    fn loop_comparison_terminates_within_pair_bound() {
        let old = cfg_of("fn f(x) { while x { x = x - 1; } return x; }");
        let new = cfg_of("fn f(x) { while x { x = x - 2; } return x; }");
        let (dangerous, pairs) = compare_cfgs_counted(&old, &new);
        assert_eq!(dangerous, BTreeSet::from([(1, EdgeLabel::T)]));
        assert!(pairs <= old.nodes.len() * new.nodes.len());
    }

    fn delta_of(old: &str, new: &str) -> FunctionDelta {
        let summarize = |src: &str| {
            let prog = parse_program(src, "v.ml0").unwrap();
            prog.functions
                .iter()
                .map(|f| (f.name.clone(), (f.body_hash(), f.params.clone())))
                .collect::<BTreeMap<_, _>>()
        };
        FunctionDelta::compute(&summarize(old), &summarize(new))
    }

    #[test]
    fn delta_partitions_names() {
        let delta = delta_of(
            "fn keep() { return 1; }\nfn gone() { return 2; }\nfn f(x) { return x; }",
            "fn keep() { return 1; }\nfn f(x) { return x + 1; }\nfn fresh() { return 3; }",
        );
        assert_eq!(delta.added, BTreeSet::from(["fresh".to_string()]));
        assert_eq!(delta.deleted, BTreeSet::from(["gone".to_string()]));
        assert_eq!(delta.modified, BTreeSet::from(["f".to_string()]));
        assert_eq!(delta.unchanged, BTreeSet::from(["keep".to_string()]));
    }

    #[test]
    fn param_change_counts_as_modified_and_marks_all_edges() {
        let old_src = "fn f(x) { return x; }";
        let new_src = "fn f(x, y) { return x; }";
        let delta = delta_of(old_src, new_src);
        assert_eq!(delta.modified, BTreeSet::from(["f".to_string()]));

        let old_prog = parse_program(old_src, "v.ml0").unwrap();
        let new_prog = parse_program(new_src, "v.ml0").unwrap();
        let old_cfgs = build_cfgs(&old_prog);
        let new_cfgs = build_cfgs(&new_prog);
        let old_params: BTreeMap<String, Vec<String>> =
            old_prog.functions.iter().map(|f| (f.name.clone(), f.params.clone())).collect();
        let new_params: BTreeMap<String, Vec<String>> =
            new_prog.functions.iter().map(|f| (f.name.clone(), f.params.clone())).collect();
        let dangerous =
            dangerous_edges(&delta.modified, &old_cfgs, &old_params, &new_cfgs, &new_params);
        assert_eq!(dangerous.per_function["f"], old_cfgs["f"].edge_keys());
    }

    fn trace(entries: &[(&str, &[EdgeKey])]) -> EdgeTrace {
        entries
            .iter()
            .map(|(f, edges)| (f.to_string(), edges.iter().copied().collect()))
            .collect()
    }

    #[test]
    fn no_changes_selects_nothing() {
        let cfg = cfg_of("fn f() { return 1; }");
        let old_cfgs = BTreeMap::from([("f".to_string(), cfg)]);
        let traces = BTreeMap::from([(
            "t1".to_string(),
            trace(&[("f", &[(0, EdgeLabel::E), (1, EdgeLabel::E)])]),
        )]);
        let report = select_tests(
            &FunctionDelta::default(),
            &DangerousEdgeSet::default(),
            &traces,
            &old_cfgs,
        )
        .unwrap();
        assert!(report.selected.is_empty());
        assert!(report.reasons.is_empty());
    }

    #[test]
    fn dangerous_hit_selects_with_reason() {
        let cfg = cfg_of("fn f(x) { if x { return 1; } else { return 2; } }");
        let old_cfgs = BTreeMap::from([("f".to_string(), cfg)]);
        let dangerous = DangerousEdgeSet {
            per_function: BTreeMap::from([(
                "f".to_string(),
                BTreeSet::from([(1, EdgeLabel::F)]),
            )]),
        };
        let traces = BTreeMap::from([
            ("hits".to_string(), trace(&[("f", &[(0, EdgeLabel::E), (1, EdgeLabel::F)])])),
            ("misses".to_string(), trace(&[("f", &[(0, EdgeLabel::E), (1, EdgeLabel::T)])])),
        ]);
        let report =
            select_tests(&FunctionDelta::default(), &dangerous, &traces, &old_cfgs).unwrap();
        assert_eq!(report.selected, BTreeSet::from(["hits".to_string()]));
        assert_eq!(
            report.reasons["hits"],
            vec![Reason::Edge { function: "f".to_string(), edge: (1, EdgeLabel::F) }]
        );
    }

    #[test]
    fn entering_deleted_function_selects() {
        let cfg = cfg_of("fn gone() { return 1; }");
        let old_cfgs = BTreeMap::from([("gone".to_string(), cfg)]);
        let delta = FunctionDelta {
            deleted: BTreeSet::from(["gone".to_string()]),
            ..FunctionDelta::default()
        };
        let traces = BTreeMap::from([
            ("in".to_string(), trace(&[("gone", &[(0, EdgeLabel::E)])])),
            ("out".to_string(), trace(&[])),
        ]);
        let report =
            select_tests(&delta, &DangerousEdgeSet::default(), &traces, &old_cfgs).unwrap();
        assert_eq!(report.selected, BTreeSet::from(["in".to_string()]));
        assert_eq!(
            report.reasons["in"],
            vec![Reason::Deleted { deleted: "gone".to_string() }]
        );
    }

    #[test]
    fn stale_trace_is_a_version_mismatch() {
        let cfg = cfg_of("fn f() { return 1; }");
        let old_cfgs = BTreeMap::from([("f".to_string(), cfg)]);
        let traces =
            BTreeMap::from([("t".to_string(), trace(&[("f", &[(7, EdgeLabel::T)])]))]);
        let err = select_tests(
            &FunctionDelta::default(),
            &DangerousEdgeSet::default(),
            &traces,
            &old_cfgs,
        )
        .unwrap_err();
        assert!(matches!(err, SelectError::TraceVersionMismatch { .. }));
    }

    #[test]
    fn selected_equals_tests_with_reasons() {
        let cfg = cfg_of("fn f(x) { if x { return 1; } else { return 2; } }");
        let old_cfgs = BTreeMap::from([("f".to_string(), cfg)]);
        let dangerous = DangerousEdgeSet {
            per_function: BTreeMap::from([(
                "f".to_string(),
                BTreeSet::from([(1, EdgeLabel::T)]),
            )]),
        };
        let traces = BTreeMap::from([
            ("a".to_string(), trace(&[("f", &[(1, EdgeLabel::T)])])),
            ("b".to_string(), trace(&[("f", &[(1, EdgeLabel::F)])])),
        ]);
        let report =
            select_tests(&FunctionDelta::default(), &dangerous, &traces, &old_cfgs).unwrap();
        let with_reasons: BTreeSet<String> = report.reasons.keys().cloned().collect();
        assert_eq!(report.selected, with_reasons);
    }

    #[test]
    fn selection_report_json_shape() {
        let report = SelectionReport {
            selected: BTreeSet::from(["t1".to_string()]),
            reasons: BTreeMap::from([(
                "t1".to_string(),
                vec![
                    Reason::Edge { function: "f".to_string(), edge: (3, EdgeLabel::T) },
                    Reason::Deleted { deleted: "g".to_string() },
                ],
            )]),
            retest_all_required: false,
            new_functions_needing_tests: BTreeSet::from(["h".to_string()]),
        };
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["selected"], serde_json::json!(["t1"]));
        assert_eq!(
            json["reasons"]["t1"],
            serde_json::json!([{"function": "f", "edge": [3, "T"]}, {"deleted": "g"}])
        );
        assert_eq!(json["added"], serde_json::json!(["h"]));
        let back: SelectionReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }
}
