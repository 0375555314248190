//! Change impact: how much other code depends on each changed function,
//! measured as direct call-site counts plus reverse call-graph
//! reachability.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cfg::CallGraph;
use crate::selection::FunctionDelta;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactEntry {
    pub function: String,
    /// Call sites targeting the function from other functions; self-calls
    /// do not count.
    pub call_sites: u32,
    /// The function plus every transitive caller, sorted.
    pub impacted: BTreeSet<String>,
}

/// Entries ranked by (call sites descending, name ascending).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImpactReport {
    pub entries: Vec<ImpactEntry>,
}

fn entry_for(function: &str, graph: &CallGraph) -> ImpactEntry {
    let call_sites = graph
        .call_sites
        .iter()
        .filter(|s| s.callee == function && s.caller != function)
        .count() as u32;
    ImpactEntry {
        function: function.to_string(),
        call_sites,
        impacted: graph.reverse_reachable(function),
    }
}

/// Measures every changed function: modified and added functions against
/// the new version's call graph, deleted functions against the old one
/// (their callers only exist there).
pub fn compute_impact(
    delta: &FunctionDelta,
    new_graph: &CallGraph,
    old_graph: &CallGraph,
) -> ImpactReport {
    let mut entries: Vec<ImpactEntry> = delta
        .modified
        .iter()
        .chain(delta.added.iter())
        .map(|f| entry_for(f, new_graph))
        .chain(delta.deleted.iter().map(|f| entry_for(f, old_graph)))
        .collect();
    entries.sort_by(|a, b| {
        b.call_sites.cmp(&a.call_sites).then_with(|| a.function.cmp(&b.function))
    });
    ImpactReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_call_graph;
    use crate::lang::parse_program;

    fn graph(src: &str) -> CallGraph {
        build_call_graph(&parse_program(src, "t.ml0").unwrap())
    }

    fn delta_modified(names: &[&str]) -> FunctionDelta {
        FunctionDelta {
            modified: names.iter().map(|s| s.to_string()).collect(),
            ..FunctionDelta::default()
        }
    }

    /// Independent oracle: repeatedly add any caller of a member until
    /// the set stops growing.
    fn fixpoint_callers(graph: &CallGraph, f: &str) -> BTreeSet<String> {
        let mut set = BTreeSet::from([f.to_string()]);
        loop {
            let before = set.len();
            let additions: Vec<String> = graph
                .call_sites
                .iter()
                .filter(|s| set.contains(&s.callee))
                .map(|s| s.caller.clone())
                .collect();
            set.extend(additions);
            if set.len() == before {
                return set;
            }
        }
    }

    #[test]
    fn isolated_root() {
        let g = graph("fn main() { return 1; }");
        let report = compute_impact(&delta_modified(&["main"]), &g, &g);
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].call_sites, 0);
        assert_eq!(report.entries[0].impacted, BTreeSet::from(["main".to_string()]));
    }

    #[test]
    fn two_call_sites_and_transitive_callers() {
        // Worked by brute-force reverse reachability: g calls f twice,
        // main calls g, so f's impact is {f, g, main} with count 2.
        let g = graph(
            "fn f(a) { return a; }\nfn g(x) { return f(x) + f(x + 1); }\nfn main() { return g(0); }",
        );
        let report = compute_impact(&delta_modified(&["f"]), &g, &g);
        assert_eq!(report.entries[0].call_sites, 2);
        assert_eq!(
            report.entries[0].impacted,
            BTreeSet::from(["f".to_string(), "g".to_string(), "main".to_string()])
        );
        assert_eq!(report.entries[0].impacted, fixpoint_callers(&g, "f"));
    }

    #[test]
    fn mutual_recursion_cycle() {
        // Brute-force on the 2-cycle: a and b reach each other.
        let g = graph("fn a(x) { return b(x); }\nfn b(x) { return a(x); }");
        let report = compute_impact(&delta_modified(&["a"]), &g, &g);
        assert_eq!(
            report.entries[0].impacted,
            BTreeSet::from(["a".to_string(), "b".to_string()])
        );
        assert_eq!(report.entries[0].impacted, fixpoint_callers(&g, "a"));
    }

    #[test]
    fn self_calls_do_not_count_but_keep_membership() {
        let g = graph("fn f(x) { return f(x - 1); }");
        let report = compute_impact(&delta_modified(&["f"]), &g, &g);
        assert_eq!(report.entries[0].call_sites, 0);
        assert!(report.entries[0].impacted.contains("f"));
    }

    #[test]
    fn deleted_functions_use_the_old_graph() {
        let old = graph("fn gone() { return 1; }\nfn user() { return gone(); }");
        let new = graph("fn user() { return gone(); }");
        let delta = FunctionDelta {
            deleted: BTreeSet::from(["gone".to_string()]),
            ..FunctionDelta::default()
        };
        let report = compute_impact(&delta, &new, &old);
        assert_eq!(report.entries[0].call_sites, 1);
        assert_eq!(
            report.entries[0].impacted,
            BTreeSet::from(["gone".to_string(), "user".to_string()])
        );
    }

    #[test]
    fn ranking_is_total_and_deterministic() {
        let g = graph(
            "fn a() { return 0; }\nfn b() { return 0; }\nfn c() { return a() + b() + b(); }",
        );
        let report = compute_impact(&delta_modified(&["a", "b"]), &g, &g);
        let order: Vec<&str> = report.entries.iter().map(|e| e.function.as_str()).collect();
        assert_eq!(order, ["b", "a"], "b has 2 sites, a has 1");
        let again = compute_impact(&delta_modified(&["a", "b"]), &g, &g);
        assert_eq!(report, again);
    }
}
