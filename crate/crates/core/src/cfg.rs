//! Per-function control-flow graphs and the whole-program call graph.
//!
//! Construction rules:
//! * straight-line statements chain with `E` edges;
//! * `if` yields a predicate node with a `T` edge into the then-block and
//!   an `F` edge into the else-block (or to the successor when absent);
//! * `while` yields a predicate node with `T` into the body, back-edges
//!   from the body tails to the predicate, and `F` to the successor;
//! * `return` gets an `E` edge to Exit; a block falling off the end of
//!   the function gets an implicit edge to Exit.
//!
//! Node ids are dense and assigned in construction order (a pre-order
//! walk of the statement tree); Exit is created last. Statements that
//! follow a `return` still get nodes but no incoming edges.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::lang::ast::{Expr, ExprKind, FunctionDef, Program, Stmt, StmtKind};
use crate::lang::canon::stmt_label;

/// Edge label: `E` unconditional, `T`/`F` predicate branches. Declared in
/// string order so the derived `Ord` matches the serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeLabel {
    E,
    F,
    T,
}

impl std::fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EdgeLabel::E => "E",
            EdgeLabel::F => "F",
            EdgeLabel::T => "T",
        })
    }
}

/// `(src node id, label)` — identifies an edge within a CFG. The
/// destination is redundant because `(src, label)` is unique.
pub type EdgeKey = (u32, EdgeLabel);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Entry,
    Exit,
    Statement,
    Predicate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CfgNode {
    pub id: u32,
    pub kind: NodeKind,
    /// Canonical label; empty for Entry/Exit.
    pub label: String,
    /// Statement id linking back to the AST; not part of the dump, so
    /// graphs loaded from a snapshot carry `None`.
    #[serde(skip)]
    pub sid: Option<u32>,
}

// Node identity is (id, kind, label); the AST back-link is a build-time
// convenience and absent from deserialized graphs.
impl PartialEq for CfgNode {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.kind == other.kind && self.label == other.label
    }
}

impl Eq for CfgNode {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfgEdge {
    pub src: u32,
    pub dst: u32,
    pub label: EdgeLabel,
}

/// Control-flow graph of one function. Nodes are ordered by id, edges by
/// `(src, label)`; the serialized form is the canonical dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cfg {
    pub function: String,
    pub nodes: Vec<CfgNode>,
    pub edges: Vec<CfgEdge>,
    pub entry: u32,
    pub exit: u32,
}

impl Cfg {
    pub fn node(&self, id: u32) -> &CfgNode {
        &self.nodes[id as usize]
    }

    /// Out-edges of `src`, in label order.
    pub fn out_edges(&self, src: u32) -> &[CfgEdge] {
        let lo = self.edges.partition_point(|e| e.src < src);
        let hi = self.edges.partition_point(|e| e.src <= src);
        &self.edges[lo..hi]
    }

    pub fn out_edge(&self, src: u32, label: EdgeLabel) -> Option<&CfgEdge> {
        self.edges
            .binary_search_by(|e| (e.src, e.label).cmp(&(src, label)))
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn edge_keys(&self) -> BTreeSet<EdgeKey> {
        self.edges.iter().map(|e| (e.src, e.label)).collect()
    }

    pub fn has_edge(&self, key: EdgeKey) -> bool {
        self.out_edge(key.0, key.1).is_some()
    }
}

struct Builder {
    nodes: Vec<CfgNode>,
    edges: Vec<CfgEdge>,
    exit_pending: Vec<EdgeKey>,
}

impl Builder {
    fn add(&mut self, kind: NodeKind, label: String, sid: Option<u32>) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(CfgNode { id, kind, label, sid });
        id
    }

    fn connect(&mut self, incoming: &[EdgeKey], dst: u32) {
        for &(src, label) in incoming {
            self.edges.push(CfgEdge { src, dst, label });
        }
    }

    /// Builds the nodes for one block. `incoming` are the dangling edges
    /// that should reach the block's first node; the return value is the
    /// block's own dangling edges (empty after a `return`).
    fn block(&mut self, stmts: &[Stmt], mut incoming: Vec<EdgeKey>) -> Vec<EdgeKey> {
        for stmt in stmts {
            match &stmt.kind {
                StmtKind::Let { .. } | StmtKind::Assign { .. } | StmtKind::ExprStmt { .. } => {
                    let n = self.add(NodeKind::Statement, stmt_label(stmt), Some(stmt.sid));
                    self.connect(&incoming, n);
                    incoming = vec![(n, EdgeLabel::E)];
                }
                StmtKind::Return { .. } => {
                    let n = self.add(NodeKind::Statement, stmt_label(stmt), Some(stmt.sid));
                    self.connect(&incoming, n);
                    self.exit_pending.push((n, EdgeLabel::E));
                    incoming = Vec::new();
                }
                StmtKind::If { then_block, else_block, .. } => {
                    let p = self.add(NodeKind::Predicate, stmt_label(stmt), Some(stmt.sid));
                    self.connect(&incoming, p);
                    let mut outs = self.block(then_block, vec![(p, EdgeLabel::T)]);
                    match else_block {
                        Some(els) => {
                            outs.extend(self.block(els, vec![(p, EdgeLabel::F)]));
                        }
                        None => outs.push((p, EdgeLabel::F)),
                    }
                    incoming = outs;
                }
                StmtKind::While { body, .. } => {
                    let p = self.add(NodeKind::Predicate, stmt_label(stmt), Some(stmt.sid));
                    self.connect(&incoming, p);
                    let body_outs = self.block(body, vec![(p, EdgeLabel::T)]);
                    self.connect(&body_outs, p);
                    incoming = vec![(p, EdgeLabel::F)];
                }
            }
        }
        incoming
    }
}

/// Builds the control-flow graph of a parsed function.
pub fn build_cfg(f: &FunctionDef) -> Cfg {
    let mut b = Builder { nodes: Vec::new(), edges: Vec::new(), exit_pending: Vec::new() };
    let entry = b.add(NodeKind::Entry, String::new(), None);
    let outs = b.block(&f.body, vec![(entry, EdgeLabel::E)]);
    b.exit_pending.extend(outs);
    let exit = b.add(NodeKind::Exit, String::new(), None);
    let pending = std::mem::take(&mut b.exit_pending);
    b.connect(&pending, exit);
    let Builder { nodes, mut edges, .. } = b;
    edges.sort_by_key(|e| (e.src, e.label));
    debug_assert!(edges.windows(2).all(|w| (w[0].src, w[0].label) != (w[1].src, w[1].label)));
    Cfg { function: f.name.clone(), nodes, edges, entry, exit }
}

/// Builds CFGs for every function of a program, keyed by function name.
pub fn build_cfgs(prog: &Program) -> std::collections::BTreeMap<String, Cfg> {
    prog.functions.iter().map(|f| (f.name.clone(), build_cfg(f))).collect()
}

/// One syntactic call site; `ordinal` numbers sites within the caller in
/// source order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallSite {
    pub caller: String,
    pub callee: String,
    pub ordinal: u32,
    /// False when the callee has no definition in the program.
    pub callee_defined: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallGraph {
    /// Defined function names.
    pub nodes: BTreeSet<String>,
    pub call_sites: Vec<CallSite>,
}

impl CallGraph {
    /// Direct callers of `callee`, excluding `callee` itself.
    pub fn callers_of(&self, callee: &str) -> BTreeSet<&str> {
        self.call_sites
            .iter()
            .filter(|s| s.callee == callee && s.caller != callee)
            .map(|s| s.caller.as_str())
            .collect()
    }

    /// `{f}` plus every function from which `f` is reachable along call
    /// edges — the reverse-transitive caller set.
    pub fn reverse_reachable(&self, f: &str) -> BTreeSet<String> {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        seen.insert(f.to_string());
        let mut work = vec![f.to_string()];
        while let Some(cur) = work.pop() {
            for site in &self.call_sites {
                if site.callee == cur && !seen.contains(&site.caller) {
                    seen.insert(site.caller.clone());
                    work.push(site.caller.clone());
                }
            }
        }
        seen
    }
}

/// Collects every syntactic call expression, including calls nested in
/// conditions and arguments.
pub fn build_call_graph(prog: &Program) -> CallGraph {
    let defined: BTreeSet<String> = prog.function_names();
    let mut call_sites = Vec::new();
    for f in &prog.functions {
        let mut callees = Vec::new();
        collect_calls_block(&f.body, &mut callees);
        for (ordinal, callee) in callees.into_iter().enumerate() {
            let callee_defined = defined.contains(&callee);
            call_sites.push(CallSite {
                caller: f.name.clone(),
                callee,
                ordinal: ordinal as u32,
                callee_defined,
            });
        }
    }
    CallGraph { nodes: defined, call_sites }
}

fn collect_calls_block(stmts: &[Stmt], out: &mut Vec<String>) {
    for stmt in stmts {
        collect_calls_expr(stmt.expr(), out);
        match &stmt.kind {
            StmtKind::If { then_block, else_block, .. } => {
                collect_calls_block(then_block, out);
                if let Some(els) = else_block {
                    collect_calls_block(els, out);
                }
            }
            StmtKind::While { body, .. } => collect_calls_block(body, out),
            _ => {}
        }
    }
}

fn collect_calls_expr(expr: &Expr, out: &mut Vec<String>) {
    match &expr.kind {
        ExprKind::Int(_) | ExprKind::Var(_) => {}
        ExprKind::Call { callee, args } => {
            out.push(callee.clone());
            for a in args {
                collect_calls_expr(a, out);
            }
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            collect_calls_expr(lhs, out);
            collect_calls_expr(rhs, out);
        }
        ExprKind::Unary { operand, .. } => collect_calls_expr(operand, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn cfg_of(src: &str) -> Cfg {
        let prog = parse_program(src, "t.ml0").unwrap();
        build_cfg(&prog.functions[0])
    }

    fn edge_triples(cfg: &Cfg) -> Vec<(u32, EdgeLabel, u32)> {
        cfg.edges.iter().map(|e| (e.src, e.label, e.dst)).collect()
    }

    #[test]
    fn straight_line_return() {
        let cfg = cfg_of("fn f() { return 1; }");
        assert_eq!(cfg.nodes.len(), 3);
        assert_eq!(cfg.node(0).kind, NodeKind::Entry);
        assert_eq!(cfg.node(1).kind, NodeKind::Statement);
        assert_eq!(cfg.node(1).label, "return 1;");
        assert_eq!(cfg.node(2).kind, NodeKind::Exit);
        assert_eq!(
            edge_triples(&cfg),
            vec![(0, EdgeLabel::E, 1), (1, EdgeLabel::E, 2)]
        );
        assert_eq!(cfg.entry, 0);
        assert_eq!(cfg.exit, 2);
    }

    #[test]
    fn if_else_shape() {
        let cfg = cfg_of("fn f(x) { if x { return 1; } else { return 2; } }");
        assert_eq!(cfg.nodes.len(), 5);
        assert_eq!(cfg.edges.len(), 5);
        assert_eq!(cfg.node(1).kind, NodeKind::Predicate);
        assert_eq!(cfg.node(1).label, "if x");
        assert_eq!(cfg.out_edge(1, EdgeLabel::T).unwrap().dst, 2);
        assert_eq!(cfg.out_edge(1, EdgeLabel::F).unwrap().dst, 3);
    }

    #[test]
    fn while_back_edge() {
        let cfg = cfg_of("fn f(x) { while x { x = x - 1; } return x; }");
        // Entry 0, predicate 1, body stmt 2, return 3, exit 4.
        assert_eq!(cfg.node(1).label, "while x");
        assert_eq!(cfg.out_edge(1, EdgeLabel::T).unwrap().dst, 2);
        assert_eq!(cfg.out_edge(2, EdgeLabel::E).unwrap().dst, 1, "body tail loops back");
        assert_eq!(cfg.out_edge(1, EdgeLabel::F).unwrap().dst, 3);
        assert_eq!(cfg.out_edge(3, EdgeLabel::E).unwrap().dst, 4);
    }

    #[test]
    fn if_without_else_falls_through() {
        let cfg = cfg_of("fn f(x) { if x { x = 1; } return x; }");
        // Entry 0, predicate 1, then-stmt 2, return 3, exit 4.
        assert_eq!(cfg.out_edge(1, EdgeLabel::T).unwrap().dst, 2);
        assert_eq!(cfg.out_edge(1, EdgeLabel::F).unwrap().dst, 3);
        assert_eq!(cfg.out_edge(2, EdgeLabel::E).unwrap().dst, 3);
    }

    #[test]
    fn empty_body_is_entry_to_exit() {
        let cfg = cfg_of("fn f() { }");
        assert_eq!(cfg.nodes.len(), 2);
        assert_eq!(edge_triples(&cfg), vec![(0, EdgeLabel::E, 1)]);
    }

    #[test]
    fn statements_after_return_get_nodes_without_incoming_edges() {
        let cfg = cfg_of("fn f() { return 1; let x = 2; }");
        assert_eq!(cfg.nodes.len(), 4);
        let dead = cfg.node(2);
        assert_eq!(dead.label, "let x = 2;");
        assert!(cfg.edges.iter().all(|e| e.dst != dead.id));
        // The dead chain still flows onward (here: to Exit).
        assert!(cfg.out_edge(2, EdgeLabel::E).is_some());
    }

    #[test]
    fn determinism_and_degree_laws() {
        let src = "fn f(x, y) { let a = 0; while x > 0 { if y { a = a + x; } else { a = a - x; } x = x - 1; } return a; }";
        let a = cfg_of(src);
        let b = cfg_of(src);
        assert_eq!(a, b);
        for node in &a.nodes {
            let degree = a.out_edges(node.id).len();
            match node.kind {
                NodeKind::Predicate => {
                    assert_eq!(degree, 2);
                    assert!(a.out_edge(node.id, EdgeLabel::T).is_some());
                    assert!(a.out_edge(node.id, EdgeLabel::F).is_some());
                }
                NodeKind::Statement => assert!(degree <= 1),
                NodeKind::Exit => assert_eq!(degree, 0),
                NodeKind::Entry => assert_eq!(degree, 1),
            }
        }
    }

    #[test]
    fn dump_shape_and_round_trip() {
        let cfg = cfg_of("fn f(x) { if x { return 1; } return 0; }");
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"kind\":\"predicate\""));
        assert!(json.contains("\"label\":\"T\""));
        let back: Cfg = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn call_sites_in_source_order() {
        let src = "fn f(a) { return a; }\nfn g(x) { return f(1) + f(2); }";
        let prog = parse_program(src, "t.ml0").unwrap();
        let cg = build_call_graph(&prog);
        let sites: Vec<(&str, &str, u32)> = cg
            .call_sites
            .iter()
            .map(|s| (s.caller.as_str(), s.callee.as_str(), s.ordinal))
            .collect();
        assert_eq!(sites, vec![("g", "f", 0), ("g", "f", 1)]);
    }

    #[test]
    fn no_calls_means_empty_sites() {
        let prog = parse_program("fn f() { return 1; }", "t.ml0").unwrap();
        assert!(build_call_graph(&prog).call_sites.is_empty());
    }

    #[test]
    fn chain_of_calls() {
        let src = "fn f() { return 1; }\nfn g() { return f(); }\nfn main() { return g(); }";
        let prog = parse_program(src, "t.ml0").unwrap();
        let cg = build_call_graph(&prog);
        let pairs: BTreeSet<(&str, &str)> = cg
            .call_sites
            .iter()
            .map(|s| (s.caller.as_str(), s.callee.as_str()))
            .collect();
        assert_eq!(pairs, BTreeSet::from([("main", "g"), ("g", "f")]));
        assert_eq!(
            cg.reverse_reachable("f"),
            BTreeSet::from(["f".to_string(), "g".to_string(), "main".to_string()])
        );
    }

    #[test]
    fn undefined_callee_is_flagged() {
        let prog = parse_program("fn g() { return missing(1); }", "t.ml0").unwrap();
        let cg = build_call_graph(&prog);
        assert_eq!(cg.call_sites.len(), 1);
        assert!(!cg.call_sites[0].callee_defined);
        assert!(!cg.nodes.contains("missing"));
    }

    #[test]
    fn calls_inside_conditions_and_nested_args() {
        let src = "fn p(x) { return x; }\nfn q(x) { if p(x) > 0 { return p(p(x)); } return 0; }";
        let prog = parse_program(src, "t.ml0").unwrap();
        let cg = build_call_graph(&prog);
        let from_q: Vec<u32> = cg
            .call_sites
            .iter()
            .filter(|s| s.caller == "q")
            .map(|s| s.ordinal)
            .collect();
        assert_eq!(from_q, vec![0, 1, 2]);
    }
}
