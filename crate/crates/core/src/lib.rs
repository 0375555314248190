//! Regression-maintenance toolkit for MiniLang projects.
//!
//! The pieces, bottom to top:
//!
//! * [`lang`] — MiniLang parsing and canonical rendering;
//! * [`cfg`] — per-function control-flow graphs and the call graph;
//! * [`interp`] — instrumented interpreter producing edge traces;
//! * [`selection`] — CFG differencing and safe test selection;
//! * [`impact`] — call-site counts and reverse reachability;
//! * [`matrix`] — requirements↔code↔tests traceability and findings;
//! * [`snapshot`] — persisted baselines and change detection;
//! * [`testgen`] — bounded search for tests covering dangerous edges;
//! * [`pipeline`] / [`watch`] — orchestration, reports, polling mode.

pub mod cfg;
pub mod impact;
pub mod interp;
pub mod lang;
pub mod matrix;
pub mod pipeline;
pub mod project;
pub mod selection;
pub mod snapshot;
pub mod testgen;
pub mod watch;

pub use cfg::{build_call_graph, build_cfg, build_cfgs, CallGraph, Cfg, EdgeKey, EdgeLabel};
pub use impact::{compute_impact, ImpactReport};
pub use interp::{
    execute, execute_suite, run_test, EdgeTrace, ErrorKind, ExecResult, ExpectedOutcome,
    TestCase, TestOutcome, TestStatus,
};
pub use lang::{parse_program, ParseError, Program};
pub use matrix::{build_matrix, check_completeness, Finding, FindingKind, Requirement, TraceMatrix};
pub use pipeline::{
    run_pipeline, PipelineError, PipelineReport, PipelineSettings, ProjectLayout,
};
pub use project::load_project;
pub use selection::{
    compare_cfgs, select_tests, DangerousEdgeSet, FunctionDelta, SelectionReport,
};
pub use snapshot::{detect_changes, take_snapshot, ChangeSet, Snapshot};
pub use testgen::{find_targets, synthesize_tests, GenTarget, GeneratedTest};
pub use watch::{watch_loop, Watcher};
