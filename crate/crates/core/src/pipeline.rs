//! One-shot pipeline: diff the project against its baseline, compute
//! dangerous edges, select and re-execute the affected tests, measure
//! impact, refresh the traceability findings, synthesize tests for
//! uncovered dangerous edges, and assemble the report.
//!
//! The report is pure data; writing `report.json`, `report.txt`, and
//! `generated_tests.json` is a separate step so callers (CLI one-shots,
//! the watcher, tests) decide what touches disk.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cfg::{build_call_graph, build_cfgs, EdgeKey};
use crate::impact::{compute_impact, ImpactReport};
use crate::interp::{load_suite, run_test, EdgeTrace, TestCase, TestOutcome};
use crate::matrix::{build_matrix, check_completeness, load_requirements, Finding, FindingKind};
use crate::matrix::MatrixError;
use crate::project::{load_project, LoadError};
use crate::selection::{
    dangerous_edges, select_tests, Reason, SelectError, SelectionReport,
};
use crate::snapshot::{diff_program, write_atomic, ChangeSet, Snapshot};
use crate::testgen::{
    find_targets, synthesize_tests, GenTarget, GeneratedTest, GeneratedTestsFile,
    SynthesisConfig,
};

pub const REPORT_JSON_FILE: &str = "report.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const GENERATED_TESTS_FILE: &str = "generated_tests.json";

/// Tunables shared across pipeline stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineSettings {
    pub step_limit: u64,
    /// Inclusive per-argument domain for test synthesis.
    pub domain: (i64, i64),
    /// Trials per synthesis target.
    pub budget: u64,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings { step_limit: 1_000_000, domain: (-8, 8), budget: 10_000 }
    }
}

impl PipelineSettings {
    pub fn synthesis(&self) -> SynthesisConfig {
        SynthesisConfig { domain: self.domain, budget: self.budget, step_limit: self.step_limit }
    }
}

/// Where a project keeps its pieces, all relative to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectLayout {
    pub root: PathBuf,
    pub source_dir: String,
    pub tests: String,
    pub requirements: String,
    pub state_dir: String,
}

impl ProjectLayout {
    pub fn with_defaults(root: &Path) -> Self {
        ProjectLayout {
            root: root.to_path_buf(),
            source_dir: "src".to_string(),
            tests: "tests.json".to_string(),
            requirements: "requirements.json".to_string(),
            state_dir: ".abstf".to_string(),
        }
    }

    pub fn source_dir(&self) -> PathBuf {
        self.root.join(&self.source_dir)
    }

    pub fn tests_path(&self) -> PathBuf {
        self.root.join(&self.tests)
    }

    pub fn requirements_path(&self) -> PathBuf {
        self.root.join(&self.requirements)
    }

    pub fn state_dir(&self) -> PathBuf {
        self.root.join(&self.state_dir)
    }

    pub fn generated_tests_path(&self) -> PathBuf {
        self.root.join(GENERATED_TESTS_FILE)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Suite(#[from] crate::interp::SuiteError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("no snapshot at {path}; run `abstf snapshot` first")]
    MissingSnapshot { path: String },
    #[error(
        "selected test `{test}` is missing from the current manifest; the baseline is stale — \
         take a new snapshot"
    )]
    SuiteChanged { test: String },
}

/// A selected test whose outcome moved between versions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regression {
    pub test: String,
    pub old: TestOutcome,
    pub new: TestOutcome,
    pub reasons: Vec<Reason>,
    /// Requirement ids the test covers.
    pub covers: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedSection {
    pub tests: Vec<GeneratedTest>,
    pub unmet: Vec<GenTarget>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub version: u64,
    pub changes: ChangeSet,
    pub dangerous_edges: BTreeMap<String, BTreeSet<EdgeKey>>,
    pub selection: SelectionReport,
    pub impact: ImpactReport,
    pub regressions: Vec<Regression>,
    pub findings: Vec<Finding>,
    pub generated_tests: GeneratedSection,
}

impl PipelineReport {
    pub fn no_changes(version: u64) -> Self {
        PipelineReport { version, ..PipelineReport::default() }
    }

    pub fn has_regressions(&self) -> bool {
        !self.regressions.is_empty()
    }

    pub fn has_missing_findings(&self) -> bool {
        self.findings.iter().any(|f| {
            matches!(f.kind, FindingKind::MissingImplementation | FindingKind::MissingTest)
        })
    }
}

/// Runs every stage against the stored baseline. Only selected tests are
/// re-executed; an empty change set short-circuits to an empty report
/// with zero executions.
pub fn run_pipeline(
    snapshot: &Snapshot,
    layout: &ProjectLayout,
    settings: &PipelineSettings,
) -> Result<PipelineReport, PipelineError> {
    let current = load_project(&layout.source_dir())?;
    let changes = diff_program(snapshot, &current);
    if changes.is_empty() {
        return Ok(PipelineReport::no_changes(snapshot.version));
    }

    let new_cfgs = build_cfgs(&current);
    let new_graph = build_call_graph(&current);
    let old_cfgs = snapshot.cfg_map();
    let old_params = snapshot.param_map();
    let new_params: BTreeMap<String, Vec<String>> = current
        .functions
        .iter()
        .map(|f| (f.name.clone(), f.params.clone()))
        .collect();

    let dangerous =
        dangerous_edges(&changes.delta.modified, &old_cfgs, &old_params, &new_cfgs, &new_params);
    let baseline_traces = snapshot.trace_map();
    let selection = select_tests(&changes.delta, &dangerous, &baseline_traces, &old_cfgs)?;

    let baseline_prog = snapshot.baseline_program().map_err(LoadError::from)?;
    let old_graph = build_call_graph(&baseline_prog);
    let impact = compute_impact(&changes.delta, &new_graph, &old_graph);

    // Re-execute only the selected tests on the new version.
    let suite = load_suite(&layout.tests_path())?;
    let by_name: BTreeMap<&str, &TestCase> =
        suite.iter().map(|t| (t.name.as_str(), t)).collect();
    let old_outcomes = snapshot.outcome_map();
    let mut new_traces: BTreeMap<String, EdgeTrace> = BTreeMap::new();
    let mut reruns: Vec<(String, TestOutcome, TestOutcome)> = Vec::new();
    for name in &selection.selected {
        let Some(test) = by_name.get(name.as_str()) else {
            return Err(PipelineError::SuiteChanged { test: name.clone() });
        };
        let (outcome, trace) = run_test(&current, &new_cfgs, test, settings.step_limit);
        if let Some(old) = old_outcomes.get(name) {
            if *old != outcome {
                reruns.push((name.clone(), *old, outcome));
            }
        }
        new_traces.insert(name.clone(), trace);
    }

    // Matrix over the current program: fresh traces for re-executed
    // tests, baseline traces for the rest, restricted to functions that
    // still exist.
    let reqs = load_requirements(&layout.requirements_path())?;
    let current_names = current.function_names();
    let mut merged_traces = baseline_traces;
    for (name, trace) in &new_traces {
        merged_traces.insert(name.clone(), trace.clone());
    }
    for trace in merged_traces.values_mut() {
        trace.retain(|function, _| current_names.contains(function));
    }
    let matrix = build_matrix(&reqs, &current, &merged_traces)?;
    let suite_names: Vec<String> = suite.iter().map(|t| t.name.clone()).collect();
    let findings = check_completeness(
        &matrix,
        &reqs,
        &current,
        &suite_names,
        Some(&changes.delta),
        Some(&selection),
    );

    let regressions: Vec<Regression> = reruns
        .into_iter()
        .map(|(test, old, new)| Regression {
            reasons: selection.reasons.get(&test).cloned().unwrap_or_default(),
            covers: matrix.reqs_covered_by(&test),
            test,
            old,
            new,
        })
        .collect();

    // Synthesize tests for dangerous edges nothing covers.
    let mut covered: BTreeMap<String, BTreeSet<EdgeKey>> = BTreeMap::new();
    for trace in new_traces.values() {
        for (function, edges) in trace {
            covered.entry(function.clone()).or_default().extend(edges.iter().copied());
        }
    }
    let targets =
        find_targets(&dangerous, &changes.delta, &old_cfgs, &new_cfgs, &new_graph, &covered);
    let existing_names: BTreeSet<String> = suite_names.iter().cloned().collect();
    let (generated, unmet) =
        synthesize_tests(&targets, &current, &new_cfgs, &settings.synthesis(), &existing_names);

    Ok(PipelineReport {
        version: snapshot.version,
        changes,
        dangerous_edges: dangerous.per_function,
        selection,
        impact,
        regressions,
        findings,
        generated_tests: GeneratedSection { tests: generated, unmet },
    })
}

/// Canonical JSON form of a report; stable across runs on equal inputs.
pub fn report_json(report: &PipelineReport) -> String {
    let mut json = serde_json::to_string_pretty(report).expect("report serialization");
    json.push('\n');
    json
}

/// Writes `report.json` and `report.txt` under the state directory,
/// atomically.
pub fn write_report_files(
    layout: &ProjectLayout,
    report: &PipelineReport,
) -> Result<(), PipelineError> {
    let state = layout.state_dir();
    std::fs::create_dir_all(&state).map_err(|source| PipelineError::Io {
        path: state.display().to_string(),
        source,
    })?;
    write_atomic(&state.join(REPORT_JSON_FILE), report_json(report).as_bytes())?;
    write_atomic(&state.join(REPORT_TEXT_FILE), render_text(report).as_bytes())?;
    Ok(())
}

/// Writes `generated_tests.json` at the project root; generated tests are
/// never merged into the suite automatically.
pub fn write_generated_tests(
    layout: &ProjectLayout,
    section: &GeneratedSection,
) -> Result<(), PipelineError> {
    let file = GeneratedTestsFile { tests: section.tests.clone() };
    let mut json = serde_json::to_string_pretty(&file).expect("generated tests serialization");
    json.push('\n');
    write_atomic(&layout.generated_tests_path(), json.as_bytes())
}

fn outcome_text(outcome: &TestOutcome) -> String {
    let status = match outcome.status {
        crate::interp::TestStatus::Pass => "pass",
        crate::interp::TestStatus::Fail => "fail",
        crate::interp::TestStatus::Error => "error",
    };
    match (outcome.value, outcome.error_kind) {
        (Some(v), _) => format!("{status}({v})"),
        (None, Some(kind)) => format!("{status}({})", kind_text(kind)),
        (None, None) => status.to_string(),
    }
}

fn kind_text(kind: crate::interp::ErrorKind) -> &'static str {
    use crate::interp::ErrorKind::*;
    match kind {
        DivByZero => "div_by_zero",
        Overflow => "overflow",
        StepLimit => "step_limit",
        UndefinedFunction => "undefined_function",
        ArityMismatch => "arity_mismatch",
        MissingReturn => "missing_return",
    }
}

fn reason_text(reason: &Reason) -> String {
    match reason {
        Reason::Edge { function, edge } => format!("{function} edge ({},{})", edge.0, edge.1),
        Reason::Deleted { deleted } => format!("calls deleted function {deleted}"),
    }
}

fn kind_name(kind: FindingKind) -> &'static str {
    match kind {
        FindingKind::MissingImplementation => "MISSING_IMPLEMENTATION",
        FindingKind::UntracedCode => "UNTRACED_CODE",
        FindingKind::MissingTest => "MISSING_TEST",
        FindingKind::UntracedTest => "UNTRACED_TEST",
        FindingKind::StaleReqOnChange => "STALE_REQ_ON_CHANGE",
    }
}

/// Plain-text rendering with a fixed section order; every section is
/// present, empty ones say "(none)".
pub fn render_text(report: &PipelineReport) -> String {
    let mut out = String::new();
    let push = |out: &mut String, line: &str| {
        out.push_str(line);
        out.push('\n');
    };

    push(&mut out, &format!("abstf report (baseline version {})", report.version));
    if report.changes.is_empty() {
        push(&mut out, "no changes");
    }
    push(&mut out, "");

    push(&mut out, "CHANGES");
    let delta = &report.changes.delta;
    if report.changes.is_empty() {
        push(&mut out, "  (none)");
    } else {
        for (label, set) in [
            ("added", &delta.added),
            ("deleted", &delta.deleted),
            ("modified", &delta.modified),
        ] {
            if !set.is_empty() {
                let names: Vec<&str> = set.iter().map(String::as_str).collect();
                push(&mut out, &format!("  {label}: {}", names.join(", ")));
            }
        }
    }

    push(&mut out, "DANGEROUS EDGES");
    if report.dangerous_edges.values().all(BTreeSet::is_empty) {
        push(&mut out, "  (none)");
    } else {
        for (function, edges) in &report.dangerous_edges {
            if edges.is_empty() {
                continue;
            }
            let keys: Vec<String> =
                edges.iter().map(|(src, label)| format!("({src},{label})")).collect();
            push(&mut out, &format!("  {function}: {}", keys.join(" ")));
        }
    }

    push(&mut out, "SELECTED TESTS");
    if report.selection.selected.is_empty() {
        push(&mut out, "  (none)");
    } else {
        for test in &report.selection.selected {
            let reasons: Vec<String> = report
                .selection
                .reasons
                .get(test)
                .map(|rs| rs.iter().map(reason_text).collect())
                .unwrap_or_default();
            push(&mut out, &format!("  {test} — {}", reasons.join("; ")));
        }
    }

    push(&mut out, "IMPACT");
    if report.impact.entries.is_empty() {
        push(&mut out, "  (none)");
    } else {
        for entry in &report.impact.entries {
            let impacted: Vec<&str> = entry.impacted.iter().map(String::as_str).collect();
            push(
                &mut out,
                &format!(
                    "  {}: {} call site(s); impacted: {}",
                    entry.function,
                    entry.call_sites,
                    impacted.join(", ")
                ),
            );
        }
    }

    push(&mut out, "REGRESSIONS");
    if report.regressions.is_empty() {
        push(&mut out, "  (none)");
    } else {
        for r in &report.regressions {
            let reasons: Vec<String> = r.reasons.iter().map(reason_text).collect();
            let covers: Vec<&str> = r.covers.iter().map(String::as_str).collect();
            let covers = if covers.is_empty() {
                String::new()
            } else {
                format!("; covers: {}", covers.join(", "))
            };
            push(
                &mut out,
                &format!(
                    "  {}: {} -> {} — {}{covers}",
                    r.test,
                    outcome_text(&r.old),
                    outcome_text(&r.new),
                    reasons.join("; "),
                ),
            );
        }
    }

    push(&mut out, "TRACEABILITY FINDINGS");
    if report.findings.is_empty() {
        push(&mut out, "  (none)");
    } else {
        for f in &report.findings {
            push(&mut out, &format!("  {} {} — {}", kind_name(f.kind), f.subject, f.detail));
        }
    }

    push(&mut out, "GENERATED TESTS");
    if report.generated_tests.tests.is_empty() && report.generated_tests.unmet.is_empty() {
        push(&mut out, "  (none)");
    } else {
        for t in &report.generated_tests.tests {
            let args: Vec<String> = t.args.iter().map(i64::to_string).collect();
            let expected = match t.expected {
                crate::interp::ExpectedOutcome::Value { value } => value.to_string(),
                crate::interp::ExpectedOutcome::Error(_) => "error".to_string(),
            };
            push(
                &mut out,
                &format!(
                    "  {}: {}({}) expects {expected} — covers {} edge ({},{})",
                    t.name,
                    t.entry,
                    args.join(", "),
                    t.provenance.function,
                    t.provenance.edge.0,
                    t.provenance.edge.1
                ),
            );
        }
        for u in &report.generated_tests.unmet {
            push(
                &mut out,
                &format!(
                    "  unmet: {} edge ({},{}) — search budget/domain exhausted",
                    u.function, u.edge.0, u.edge.1
                ),
            );
        }
    }

    out
}
