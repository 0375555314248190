//! Subcommand implementations. Reports go to stdout, diagnostics to
//! stderr; exit codes are 0 for a clean run, 1 when regressions or
//! MISSING_* findings exist, 2 for usage or fatal errors.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use abstf_core::cfg::{build_call_graph, build_cfgs};
use abstf_core::impact::compute_impact;
use abstf_core::interp::load_suite;
use abstf_core::matrix::{build_matrix, check_completeness, load_requirements, Finding, FindingKind};
use abstf_core::pipeline::{
    render_text, report_json, run_pipeline, write_generated_tests, write_report_files,
    PipelineReport, PipelineSettings, ProjectLayout, REPORT_JSON_FILE,
};
use abstf_core::project::load_project;
use abstf_core::selection::select_tests;
use abstf_core::snapshot::{diff_program, take_snapshot, Snapshot};
use abstf_core::watch::{TickOutcome, Watcher};

use crate::config::{ProjectConfig, CONFIG_FILE};
use crate::Format;

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_FATAL: i32 = 2;

type CmdResult = Result<i32, String>;

fn fatal(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn report_exit_code(report: &PipelineReport) -> i32 {
    if report.has_regressions() || report.has_missing_findings() {
        EXIT_FINDINGS
    } else {
        EXIT_CLEAN
    }
}

fn print_report(report: &PipelineReport, format: Format) {
    match format {
        Format::Text => print!("{}", render_text(report)),
        Format::Json => print!("{}", report_json(report)),
    }
}

pub fn init(root: &Path, config: &ProjectConfig) -> CmdResult {
    let path = root.join(CONFIG_FILE);
    if path.exists() {
        return Err(format!("{} already exists", path.display()));
    }
    std::fs::write(&path, config.to_toml()).map_err(fatal)?;
    eprintln!("wrote {}", path.display());
    Ok(EXIT_CLEAN)
}

pub fn snapshot(layout: &ProjectLayout, settings: &PipelineSettings) -> CmdResult {
    let snap = take_snapshot(layout, settings).map_err(fatal)?;
    eprintln!(
        "snapshot version {}: {} function(s), {} test(s)",
        snap.version,
        snap.functions.len(),
        snap.records.len()
    );
    Ok(EXIT_CLEAN)
}

pub fn run(layout: &ProjectLayout, settings: &PipelineSettings, format: Format) -> CmdResult {
    let snap = Snapshot::load(&layout.state_dir()).map_err(fatal)?;
    let report = run_pipeline(&snap, layout, settings).map_err(fatal)?;
    write_report_files(layout, &report).map_err(fatal)?;
    if !report.changes.is_empty() {
        write_generated_tests(layout, &report.generated_tests).map_err(fatal)?;
    }
    print_report(&report, format);
    Ok(report_exit_code(&report))
}

/// Runs the poll loop until interrupted. The hidden tick cap makes the
/// loop drivable end to end in tests; without it the loop only ends with
/// the process.
pub fn watch(
    layout: &ProjectLayout,
    settings: &PipelineSettings,
    interval: Duration,
    auto_baseline: bool,
    max_ticks: Option<u64>,
) -> CmdResult {
    let mut watcher =
        Watcher::new(layout.clone(), *settings, auto_baseline).map_err(fatal)?;
    eprintln!(
        "watching {} every {:.1}s (ctrl-c to stop)",
        layout.source_dir().display(),
        interval.as_secs_f64()
    );
    let mut ticks = 0u64;
    loop {
        if let Some(cap) = max_ticks {
            if ticks >= cap {
                return Ok(EXIT_CLEAN);
            }
        }
        std::thread::sleep(interval);
        ticks += 1;
        match watcher.tick() {
            TickOutcome::Ran(report) => eprintln!(
                "change detected: {} selected, {} regression(s); report written",
                report.selection.selected.len(),
                report.regressions.len()
            ),
            TickOutcome::Transient(msg) => eprintln!("transient: {msg} (will retry)"),
            TickOutcome::Failed(msg) => eprintln!("pipeline failed: {msg}"),
            TickOutcome::NoChange => {}
        }
    }
}

pub fn select(layout: &ProjectLayout, format: Format) -> CmdResult {
    // Static selection: stored traces plus CFG diffs, no subject
    // execution and no need for the current manifest.
    let snap = Snapshot::load(&layout.state_dir()).map_err(fatal)?;
    let current = load_project(&layout.source_dir()).map_err(fatal)?;
    let changes = diff_program(&snap, &current);
    let old_cfgs = snap.cfg_map();
    let new_cfgs = build_cfgs(&current);
    let new_params: BTreeMap<String, Vec<String>> = current
        .functions
        .iter()
        .map(|f| (f.name.clone(), f.params.clone()))
        .collect();
    let dangerous = abstf_core::selection::dangerous_edges(
        &changes.delta.modified,
        &old_cfgs,
        &snap.param_map(),
        &new_cfgs,
        &new_params,
    );
    let report =
        select_tests(&changes.delta, &dangerous, &snap.trace_map(), &old_cfgs).map_err(fatal)?;
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&report).map_err(fatal)?);
        }
        Format::Text => {
            if report.selected.is_empty() {
                println!("selected: (none)");
            } else {
                for test in &report.selected {
                    println!("{test}");
                }
            }
        }
    }
    Ok(EXIT_CLEAN)
}

pub fn impact(layout: &ProjectLayout, format: Format) -> CmdResult {
    let snap = Snapshot::load(&layout.state_dir()).map_err(fatal)?;
    let current = load_project(&layout.source_dir()).map_err(fatal)?;
    let changes = diff_program(&snap, &current);
    let new_graph = build_call_graph(&current);
    let baseline = snap.baseline_program().map_err(fatal)?;
    let old_graph = build_call_graph(&baseline);
    let report = compute_impact(&changes.delta, &new_graph, &old_graph);
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "impact": report });
            println!("{}", serde_json::to_string_pretty(&doc).map_err(fatal)?);
        }
        Format::Text => {
            if report.entries.is_empty() {
                println!("impact: (none)");
            } else {
                for e in &report.entries {
                    let impacted: Vec<&str> =
                        e.impacted.iter().map(String::as_str).collect();
                    println!(
                        "{}: {} call site(s); impacted: {}",
                        e.function,
                        e.call_sites,
                        impacted.join(", ")
                    );
                }
            }
        }
    }
    Ok(EXIT_CLEAN)
}

pub fn trace(layout: &ProjectLayout, format: Format) -> CmdResult {
    let snap = Snapshot::load(&layout.state_dir()).map_err(fatal)?;
    let current = load_project(&layout.source_dir()).map_err(fatal)?;
    let changes = diff_program(&snap, &current);
    let reqs = load_requirements(&layout.requirements_path()).map_err(fatal)?;
    let suite = load_suite(&layout.tests_path()).map_err(fatal)?;
    let suite_names: Vec<String> = suite.iter().map(|t| t.name.clone()).collect();

    let current_names = current.function_names();
    let mut traces = snap.trace_map();
    for trace in traces.values_mut() {
        trace.retain(|f, _| current_names.contains(f));
    }
    let matrix = build_matrix(&reqs, &current, &traces).map_err(fatal)?;

    // Selection is static, so the stale-requirement rule can run too.
    let old_cfgs = snap.cfg_map();
    let new_cfgs = build_cfgs(&current);
    let new_params: BTreeMap<String, Vec<String>> = current
        .functions
        .iter()
        .map(|f| (f.name.clone(), f.params.clone()))
        .collect();
    let dangerous = abstf_core::selection::dangerous_edges(
        &changes.delta.modified,
        &old_cfgs,
        &snap.param_map(),
        &new_cfgs,
        &new_params,
    );
    let selection =
        select_tests(&changes.delta, &dangerous, &snap.trace_map(), &old_cfgs).map_err(fatal)?;
    let findings = check_completeness(
        &matrix,
        &reqs,
        &current,
        &suite_names,
        Some(&changes.delta),
        Some(&selection),
    );

    match format {
        Format::Json => {
            let doc = serde_json::json!({
                "implements": matrix.implements,
                "exercises": matrix.exercises,
                "covers": matrix.covers,
                "findings": findings,
            });
            println!("{}", serde_json::to_string_pretty(&doc).map_err(fatal)?);
        }
        Format::Text => {
            if findings.is_empty() {
                println!("findings: (none)");
            } else {
                for f in &findings {
                    println!("{:?} {} — {}", f.kind, f.subject, f.detail);
                }
            }
        }
    }
    Ok(exit_for_findings(&findings))
}

fn exit_for_findings(findings: &[Finding]) -> i32 {
    let missing = findings.iter().any(|f| {
        matches!(f.kind, FindingKind::MissingImplementation | FindingKind::MissingTest)
    });
    if missing {
        EXIT_FINDINGS
    } else {
        EXIT_CLEAN
    }
}

pub fn gen(layout: &ProjectLayout, settings: &PipelineSettings, format: Format) -> CmdResult {
    let snap = Snapshot::load(&layout.state_dir()).map_err(fatal)?;
    let report = run_pipeline(&snap, layout, settings).map_err(fatal)?;
    if !report.changes.is_empty() {
        write_generated_tests(layout, &report.generated_tests).map_err(fatal)?;
    }
    match format {
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report.generated_tests).map_err(fatal)?
            );
        }
        Format::Text => {
            if report.generated_tests.tests.is_empty() {
                println!("generated: (none)");
            } else {
                for t in &report.generated_tests.tests {
                    let args: Vec<String> = t.args.iter().map(i64::to_string).collect();
                    println!("{}: {}({})", t.name, t.entry, args.join(", "));
                }
            }
            for u in &report.generated_tests.unmet {
                println!("unmet: {} edge ({},{})", u.function, u.edge.0, u.edge.1);
            }
        }
    }
    Ok(EXIT_CLEAN)
}

pub fn report(layout: &ProjectLayout, format: Format) -> CmdResult {
    let path = layout.state_dir().join(REPORT_JSON_FILE);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("{}: {e} (run `abstf run` first)", path.display()))?;
    let report: PipelineReport = serde_json::from_str(&text)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    print_report(&report, format);
    Ok(report_exit_code(&report))
}

pub fn ensure_project_dir(root: &Path) -> Result<(), String> {
    if root.is_dir() {
        Ok(())
    } else {
        Err(format!("project directory {} does not exist", root.display()))
    }
}
