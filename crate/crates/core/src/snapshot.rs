//! Baseline snapshots: per-function hashes, canonical texts, and CFG
//! dumps plus the suite's traces and outcomes, persisted under the state
//! directory as `snapshot.json` + `traces.json` (JSON Lines). Change
//! detection diffs the current sources against the stored summaries, so
//! whitespace- and comment-only edits never register.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cfg::{build_cfgs, Cfg};
use crate::interp::{
    execute_suite, load_suite, suite_digest, validate_suite, EdgeTrace, TestOutcome,
    TestStatus,
};
use crate::lang::{canon, parse_program, ParseError, Program};
use crate::pipeline::{PipelineError, ProjectLayout, PipelineSettings};
use crate::project::load_project;
use crate::selection::FunctionDelta;

pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const TRACES_FILE: &str = "traces.json";

/// Baseline entry for one function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub name: String,
    pub params: Vec<String>,
    pub body_hash: String,
    /// Canonical source of the whole function; keeps the old text
    /// available for change reports after the sources are edited.
    pub canonical_text: String,
    pub cfg: Cfg,
}

/// One line of `traces.json`: a test's judged outcome and its edge trace,
/// edge keys sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLine {
    pub test: String,
    pub outcome: TestStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<crate::interp::ErrorKind>,
    pub edges: EdgeTrace,
}

impl TraceLine {
    pub fn outcome(&self) -> TestOutcome {
        TestOutcome { status: self.outcome, value: self.value, error_kind: self.error_kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SnapshotFile {
    version: u64,
    created_at: u64,
    functions: Vec<FunctionRecord>,
    suite_digest: String,
}

/// A persisted baseline. `version` increases by one per snapshot taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub version: u64,
    pub created_at: u64,
    /// Sorted by function name.
    pub functions: Vec<FunctionRecord>,
    pub suite_digest: String,
    /// In suite order.
    pub records: Vec<TraceLine>,
}

impl Snapshot {
    pub fn function(&self, name: &str) -> Option<&FunctionRecord> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// `(body_hash, params)` summaries keyed by name, the delta input.
    pub fn summaries(&self) -> BTreeMap<String, (String, Vec<String>)> {
        self.functions
            .iter()
            .map(|f| (f.name.clone(), (f.body_hash.clone(), f.params.clone())))
            .collect()
    }

    pub fn cfg_map(&self) -> BTreeMap<String, Cfg> {
        self.functions.iter().map(|f| (f.name.clone(), f.cfg.clone())).collect()
    }

    pub fn param_map(&self) -> BTreeMap<String, Vec<String>> {
        self.functions.iter().map(|f| (f.name.clone(), f.params.clone())).collect()
    }

    pub fn trace_map(&self) -> BTreeMap<String, EdgeTrace> {
        self.records.iter().map(|r| (r.test.clone(), r.edges.clone())).collect()
    }

    pub fn outcome_map(&self) -> BTreeMap<String, TestOutcome> {
        self.records.iter().map(|r| (r.test.clone(), r.outcome())).collect()
    }

    /// Reconstructs the baseline program by re-parsing the stored
    /// canonical texts; round-tripping guarantees fidelity.
    pub fn baseline_program(&self) -> Result<Program, ParseError> {
        let mut source = String::new();
        for f in &self.functions {
            source.push_str(&f.canonical_text);
            source.push('\n');
        }
        parse_program(&source, "<baseline>")
    }

    pub fn save(&self, state_dir: &Path) -> Result<(), PipelineError> {
        std::fs::create_dir_all(state_dir).map_err(|source| PipelineError::Io {
            path: state_dir.display().to_string(),
            source,
        })?;
        let file = SnapshotFile {
            version: self.version,
            created_at: self.created_at,
            functions: self.functions.clone(),
            suite_digest: self.suite_digest.clone(),
        };
        let json = serde_json::to_string_pretty(&file).expect("snapshot serialization");
        write_atomic(&state_dir.join(SNAPSHOT_FILE), json.as_bytes())?;
        let mut lines = String::new();
        for record in &self.records {
            lines.push_str(&serde_json::to_string(record).expect("trace serialization"));
            lines.push('\n');
        }
        write_atomic(&state_dir.join(TRACES_FILE), lines.as_bytes())?;
        Ok(())
    }

    pub fn load(state_dir: &Path) -> Result<Snapshot, PipelineError> {
        let snap_path = state_dir.join(SNAPSHOT_FILE);
        if !snap_path.exists() {
            return Err(PipelineError::MissingSnapshot {
                path: snap_path.display().to_string(),
            });
        }
        let text = read(&snap_path)?;
        let file: SnapshotFile = serde_json::from_str(&text).map_err(|source| {
            PipelineError::Json { path: snap_path.display().to_string(), source }
        })?;
        let traces_path = state_dir.join(TRACES_FILE);
        let mut records = Vec::new();
        if traces_path.exists() {
            let text = read(&traces_path)?;
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let record: TraceLine = serde_json::from_str(line).map_err(|source| {
                    PipelineError::Json { path: traces_path.display().to_string(), source }
                })?;
                records.push(record);
            }
        }
        Ok(Snapshot {
            version: file.version,
            created_at: file.created_at,
            functions: file.functions,
            suite_digest: file.suite_digest,
            records,
        })
    }
}

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|source| PipelineError::Io {
        path: tmp.display().to_string(),
        source,
    })?;
    std::fs::rename(&tmp, path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses the project, runs the whole suite, and persists the baseline.
/// Test failures are recorded as outcomes, not errors; only unparseable
/// sources or a bad manifest abort.
pub fn take_snapshot(
    layout: &ProjectLayout,
    settings: &PipelineSettings,
) -> Result<Snapshot, PipelineError> {
    let prog = load_project(&layout.source_dir())?;
    let suite = load_suite(&layout.tests_path())?;
    validate_suite(&suite, &prog)?;
    let cfgs = build_cfgs(&prog);
    let results = execute_suite(&prog, &cfgs, &suite, settings.step_limit);

    let version = match Snapshot::load(&layout.state_dir()) {
        Ok(prev) => prev.version + 1,
        Err(_) => 1,
    };
    let created_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    let mut functions: Vec<FunctionRecord> = prog
        .functions
        .iter()
        .map(|f| FunctionRecord {
            name: f.name.clone(),
            params: f.params.clone(),
            body_hash: f.body_hash(),
            canonical_text: canon::function_text(f),
            cfg: cfgs[&f.name].clone(),
        })
        .collect();
    functions.sort_by(|a, b| a.name.cmp(&b.name));

    let records = results
        .into_iter()
        .map(|r| TraceLine {
            test: r.name,
            outcome: r.outcome.status,
            value: r.outcome.value,
            error_kind: r.outcome.error_kind,
            edges: r.trace,
        })
        .collect();

    let snapshot = Snapshot {
        version,
        created_at,
        functions,
        suite_digest: suite_digest(&suite),
        records,
    };
    snapshot.save(&layout.state_dir())?;
    Ok(snapshot)
}

/// Old/new canonical text of one modified function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifiedText {
    pub old: String,
    pub new: String,
}

/// The delta plus the canonical texts of modified functions. Empty
/// exactly when every hash and parameter list matches.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    #[serde(flatten)]
    pub delta: FunctionDelta,
    pub diffs: BTreeMap<String, ModifiedText>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }
}

/// Diffs a parsed current program against the baseline.
pub fn diff_program(snapshot: &Snapshot, current: &Program) -> ChangeSet {
    let new_summaries: BTreeMap<String, (String, Vec<String>)> = current
        .functions
        .iter()
        .map(|f| (f.name.clone(), (f.body_hash(), f.params.clone())))
        .collect();
    let delta = FunctionDelta::compute(&snapshot.summaries(), &new_summaries);
    let diffs = delta
        .modified
        .iter()
        .map(|name| {
            let old = snapshot
                .function(name)
                .map(|f| f.canonical_text.clone())
                .unwrap_or_default();
            let new = current
                .function(name)
                .map(canon::function_text)
                .unwrap_or_default();
            (name.clone(), ModifiedText { old, new })
        })
        .collect();
    ChangeSet { delta, diffs }
}

/// Parses the current sources and diffs them against the baseline.
pub fn detect_changes(
    snapshot: &Snapshot,
    layout: &ProjectLayout,
) -> Result<ChangeSet, PipelineError> {
    let current = load_project(&layout.source_dir())?;
    Ok(diff_program(snapshot, &current))
}
