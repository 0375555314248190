//! Polling watch mode: hash the source files every tick, and when the
//! content moves, run the pipeline against the stored baseline and write
//! the report. Ticks are strictly sequential (single-flight); an edit
//! that lands mid-run is picked up on the next tick. The baseline only
//! advances when auto-baseline is on.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::pipeline::{
    run_pipeline, write_generated_tests, write_report_files, PipelineError, PipelineReport,
    PipelineSettings, ProjectLayout,
};
use crate::project::source_files;
use crate::snapshot::{take_snapshot, Snapshot};

#[derive(Debug)]
pub enum TickOutcome {
    /// Sources hash to the same state as the previous tick.
    NoChange,
    /// The pipeline ran and its outputs were written.
    Ran(Box<PipelineReport>),
    /// A source file could not be read; retried next tick.
    Transient(String),
    /// The pipeline itself failed (for example a parse error mid-edit).
    Failed(String),
}

pub struct Watcher {
    layout: ProjectLayout,
    settings: PipelineSettings,
    auto_baseline: bool,
    last_seen: BTreeMap<PathBuf, String>,
}

fn hash_sources(layout: &ProjectLayout) -> Result<BTreeMap<PathBuf, String>, PipelineError> {
    let mut hashes = BTreeMap::new();
    for path in source_files(&layout.source_dir())? {
        let bytes = std::fs::read(&path).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        hashes.insert(path, hex::encode(hasher.finalize()));
    }
    Ok(hashes)
}

impl Watcher {
    /// Starts from the current on-disk state: pre-existing divergence
    /// from the baseline does not fire a tick by itself.
    pub fn new(
        layout: ProjectLayout,
        settings: PipelineSettings,
        auto_baseline: bool,
    ) -> Result<Self, PipelineError> {
        let last_seen = hash_sources(&layout)?;
        Ok(Watcher { layout, settings, auto_baseline, last_seen })
    }

    pub fn tick(&mut self) -> TickOutcome {
        let hashes = match hash_sources(&self.layout) {
            Ok(h) => h,
            Err(e) => return TickOutcome::Transient(e.to_string()),
        };
        if hashes == self.last_seen {
            return TickOutcome::NoChange;
        }
        self.last_seen = hashes;
        match self.run_once() {
            Ok(report) => TickOutcome::Ran(Box::new(report)),
            Err(e) => TickOutcome::Failed(e.to_string()),
        }
    }

    fn run_once(&self) -> Result<PipelineReport, PipelineError> {
        let snapshot = Snapshot::load(&self.layout.state_dir())?;
        let report = run_pipeline(&snapshot, &self.layout, &self.settings)?;
        write_report_files(&self.layout, &report)?;
        if !report.changes.is_empty() {
            write_generated_tests(&self.layout, &report.generated_tests)?;
        }
        if self.auto_baseline && !report.changes.is_empty() {
            take_snapshot(&self.layout, &self.settings)?;
        }
        Ok(report)
    }
}

/// Polls until `stop` is set, invoking `on_event` for every non-quiet
/// tick. The CLI runs this with an always-false flag, so it ends only
/// with the process.
pub fn watch_loop(
    layout: ProjectLayout,
    settings: PipelineSettings,
    interval: Duration,
    auto_baseline: bool,
    stop: &AtomicBool,
    mut on_event: impl FnMut(&TickOutcome),
) -> Result<(), PipelineError> {
    let mut watcher = Watcher::new(layout, settings, auto_baseline)?;
    while !stop.load(Ordering::Relaxed) {
        std::thread::sleep(interval);
        if stop.load(Ordering::Relaxed) {
            break;
        }
        let outcome = watcher.tick();
        if !matches!(outcome, TickOutcome::NoChange) {
            on_event(&outcome);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn write_project(dir: &Path) {
        let src_dir = dir.join("src");
        std::fs::create_dir_all(&src_dir).unwrap();
        std::fs::write(src_dir.join("main.ml0"), "fn main(x) { return x; }").unwrap();
        std::fs::write(
            dir.join("tests.json"),
            r#"{"tests":[{"name":"t","entry":"main","args":[1],"expected":{"value":1}}]}"#,
        )
        .unwrap();
        std::fs::write(dir.join("requirements.json"), r#"{"requirements":[]}"#).unwrap();
    }

    #[test]
    fn quiet_ticks_do_nothing() {
        let dir = tempfile::tempdir().unwrap();
        write_project(dir.path());
        let layout = ProjectLayout::with_defaults(dir.path());
        let settings = PipelineSettings::default();
        take_snapshot(&layout, &settings).unwrap();
        let mut watcher = Watcher::new(layout.clone(), settings, false).unwrap();
        for _ in 0..5 {
            assert!(matches!(watcher.tick(), TickOutcome::NoChange));
        }
        assert!(!layout.state_dir().join("report.json").exists());
    }

    #[test]
    fn one_edit_fires_exactly_one_report() {
        let dir = tempfile::tempdir().unwrap();
        write_project(dir.path());
        let layout = ProjectLayout::with_defaults(dir.path());
        let settings = PipelineSettings::default();
        take_snapshot(&layout, &settings).unwrap();
        let mut watcher = Watcher::new(layout.clone(), settings, false).unwrap();
        std::fs::write(dir.path().join("src/main.ml0"), "fn main(x) { return x + 1; }").unwrap();
        assert!(matches!(watcher.tick(), TickOutcome::Ran(_)));
        assert!(layout.state_dir().join("report.json").exists());
        for _ in 0..3 {
            assert!(matches!(watcher.tick(), TickOutcome::NoChange));
        }
    }

    #[test]
    fn baseline_only_advances_with_auto_baseline() {
        let dir = tempfile::tempdir().unwrap();
        write_project(dir.path());
        let layout = ProjectLayout::with_defaults(dir.path());
        let settings = PipelineSettings::default();
        let snap = take_snapshot(&layout, &settings).unwrap();

        let mut plain = Watcher::new(layout.clone(), settings, false).unwrap();
        std::fs::write(dir.path().join("src/main.ml0"), "fn main(x) { return x + 1; }").unwrap();
        plain.tick();
        assert_eq!(Snapshot::load(&layout.state_dir()).unwrap().version, snap.version);

        let mut auto = Watcher::new(layout.clone(), settings, true).unwrap();
        std::fs::write(dir.path().join("src/main.ml0"), "fn main(x) { return x + 2; }").unwrap();
        assert!(matches!(auto.tick(), TickOutcome::Ran(_)));
        assert_eq!(Snapshot::load(&layout.state_dir()).unwrap().version, snap.version + 1);
    }

    #[test]
    fn parse_error_mid_edit_is_reported_and_recovers() {
        let dir = tempfile::tempdir().unwrap();
        write_project(dir.path());
        let layout = ProjectLayout::with_defaults(dir.path());
        let settings = PipelineSettings::default();
        take_snapshot(&layout, &settings).unwrap();
        let mut watcher = Watcher::new(layout.clone(), settings, false).unwrap();
        std::fs::write(dir.path().join("src/main.ml0"), "fn main(x) {").unwrap();
        assert!(matches!(watcher.tick(), TickOutcome::Failed(_)));
        std::fs::write(dir.path().join("src/main.ml0"), "fn main(x) { return x + 3; }").unwrap();
        assert!(matches!(watcher.tick(), TickOutcome::Ran(_)));
    }
}
