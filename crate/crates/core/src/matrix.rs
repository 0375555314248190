//! Traceability relations among requirements, functions, and tests, with
//! rule-based completeness checks.
//!
//! `implements` comes from `#[req(...)]` annotations, `exercises(t, f)`
//! holds when test `t`'s trace entered `f`, and `covers` is exactly the
//! relational composition of the two.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::interp::EdgeTrace;
use crate::lang::Program;
use crate::selection::{FunctionDelta, SelectionReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    pub text: String,
}

/// `requirements.json`: `{"requirements":[{"id","text"}...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementsFile {
    pub requirements: Vec<Requirement>,
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("function `{function}` is annotated with unknown requirement `{req}`")]
    UnknownRequirement { function: String, req: String },
    #[error("duplicate requirement id `{id}`")]
    DuplicateRequirement { id: String },
}

pub fn load_requirements(path: &Path) -> Result<Vec<Requirement>, MatrixError> {
    let text = std::fs::read_to_string(path).map_err(|source| MatrixError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: RequirementsFile = serde_json::from_str(&text).map_err(|source| {
        MatrixError::Json { path: path.display().to_string(), source }
    })?;
    let mut seen = BTreeSet::new();
    for r in &file.requirements {
        if !seen.insert(r.id.clone()) {
            return Err(MatrixError::DuplicateRequirement { id: r.id.clone() });
        }
    }
    Ok(file.requirements)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMatrix {
    /// (function, requirement id)
    pub implements: BTreeSet<(String, String)>,
    /// (test, function)
    pub exercises: BTreeSet<(String, String)>,
    /// (test, requirement id) — the composition exercises ∘ implements.
    pub covers: BTreeSet<(String, String)>,
}

impl TraceMatrix {
    /// Builds the matrix from raw relations, composing `covers`.
    pub fn from_relations(
        implements: BTreeSet<(String, String)>,
        exercises: BTreeSet<(String, String)>,
    ) -> Self {
        let mut covers = BTreeSet::new();
        let mut by_function: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (f, r) in &implements {
            by_function.entry(f.as_str()).or_default().push(r.as_str());
        }
        for (t, f) in &exercises {
            if let Some(reqs) = by_function.get(f.as_str()) {
                for r in reqs {
                    covers.insert((t.clone(), r.to_string()));
                }
            }
        }
        TraceMatrix { implements, exercises, covers }
    }

    pub fn reqs_covered_by(&self, test: &str) -> BTreeSet<String> {
        self.covers
            .iter()
            .filter(|(t, _)| t == test)
            .map(|(_, r)| r.clone())
            .collect()
    }
}

/// Derives the matrix from annotations and traces. Fails when an
/// annotation names a requirement id absent from `reqs`.
pub fn build_matrix(
    reqs: &[Requirement],
    prog: &Program,
    traces: &BTreeMap<String, EdgeTrace>,
) -> Result<TraceMatrix, MatrixError> {
    let known: BTreeSet<&str> = reqs.iter().map(|r| r.id.as_str()).collect();
    let mut implements = BTreeSet::new();
    for f in &prog.functions {
        for r in &f.reqs {
            if !known.contains(r.as_str()) {
                return Err(MatrixError::UnknownRequirement {
                    function: f.name.clone(),
                    req: r.clone(),
                });
            }
            implements.insert((f.name.clone(), r.clone()));
        }
    }
    let mut exercises = BTreeSet::new();
    for (test, trace) in traces {
        for (function, edges) in trace {
            if !edges.is_empty() {
                exercises.insert((test.clone(), function.clone()));
            }
        }
    }
    Ok(TraceMatrix::from_relations(implements, exercises))
}

/// Completeness-finding kinds, in report order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingKind {
    MissingImplementation,
    UntracedCode,
    MissingTest,
    UntracedTest,
    StaleReqOnChange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub subject: String,
    pub detail: String,
}

/// Runs the five completeness rules and returns findings sorted by
/// (kind, subject). `STALE_REQ_ON_CHANGE` only fires when both a delta
/// and a selection are supplied.
pub fn check_completeness(
    matrix: &TraceMatrix,
    reqs: &[Requirement],
    prog: &Program,
    suite_names: &[String],
    delta: Option<&FunctionDelta>,
    selection: Option<&SelectionReport>,
) -> Vec<Finding> {
    let mut findings = Vec::new();

    let implemented: BTreeSet<&str> =
        matrix.implements.iter().map(|(_, r)| r.as_str()).collect();
    for r in reqs {
        if !implemented.contains(r.id.as_str()) {
            findings.push(Finding {
                kind: FindingKind::MissingImplementation,
                subject: r.id.clone(),
                detail: format!("requirement `{}` has no implementing function", r.id),
            });
        }
    }

    let annotated: BTreeSet<&str> =
        matrix.implements.iter().map(|(f, _)| f.as_str()).collect();
    for f in &prog.functions {
        if !annotated.contains(f.name.as_str()) {
            findings.push(Finding {
                kind: FindingKind::UntracedCode,
                subject: f.name.clone(),
                detail: format!("function `{}` carries no requirement annotation", f.name),
            });
        }
    }

    let covered: BTreeSet<&str> = matrix.covers.iter().map(|(_, r)| r.as_str()).collect();
    for r in reqs {
        if implemented.contains(r.id.as_str()) && !covered.contains(r.id.as_str()) {
            findings.push(Finding {
                kind: FindingKind::MissingTest,
                subject: r.id.clone(),
                detail: format!("requirement `{}` is implemented but no test covers it", r.id),
            });
        }
    }

    let covering_tests: BTreeSet<&str> =
        matrix.covers.iter().map(|(t, _)| t.as_str()).collect();
    for t in suite_names {
        if !covering_tests.contains(t.as_str()) {
            findings.push(Finding {
                kind: FindingKind::UntracedTest,
                subject: t.clone(),
                detail: format!("test `{t}` exercises no annotated function"),
            });
        }
    }

    if let (Some(delta), Some(selection)) = (delta, selection) {
        for r in reqs {
            let modified_impls: Vec<&str> = matrix
                .implements
                .iter()
                .filter(|(f, req)| req == &r.id && delta.modified.contains(f))
                .map(|(f, _)| f.as_str())
                .collect();
            if modified_impls.is_empty() {
                continue;
            }
            let has_selected_cover = matrix
                .covers
                .iter()
                .any(|(t, req)| req == &r.id && selection.selected.contains(t));
            if !has_selected_cover {
                findings.push(Finding {
                    kind: FindingKind::StaleReqOnChange,
                    subject: r.id.clone(),
                    detail: format!(
                        "requirement `{}` is implemented by modified function(s) {} but no \
                         covering test was selected",
                        r.id,
                        modified_impls.join(", ")
                    ),
                });
            }
        }
    }

    findings.sort_by(|a, b| a.kind.cmp(&b.kind).then_with(|| a.subject.cmp(&b.subject)));
    findings
}
