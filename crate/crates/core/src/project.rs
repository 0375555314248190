//! Project loading: a project's sources are the `.ml0` files of one
//! directory, merged into a single [`Program`] in file-name order.

use std::path::{Path, PathBuf};

use crate::lang::{parse_program, ParseError, Program};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Lists the project's source files, sorted by file name.
pub fn source_files(source_dir: &Path) -> Result<Vec<PathBuf>, LoadError> {
    let entries = std::fs::read_dir(source_dir).map_err(|source| LoadError::Io {
        path: source_dir.display().to_string(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| LoadError::Io {
            path: source_dir.display().to_string(),
            source,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("ml0") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Parses every `.ml0` file under `source_dir` and merges the functions
/// into one program. Function names must be unique across files.
pub fn load_project(source_dir: &Path) -> Result<Program, LoadError> {
    let mut merged = Program {
        functions: Vec::new(),
        source_path: source_dir.display().to_string(),
    };
    for path in source_files(source_dir)? {
        let text = std::fs::read_to_string(&path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let prog = parse_program(&text, &path.display().to_string())?;
        for f in prog.functions {
            if merged.function(&f.name).is_some() {
                return Err(ParseError::DuplicateFunction {
                    path: path.display().to_string(),
                    line: f.span.line,
                    col: f.span.col,
                    name: f.name,
                }
                .into());
            }
            merged.functions.push(f);
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_files_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.ml0"), "fn two() { return 2; }").unwrap();
        std::fs::write(dir.path().join("a.ml0"), "fn one() { return 1; }").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let prog = load_project(dir.path()).unwrap();
        let names: Vec<&str> = prog.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["one", "two"]);
    }

    #[test]
    fn duplicate_across_files_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.ml0"), "fn f() { return 1; }").unwrap();
        std::fs::write(dir.path().join("b.ml0"), "fn f() { return 2; }").unwrap();
        let err = load_project(dir.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate function"));
    }
}
