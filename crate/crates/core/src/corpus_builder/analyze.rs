use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use crate::code_model::{parse_class_units, ClassUnit, LabeledCorpus, ParseOptions};
use crate::{Error, Result};

/// Directory suffix marking a service source root.
pub const SOURCE_ROOT_PATTERN: [&str; 2] = ["main", "java"];

const SKIPPED_DIRS: &[&str] = &["target", "build", "node_modules", "out", "bin"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceRoot {
    pub service_name: String,
    /// Relative to the repository root.
    pub root_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    NoJavaFiles,
    TooFewServices { found: usize },
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::NoJavaFiles => "no-java",
            Rejection::TooFewServices { .. } => "<2 services",
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::NoJavaFiles => write!(f, "no-java: repository has no .java files"),
            Rejection::TooFewServices { found } => {
                write!(f, "<2 services: found {found} service(s) with classes")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum RepoAnalysis {
    Accepted {
        corpus: LabeledCorpus,
        warnings: Vec<String>,
    },
    Rejected(Rejection),
}

fn skip_dir(name: &str) -> bool {
    name.starts_with('.') || SKIPPED_DIRS.contains(&name)
}

fn components(rel: &Path) -> Vec<String> {
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect()
}

/// Finds every `.../main/java` directory. Roots are not searched for nested roots.
pub fn find_service_roots(repo_dir: &Path) -> Result<Vec<ServiceRoot>> {
    let mut rels = Vec::new();
    let mut walker = WalkDir::new(repo_dir).sort_by_file_name().into_iter();
    while let Some(entry) = walker.next() {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| repo_dir.into());
            Error::io(path, e.into_io_error().unwrap_or_else(|| std::io::Error::other("walk")))
        })?;
        if !entry.file_type().is_dir() || entry.depth() == 0 {
            continue;
        }
        let name = entry.file_name().to_string_lossy();
        if skip_dir(&name) {
            walker.skip_current_dir();
            continue;
        }
        let rel = entry.path().strip_prefix(repo_dir).unwrap_or(entry.path()).to_path_buf();
        if components(&rel).ends_with(&SOURCE_ROOT_PATTERN.map(String::from)) {
            rels.push(rel);
            walker.skip_current_dir();
        }
    }

    let preferred: Vec<String> = rels
        .iter()
        .map(|rel| {
            let parts = components(rel);
            if parts.len() >= 4 {
                parts[parts.len() - 4].clone()
            } else {
                parts.join("/")
            }
        })
        .collect();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for p in &preferred {
        *counts.entry(p.as_str()).or_insert(0) += 1;
    }
    Ok(rels
        .iter()
        .zip(&preferred)
        .map(|(rel, name)| ServiceRoot {
            service_name: if counts[name.as_str()] > 1 || name.is_empty() {
                components(rel).join("/")
            } else {
                name.clone()
            },
            root_path: rel.clone(),
        })
        .collect())
}

fn has_java_files(repo_dir: &Path) -> bool {
    WalkDir::new(repo_dir)
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'))
        .filter_map(|e| e.ok())
        .any(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "java"))
}

/// Labels every class under a service root with its service. Repositories
/// with fewer than two non-empty services are rejected.
pub fn analyze_repo(repo_dir: &Path, app_name: &str, opts: &ParseOptions) -> Result<RepoAnalysis> {
    std::fs::read_dir(repo_dir).map_err(|e| Error::io(repo_dir, e))?;
    if !has_java_files(repo_dir) {
        return Ok(RepoAnalysis::Rejected(Rejection::NoJavaFiles));
    }
    let roots = find_service_roots(repo_dir)?;
    if roots.len() < 2 {
        return Ok(RepoAnalysis::Rejected(Rejection::TooFewServices {
            found: roots.len(),
        }));
    }

    let mut warnings = Vec::new();
    let mut classes: Vec<ClassUnit> = Vec::new();
    let mut label_by_path: BTreeMap<String, String> = BTreeMap::new();
    let mut non_empty = 0;
    for root in &roots {
        let parsed = parse_class_units(&repo_dir.join(&root.root_path), opts)?;
        warnings.extend(parsed.warnings);
        if parsed.classes.is_empty() {
            continue;
        }
        non_empty += 1;
        let prefix = components(&root.root_path).join("/");
        for mut class in parsed.classes {
            class.path = format!("{prefix}/{}", class.path);
            label_by_path.insert(class.path.clone(), root.service_name.clone());
            classes.push(class);
        }
    }
    if non_empty < 2 {
        return Ok(RepoAnalysis::Rejected(Rejection::TooFewServices { found: non_empty }));
    }

    warnings.extend(crate::code_model::assign_ids(&mut classes));
    let labels = classes.iter().map(|c| label_by_path[&c.path].clone()).collect();
    let mut corpus = LabeledCorpus::from_classes(app_name, classes);
    corpus.labels = Some(labels);
    Ok(RepoAnalysis::Accepted { corpus, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn class(dir: &Path, rel: &str, name: &str) {
        let path = dir.join(rel).join(format!("{name}.java"));
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, format!("package demo;\npublic class {name} {{}}\n")).unwrap();
    }

    #[test]
    fn single_root_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        class(dir.path(), "app/src/main/java/demo", "Only");
        let out = analyze_repo(dir.path(), "r", &ParseOptions::default()).unwrap();
        match out {
            RepoAnalysis::Rejected(r) => assert_eq!(r.code(), "<2 services"),
            _ => panic!("expected rejection"),
        }
    }

    #[test]
    fn no_java_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("README.md"), "hi").unwrap();
        let out = analyze_repo(dir.path(), "r", &ParseOptions::default()).unwrap();
        assert!(matches!(out, RepoAnalysis::Rejected(Rejection::NoJavaFiles)));
    }

    #[test]
    fn two_services_are_labelled() {
        let dir = tempfile::tempdir().unwrap();
        for n in ["A1", "A2", "A3"] {
            class(dir.path(), "a/src/main/java/demo/a", n);
        }
        for n in ["B1", "B2", "B3", "B4"] {
            class(dir.path(), "b/src/main/java/demo/b", n);
        }
        // outside every root: ignored
        class(dir.path(), "tools", "Script");
        let RepoAnalysis::Accepted { corpus, warnings } =
            analyze_repo(dir.path(), "r", &ParseOptions::default()).unwrap()
        else {
            panic!("expected acceptance");
        };
        assert!(warnings.is_empty());
        assert_eq!(corpus.len(), 7);
        assert_eq!(corpus.services(), vec!["a", "b"]);
        let labels = corpus.labels.as_ref().unwrap();
        assert_eq!(labels.iter().filter(|l| *l == "a").count(), 3);
        assert!(corpus.classes[0].path.starts_with("a/src/main/java/"));
        corpus.validate().unwrap();
    }

    #[test]
    fn empty_root_does_not_count() {
        let dir = tempfile::tempdir().unwrap();
        class(dir.path(), "a/src/main/java/demo", "A1");
        fs::create_dir_all(dir.path().join("b/src/main/java")).unwrap();
        let out = analyze_repo(dir.path(), "r", &ParseOptions::default()).unwrap();
        assert!(matches!(
            out,
            RepoAnalysis::Rejected(Rejection::TooFewServices { found: 1 })
        ));
    }

    #[test]
    fn duplicate_fqns_across_services_are_disambiguated() {
        let dir = tempfile::tempdir().unwrap();
        class(dir.path(), "a/src/main/java/demo", "Shared");
        class(dir.path(), "b/src/main/java/demo", "Shared");
        let RepoAnalysis::Accepted { corpus, warnings } =
            analyze_repo(dir.path(), "r", &ParseOptions::default()).unwrap()
        else {
            panic!("expected acceptance");
        };
        assert_eq!(warnings.len(), 1);
        let fqns: Vec<_> = corpus.classes.iter().map(|c| c.fqn.as_str()).collect();
        assert_eq!(fqns, vec!["demo.Shared", "demo.Shared~2"]);
        assert_eq!(corpus.labels.unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn colliding_module_names_fall_back_to_paths() {
        let dir = tempfile::tempdir().unwrap();
        class(dir.path(), "x/core/src/main/java/p", "One");
        class(dir.path(), "y/core/src/main/java/p", "Two");
        class(dir.path(), "z/api/src/main/java/p", "Three");
        let roots = find_service_roots(dir.path()).unwrap();
        let names: Vec<_> = roots.iter().map(|r| r.service_name.as_str()).collect();
        assert_eq!(
            names,
            vec!["x/core/src/main/java", "y/core/src/main/java", "api"]
        );
    }
}
