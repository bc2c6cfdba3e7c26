use std::path::{Path, PathBuf};
use std::process::Command;

use super::analyze::{analyze_repo, Rejection, RepoAnalysis};
use super::discover::repo_name_from_url;
use crate::code_model::{LabeledCorpus, ParseOptions};
use crate::{Error, Result};

/// A repository to mine: a clone URL or an already checked-out directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepoSource {
    Remote(String),
    Local(PathBuf),
}

impl RepoSource {
    /// Existing directories are local; anything else is treated as a URL.
    pub fn parse(entry: &str, base: &Path) -> Self {
        let candidate = base.join(entry);
        if candidate.is_dir() {
            RepoSource::Local(candidate)
        } else {
            RepoSource::Remote(entry.to_string())
        }
    }

    pub fn name(&self) -> String {
        match self {
            RepoSource::Remote(url) => repo_name_from_url(url),
            RepoSource::Local(path) => path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

/// Shallow-clones `url` into `clones/<name>`, reusing an existing checkout.
pub fn fetch_repo(url: &str, clones: &Path, offline: bool) -> Result<PathBuf> {
    let dest = clones.join(repo_name_from_url(url));
    if dest.is_dir() {
        return Ok(dest);
    }
    if offline {
        return Err(Error::Network(format!("offline and {url} is not cloned in {}", clones.display())));
    }
    std::fs::create_dir_all(clones).map_err(|e| Error::io(clones, e))?;
    let status = Command::new("git")
        .args(["clone", "--depth", "1", "--quiet", url])
        .arg(&dest)
        .status()
        .map_err(|e| Error::Network(format!("cannot run git: {e}")))?;
    if !status.success() {
        let _ = std::fs::remove_dir_all(&dest);
        return Err(Error::Network(format!("git clone {url} failed ({status})")));
    }
    Ok(dest)
}

#[derive(Debug, Default)]
pub struct MineOutcome {
    pub accepted: Vec<LabeledCorpus>,
    pub rejected: Vec<(String, Rejection)>,
    pub warnings: Vec<String>,
}

/// Fetches and analyzes every source, in order. Repository names must be unique.
pub fn mine_repos(sources: &[RepoSource], clones: &Path, offline: bool, opts: &ParseOptions) -> Result<MineOutcome> {
    let mut out = MineOutcome::default();
    let mut names = std::collections::BTreeSet::new();
    for source in sources {
        let name = source.name();
        if !names.insert(name.clone()) {
            return Err(Error::invalid(format!("repository {name} listed twice")));
        }
        let dir = match source {
            RepoSource::Local(path) => path.clone(),
            RepoSource::Remote(url) => fetch_repo(url, clones, offline)?,
        };
        match analyze_repo(&dir, &name, opts)? {
            RepoAnalysis::Accepted { corpus, warnings } => {
                out.warnings.extend(warnings.into_iter().map(|w| format!("{name}: {w}")));
                out.accepted.push(corpus);
            }
            RepoAnalysis::Rejected(why) => {
                log::info!("rejected {name}: {why}");
                out.rejected.push((name, why));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_kinds() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("shop")).unwrap();
        assert_eq!(RepoSource::parse("shop", dir.path()).name(), "shop");
        let remote = RepoSource::parse("https://github.com/acme/shop.git", dir.path());
        assert_eq!(remote, RepoSource::Remote("https://github.com/acme/shop.git".into()));
        assert_eq!(remote.name(), "acme__shop");
    }

    #[test]
    fn offline_without_clone_is_a_network_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = fetch_repo("https://example.invalid/a/b.git", dir.path(), true).unwrap_err();
        assert!(matches!(err, Error::Network(_)));
    }
}
