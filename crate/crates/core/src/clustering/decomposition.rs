use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A grouping of class ids into services. Services are kept in canonical
/// order (by smallest member) with sorted members, so two decompositions
/// with the same blocks compare equal regardless of labelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub app_name: String,
    /// Size of the class universe.
    pub n: usize,
    pub services: Vec<Vec<usize>>,
    pub algorithm: String,
    pub converged: bool,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct DecompositionFile {
    app: String,
    algorithm: String,
    k: usize,
    services: BTreeMap<String, Vec<usize>>,
    converged: bool,
    seed: u64,
}

fn canonical(mut services: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for s in &mut services {
        s.sort_unstable();
    }
    services.retain(|s| !s.is_empty());
    services.sort();
    services
}

impl Decomposition {
    pub fn from_services(app_name: impl Into<String>, n: usize, services: Vec<Vec<usize>>) -> Self {
        Self {
            app_name: app_name.into(),
            n,
            services: canonical(services),
            algorithm: "manual".into(),
            converged: true,
            seed: 0,
        }
    }

    /// `labels[i]` is the (arbitrary) cluster label of class `i`.
    pub fn from_labels(app_name: impl Into<String>, labels: &[usize]) -> Self {
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            blocks.entry(l).or_default().push(i);
        }
        Self::from_services(app_name, labels.len(), blocks.into_values().collect())
    }

    pub fn with_meta(mut self, algorithm: &str, converged: bool, seed: u64) -> Self {
        self.algorithm = algorithm.to_string();
        self.converged = converged;
        self.seed = seed;
        self
    }

    pub fn k(&self) -> usize {
        self.services.len()
    }

    /// Service index per class; `None` for unassigned classes.
    pub fn assignment(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n];
        for (s, members) in self.services.iter().enumerate() {
            for &c in members {
                if c < self.n {
                    out[c] = Some(s);
                }
            }
        }
        out
    }

    pub fn assigned_count(&self) -> usize {
        self.services.iter().map(Vec::len).sum()
    }

    /// Ids in range and no class in two services; coverage may be partial.
    pub fn validate_partial(&self) -> Result<()> {
        let mut seen = vec![false; self.n];
        for members in &self.services {
            for &c in members {
                if c >= self.n {
                    return Err(Error::invalid(format!(
                        "{}: class id {c} out of range for {} classes",
                        self.app_name, self.n
                    )));
                }
                if std::mem::replace(&mut seen[c], true) {
                    return Err(Error::invalid(format!(
                        "{}: class {c} assigned to more than one service",
                        self.app_name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Full partition with at least two services, each smaller than `n`.
    pub fn validate(&self) -> Result<()> {
        self.validate_partial()?;
        if self.assigned_count() != self.n {
            return Err(Error::invalid(format!(
                "{}: {} of {} classes assigned",
                self.app_name,
                self.assigned_count(),
                self.n
            )));
        }
        if self.n >= 2 && self.k() < 2 {
            return Err(Error::invalid(format!(
                "{}: a single service holding all {} classes is not a decomposition",
                self.app_name, self.n
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = DecompositionFile {
            app: self.app_name.clone(),
            algorithm: self.algorithm.clone(),
            k: self.k(),
            services: self
                .services
                .iter()
                .enumerate()
                .map(|(i, s)| (format!("s{i}"), s.clone()))
                .collect(),
            converged: self.converged,
            seed: self.seed,
        };
        Ok(serde_json::to_string(&file)? + "\n")
    }

    /// Parses a decomposition file. Without `n` the universe is taken as
    /// `0..=max id`.
    pub fn from_json(text: &str, n: Option<usize>) -> Result<Self> {
        let file: DecompositionFile = serde_json::from_str(text)?;
        if file.k != file.services.len() {
            return Err(Error::invalid(format!(
                "{}: k = {} but {} services listed",
                file.app,
                file.k,
                file.services.len()
            )));
        }
        let n = n.unwrap_or_else(|| {
            file.services
                .values()
                .flatten()
                .max()
                .map_or(0, |m| m + 1)
        });
        let d = Self {
            app_name: file.app,
            n,
            services: canonical(file.services.into_values().collect()),
            algorithm: file.algorithm,
            converged: file.converged,
            seed: file.seed,
        };
        d.validate_partial()?;
        Ok(d)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, n: Option<usize>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relabelling_is_canonical() {
        let a = Decomposition::from_labels("x", &[2, 2, 0, 1]);
        let b = Decomposition::from_labels("x", &[5, 5, 9, 7]);
        assert_eq!(a, b);
        assert_eq!(a.services, vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn single_service_is_invalid() {
        assert!(Decomposition::from_labels("x", &[0, 0, 0]).validate().is_err());
        assert!(Decomposition::from_labels("x", &[0]).validate().is_ok());
    }

    #[test]
    fn partial_coverage() {
        let d = Decomposition::from_services("x", 4, vec![vec![0], vec![1, 2]]);
        d.validate_partial().unwrap();
        assert!(d.validate().is_err());
        assert_eq!(d.assignment(), vec![Some(0), Some(1), Some(1), None]);
    }

    #[test]
    fn duplicate_membership_is_rejected() {
        let d = Decomposition::from_services("x", 3, vec![vec![0, 1], vec![1, 2]]);
        assert!(d.validate_partial().is_err());
    }

    #[test]
    fn json_roundtrip() {
        let d = Decomposition::from_labels("app", &[1, 0, 1, 2]).with_meta("kmeans", false, 9);
        let text = d.to_json().unwrap();
        assert_eq!(
            text,
            "{\"app\":\"app\",\"algorithm\":\"kmeans\",\"k\":3,\"services\":{\"s0\":[0,2],\"s1\":[1],\"s2\":[3]},\"converged\":false,\"seed\":9}\n"
        );
        assert_eq!(Decomposition::from_json(&text, Some(4)).unwrap(), d);
    }
}
