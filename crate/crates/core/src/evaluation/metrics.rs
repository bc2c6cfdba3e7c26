//! Decomposition metric battery. The formulas are reconstructions and are
//! versioned by [`METRICS_VERSION`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clustering::Decomposition;
use crate::code_model::terms::{identifier_terms, TermFilter};
use crate::code_model::{DependencyGraph, LabeledCorpus, MethodSig};
use crate::{Error, Result};

pub const METRICS_VERSION: &str = "metrics-v1";
pub const NED_BOUNDS: (usize, usize) = (5, 20);

/// Use case name -> fqns of the classes it touches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseCaseTraces {
    pub cases: BTreeMap<String, BTreeSet<String>>,
}

impl UseCaseTraces {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Resolves fqns to class ids; every fqn must exist in the corpus.
    pub fn resolve(&self, corpus: &LabeledCorpus) -> Result<BTreeMap<String, BTreeSet<usize>>> {
        if self.cases.is_empty() {
            return Err(Error::invalid("traces contain no use cases"));
        }
        self.cases
            .iter()
            .map(|(name, fqns)| {
                let ids = fqns
                    .iter()
                    .map(|f| {
                        corpus.class_id(f).ok_or_else(|| {
                            Error::invalid(format!("use case {name}: unknown class {f}"))
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok((name.clone(), ids))
            })
            .collect()
    }
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

fn cohesion<F>(d: &Decomposition, corpus: &LabeledCorpus, sim: F) -> f64
where
    F: Fn(&MethodSig, &MethodSig) -> f64,
{
    if d.services.is_empty() {
        return 0.0;
    }
    let per_service: Vec<f64> = d
        .services
        .iter()
        .map(|members| {
            let methods: Vec<&MethodSig> = members
                .iter()
                .flat_map(|&c| corpus.classes[c].public_methods())
                .collect();
            if methods.len() < 2 {
                return 1.0;
            }
            let mut total = 0.0;
            let mut count = 0usize;
            for i in 0..methods.len() {
                for j in i + 1..methods.len() {
                    total += sim(methods[i], methods[j]);
                    count += 1;
                }
            }
            total / count as f64
        })
        .collect();
    per_service.iter().sum::<f64>() / per_service.len() as f64
}

/// Message-level cohesion over public method signatures.
pub fn chm(d: &Decomposition, corpus: &LabeledCorpus) -> f64 {
    cohesion(d, corpus, |a, b| {
        let pa: BTreeSet<&String> = a.param_types.iter().collect();
        let pb: BTreeSet<&String> = b.param_types.iter().collect();
        let ra = BTreeSet::from([&a.return_type]);
        let rb = BTreeSet::from([&b.return_type]);
        0.5 * (jaccard(&pa, &pb) + jaccard(&ra, &rb))
    })
}

/// Domain-level cohesion over public method-name terms.
pub fn chd(d: &Decomposition, corpus: &LabeledCorpus) -> f64 {
    let tokens = |m: &MethodSig| -> BTreeSet<String> {
        identifier_terms(&m.name, TermFilter::default()).into_iter().collect()
    };
    cohesion(d, corpus, |a, b| jaccard(&tokens(a), &tokens(b)))
}

/// Mean over services of the entropy of use-case membership.
pub fn bcp(d: &Decomposition, traces: &BTreeMap<String, BTreeSet<usize>>) -> Result<f64> {
    if d.services.is_empty() {
        return Err(Error::invalid("decomposition has no services"));
    }
    let mut overlap = false;
    let mut total = 0.0;
    for members in &d.services {
        let counts: Vec<f64> = traces
            .values()
            .map(|ids| members.iter().filter(|c| ids.contains(c)).count() as f64)
            .collect();
        let sum: f64 = counts.iter().sum();
        if sum == 0.0 {
            continue;
        }
        overlap = true;
        total -= counts
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| (c / sum) * (c / sum).ln())
            .sum::<f64>();
    }
    if !overlap {
        return Err(Error::invalid("use-case traces do not cover any decomposed class"));
    }
    Ok(total / d.services.len() as f64)
}

/// Share of call weight crossing service boundaries, over edges whose
/// endpoints are both assigned.
pub fn icp(d: &Decomposition, calls: &DependencyGraph) -> Result<f64> {
    if calls.n != d.n {
        return Err(Error::invalid(format!(
            "call graph has {} classes, decomposition {}",
            calls.n, d.n
        )));
    }
    let owner = d.assignment();
    let (mut crossing, mut total) = (0u64, 0u64);
    for (s, t, w) in calls.edges() {
        if let (Some(a), Some(b)) = (owner[s], owner[t]) {
            total += w;
            if a != b {
                crossing += w;
            }
        }
    }
    Ok(if total == 0 { 0.0 } else { crossing as f64 / total as f64 })
}

/// `1 − (classes in services of size within bounds) / N`.
pub fn ned(d: &Decomposition, bounds: (usize, usize)) -> f64 {
    if d.n == 0 {
        return 0.0;
    }
    let within: usize = d
        .services
        .iter()
        .map(Vec::len)
        .filter(|&s| bounds.0 <= s && s <= bounds.1)
        .sum();
    1.0 - within as f64 / d.n as f64
}

pub fn cov(d: &Decomposition) -> f64 {
    if d.n == 0 {
        return 0.0;
    }
    d.assigned_count() as f64 / d.n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub app: String,
    /// Provider and algorithm that produced the decomposition.
    pub approach: String,
    pub chm: f64,
    pub chd: f64,
    /// Absent when no traces were supplied.
    pub bcp: Option<f64>,
    pub icp: f64,
    pub ned: f64,
    pub cov: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fbeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

pub fn metrics_report(
    d: &Decomposition,
    corpus: &LabeledCorpus,
    traces: Option<&UseCaseTraces>,
    approach: &str,
) -> Result<MetricsReport> {
    if d.n != corpus.len() {
        return Err(Error::invalid(format!(
            "decomposition covers {} classes but the corpus has {}",
            d.n,
            corpus.len()
        )));
    }
    d.validate_partial()?;
    let bcp = match traces {
        Some(t) => Some(bcp(d, &t.resolve(corpus)?)?),
        None => None,
    };
    Ok(MetricsReport {
        app: corpus.app_name.clone(),
        approach: approach.to_string(),
        chm: chm(d, corpus),
        chd: chd(d, corpus),
        bcp,
        icp: icp(d, &corpus.calls)?,
        ned: ned(d, NED_BOUNDS),
        cov: cov(d),
        fbeta: None,
        score: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::{ClassUnit, GraphKind, Visibility};

    fn sig(name: &str, params: &[&str], ret: &str) -> MethodSig {
        MethodSig {
            name: name.into(),
            param_types: params.iter().map(|s| s.to_string()).collect(),
            return_type: ret.into(),
            visibility: Visibility::Public,
        }
    }

    fn corpus(methods: Vec<Vec<MethodSig>>) -> LabeledCorpus {
        let classes = methods
            .into_iter()
            .enumerate()
            .map(|(i, methods)| ClassUnit {
                id: i,
                fqn: format!("c{i:02}"),
                path: String::new(),
                source: String::new(),
                methods,
                terms: Default::default(),
            })
            .collect();
        LabeledCorpus::from_classes("t", classes)
    }

    #[test]
    fn identical_signatures_are_fully_cohesive() {
        let c = corpus(vec![vec![sig("getA", &["X"], "Y")], vec![sig("getA", &["X"], "Y")]]);
        let d = Decomposition::from_services("t", 2, vec![vec![0, 1]]);
        assert_eq!(chm(&d, &c), 1.0);
        assert_eq!(chd(&d, &c), 1.0);
    }

    #[test]
    fn disjoint_methods_have_zero_cohesion() {
        let c = corpus(vec![vec![sig("alpha", &["A"], "B"), sig("beta", &["C"], "D")]]);
        let d = Decomposition::from_services("t", 1, vec![vec![0]]);
        assert_eq!(chm(&d, &c), 0.0);
        assert_eq!(chd(&d, &c), 0.0);
    }

    #[test]
    fn bcp_cases() {
        let d = Decomposition::from_services("t", 4, vec![vec![0, 1], vec![2, 3]]);
        let pure = BTreeMap::from([("u".into(), BTreeSet::from([0, 1])), ("v".into(), BTreeSet::from([2, 3]))]);
        assert_eq!(bcp(&d, &pure).unwrap(), 0.0);
        let split = BTreeMap::from([("u".into(), BTreeSet::from([0])), ("v".into(), BTreeSet::from([1]))]);
        // service 0 has entropy ln 2, service 1 is uncovered (0)
        assert!((bcp(&d, &split).unwrap() - std::f64::consts::LN_2 / 2.0).abs() < 1e-15);
        let none = BTreeMap::from([("u".into(), BTreeSet::new())]);
        assert!(bcp(&d, &none).is_err());
    }

    #[test]
    fn icp_extremes() {
        let mut g = DependencyGraph::new(GraphKind::Calls, 4);
        g.add(0, 1, 3).unwrap();
        g.add(2, 3, 1).unwrap();
        let together = Decomposition::from_services("t", 4, vec![vec![0, 1], vec![2, 3]]);
        let apart = Decomposition::from_services("t", 4, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(icp(&together, &g).unwrap(), 0.0);
        assert_eq!(icp(&apart, &g).unwrap(), 1.0);
        assert_eq!(icp(&together, &DependencyGraph::new(GraphKind::Calls, 4)).unwrap(), 0.0);
    }

    #[test]
    fn ned_arithmetic() {
        let mut ids = (0..20).collect::<Vec<_>>().into_iter();
        let sizes = [3, 6, 11];
        let services = sizes.iter().map(|&s| ids.by_ref().take(s).collect()).collect();
        let d = Decomposition::from_services("t", 20, services);
        assert!((ned(&d, NED_BOUNDS) - 0.15).abs() < 1e-15);
        let singles = Decomposition::from_labels("t", &[0, 1, 2, 3]);
        assert_eq!(ned(&singles, NED_BOUNDS), 1.0);
    }

    #[test]
    fn coverage() {
        let d = Decomposition::from_services("t", 10, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
        assert_eq!(cov(&d), 0.8);
    }
}
