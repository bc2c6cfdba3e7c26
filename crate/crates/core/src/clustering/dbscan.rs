use serde::{Deserialize, Serialize};

use super::{sq_dist, Clustering};
use crate::embedding::EmbeddingMatrix;
use crate::{Error, Result};

/// What happens to points no cluster reaches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoisePolicy {
    /// Join the cluster of the nearest core point.
    #[default]
    Nearest,
    /// Become a service of their own.
    Singletons,
}

impl std::str::FromStr for NoisePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "singletons" => Ok(Self::Singletons),
            other => Err(Error::invalid(format!("unknown noise policy {other:?}"))),
        }
    }
}

/// Raw DBSCAN labels (`None` = noise). A point is core when at least
/// `min_pts` points, itself included, lie within `eps`.
pub fn dbscan_labels(x: &EmbeddingMatrix, eps: f64, min_pts: usize) -> (Vec<Option<usize>>, Vec<bool>) {
    let n = x.n();
    let eps2 = eps * eps;
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| sq_dist(x.row(i), x.row(j)) <= eps2).collect())
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_pts).collect();
    let mut labels = vec![None; n];
    let mut next = 0;
    for start in 0..n {
        if !core[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            for &q in &neighbours[p] {
                if labels[q].is_none() {
                    labels[q] = Some(next);
                    if core[q] {
                        stack.push(q);
                    }
                }
            }
        }
        next += 1;
    }
    (labels, core)
}

pub fn dbscan(x: &EmbeddingMatrix, eps: f64, min_pts: usize, noise: NoisePolicy) -> Result<(Clustering, usize)> {
    if !(eps > 0.0) || min_pts == 0 {
        return Err(Error::invalid("dbscan needs eps > 0 and min_pts >= 1"));
    }
    let (raw, core) = dbscan_labels(x, eps, min_pts);
    let clusters = raw.iter().flatten().max().map_or(0, |m| m + 1);
    if clusters == 0 {
        return Err(Error::invalid(format!("no clusters at eps {eps}")));
    }
    let noise_count = raw.iter().filter(|l| l.is_none()).count();
    let mut extra = clusters;
    let labels = (0..x.n())
        .map(|i| match (raw[i], noise) {
            (Some(l), _) => l,
            (None, NoisePolicy::Singletons) => {
                extra += 1;
                extra - 1
            }
            (None, NoisePolicy::Nearest) => {
                let nearest = (0..x.n())
                    .filter(|&j| core[j])
                    .min_by(|&a, &b| sq_dist(x.row(i), x.row(a)).total_cmp(&sq_dist(x.row(i), x.row(b))).then(a.cmp(&b)))
                    .expect("a cluster implies a core point");
                raw[nearest].expect("core points are labelled")
            }
        })
        .collect();
    Ok((
        Clustering {
            labels,
            converged: true,
        },
        noise_count,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows("t", "x", rows).unwrap()
    }

    fn two_groups_and_outlier() -> EmbeddingMatrix {
        mat(vec![
            vec![0.0],
            vec![0.1],
            vec![0.2],
            vec![5.0],
            vec![5.1],
            vec![5.2],
            vec![105.0],
        ])
    }

    #[test]
    fn outlier_joins_nearest_cluster() {
        let (c, noise) = dbscan(&two_groups_and_outlier(), 0.5, 2, NoisePolicy::Nearest).unwrap();
        assert_eq!(noise, 1);
        assert_eq!(c.labels[6], c.labels[3]);
    }

    #[test]
    fn outlier_as_singleton() {
        let (c, _) = dbscan(&two_groups_and_outlier(), 0.5, 2, NoisePolicy::Singletons).unwrap();
        assert_eq!(c.labels, vec![0, 0, 0, 1, 1, 1, 2]);
    }

    #[test]
    fn all_noise_is_an_error() {
        let err = dbscan(&mat(vec![vec![0.0], vec![10.0]]), 0.5, 2, NoisePolicy::Nearest).unwrap_err();
        assert!(err.to_string().contains("no clusters at eps"));
    }
}
