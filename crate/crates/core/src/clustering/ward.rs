use super::{sq_dist, Clustering};
use crate::embedding::EmbeddingMatrix;
use crate::{Error, Result};

/// One agglomeration step: clusters `a < b` (identified by the slot of their
/// smallest member) join into slot `a` at Ward cost `cost`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub cost: f64,
    pub size: usize,
}

/// Full Ward linkage via the Lance–Williams recurrence on squared Euclidean
/// distances. Ties go to the smallest `(a, b)` pair.
pub fn ward_linkage(x: &EmbeddingMatrix) -> Vec<Merge> {
    let n = x.n();
    let mut d: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| sq_dist(x.row(i), x.row(j))).collect())
        .collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut best = (f64::INFINITY, 0, 0);
        for a in (0..n).filter(|&a| active[a]) {
            for b in (a + 1..n).filter(|&b| active[b]) {
                if d[a][b] < best.0 {
                    best = (d[a][b], a, b);
                }
            }
        }
        let (cost, a, b) = best;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in (0..n).filter(|&k| active[k] && k != a && k != b) {
            let nk = size[k] as f64;
            let v = ((na + nk) * d[k][a] + (nb + nk) * d[k][b] - nk * d[a][b]) / (na + nb + nk);
            d[k][a] = v;
            d[a][k] = v;
        }
        active[b] = false;
        size[a] += size[b];
        merges.push(Merge {
            a,
            b,
            cost,
            size: size[a],
        });
    }
    merges
}

/// Cuts the Ward tree at `k` clusters.
pub fn ward(x: &EmbeddingMatrix, k: usize) -> Result<Clustering> {
    let n = x.n();
    if k < 2 {
        return Err(Error::invalid(format!("ward needs k >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds the {n} classes")));
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for m in ward_linkage(x).into_iter().take(n - k) {
        parent[m.b] = m.a;
    }
    fn root(parent: &[usize], mut i: usize) -> usize {
        while parent[i] != i {
            i = parent[i];
        }
        i
    }
    Ok(Clustering {
        labels: (0..n).map(|i| root(&parent, i)).collect(),
        converged: true,
    })
}
