use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{sq_dist, Clustering};
use crate::embedding::EmbeddingMatrix;
use crate::{Error, Result};

pub const CONVERGENCE_ITER: usize = 15;
pub const PREFERENCE_RAISES: usize = 5;

/// Median of the off-diagonal similarities.
pub fn default_preference(s: &[Vec<f64>]) -> f64 {
    let n = s.len();
    let mut off: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&k| k != i).map(move |k| (i, k)))
        .map(|(i, k)| s[i][k])
        .collect();
    if off.is_empty() {
        return 0.0;
    }
    off.sort_by(f64::total_cmp);
    let m = off.len();
    if m % 2 == 1 {
        off[m / 2]
    } else {
        (off[m / 2 - 1] + off[m / 2]) / 2.0
    }
}

pub fn similarity_matrix(x: &EmbeddingMatrix) -> Vec<Vec<f64>> {
    (0..x.n())
        .map(|i| (0..x.n()).map(|k| -sq_dist(x.row(i), x.row(k))).collect())
        .collect()
}

/// One run of damped responsibility/availability message passing at a
/// fixed preference. Returns exemplar labels (empty if none emerged).
fn run(s_in: &[Vec<f64>], preference: f64, damping: f64, max_iter: usize, seed: u64) -> (Vec<usize>, bool) {
    let n = s_in.len();
    let mut s: Vec<Vec<f64>> = s_in.to_vec();
    for (i, row) in s.iter_mut().enumerate() {
        row[i] = preference;
    }
    // Tiny seeded noise breaks ties between equivalent exemplars.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for row in s.iter_mut() {
        for v in row.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += (f64::EPSILON * *v + f64::MIN_POSITIVE * 100.0) * z;
        }
    }

    let mut r = vec![vec![0.0; n]; n];
    let mut a = vec![vec![0.0; n]; n];
    let mut history = vec![vec![false; CONVERGENCE_ITER]; n];
    let mut converged = false;
    let mut exemplar = vec![false; n];
    for it in 0..max_iter {
        for i in 0..n {
            let (mut best, mut best_k, mut second) = (f64::NEG_INFINITY, 0, f64::NEG_INFINITY);
            for k in 0..n {
                let v = a[i][k] + s[i][k];
                if v > best {
                    second = best;
                    best = v;
                    best_k = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == best_k { second } else { best };
                r[i][k] = damping * r[i][k] + (1.0 - damping) * (s[i][k] - competitor);
            }
        }
        for k in 0..n {
            let col: f64 = (0..n)
                .map(|i| if i == k { r[k][k] } else { r[i][k].max(0.0) })
                .sum();
            for i in 0..n {
                let target = if i == k {
                    col - r[k][k]
                } else {
                    (col - r[i][k].max(0.0)).min(0.0)
                };
                a[i][k] = damping * a[i][k] + (1.0 - damping) * target;
            }
        }

        for i in 0..n {
            exemplar[i] = a[i][i] + r[i][i] > 0.0;
            history[i][it % CONVERGENCE_ITER] = exemplar[i];
        }
        let k = exemplar.iter().filter(|&&e| e).count();
        if it + 1 >= CONVERGENCE_ITER {
            let stable = history.iter().all(|h| h.iter().all(|&e| e) || h.iter().all(|&e| !e));
            if stable && k > 0 {
                converged = true;
                break;
            }
        }
    }

    let mut centers: Vec<usize> = (0..n).filter(|&i| exemplar[i]).collect();
    if centers.is_empty() {
        return (Vec::new(), converged);
    }
    let nearest = |centers: &[usize], i: usize| -> usize {
        if let Some(pos) = centers.iter().position(|&c| c == i) {
            return pos;
        }
        let mut best = 0;
        for (c, &e) in centers.iter().enumerate() {
            if s[i][e] > s[i][centers[best]] {
                best = c;
            }
        }
        best
    };
    // Refine each exemplar to the member maximizing summed similarity.
    let labels: Vec<usize> = (0..n).map(|i| nearest(&centers, i)).collect();
    for (c, center) in centers.iter_mut().enumerate() {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let mut best = members[0];
        let mut best_sum = f64::NEG_INFINITY;
        for &j in &members {
            let total: f64 = members.iter().map(|&i| s[i][j]).sum();
            if total > best_sum {
                best_sum = total;
                best = j;
            }
        }
        *center = best;
    }
    ((0..n).map(|i| nearest(&centers, i)).collect(), converged)
}

/// Affinity propagation on negative squared Euclidean similarities. When
/// fewer than two exemplars emerge the preference is raised by half its
/// magnitude, up to [`PREFERENCE_RAISES`] times.
pub fn affinity_propagation(
    x: &EmbeddingMatrix,
    damping: f64,
    preference: Option<f64>,
    max_iter: usize,
    seed: u64,
) -> Result<Clustering> {
    if !(0.5..1.0).contains(&damping) {
        return Err(Error::invalid(format!("damping must be in [0.5, 1), got {damping}")));
    }
    if x.n() < 2 {
        return Err(Error::invalid("affinity propagation needs at least 2 rows"));
    }
    let s = similarity_matrix(x);
    let mut pref = preference.unwrap_or_else(|| default_preference(&s));
    for attempt in 0..=PREFERENCE_RAISES {
        let (labels, converged) = run(&s, pref, damping, max_iter, seed);
        let k = labels.iter().max().map_or(0, |m| m + 1);
        if k >= 2 {
            return Ok(Clustering { labels, converged });
        }
        if attempt < PREFERENCE_RAISES {
            log::info!("affinity propagation found {k} exemplar(s) at preference {pref}; raising");
            pref += pref.abs() * 0.5;
        }
    }
    Err(Error::invalid(format!(
        "affinity propagation found fewer than 2 exemplars after {PREFERENCE_RAISES} preference raises"
    )))
}
