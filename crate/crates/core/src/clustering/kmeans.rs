use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{nearest_center, sq_dist, Clustering};
use crate::embedding::EmbeddingMatrix;
use crate::{Error, Result};

fn plus_plus_seeds(x: &EmbeddingMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = x.n();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            while d2[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            // only duplicates left: take the lowest unused index
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), x.row(next)));
        }
    }
    chosen.into_iter().map(|i| x.row(i).to_vec()).collect()
}

/// k-means++ seeding followed by Lloyd iterations until the assignment
/// stops changing or `max_iter` is reached.
pub fn kmeans(x: &EmbeddingMatrix, k: usize, max_iter: usize, seed: u64) -> Result<Clustering> {
    let n = x.n();
    if k < 2 {
        return Err(Error::invalid(format!("k-means needs k >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds the {n} classes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_seeds(x, k, &mut rng);
    let mut labels: Vec<usize> = (0..n).map(|i| nearest_center(x.row(i), &centers)).collect();
    let mut converged = false;
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; x.m()]; k];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // re-seed to the point farthest from its current centre
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(x.row(a), &centers[labels[a]]);
                        let db = sq_dist(x.row(b), &centers[labels[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("n > 0");
                counts[labels[far]] -= 1;
                counts[c] = 1;
                labels[far] = c;
                centers[c] = x.row(far).to_vec();
            }
        }
        let next: Vec<usize> = (0..n).map(|i| nearest_center(x.row(i), &centers)).collect();
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
    }
    Ok(Clustering { labels, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows("t", "x", rows).unwrap()
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let c = kmeans(&mat(vec![vec![0.0], vec![1.0], vec![5.0]]), 3, 100, 1).unwrap();
        let mut l = c.labels.clone();
        l.sort();
        l.dedup();
        assert_eq!(l.len(), 3);
    }

    #[test]
    fn k_above_n_is_an_error() {
        assert!(kmeans(&mat(vec![vec![0.0], vec![1.0]]), 3, 100, 1).is_err());
    }

    #[test]
    fn duplicates_stay_together() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![3.0, 1.0], vec![9.0, 9.0], vec![9.0, 9.0]];
        for seed in 0..20 {
            let c = kmeans(&mat(rows.clone()), 2, 100, seed).unwrap();
            assert_eq!(c.labels[0], c.labels[1]);
            assert_eq!(c.labels[3], c.labels[4]);
        }
    }
}
