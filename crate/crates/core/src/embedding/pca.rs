use nalgebra::DMatrix;

use super::EmbeddingMatrix;

/// Projects rows onto the first two principal axes of the column-centred
/// matrix. Each axis is oriented so its largest-magnitude loading is
/// positive; missing axes (rank < 2) give zero coordinates.
pub fn pca_2d(matrix: &EmbeddingMatrix) -> Vec<[f64; 2]> {
    let (n, m) = (matrix.n(), matrix.m());
    if n == 0 {
        return Vec::new();
    }
    let mut x = DMatrix::from_fn(n, m, |i, j| matrix.get(i, j));
    for j in 0..m {
        let mean = x.column(j).mean();
        x.column_mut(j).add_scalar_mut(-mean);
    }
    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let scale = svd.singular_values.max().max(1.0);

    let mut out = vec![[0.0; 2]; n];
    for (axis, &k) in order.iter().take(2).enumerate() {
        if svd.singular_values[k] <= 1e-12 * scale {
            continue;
        }
        let mut dir: Vec<f64> = v_t.row(k).iter().copied().collect();
        let pivot = dir
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(_, v)| *v)
            .unwrap_or(1.0);
        if pivot < 0.0 {
            dir.iter_mut().for_each(|v| *v = -*v);
        }
        for (i, row) in out.iter_mut().enumerate() {
            row[axis] = (0..m).map(|j| x[(i, j)] * dir[j]).sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows("t", "x", rows).unwrap()
    }

    #[test]
    fn constant_matrix_gives_zeros() {
        let out = pca_2d(&mat(vec![vec![3.0, 3.0, 3.0]; 4]));
        assert!(out.iter().all(|p| *p == [0.0, 0.0]));
    }

    #[test]
    fn two_d_input_preserves_distances() {
        let rows = vec![vec![0.0, 0.0], vec![4.0, 1.0], vec![1.0, 3.0], vec![-2.0, 0.5]];
        let out = pca_2d(&mat(rows.clone()));
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                let d0 = ((rows[i][0] - rows[j][0]).powi(2) + (rows[i][1] - rows[j][1]).powi(2)).sqrt();
                let d1 = ((out[i][0] - out[j][0]).powi(2) + (out[i][1] - out[j][1]).powi(2)).sqrt();
                assert!((d0 - d1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn first_axis_follows_largest_spread() {
        let out = pca_2d(&mat(vec![vec![-10.0, 0.1], vec![0.0, -0.1], vec![10.0, 0.0]]));
        assert!(out[0][0] < 0.0 && out[2][0] > 0.0);
        assert!(out.iter().all(|p| p[1].abs() < 0.2));
    }
}
