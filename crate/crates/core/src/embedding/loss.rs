use crate::{Error, Result};

fn check_dims(a: &[f64], p: &[f64], n: &[f64]) -> Result<()> {
    for other in [p, n] {
        if other.len() != a.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: other.len(),
            });
        }
    }
    Ok(())
}

pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `max(0, ‖a − p‖ − ‖a − n‖ + alpha)` with Euclidean norms.
pub fn triplet_loss(a: &[f64], p: &[f64], n: &[f64], alpha: f64) -> Result<f64> {
    check_dims(a, p, n)?;
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("margin alpha must be positive, got {alpha}")));
    }
    Ok((euclidean(a, p) - euclidean(a, n) + alpha).max(0.0))
}

/// Loss and its gradients with respect to `a`, `p` and `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletGrad {
    pub loss: f64,
    pub da: Vec<f64>,
    pub dp: Vec<f64>,
    pub dn: Vec<f64>,
}

/// Gradients are zero when the hinge is inactive. At a zero distance the
/// corresponding unit vector is taken as zero (a subgradient).
pub fn triplet_grad(a: &[f64], p: &[f64], n: &[f64], alpha: f64) -> Result<TripletGrad> {
    let loss = triplet_loss(a, p, n, alpha)?;
    let d = a.len();
    let mut g = TripletGrad {
        loss,
        da: vec![0.0; d],
        dp: vec![0.0; d],
        dn: vec![0.0; d],
    };
    if loss <= 0.0 {
        return Ok(g);
    }
    let dap = euclidean(a, p);
    let dan = euclidean(a, n);
    for k in 0..d {
        let up = if dap > 0.0 { (a[k] - p[k]) / dap } else { 0.0 };
        let un = if dan > 0.0 { (a[k] - n[k]) / dan } else { 0.0 };
        g.da[k] = up - un;
        g.dp[k] = -up;
        g.dn[k] = un;
    }
    Ok(g)
}
