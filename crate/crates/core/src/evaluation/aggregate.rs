use std::collections::{BTreeMap, BTreeSet};

use super::MetricsReport;
use crate::{Error, Result};

/// Weights applied to the per-app z-scores: cohesion is rewarded, coupling,
/// impurity and extreme sizes are penalized.
pub const WEIGHTS: [(&str, f64); 6] = [
    ("chm", 2.0),
    ("chd", 2.0),
    ("bcp", -2.0),
    ("icp", -2.0),
    ("ned", -1.0),
    ("cov", 1.0),
];

fn metric(r: &MetricsReport, name: &str) -> Option<f64> {
    match name {
        "chm" => Some(r.chm),
        "chd" => Some(r.chd),
        "bcp" => r.bcp,
        "icp" => Some(r.icp),
        "ned" => Some(r.ned),
        "cov" => Some(r.cov),
        _ => unreachable!("unknown metric {name}"),
    }
}

/// z-scores with sample standard deviation; constant input gives zeros.
pub fn z_scores(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if var <= 1e-24 * scale * scale || var == 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / var.sqrt()).collect()
}

/// Per-approach SCORE: weighted sum of per-app z-scores, averaged over the
/// apps each approach was evaluated on. `reports` maps approach -> app -> report.
pub fn aggregate_score(reports: &BTreeMap<String, BTreeMap<String, MetricsReport>>) -> Result<BTreeMap<String, f64>> {
    let apps: BTreeSet<&String> = reports.values().flat_map(|m| m.keys()).collect();
    if apps.is_empty() {
        return Err(Error::invalid("no metrics reports to score"));
    }
    let mut sums: BTreeMap<&String, (f64, usize)> = BTreeMap::new();
    for app in apps {
        let rows: Vec<(&String, &MetricsReport)> = reports
            .iter()
            .filter_map(|(approach, per_app)| per_app.get(app).map(|r| (approach, r)))
            .collect();
        if rows.len() < 2 {
            return Err(Error::invalid(format!(
                "standardization undefined: app {app} has {} approach(es), need 2",
                rows.len()
            )));
        }
        let mut score = vec![0.0; rows.len()];
        for (name, weight) in WEIGHTS {
            let values: Vec<Option<f64>> = rows.iter().map(|(_, r)| metric(r, name)).collect();
            // metrics missing for any approach of this app contribute nothing
            let Some(values) = values.into_iter().collect::<Option<Vec<f64>>>() else {
                continue;
            };
            for (s, z) in score.iter_mut().zip(z_scores(&values)) {
                *s += weight * z;
            }
        }
        for ((approach, _), s) in rows.iter().zip(score) {
            let e = sums.entry(approach).or_insert((0.0, 0));
            e.0 += s;
            e.1 += 1;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(a, (s, n))| (a.clone(), s / n as f64))
        .collect())
}
