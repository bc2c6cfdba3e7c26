use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub const EMBEDDING_FORMAT: &str = "monoembed-emb-v1";

/// Relative variance threshold below which a column counts as constant.
const ZERO_VARIANCE_REL: f64 = 1e-12;

/// Dense row-major `n × m` feature matrix; row `i` belongs to `class_ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub app_name: String,
    pub provider: String,
    n: usize,
    m: usize,
    data: Vec<f64>,
    class_ids: Vec<usize>,
}

impl EmbeddingMatrix {
    /// Builds a matrix whose row `i` belongs to class `i`.
    pub fn from_rows(app_name: impl Into<String>, provider: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..rows.len()).collect();
        Self::with_ids(app_name, provider, rows, ids)
    }

    pub fn with_ids(
        app_name: impl Into<String>,
        provider: impl Into<String>,
        rows: Vec<Vec<f64>>,
        class_ids: Vec<usize>,
    ) -> Result<Self> {
        let n = rows.len();
        if n != class_ids.len() {
            return Err(Error::invalid(format!("{n} rows but {} class ids", class_ids.len())));
        }
        let m = rows.first().map_or(0, Vec::len);
        if n > 0 && m == 0 {
            return Err(Error::invalid("embedding rows must have at least one column"));
        }
        let mut data = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("embedding contains a non-finite value"));
            }
            data.extend(row);
        }
        Ok(Self {
            app_name: app_name.into(),
            provider: provider.into(),
            n,
            m,
            data,
            class_ids,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    /// Row index of `class_id`, if present.
    pub fn row_of(&self, class_id: usize) -> Option<usize> {
        if self.class_ids.get(class_id) == Some(&class_id) {
            return Some(class_id);
        }
        self.class_ids.iter().position(|&c| c == class_id)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    /// Column-wise z-score with sample standard deviation (ddof = 1).
    /// Constant columns become all zero.
    pub fn standardize(&self) -> Result<Self> {
        if self.n < 2 {
            return Err(Error::invalid(format!(
                "{}: standardization needs at least 2 rows, got {}",
                self.app_name, self.n
            )));
        }
        let nf = self.n as f64;
        let mut out = self.data.clone();
        for j in 0..self.m {
            let mean = (0..self.n).map(|i| self.get(i, j)).sum::<f64>() / nf;
            let var = (0..self.n).map(|i| (self.get(i, j) - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            let scale = (0..self.n).map(|i| self.get(i, j).abs()).fold(0.0, f64::max);
            let constant = var <= ZERO_VARIANCE_REL * scale * scale || var == 0.0;
            let sd = var.sqrt();
            for i in 0..self.n {
                out[i * self.m + j] = if constant { 0.0 } else { (self.get(i, j) - mean) / sd };
            }
        }
        Ok(Self {
            data: out,
            ..self.clone()
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# {EMBEDDING_FORMAT} app={} provider={}\nclass_id", self.app_name, self.provider);
        for j in 0..self.m {
            let _ = write!(s, ",d{j}");
        }
        s.push('\n');
        for (i, id) in self.class_ids.iter().enumerate() {
            let _ = write!(s, "{id}");
            for v in self.row(i) {
                // `{:?}` prints the shortest representation that round-trips.
                let _ = write!(s, ",{v:?}");
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty embedding file"))?;
        let meta = header
            .strip_prefix("# ")
            .and_then(|h| h.strip_prefix(EMBEDDING_FORMAT))
            .ok_or_else(|| Error::invalid(format!("missing `# {EMBEDDING_FORMAT}` header line")))?;
        let mut app = String::new();
        let mut provider = String::new();
        for field in meta.split_whitespace() {
            if let Some(v) = field.strip_prefix("app=") {
                app = v.to_string();
            } else if let Some(v) = field.strip_prefix("provider=") {
                provider = v.to_string();
            }
        }
        let columns = lines
            .next()
            .ok_or_else(|| Error::invalid("embedding file has no column header"))?;
        let m = columns.split(',').count().saturating_sub(1);
        if !columns.starts_with("class_id") {
            return Err(Error::invalid("first column must be class_id"));
        }
        let mut rows = Vec::new();
        let mut ids = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut cells = line.split(',');
            let bad = |what: &str| Error::invalid(format!("embedding line {}: bad {what}", lineno + 3));
            let id: usize = cells
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| bad("class_id"))?;
            let row = cells
                .map(|c| c.trim().parse::<f64>().map_err(|_| bad("value")))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            ids.push(id);
            rows.push(row);
        }
        Self::with_ids(app, provider, rows, ids)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows("t", "test", rows).unwrap()
    }

    #[test]
    fn two_value_column() {
        let z = mat(vec![vec![1.0], vec![3.0]]).standardize().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z.get(0, 0) + h).abs() < 1e-15);
        assert!((z.get(1, 0) - h).abs() < 1e-15);
    }

    #[test]
    fn constant_column_is_zeroed() {
        let z = mat(vec![vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 4.0]]).standardize().unwrap();
        assert_eq!((0..3).map(|i| z.get(i, 0)).collect::<Vec<_>>(), vec![0.0; 3]);
    }

    #[test]
    fn single_row_is_rejected() {
        assert!(mat(vec![vec![1.0, 2.0]]).standardize().is_err());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = EmbeddingMatrix::from_rows("t", "x", vec![vec![1.0], vec![1.0, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let m = mat(vec![vec![0.1, -2.5e-17, 3.0], vec![1.0 / 3.0, 7.0, -0.0]]);
        let text = m.to_csv();
        assert!(text.starts_with("# monoembed-emb-v1 app=t provider=test\nclass_id,d0,d1,d2\n0,0.1,"));
        let back = EmbeddingMatrix::parse_csv(&text).unwrap();
        assert_eq!(back, m);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn standardize_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..12)) {
                let once = mat(rows).standardize().unwrap();
                let twice = once.standardize().unwrap();
                prop_assert_eq!(once.n(), twice.n());
                prop_assert_eq!(once.class_ids(), twice.class_ids());
                for i in 0..once.n() {
                    for j in 0..once.m() {
                        prop_assert!((once.get(i, j) - twice.get(i, j)).abs() < 1e-12);
                    }
                }
            }

            #[test]
            fn standardized_columns_have_zero_mean(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 2), 2..12)) {
                let z = mat(rows).standardize().unwrap();
                for j in 0..z.m() {
                    let mean = (0..z.n()).map(|i| z.get(i, j)).sum::<f64>() / z.n() as f64;
                    prop_assert!(mean.abs() < 1e-12);
                }
            }
        }
    }
}
