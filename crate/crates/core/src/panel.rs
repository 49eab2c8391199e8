use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n × d` panel of observations `y_1, …, y_n`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesPanel {
    n: usize,
    d: usize,
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl TimeSeriesPanel {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "panel must have n >= 1 and d >= 1 (got n={n}, d={d})"
            )));
        }
        if values.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "row {}, column {}",
                pos / d + 1,
                pos % d + 1
            )));
        }
        Ok(Self {
            n,
            d,
            values,
            labels: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::InvalidArgument(format!(
                    "ragged panel: row {} has {} columns, expected {d}",
                    i + 1,
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(n, d, values)
    }

    /// A univariate panel from a single column.
    pub fn from_column(column: &[f64]) -> Result<Self> {
        Self::new(column.len(), 1, column.to_vec())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Length of the half-vectorized outer products, `d(d+1)/2`.
    pub fn vdim(&self) -> usize {
        self.d * (self.d + 1) / 2
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.d..(j + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of 0-based row `j`, if labels are attached.
    pub fn label(&self, j: usize) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(j)).map(String::as_str)
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.rows().map(|r| r[c]).collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.d];
        for row in self.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.n as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }

    /// Rows `lo..hi` (0-based, half-open), labels included.
    pub fn slice(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi || hi > self.n {
            return Err(Error::InvalidArgument(format!(
                "invalid row range {lo}..{hi} for panel of {} rows",
                self.n
            )));
        }
        Ok(Self {
            n: hi - lo,
            d: self.d,
            values: self.values[lo * self.d..hi * self.d].to_vec(),
            labels: self.labels.as_ref().map(|l| l[lo..hi].to_vec()),
        })
    }

    /// Applies `f` to every entry, keeping shape and labels.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = Self::new(self.n, self.d, self.values.iter().map(|&v| f(v)).collect())?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// Reorders the coordinates so that new column `i` is old column `perm[i]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; self.d];
        for &p in perm {
            if p >= self.d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let values = self
            .rows()
            .flat_map(|row| perm.iter().map(move |&p| row[p]))
            .collect();
        let mut out = Self::new(self.n, self.d, values)?;
        out.labels = self.labels.clone();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_ragged_input() {
        assert!(matches!(
            TimeSeriesPanel::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
        assert!(TimeSeriesPanel::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(TimeSeriesPanel::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn slice_keeps_labels() {
        let p = TimeSeriesPanel::from_rows(&[[1.0], [2.0], [3.0]])
            .unwrap()
            .with_labels(vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        let s = p.slice(1, 3).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.label(0), Some("b"));
        assert_eq!(s.row(1), &[3.0]);
    }

    #[test]
    fn permutation_moves_columns() {
        let p = TimeSeriesPanel::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let q = p.permute_columns(&[2, 0, 1]).unwrap();
        assert_eq!(q.row(0), &[3.0, 1.0, 2.0]);
        assert!(p.permute_columns(&[0, 0, 1]).is_err());
    }
}
