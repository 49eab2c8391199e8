//! Preprocessing: fractional power transform, centered log-returns and
//! rolling (cross-)volatility estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::TimeSeriesPanel;

/// Exponent of the componentwise transform `x ↦ |x|^δ`, `0 < δ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    delta: f64,
}

impl TransformSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta <= 1.0 {
            Ok(Self { delta })
        } else {
            Err(Error::InvalidArgument(format!(
                "transform exponent must lie in (0, 1], got {delta}"
            )))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

pub fn fractional_transform(panel: &TimeSeriesPanel, spec: TransformSpec) -> Result<TimeSeriesPanel> {
    let delta = spec.delta;
    if delta == 1.0 {
        return panel.map(f64::abs);
    }
    panel.map(|v| v.abs().powf(delta))
}

/// Log-returns `log(p_{j+1}/p_j)` of an `(n+1) × d` price panel, each column
/// demeaned. Labels, if any, follow the later price of each pair.
pub fn center_log_returns(prices: &TimeSeriesPanel) -> Result<TimeSeriesPanel> {
    let n = prices.n();
    let d = prices.d();
    if n < 2 {
        return Err(Error::TooFewObservations(
            "log-returns need at least two price rows".into(),
        ));
    }
    if let Some(pos) = prices.values().iter().position(|&p| p <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "nonpositive price at row {}, column {}",
            pos / d + 1,
            pos % d + 1
        )));
    }
    let mut values = Vec::with_capacity((n - 1) * d);
    for j in 0..n - 1 {
        let (now, next) = (prices.row(j), prices.row(j + 1));
        values.extend(now.iter().zip(next).map(|(a, b)| (b / a).ln()));
    }
    let mut means = vec![0.0; d];
    for row in values.chunks_exact(d) {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= (n - 1) as f64);
    for row in values.chunks_exact_mut(d) {
        for (v, m) in row.iter_mut().zip(&means) {
            *v -= m;
        }
    }
    let out = TimeSeriesPanel::new(n - 1, d, values)?;
    match prices.labels() {
        Some(labels) => out.with_labels(labels[1..].to_vec()),
        None => Ok(out),
    }
}

/// Rolling means `γ̂_j(k, ℓ) = (1/w) Σ_{i=j−w+1}^{j} y_{i,k} y_{i,ℓ}` for `j = w..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingVolSeries {
    pub window: usize,
    /// Coordinate pairs `(k, ℓ)`, 0-based.
    pub pairs: Vec<(usize, usize)>,
    /// 1-based end index `j` of each window.
    pub ends: Vec<usize>,
    /// `values[p][t]` belongs to `pairs[p]` and `ends[t]`.
    pub values: Vec<Vec<f64>>,
}

/// All pairs `k ≤ ℓ`.
pub fn all_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|k| (k..d).map(move |l| (k, l))).collect()
}

pub fn rolling_vol(
    panel: &TimeSeriesPanel,
    window: usize,
    pairs: &[(usize, usize)],
) -> Result<RollingVolSeries> {
    let n = panel.n();
    if window == 0 || window > n {
        return Err(Error::InvalidArgument(format!(
            "rolling window {window} must lie in 1..={n}"
        )));
    }
    if let Some(&(k, l)) = pairs.iter().find(|(k, l)| *k >= panel.d() || *l >= panel.d()) {
        return Err(Error::InvalidArgument(format!(
            "pair ({k}, {l}) out of range for dimension {}",
            panel.d()
        )));
    }
    let w = window as f64;
    let values = pairs
        .iter()
        .map(|&(k, l)| {
            let prod = |i: usize| {
                let r = panel.row(i);
                r[k] * r[l]
            };
            // Neumaier-compensated running sum, adding the new product and
            // removing the one leaving the window
            let mut sum = 0.0;
            let mut comp = 0.0;
            let add = |x: f64, sum: &mut f64, comp: &mut f64| {
                let t = *sum + x;
                if sum.abs() >= x.abs() {
                    *comp += (*sum - t) + x;
                } else {
                    *comp += (x - t) + *sum;
                }
                *sum = t;
            };
            for i in 0..window {
                add(prod(i), &mut sum, &mut comp);
            }
            let mut out = Vec::with_capacity(n - window + 1);
            out.push((sum + comp) / w);
            for i in window..n {
                add(prod(i), &mut sum, &mut comp);
                add(-prod(i - window), &mut sum, &mut comp);
                out.push((sum + comp) / w);
            }
            out
        })
        .collect();
    Ok(RollingVolSeries {
        window,
        pairs: pairs.to_vec(),
        ends: (window..=n).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn fractional_examples() {
        let p = TimeSeriesPanel::from_rows(&[[-2.0, 3.0]]).unwrap();
        let out = fractional_transform(&p, TransformSpec::new(1.0).unwrap()).unwrap();
        assert_eq!(out.row(0), &[2.0, 3.0]);
        let p = TimeSeriesPanel::from_rows(&[[4.0, -9.0]]).unwrap();
        let out = fractional_transform(&p, TransformSpec::new(0.5).unwrap()).unwrap();
        assert_eq!(out.row(0), &[2.0, 3.0]);
        assert!(TransformSpec::new(0.0).is_err());
        assert!(TransformSpec::new(1.5).is_err());
    }

    #[test]
    fn log_return_examples() {
        let e = std::f64::consts::E;
        let p = TimeSeriesPanel::from_column(&[1.0, e, e * e]).unwrap();
        let r = center_log_returns(&p).unwrap();
        assert!(r.values().iter().all(|v| v.abs() < 1e-15));
        let p = TimeSeriesPanel::from_column(&[1.0, 2.0, 1.0]).unwrap();
        let r = center_log_returns(&p).unwrap();
        let ln2 = 2f64.ln();
        assert!((r.row(0)[0] - ln2).abs() < 1e-15 && (r.row(1)[0] + ln2).abs() < 1e-15);
        let bad = TimeSeriesPanel::from_column(&[1.0, 0.0]).unwrap();
        assert!(center_log_returns(&bad).is_err());
    }

    #[test]
    fn log_returns_shift_labels() {
        let p = TimeSeriesPanel::from_column(&[1.0, 2.0, 4.0])
            .unwrap()
            .with_labels(vec!["d0".into(), "d1".into(), "d2".into()])
            .unwrap();
        let r = center_log_returns(&p).unwrap();
        assert_eq!(r.labels().unwrap(), &["d1".to_string(), "d2".to_string()]);
    }

    #[test]
    fn rolling_examples() {
        let p = TimeSeriesPanel::from_column(&[1.5; 10]).unwrap();
        let r = rolling_vol(&p, 4, &[(0, 0)]).unwrap();
        assert!(r.values[0].iter().all(|&v| (v - 2.25).abs() < 1e-15));
        assert_eq!(r.ends, (4..=10).collect::<Vec<_>>());
        let p = TimeSeriesPanel::from_column(&[1.0, -2.0, 3.0]).unwrap();
        let r = rolling_vol(&p, 3, &[(0, 0)]).unwrap();
        assert_eq!(r.values[0], vec![14.0 / 3.0]);
        assert!(rolling_vol(&p, 4, &[(0, 0)]).is_err());
        assert!(rolling_vol(&p, 2, &[(0, 1)]).is_err());
    }

    #[test]
    fn rolling_matches_naive_resummation() {
        let mut rng = stream_rng(3, 0);
        let n = 5000;
        let d = 3;
        let values: Vec<f64> = (0..n * d)
            .map(|_| 0.02 * rng.sample::<f64, _>(StandardNormal) + 0.001)
            .collect();
        let p = TimeSeriesPanel::new(n, d, values).unwrap();
        let pairs = all_pairs(d);
        let w = 100;
        let r = rolling_vol(&p, w, &pairs).unwrap();
        for (pi, &(k, l)) in pairs.iter().enumerate() {
            for (t, &j) in r.ends.iter().enumerate() {
                let naive: f64 = (j - w..j).map(|i| p.row(i)[k] * p.row(i)[l]).sum::<f64>() / w as f64;
                let got = r.values[pi][t];
                assert!((got - naive).abs() <= 1e-12 * naive.abs().max(1e-4), "pair {pi}, j {j}");
            }
        }
    }

    proptest! {
        #[test]
        fn transform_composes(vals in prop::collection::vec(0.0f64..50.0, 1..20), a in 0.05f64..1.0, b in 0.05f64..1.0) {
            let p = TimeSeriesPanel::from_column(&vals).unwrap();
            let lhs = fractional_transform(&fractional_transform(&p, TransformSpec::new(b).unwrap()).unwrap(), TransformSpec::new(a).unwrap()).unwrap();
            let rhs = fractional_transform(&p, TransformSpec::new(a * b).unwrap()).unwrap();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }

        #[test]
        fn transform_is_nonnegative_and_monotone(x in -100.0f64..100.0, y in -100.0f64..100.0, delta in 0.01f64..1.0) {
            let p = TimeSeriesPanel::from_column(&[x, y]).unwrap();
            let t = fractional_transform(&p, TransformSpec::new(delta).unwrap()).unwrap();
            prop_assert!(t.values().iter().all(|v| *v >= 0.0));
            if x.abs() <= y.abs() {
                prop_assert!(t.row(0)[0] <= t.row(1)[0]);
            }
        }

        #[test]
        fn log_returns_have_zero_column_means(prices in prop::collection::vec(0.01f64..1000.0, 6..60)) {
            let n = prices.len() / 2;
            let p = TimeSeriesPanel::new(n, 2, prices[..2 * n].to_vec()).unwrap();
            let r = center_log_returns(&p).unwrap();
            for m in r.column_means() {
                prop_assert!(m.abs() < 1e-12);
            }
        }

        #[test]
        fn rolling_cauchy_schwarz(vals in prop::collection::vec(-5.0f64..5.0, 40), w in 1usize..20) {
            let p = TimeSeriesPanel::new(20, 2, vals).unwrap();
            let r = rolling_vol(&p, w, &[(0, 0), (1, 1), (0, 1)]).unwrap();
            for t in 0..r.ends.len() {
                let (a, b, c) = (r.values[0][t], r.values[1][t], r.values[2][t]);
                prop_assert!(a >= 0.0 && b >= 0.0);
                prop_assert!(c * c <= a * b + 1e-12);
            }
        }
    }
}
