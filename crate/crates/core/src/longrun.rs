//! Bartlett-kernel estimation of the long-run covariance of the series
//! `vech[y_j y_jᵀ]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vech_len, SpdMatrix, SymMatrix, VechVector};
use crate::panel::TimeSeriesPanel;

/// The half-vectorized outer products of a panel, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct VechSeries {
    d: usize,
    vdim: usize,
    data: Vec<f64>,
}

impl VechSeries {
    /// Wraps rows of length `vdim`; `vdim` must be triangular.
    pub fn from_rows(d: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let vdim = vech_len(d);
        let mut data = Vec::with_capacity(rows.len() * vdim);
        for row in rows {
            if row.len() != vdim {
                return Err(Error::VechLength {
                    dim: d,
                    len: row.len(),
                    expected: vdim,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { d, vdim, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.vdim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Dimension `d` of the underlying observations.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn vdim(&self) -> usize {
        self.vdim
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.vdim..(j + 1) * self.vdim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.vdim)
    }

    pub fn to_vectors(&self) -> Vec<VechVector> {
        self.rows()
            .map(|r| VechVector::new(self.d, r.to_vec()).expect("row length"))
            .collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.vdim];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

/// `vech[y_j y_jᵀ]`, or `vech[ỹ_j ỹ_jᵀ]` with `ỹ_j = y_j − ȳ` when `center` is set.
pub fn vech_outer_series(panel: &TimeSeriesPanel, center: bool) -> Result<VechSeries> {
    let d = panel.d();
    let vdim = panel.vdim();
    if center && panel.n() < 2 {
        return Err(Error::TooFewObservations(
            "centering needs at least two observations".into(),
        ));
    }
    let means = if center {
        panel.column_means()
    } else {
        vec![0.0; d]
    };
    let mut data = Vec::with_capacity(panel.n() * vdim);
    let mut y = vec![0.0; d];
    for row in panel.rows() {
        for ((yi, &v), &m) in y.iter_mut().zip(row).zip(&means) {
            *yi = v - m;
        }
        for j in 0..d {
            for i in j..d {
                data.push(y[i] * y[j]);
            }
        }
    }
    Ok(VechSeries { d, vdim, data })
}

/// Lag window rule for the Bartlett kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BartlettWindow {
    /// `q = ⌊log₁₀ n⌋`.
    Log10N,
    Fixed(usize),
}

impl BartlettWindow {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            BartlettWindow::Log10N => n.max(1).ilog10() as usize,
            BartlettWindow::Fixed(q) => q,
        }
    }
}

impl std::str::FromStr for BartlettWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(BartlettWindow::Log10N);
        }
        s.parse::<usize>()
            .map(BartlettWindow::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("bartlett window must be 'auto' or a lag count, got '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BartlettConfig {
    pub window: BartlettWindow,
    /// Demean the vech series before computing autocovariances.
    pub center: bool,
    /// Optional ridge `ε`: adds `ε · trace(Σ̂)/𝔡 · I`. Off unless set.
    pub ridge: Option<f64>,
}

impl Default for BartlettConfig {
    fn default() -> Self {
        Self {
            window: BartlettWindow::Log10N,
            center: true,
            ridge: None,
        }
    }
}

impl BartlettConfig {
    pub fn fixed(q: usize) -> Self {
        Self {
            window: BartlettWindow::Fixed(q),
            ..Self::default()
        }
    }
}

/// A positive definite estimate `Σ̂` of the long-run covariance.
#[derive(Debug, Clone)]
pub struct LongRunCov {
    matrix: SpdMatrix,
    window_used: usize,
    n_used: usize,
    ridge_used: Option<f64>,
}

impl LongRunCov {
    /// Wraps a known covariance, e.g. a theoretical one in simulations.
    pub fn from_matrix(matrix: SpdMatrix) -> Self {
        Self {
            matrix,
            window_used: 0,
            n_used: 0,
            ridge_used: None,
        }
    }

    pub fn vdim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SpdMatrix {
        &self.matrix
    }

    pub fn window_used(&self) -> usize {
        self.window_used
    }

    pub fn n_used(&self) -> usize {
        self.n_used
    }

    pub fn ridge_used(&self) -> Option<f64> {
        self.ridge_used
    }
}

/// `Σ̂ = Γ̂₀ + Σ_{j=1}^{q} (1 − j/(q+1)) (Γ̂_j + Γ̂_jᵀ)` with divisor `n` autocovariances.
pub fn bartlett_estimate(series: &VechSeries, config: &BartlettConfig) -> Result<LongRunCov> {
    let n = series.len();
    let p = series.vdim();
    if n < 4 {
        return Err(Error::TooFewObservations(format!(
            "Bartlett estimate needs n >= 4, got {n}"
        )));
    }
    let q = config.window.resolve(n);
    if q >= n {
        return Err(Error::InvalidArgument(format!(
            "Bartlett window {q} must be smaller than n = {n}"
        )));
    }
    if let Some(eps) = config.ridge {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!("ridge must be a nonnegative finite number, got {eps}")));
        }
    }

    let mean = if config.center {
        series.mean()
    } else {
        vec![0.0; p]
    };
    let centered: Vec<f64> = series
        .rows()
        .flat_map(|r| r.iter().zip(&mean).map(|(v, m)| v - m))
        .collect();
    let row = |j: usize| &centered[j * p..(j + 1) * p];

    // lower triangle of the symmetric kernel sum
    let mut sigma = DMatrix::<f64>::zeros(p, p);
    for lag in 0..=q {
        let weight = if lag == 0 {
            1.0
        } else {
            1.0 - lag as f64 / (q + 1) as f64
        };
        let mut gamma = DMatrix::<f64>::zeros(p, p);
        for t in lag..n {
            let (now, past) = (row(t), row(t - lag));
            for b in 0..p {
                let pb = past[b];
                if pb == 0.0 {
                    continue;
                }
                for a in 0..p {
                    gamma[(a, b)] += now[a] * pb;
                }
            }
        }
        gamma /= n as f64;
        if lag == 0 {
            sigma += &gamma;
        } else {
            sigma += (&gamma + gamma.transpose()) * weight;
        }
    }
    let mut sym = SymMatrix::from_lower(&sigma).into_matrix();
    if let Some(eps) = config.ridge {
        let bump = eps * sym.trace() / p as f64;
        for i in 0..p {
            sym[(i, i)] += bump;
        }
    }
    let matrix = SymMatrix::new(sym).expect("symmetric by construction");
    let matrix = SpdMatrix::new(matrix).map_err(|_| Error::SingularLongRunCovariance { dim: p })?;
    Ok(LongRunCov {
        matrix,
        window_used: q,
        n_used: n,
        ridge_used: config.ridge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian_panel(n: usize, d: usize, seed: u64) -> TimeSeriesPanel {
        let mut rng = stream_rng(seed, 0);
        let values = (0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        TimeSeriesPanel::new(n, d, values).unwrap()
    }

    #[test]
    fn vech_series_examples() {
        let p = TimeSeriesPanel::from_column(&[1.0, -1.0]).unwrap();
        let s = vech_outer_series(&p, false).unwrap();
        assert_eq!(s.row(0), &[1.0]);
        assert_eq!(s.row(1), &[1.0]);
        let p = TimeSeriesPanel::from_column(&[2.0, 2.0]).unwrap();
        let s = vech_outer_series(&p, true).unwrap();
        assert_eq!(s.rows().flatten().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        let p = TimeSeriesPanel::from_rows(&[[1.0, 2.0]]).unwrap();
        assert_eq!(vech_outer_series(&p, false).unwrap().row(0), &[1.0, 2.0, 4.0]);
        assert!(vech_outer_series(&p, true).is_err());
    }

    #[test]
    fn window_rule() {
        assert_eq!(BartlettWindow::Log10N.resolve(1000), 3);
        assert_eq!(BartlettWindow::Log10N.resolve(999), 2);
        assert_eq!(BartlettWindow::Log10N.resolve(3941), 3);
        assert_eq!(BartlettWindow::Fixed(5).resolve(10), 5);
        assert_eq!("auto".parse::<BartlettWindow>().unwrap(), BartlettWindow::Log10N);
        assert_eq!("7".parse::<BartlettWindow>().unwrap(), BartlettWindow::Fixed(7));
        assert!("x".parse::<BartlettWindow>().is_err());
    }

    #[test]
    fn zero_window_is_the_sample_covariance() {
        let panel = gaussian_panel(200, 2, 3);
        let series = vech_outer_series(&panel, false).unwrap();
        let est = bartlett_estimate(&series, &BartlettConfig::fixed(0)).unwrap();
        let mean = series.mean();
        let n = series.len() as f64;
        for a in 0..3 {
            for b in 0..3 {
                let cov: f64 = series
                    .rows()
                    .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                    .sum::<f64>()
                    / n;
                assert_relative_eq!(est.matrix().as_matrix()[(a, b)], cov, max_relative = 1e-12);
            }
        }
        assert_eq!(est.window_used(), 0);
    }

    #[test]
    fn white_noise_recovers_known_covariance() {
        // For iid N(0, I₂): Var(y₁²) = 2, Var(y₁y₂) = 1, all covariances zero.
        let panel = gaussian_panel(10_000, 2, 17);
        let series = vech_outer_series(&panel, false).unwrap();
        let est = bartlett_estimate(&series, &BartlettConfig::fixed(4)).unwrap();
        let truth = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0, 2.0]));
        let err = crate::linalg::spectral_norm(&(est.matrix().as_matrix() - &truth)).unwrap();
        assert!(err / 2.0 < 0.10, "relative error {}", err / 2.0);
        let est0 = bartlett_estimate(&series, &BartlettConfig::fixed(0)).unwrap();
        let err0 = crate::linalg::spectral_norm(&(est0.matrix().as_matrix() - &truth)).unwrap();
        assert!(err0 / 2.0 < 0.10);
    }

    #[test]
    fn fourth_degree_homogeneity() {
        let panel = gaussian_panel(300, 3, 5);
        let c = 1.7;
        let a = bartlett_estimate(&vech_outer_series(&panel, true).unwrap(), &BartlettConfig::default()).unwrap();
        let b = bartlett_estimate(
            &vech_outer_series(&panel.scaled(c).unwrap(), true).unwrap(),
            &BartlettConfig::default(),
        )
        .unwrap();
        let scaled = a.matrix().as_matrix() * c.powi(4);
        for (x, y) in scaled.iter().zip(b.matrix().as_matrix().iter()) {
            assert_relative_eq!(*x, *y, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn permutation_equivariance() {
        let panel = gaussian_panel(400, 3, 9);
        let perm = [2, 0, 1];
        let a = bartlett_estimate(&vech_outer_series(&panel, true).unwrap(), &BartlettConfig::default()).unwrap();
        let b = bartlett_estimate(
            &vech_outer_series(&panel.permute_columns(&perm).unwrap(), true).unwrap(),
            &BartlettConfig::default(),
        )
        .unwrap();
        // entry (i,j) of the permuted panel is entry (perm[i], perm[j]) of the original
        let idx = |i: usize, j: usize| crate::linalg::vech_index(3, i, j);
        for (i1, j1, i2, j2) in itertools_pairs(3) {
            let pa = idx(perm[i1], perm[j1]);
            let pb = idx(perm[i2], perm[j2]);
            let lhs = b.matrix().as_matrix()[(idx(i1, j1), idx(i2, j2))];
            let rhs = a.matrix().as_matrix()[(pa, pb)];
            assert_relative_eq!(lhs, rhs, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    fn itertools_pairs(d: usize) -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for j1 in 0..d {
            for i1 in j1..d {
                for j2 in 0..d {
                    for i2 in j2..d {
                        out.push((i1, j1, i2, j2));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn singular_input_is_an_error_unless_ridged() {
        let panel = TimeSeriesPanel::from_rows(&vec![[1.0, 1.0]; 50]).unwrap();
        let series = vech_outer_series(&panel, false).unwrap();
        assert!(matches!(
            bartlett_estimate(&series, &BartlettConfig::default()),
            Err(Error::SingularLongRunCovariance { dim: 3 })
        ));
        // perfectly collinear coordinates: rank-deficient but nonzero trace
        let mut rng = stream_rng(1, 1);
        let rows: Vec<[f64; 2]> = (0..100)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                [z, z]
            })
            .collect();
        let series = vech_outer_series(&TimeSeriesPanel::from_rows(&rows).unwrap(), false).unwrap();
        let cfg = BartlettConfig {
            ridge: Some(1e-3),
            ..BartlettConfig::default()
        };
        let est = bartlett_estimate(&series, &cfg).unwrap();
        assert_eq!(est.ridge_used(), Some(1e-3));
    }

    #[test]
    fn short_series_and_oversized_window_fail() {
        let panel = gaussian_panel(3, 1, 1);
        let s = vech_outer_series(&panel, false).unwrap();
        assert!(bartlett_estimate(&s, &BartlettConfig::default()).is_err());
        let panel = gaussian_panel(10, 1, 1);
        let s = vech_outer_series(&panel, false).unwrap();
        assert!(bartlett_estimate(&s, &BartlettConfig::fixed(10)).is_err());
    }
}
