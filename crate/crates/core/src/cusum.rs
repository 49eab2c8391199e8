//! vech-CUSUM paths, the Λ/Ω statistics, the change-point estimator and the
//! hypothesis test against the limit laws.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::limit::{LambdaLaw, LambdaSampler, OmegaLaw, Statistic};
use crate::linalg::spd_quadratic_form;
use crate::longrun::{bartlett_estimate, vech_outer_series, BartlettConfig, LongRunCov, VechSeries};
use crate::panel::TimeSeriesPanel;
use crate::transforms::{fractional_transform, TransformSpec};

/// Smallest sample accepted by [`run_test`].
pub const MIN_OBSERVATIONS: usize = 20;

/// `S_1, …, S_n` for the (optionally centered) vech outer products.
#[derive(Debug, Clone, PartialEq)]
pub struct CusumPath {
    vdim: usize,
    n: usize,
    centered: bool,
    points: Vec<f64>,
}

impl CusumPath {
    pub fn from_series(series: &VechSeries, centered: bool) -> Result<Self> {
        let n = series.len();
        if n < 2 {
            return Err(Error::TooFewObservations(format!(
                "CUSUM path needs n >= 2, got {n}"
            )));
        }
        let p = series.vdim();
        let mut total = vec![0.0; p];
        for row in series.rows() {
            for (t, v) in total.iter_mut().zip(row) {
                *t += v;
            }
        }
        let nf = n as f64;
        let root = nf.sqrt();
        let mut points = Vec::with_capacity(n * p);
        let mut partial = vec![0.0; p];
        for (k, row) in series.rows().enumerate() {
            let frac = (k + 1) as f64 / nf;
            for (s, v) in partial.iter_mut().zip(row) {
                *s += v;
            }
            if k + 1 == n {
                // the running sum equals the total, so S_n vanishes identically
                points.extend(std::iter::repeat_n(0.0, p));
            } else {
                points.extend(partial.iter().zip(&total).map(|(s, t)| (s - frac * t) / root));
            }
        }
        Ok(Self {
            vdim: p,
            n,
            centered,
            points,
        })
    }

    pub fn vdim(&self) -> usize {
        self.vdim
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    /// `S_k` for `k = 1..=n`.
    pub fn point(&self, k: usize) -> &[f64] {
        assert!(k >= 1 && k <= self.n, "CUSUM index {k} outside 1..={}", self.n);
        &self.points[(k - 1) * self.vdim..k * self.vdim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.vdim)
    }

    /// `S_kᵀ Σ̂⁻¹ S_k` for `k = 1..=n`.
    pub fn quadratic_forms(&self, sigma: &LongRunCov) -> Result<Vec<f64>> {
        if sigma.vdim() != self.vdim {
            return Err(Error::DimensionMismatch {
                expected: self.vdim,
                found: sigma.vdim(),
            });
        }
        self.points()
            .map(|s| spd_quadratic_form(sigma.matrix(), s))
            .collect()
    }
}

pub fn cusum_path(panel: &TimeSeriesPanel, center: bool) -> Result<CusumPath> {
    CusumPath::from_series(&vech_outer_series(panel, center)?, center)
}

/// `(Λ_n, Ω_n)`: the maximum and the mean of the quadratic forms.
pub fn test_statistics(path: &CusumPath, sigma: &LongRunCov) -> Result<(f64, f64)> {
    let q = path.quadratic_forms(sigma)?;
    Ok(statistics_from_forms(&q))
}

fn statistics_from_forms(q: &[f64]) -> (f64, f64) {
    let max = q.iter().copied().fold(0.0, f64::max);
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    (max, mean.min(max))
}

/// First maximiser of the quadratic forms: `(θ̂, k̂)` with `θ̂ = k̂/n`.
pub fn estimate_theta(path: &CusumPath, sigma: &LongRunCov) -> Result<(f64, usize)> {
    let q = path.quadratic_forms(sigma)?;
    let k = argmax_first(&q);
    Ok((k as f64 / q.len() as f64, k))
}

fn argmax_first(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate() {
        if v > q[best] {
            best = i;
        }
    }
    best + 1
}

/// Monte Carlo settings for the Λ reference law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LambdaSettings {
    pub grid_points: usize,
    pub replications: usize,
    pub seed: u64,
    pub sampler: LambdaSampler,
}

impl Default for LambdaSettings {
    fn default() -> Self {
        Self {
            grid_points: crate::limit::DEFAULT_GRID_POINTS,
            replications: crate::limit::DEFAULT_REPLICATIONS,
            seed: crate::limit::DEFAULT_SEED,
            sampler: LambdaSampler::SquaredBessel,
        }
    }
}

impl LambdaSettings {
    pub fn law(&self, vdim: usize, exec: Exec) -> Result<LambdaLaw> {
        Ok(LambdaLaw::new(vdim)?
            .with_grid_points(self.grid_points)?
            .with_replications(self.replications)?
            .with_seed(self.seed)
            .with_sampler(self.sampler)
            .with_exec(exec))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestConfig {
    pub statistic: Statistic,
    /// Significance level `α`; the critical value is the `1 − α` quantile.
    pub level: f64,
    pub center: bool,
    pub bartlett: BartlettConfig,
    /// Exponent of the fractional transform applied first, if any.
    pub transform_delta: Option<f64>,
    pub lambda: LambdaSettings,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            statistic: Statistic::Omega,
            level: 0.05,
            center: true,
            bartlett: BartlettConfig::default(),
            transform_delta: None,
            lambda: LambdaSettings::default(),
            exec: Exec::default(),
        }
    }
}

impl TestConfig {
    pub fn with_statistic(mut self, statistic: Statistic) -> Self {
        self.statistic = statistic;
        self
    }

    pub fn with_level(mut self, level: f64) -> Self {
        self.level = level;
        self
    }

    pub fn with_center(mut self, center: bool) -> Self {
        self.center = center;
        self
    }

    pub fn with_bartlett(mut self, bartlett: BartlettConfig) -> Self {
        self.bartlett = bartlett;
        self
    }

    pub fn with_transform(mut self, delta: Option<f64>) -> Self {
        self.transform_delta = delta;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: Statistic,
    pub value: f64,
    /// `value` on the standardized scale.
    pub standardized: f64,
    pub n: usize,
    pub vdim: usize,
    pub level: f64,
    pub critical_value: f64,
    pub p_value: f64,
    /// Standard error of a Monte Carlo p-value; absent for Ω.
    pub p_value_se: Option<f64>,
    pub reject: bool,
    pub theta_hat: f64,
    pub k_hat: usize,
    /// Row label at `k_hat`, when the panel carries labels.
    pub label: Option<String>,
    pub lambda_n: f64,
    pub omega_n: f64,
    pub window_used: usize,
    pub ridge_used: Option<f64>,
    pub centered: bool,
    pub transform_delta: Option<f64>,
}

fn omega_critical_cache() -> &'static Mutex<HashMap<(usize, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Upper-`level` critical value of the limit law, cached per process.
pub fn critical_value(
    statistic: Statistic,
    vdim: usize,
    level: f64,
    lambda: &LambdaSettings,
    exec: Exec,
) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "significance level must lie in (0, 1), got {level}"
        )));
    }
    match statistic {
        Statistic::Omega => {
            let key = (vdim, level.to_bits());
            if let Some(&c) = omega_critical_cache().lock().expect("cache lock").get(&key) {
                return Ok(c);
            }
            let c = OmegaLaw::new(vdim)?.quantile(1.0 - level)?;
            omega_critical_cache().lock().expect("cache lock").insert(key, c);
            Ok(c)
        }
        Statistic::Lambda => lambda.law(vdim, exec)?.quantile(1.0 - level),
    }
}

pub fn run_test(panel: &TimeSeriesPanel, config: &TestConfig) -> Result<TestReport> {
    let n = panel.n();
    let vdim = panel.vdim();
    if n < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations(format!(
            "the test needs at least {MIN_OBSERVATIONS} observations, got {n}"
        )));
    }
    if vdim >= n {
        return Err(Error::TooFewObservations(format!(
            "vech dimension {vdim} must be smaller than n = {n}"
        )));
    }
    let transformed;
    let data = match config.transform_delta {
        Some(delta) => {
            transformed = fractional_transform(panel, TransformSpec::new(delta)?)?;
            &transformed
        }
        None => panel,
    };
    let series = vech_outer_series(data, config.center)?;
    let sigma = bartlett_estimate(&series, &config.bartlett)?;
    let path = CusumPath::from_series(&series, config.center)?;
    let forms = path.quadratic_forms(&sigma)?;
    let (lambda_n, omega_n) = statistics_from_forms(&forms);
    let k_hat = argmax_first(&forms);
    let value = match config.statistic {
        Statistic::Lambda => lambda_n,
        Statistic::Omega => omega_n,
    };
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("{} statistic", config.statistic)));
    }
    let critical = critical_value(config.statistic, vdim, config.level, &config.lambda, config.exec)?;
    let (p_value, p_value_se) = match config.statistic {
        Statistic::Omega => {
            let p = if value > 0.0 {
                1.0 - OmegaLaw::new(vdim)?.cdf(value)?
            } else {
                1.0
            };
            (p.clamp(0.0, 1.0), None)
        }
        Statistic::Lambda => {
            let (p, se) = config.lambda.law(vdim, config.exec)?.p_value(value);
            (p, Some(se))
        }
    };
    Ok(TestReport {
        statistic: config.statistic,
        value,
        standardized: config.statistic.standardize(vdim, value),
        n,
        vdim,
        level: config.level,
        critical_value: critical,
        p_value,
        p_value_se,
        reject: value > critical,
        theta_hat: k_hat as f64 / n as f64,
        k_hat,
        label: panel.label(k_hat - 1).map(str::to_owned),
        lambda_n,
        omega_n,
        window_used: sigma.window_used(),
        ridge_used: sigma.ridge_used(),
        centered: config.center,
        transform_delta: config.transform_delta,
    })
}
