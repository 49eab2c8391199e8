//! Seeded Monte Carlo studies of rejection frequencies and break-location
//! estimates, plus the deterministic drift of the CUSUM path under a break.

use serde::{Deserialize, Serialize};

use crate::cusum::{critical_value, cusum_path, run_test, TestConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::generators::{
    break_panel, scaled_identity, CccGarchSpec, ExpGarchSpec, FactorSpec, InnovationLaw, Model, ModelSpec, VarmaSpec,
    DEFAULT_BURN_IN,
};
use crate::linalg::{vech_len, VechVector};
use crate::panel::TimeSeriesPanel;
use crate::rng::derive_seed;

pub const DEFAULT_MASTER_SEED: u64 = 20_100_413;
/// Largest share of failed replications a cell tolerates.
pub const MAX_ERROR_SHARE: f64 = 0.01;

/// How `δ` enters the correlation alternative of the AR(1) design.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `A* = 0.1 I + c 𝟙` with `c` chosen so the spectral radius of `A*` is
    /// `1 − 0.9 · 100^(−δ)`: `0.1` at `δ = 0`, below one for every `δ`.
    #[default]
    Saturating,
    /// `A* = 0.1 I + (δ/d) 𝟙`: the all-ones direction gets coefficient `0.1 + δ`.
    Normalized,
    /// `A* = 0.1 I + δ 𝟙`, explosive once `0.1 + dδ ≥ 1`.
    Literal,
}

/// The data generating process of a study, indexed by the change size `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    /// Four-dimensional AR(1) with `A = 0.1 I` before and a coupled `A*` after
    /// the break; `δ = 0` is the null.
    Ar1Correlation {
        #[serde(default)]
        coupling: Coupling,
    },
    /// `y = L z + ξ` with CCC-GARCH(1, 1) factors; loadings `δ L` after the
    /// break, so `δ = 1` is the null.
    FactorLoading,
    /// Four-dimensional exponential GARCH with `C = 0.2 I` before and `δ C`
    /// after the break; `δ = 1` is the null.
    ExpGarchScale,
    /// User-supplied models; `δ` is ignored and `post = None` means no break.
    Custom {
        pre: ModelSpec,
        #[serde(default)]
        post: Option<ModelSpec>,
    },
}

impl Scenario {
    /// The pre- and post-break specifications for change size `delta`.
    pub fn models(&self, delta: f64) -> (ModelSpec, ModelSpec) {
        match self {
            Scenario::Ar1Correlation { coupling } => {
                let d = 4;
                let shift = match coupling {
                    Coupling::Saturating => 0.9 * (1.0 - 100f64.powf(-delta)) / d as f64,
                    Coupling::Normalized => delta / d as f64,
                    Coupling::Literal => delta,
                };
                let mut post = scaled_identity(d, 0.1);
                post.iter_mut().flatten().for_each(|v| *v += shift);
                (
                    ModelSpec::Varma(VarmaSpec::ar1(scaled_identity(d, 0.1))),
                    ModelSpec::Varma(VarmaSpec::ar1(post)),
                )
            }
            Scenario::FactorLoading => {
                let factor = |s: f64| {
                    ModelSpec::Factor(FactorSpec {
                        d: 4,
                        loadings: vec![vec![s, 0.0], vec![s, 0.0], vec![0.0, s], vec![0.0, s]],
                        factor: CccGarchSpec::garch11(vec![1.0; 2], vec![0.3; 2], vec![0.3; 2]),
                        xi_cov: None,
                    })
                };
                (factor(1.0), factor(delta))
            }
            Scenario::ExpGarchScale => {
                let d = 4;
                let p = vech_len(d);
                // 𝔡 × d with 0.1 I on top, so only the first column of log H responds
                let b: Vec<Vec<f64>> = (0..p)
                    .map(|i| (0..d).map(|j| if i == j { 0.1 } else { 0.0 }).collect())
                    .collect();
                let spec = |c: f64| {
                    ModelSpec::ExpGarch(ExpGarchSpec {
                        d,
                        c: scaled_identity(d, c),
                        a: scaled_identity(p, 0.1),
                        b: vec![b.clone()],
                        f: Vec::new(),
                        psi: None,
                        innovation: InnovationLaw::Gaussian,
                    })
                };
                (spec(0.2), spec(0.2 * delta))
            }
            Scenario::Custom { pre, post } => (pre.clone(), post.clone().unwrap_or_else(|| pre.clone())),
        }
    }

    /// The change size that means "no break".
    pub fn null_delta(&self) -> f64 {
        match self {
            Scenario::Ar1Correlation { .. } => 0.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyDesign {
    pub scenario: Scenario,
    pub deltas: Vec<f64>,
    pub ns: Vec<usize>,
    pub levels: Vec<f64>,
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    /// Relative break location.
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default)]
    pub test: TestConfig,
    /// Simulate post-break models that fail their stationarity check.
    #[serde(default)]
    pub allow_nonstationary: bool,
}

fn default_seed() -> u64 {
    DEFAULT_MASTER_SEED
}

fn default_theta() -> f64 {
    0.5
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl StudyDesign {
    pub fn new(scenario: Scenario, deltas: Vec<f64>, ns: Vec<usize>, levels: Vec<f64>, replications: usize) -> Self {
        Self {
            scenario,
            deltas,
            ns,
            levels,
            replications,
            master_seed: DEFAULT_MASTER_SEED,
            theta: 0.5,
            burn_in: DEFAULT_BURN_IN,
            test: TestConfig::default(),
            allow_nonstationary: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.test.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidArgument("replications must be positive".into()));
        }
        if self.deltas.is_empty() || self.ns.is_empty() || self.levels.is_empty() {
            return Err(Error::InvalidArgument("deltas, ns and levels must be nonempty".into()));
        }
        if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::InvalidArgument(format!("level {l} outside (0, 1)")));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidArgument(format!("theta {} outside (0, 1)", self.theta)));
        }
        Ok(())
    }
}

/// Summary of `θ̂` over the successful replications of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSummary {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
}

impl ThetaSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let sd = if n > 1 {
            (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, median, sd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub delta: f64,
    pub n: usize,
    pub level: f64,
    pub replications: usize,
    pub errors: usize,
    pub rejections: usize,
    pub frequency: f64,
    pub se: f64,
    pub theta: Option<ThetaSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub design: StudyDesign,
    pub cells: Vec<CellResult>,
}

impl StudyResult {
    pub fn cell(&self, delta: f64, n: usize, level: f64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.delta == delta && c.n == n && c.level == level)
    }
}

struct Replication {
    value: f64,
    theta_hat: f64,
}

fn replicate(pre: &Model, post: &Model, design: &StudyDesign, n: usize, seed: u64) -> Result<Replication> {
    let panel = break_panel(pre, post, n, design.theta, design.burn_in, seed)?;
    let cfg = TestConfig {
        exec: Exec::Sequential,
        ..design.test
    };
    let r = run_test(&panel, &cfg)?;
    Ok(Replication {
        value: r.value,
        theta_hat: r.theta_hat,
    })
}

/// Runs every `(δ, n)` cell of the design; one simulated panel per replication
/// serves all levels. Replication `r` of cell `c` uses seed
/// `derive_seed(master_seed, [c, r])`, with cells numbered `δ`-major.
pub fn run_study(design: &StudyDesign) -> Result<StudyResult> {
    design.validate()?;
    let d = design.scenario.models(design.scenario.null_delta()).0.d();
    let vdim = vech_len(d);
    let criticals: Vec<f64> = design
        .levels
        .iter()
        .map(|&l| critical_value(design.test.statistic, vdim, l, &design.test.lambda, design.test.exec))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (di, &delta) in design.deltas.iter().enumerate() {
        let (pre_spec, post_spec) = design.scenario.models(delta);
        let pre = Model::new(&pre_spec, false)?;
        let post = Model::new(&post_spec, design.allow_nonstationary)?;
        for (ni, &n) in design.ns.iter().enumerate() {
            let cell_id = (di * design.ns.len() + ni) as u64;
            let outcomes = design.test.exec.map(design.replications, |r| {
                replicate(&pre, &post, design, n, derive_seed(design.master_seed, &[cell_id, r as u64]))
            });
            let errors = outcomes.iter().filter(|o| o.is_err()).count();
            if errors as f64 > MAX_ERROR_SHARE * design.replications as f64 {
                let first = outcomes.iter().find_map(|o| o.as_ref().err()).expect("an error");
                return Err(Error::Validation(format!(
                    "cell (delta = {delta}, n = {n}): {errors} of {} replications failed, first error: {first}",
                    design.replications
                )));
            }
            let ok: Vec<&Replication> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
            let thetas: Vec<f64> = ok.iter().map(|r| r.theta_hat).collect();
            let summary = ThetaSummary::from_values(&thetas);
            for (&level, &crit) in design.levels.iter().zip(&criticals) {
                let rejections = ok.iter().filter(|r| r.value > crit).count();
                let m = ok.len().max(1) as f64;
                let f = rejections as f64 / m;
                cells.push(CellResult {
                    delta,
                    n,
                    level,
                    replications: design.replications,
                    errors,
                    rejections,
                    frequency: f,
                    se: (f * (1.0 - f) / m).sqrt(),
                    theta: summary,
                });
            }
        }
    }
    Ok(StudyResult {
        design: design.clone(),
        cells,
    })
}

/// The limit of `S_⌊nt⌋ / √n` under a single break at `θ`:
/// `t(1−θ)Δ` for `t ≤ θ` and `θ(1−t)Δ` after, with `Δ` the difference of the
/// pre- and post-break second moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub theta: f64,
    pub delta: Vec<f64>,
}

impl Drift {
    pub fn at(&self, t: f64) -> Vec<f64> {
        let w = if t <= self.theta {
            t * (1.0 - self.theta)
        } else {
            self.theta * (1.0 - t)
        };
        self.delta.iter().map(|v| w * v).collect()
    }
}

pub fn theoretical_drift(pre_moment: &VechVector, post_moment: &VechVector, theta: f64) -> Result<Drift> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!("theta must lie in (0, 1), got {theta}")));
    }
    if pre_moment.len() != post_moment.len() {
        return Err(Error::DimensionMismatch {
            expected: pre_moment.len(),
            found: post_moment.len(),
        });
    }
    Ok(Drift {
        theta,
        delta: pre_moment
            .as_slice()
            .iter()
            .zip(post_moment.as_slice())
            .map(|(a, b)| a - b)
            .collect(),
    })
}

/// `max_t |S_⌊nt⌋/√n − S*(t)|` over `t = 1/grid, …, 1` (uncentered path).
pub fn drift_deviation(panel: &TimeSeriesPanel, drift: &Drift, grid: usize) -> Result<f64> {
    let path = cusum_path(panel, false)?;
    let n = path.len();
    let root = (n as f64).sqrt();
    let mut worst: f64 = 0.0;
    for g in 1..=grid {
        let t = g as f64 / grid as f64;
        let k = ((t * n as f64).floor() as usize).max(1);
        let target = drift.at(t);
        for (s, m) in path.point(k).iter().zip(&target) {
            worst = worst.max((s / root - m).abs());
        }
    }
    Ok(worst)
}
