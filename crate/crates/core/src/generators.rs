//! Seeded simulators for linear processes, VARMA, CCC-GARCH, Jeantheau's
//! GARCH, factor models and the matrix exponential GARCH, with validators for
//! the conditions that make them stationary with finite fourth moments.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{math, spectral_norm, sym_exp_sqrt, vech_len, SymMatrix, VechVector};
use crate::panel::TimeSeriesPanel;
use crate::rng::stream_rng;

pub const DEFAULT_BURN_IN: usize = 500;
/// Volatility (or, for linear models, absolute value) above which a recursion
/// is declared to have overflowed.
pub const OVERFLOW_LIMIT: f64 = 1e150;
pub const DEFAULT_GAMMA_J_DRAWS: usize = 100_000;
pub const DEFAULT_GAMMA_J_SEED: u64 = 0x6A44_A7E0;

/// Row-major matrix literal, e.g. `[[1.0, 0.0], [0.0, 1.0]]` in TOML.
pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationLaw {
    /// Multivariate normal with mean zero and covariance `psi`.
    #[default]
    Gaussian,
}

/// `y_j = Σ_ℓ C_ℓ ε_{j−ℓ}` with finitely many coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProcessSpec {
    pub d: usize,
    pub coefficients: Vec<Matrix>,
    #[serde(default)]
    pub psi: Option<Matrix>,
    #[serde(default)]
    pub innovation: InnovationLaw,
}

/// `y_j − Σ A_ℓ y_{j−ℓ} = ε_j + Σ B_ℓ ε_{j−ℓ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarmaSpec {
    pub d: usize,
    #[serde(default)]
    pub ar: Vec<Matrix>,
    #[serde(default)]
    pub ma: Vec<Matrix>,
    #[serde(default)]
    pub psi: Option<Matrix>,
    #[serde(default)]
    pub innovation: InnovationLaw,
}

/// `y_j = σ_j ∘ ε_j`, `σ_j² = ω + Σ α_ℓ ∘ σ_{j−ℓ}² + Σ β_ℓ ∘ y_{j−ℓ}²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CccGarchSpec {
    pub d: usize,
    pub omega: Vec<f64>,
    /// Coefficients of lagged volatilities, one vector per lag.
    #[serde(default)]
    pub alpha: Vec<Vec<f64>>,
    /// Coefficients of lagged squared observations, one vector per lag.
    #[serde(default)]
    pub beta: Vec<Vec<f64>>,
    #[serde(default)]
    pub psi: Option<Matrix>,
    #[serde(default)]
    pub innovation: InnovationLaw,
}

/// As CCC-GARCH with entrywise nonnegative matrices `A_ℓ`, `B_ℓ` in place of
/// the coefficient vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JeantheauSpec {
    pub d: usize,
    pub omega: Vec<f64>,
    #[serde(default)]
    pub a: Vec<Matrix>,
    #[serde(default)]
    pub b: Vec<Matrix>,
    #[serde(default)]
    pub psi: Option<Matrix>,
    #[serde(default)]
    pub innovation: InnovationLaw,
}

/// `y_j = L z_j + ξ_j` with CCC-GARCH factors `z_j` and gaussian `ξ_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub d: usize,
    /// `d × d′` loading matrix.
    pub loadings: Matrix,
    pub factor: CccGarchSpec,
    /// Covariance of `ξ`; identity when absent.
    #[serde(default)]
    pub xi_cov: Option<Matrix>,
}

/// `y_j = H_j^{1/2} ε_j` with
/// `vech[log H_j − C] = A vech[log H_{j−1} − C] + Σ B_ℓ ε_{j−ℓ} + Σ F_ℓ(|ε_{j−ℓ}| − E|ε|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpGarchSpec {
    pub d: usize,
    /// Symmetric `d × d`.
    pub c: Matrix,
    /// `𝔡 × 𝔡`.
    pub a: Matrix,
    /// `𝔡 × d`, one per lag.
    #[serde(default)]
    pub b: Vec<Matrix>,
    /// `𝔡 × d`, one per lag.
    #[serde(default)]
    pub f: Vec<Matrix>,
    #[serde(default)]
    pub psi: Option<Matrix>,
    #[serde(default)]
    pub innovation: InnovationLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Linear(LinearProcessSpec),
    Varma(VarmaSpec),
    CccGarch(CccGarchSpec),
    Jeantheau(JeantheauSpec),
    Factor(FactorSpec),
    ExpGarch(ExpGarchSpec),
}

impl ModelSpec {
    pub fn d(&self) -> usize {
        match self {
            ModelSpec::Linear(s) => s.d,
            ModelSpec::Varma(s) => s.d,
            ModelSpec::CccGarch(s) => s.d,
            ModelSpec::Jeantheau(s) => s.d,
            ModelSpec::Factor(s) => s.d,
            ModelSpec::ExpGarch(s) => s.d,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Linear(_) => "linear",
            ModelSpec::Varma(_) => "varma",
            ModelSpec::CccGarch(_) => "ccc_garch",
            ModelSpec::Jeantheau(_) => "jeantheau",
            ModelSpec::Factor(_) => "factor",
            ModelSpec::ExpGarch(_) => "exp_garch",
        }
    }
}

impl VarmaSpec {
    /// `y_j = A y_{j−1} + ε_j` with unit innovation covariance.
    pub fn ar1(a: Matrix) -> Self {
        Self {
            d: a.len(),
            ar: vec![a],
            ma: Vec::new(),
            psi: None,
            innovation: InnovationLaw::Gaussian,
        }
    }
}

impl CccGarchSpec {
    /// GARCH(1, 1) in every coordinate with unit innovation covariance.
    pub fn garch11(omega: Vec<f64>, alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        Self {
            d: omega.len(),
            omega,
            alpha: vec![alpha],
            beta: vec![beta],
            psi: None,
            innovation: InnovationLaw::Gaussian,
        }
    }
}

/// Scaled identity as a matrix literal.
pub fn scaled_identity(d: usize, c: f64) -> Matrix {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { c } else { 0.0 }).collect())
        .collect()
}

fn to_dmatrix(m: &Matrix, rows: usize, cols: usize, what: &str) -> Result<DMatrix<f64>> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Validation(format!(
            "{what} must be {rows} × {cols}, got {} rows of lengths {:?}",
            m.len(),
            m.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Validation(format!("{what} has non-finite entries")));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| m[i][j]))
}

fn to_dmatrix_list(ms: &[Matrix], rows: usize, cols: usize, what: &str) -> Result<Vec<DMatrix<f64>>> {
    ms.iter()
        .enumerate()
        .map(|(l, m)| to_dmatrix(m, rows, cols, &format!("{what}[{}]", l + 1)))
        .collect()
}

fn check_vector(v: &[f64], d: usize, what: &str) -> Result<()> {
    if v.len() != d {
        return Err(Error::Validation(format!("{what} must have length {d}, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation(format!("{what} has non-finite entries")));
    }
    Ok(())
}

fn check_omega(omega: &[f64], d: usize) -> Result<()> {
    check_vector(omega, d, "omega")?;
    if omega.iter().any(|&w| w <= 0.0) {
        return Err(Error::Validation("omega must be strictly positive".into()));
    }
    Ok(())
}

/// Gaussian innovations `ε = L z` with `L Lᵀ = Ψ`.
#[derive(Debug, Clone)]
struct Gaussian {
    d: usize,
    factor: Option<DMatrix<f64>>,
    variances: Vec<f64>,
}

impl Gaussian {
    fn new(d: usize, psi: Option<&Matrix>) -> Result<Self> {
        match psi {
            None => Ok(Self {
                d,
                factor: None,
                variances: vec![1.0; d],
            }),
            Some(m) => {
                let psi = to_dmatrix(m, d, d, "innovation covariance")?;
                let sym = SymMatrix::new(psi.clone())
                    .map_err(|_| Error::Validation("innovation covariance must be symmetric".into()))?;
                let chol = nalgebra::Cholesky::new(sym.into_matrix())
                    .ok_or_else(|| Error::Validation("innovation covariance must be positive definite".into()))?;
                Ok(Self {
                    d,
                    factor: Some(chol.l()),
                    variances: (0..d).map(|i| psi[(i, i)]).collect(),
                })
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
        match &self.factor {
            None => z,
            Some(l) => (0..self.d)
                .map(|i| (0..=i).map(|k| l[(i, k)] * z[k]).sum())
                .collect(),
        }
    }

    fn abs_means(&self) -> Vec<f64> {
        self.variances.iter().map(|v| (2.0 / PI).sqrt() * v.sqrt()).collect()
    }
}

#[derive(Debug, Clone)]
enum Compiled {
    Linear {
        c: Vec<DMatrix<f64>>,
        noise: Gaussian,
    },
    Varma {
        ar: Vec<DMatrix<f64>>,
        ma: Vec<DMatrix<f64>>,
        noise: Gaussian,
    },
    Ccc {
        omega: Vec<f64>,
        alpha: Vec<Vec<f64>>,
        beta: Vec<Vec<f64>>,
        noise: Gaussian,
    },
    Jeantheau {
        omega: Vec<f64>,
        a: Vec<DMatrix<f64>>,
        b: Vec<DMatrix<f64>>,
        noise: Gaussian,
    },
    Factor {
        loadings: DMatrix<f64>,
        factor: Box<Compiled>,
        xi: Gaussian,
    },
    ExpGarch {
        d: usize,
        c: DMatrix<f64>,
        a: DMatrix<f64>,
        b: Vec<DMatrix<f64>>,
        f: Vec<DMatrix<f64>>,
        abs_means: Vec<f64>,
        noise: Gaussian,
    },
}

/// Recursion state. Histories are newest first.
#[derive(Debug, Clone, PartialEq)]
struct State {
    kind: &'static str,
    d: usize,
    /// Lagged observations (VARMA) or squared observations (GARCH types).
    obs: VecDeque<Vec<f64>>,
    /// Lagged innovations.
    eps: VecDeque<Vec<f64>>,
    /// Lagged squared volatilities.
    vol: VecDeque<Vec<f64>>,
    /// `vech[log H − C]` for the exponential GARCH.
    level: Vec<f64>,
    sub: Option<Box<State>>,
}

fn history(len: usize, fill: &[f64]) -> VecDeque<Vec<f64>> {
    std::iter::repeat_n(fill.to_vec(), len).collect()
}

fn push(h: &mut VecDeque<Vec<f64>>, v: Vec<f64>) {
    if h.is_empty() {
        return;
    }
    h.pop_back();
    h.push_front(v);
}

fn mat_vec_add(m: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o += (0..v.len()).map(|k| m[(i, k)] * v[k]).sum::<f64>();
    }
}

impl Compiled {
    fn d(&self) -> usize {
        match self {
            Compiled::Linear { noise, .. }
            | Compiled::Varma { noise, .. }
            | Compiled::Ccc { noise, .. }
            | Compiled::Jeantheau { noise, .. } => noise.d,
            Compiled::Factor { xi, .. } => xi.d,
            Compiled::ExpGarch { d, .. } => *d,
        }
    }

    fn initial_state(&self) -> State {
        let d = self.d();
        let zeros = vec![0.0; d];
        let mut s = State {
            kind: "",
            d,
            obs: VecDeque::new(),
            eps: VecDeque::new(),
            vol: VecDeque::new(),
            level: Vec::new(),
            sub: None,
        };
        match self {
            Compiled::Linear { c, .. } => {
                s.kind = "linear";
                s.eps = history(c.len().saturating_sub(1), &zeros);
            }
            Compiled::Varma { ar, ma, .. } => {
                s.kind = "varma";
                s.obs = history(ar.len(), &zeros);
                s.eps = history(ma.len(), &zeros);
            }
            Compiled::Ccc { omega, alpha, beta, .. } => {
                s.kind = "ccc_garch";
                s.vol = history(alpha.len(), omega);
                s.obs = history(beta.len(), &zeros);
            }
            Compiled::Jeantheau { omega, a, b, .. } => {
                s.kind = "jeantheau";
                s.vol = history(a.len(), omega);
                s.obs = history(b.len(), &zeros);
            }
            Compiled::Factor { factor, .. } => {
                s.kind = "factor";
                s.sub = Some(Box::new(factor.initial_state()));
            }
            Compiled::ExpGarch { b, f, .. } => {
                s.kind = "exp_garch";
                s.level = vec![0.0; vech_len(d)];
                s.eps = history(b.len().max(f.len()), &zeros);
            }
        }
        s
    }

    /// Whether `state` has the shape this recursion expects.
    fn accepts(&self, state: &State) -> bool {
        let fresh = self.initial_state();
        fn shape(s: &State) -> (&'static str, usize, usize, usize, usize, usize) {
            (s.kind, s.d, s.obs.len(), s.eps.len(), s.vol.len(), s.level.len())
        }
        shape(&fresh) == shape(state)
            && match (&fresh.sub, &state.sub) {
                (Some(a), Some(b)) => shape(a) == shape(b),
                (None, None) => true,
                _ => false,
            }
    }

    /// One step of the recursion; `t` is the global step index for error reports.
    fn step(&self, state: &mut State, main: &mut ChaCha8Rng, aux: &mut ChaCha8Rng, t: usize) -> Result<Vec<f64>> {
        let overflow = |v: &[f64]| v.iter().any(|x| !x.is_finite() || x.abs() > OVERFLOW_LIMIT);
        let y = match self {
            Compiled::Linear { c, noise } => {
                let e = noise.draw(main);
                let mut y = vec![0.0; noise.d];
                mat_vec_add(&c[0], &e, &mut y);
                for (m, past) in c[1..].iter().zip(&state.eps) {
                    mat_vec_add(m, past, &mut y);
                }
                push(&mut state.eps, e);
                y
            }
            Compiled::Varma { ar, ma, noise } => {
                let e = noise.draw(main);
                let mut y = e.clone();
                for (m, past) in ar.iter().zip(&state.obs) {
                    mat_vec_add(m, past, &mut y);
                }
                for (m, past) in ma.iter().zip(&state.eps) {
                    mat_vec_add(m, past, &mut y);
                }
                push(&mut state.obs, y.clone());
                push(&mut state.eps, e);
                y
            }
            Compiled::Ccc { omega, alpha, beta, noise } => {
                let mut s2 = omega.clone();
                for (a, past) in alpha.iter().zip(&state.vol) {
                    for i in 0..s2.len() {
                        s2[i] += a[i] * past[i];
                    }
                }
                for (b, past) in beta.iter().zip(&state.obs) {
                    for i in 0..s2.len() {
                        s2[i] += b[i] * past[i];
                    }
                }
                if overflow(&s2) {
                    return Err(Error::Overflow { index: t });
                }
                let e = noise.draw(main);
                let y: Vec<f64> = s2.iter().zip(&e).map(|(s, e)| s.sqrt() * e).collect();
                push(&mut state.vol, s2);
                push(&mut state.obs, y.iter().map(|v| v * v).collect());
                y
            }
            Compiled::Jeantheau { omega, a, b, noise } => {
                let mut s2 = omega.clone();
                for (m, past) in a.iter().zip(&state.vol) {
                    mat_vec_add(m, past, &mut s2);
                }
                for (m, past) in b.iter().zip(&state.obs) {
                    mat_vec_add(m, past, &mut s2);
                }
                if overflow(&s2) {
                    return Err(Error::Overflow { index: t });
                }
                let e = noise.draw(main);
                let y: Vec<f64> = s2.iter().zip(&e).map(|(s, e)| s.sqrt() * e).collect();
                push(&mut state.vol, s2);
                push(&mut state.obs, y.iter().map(|v| v * v).collect());
                y
            }
            Compiled::Factor { loadings, factor, xi } => {
                let sub = state.sub.as_mut().expect("factor state");
                // the factor draws from the auxiliary stream so that ξ alone
                // reproduces a plain gaussian stream
                let z = factor.step(sub, aux, main, t)?;
                let mut y = xi.draw(main);
                mat_vec_add(loadings, &z, &mut y);
                y
            }
            Compiled::ExpGarch { d, c, a, b, f, abs_means, noise } => {
                let mut x = vec![0.0; state.level.len()];
                mat_vec_add(a, &state.level, &mut x);
                for (m, past) in b.iter().zip(&state.eps) {
                    mat_vec_add(m, past, &mut x);
                }
                for (m, past) in f.iter().zip(&state.eps) {
                    let centered: Vec<f64> = past.iter().zip(abs_means).map(|(e, m)| e.abs() - m).collect();
                    mat_vec_add(m, &centered, &mut x);
                }
                let log_h = math(&VechVector::new(*d, x.clone())?).into_matrix() + c;
                if log_h.iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW_LIMIT.ln()) {
                    return Err(Error::Overflow { index: t });
                }
                let root = sym_exp_sqrt(&SymMatrix::symmetrize(&log_h)).map_err(|_| Error::Overflow { index: t })?;
                let e = noise.draw(main);
                let y = (root.as_matrix() * DVector::from_column_slice(&e)).as_slice().to_vec();
                state.level = x;
                push(&mut state.eps, e);
                y
            }
        };
        if overflow(&y) {
            return Err(Error::Overflow { index: t });
        }
        Ok(y)
    }
}

/// Outcome of a stationarity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// The contraction constant or spectral quantity that was checked.
    pub value: f64,
    /// Monte Carlo standard error, when the value is estimated.
    pub se: Option<f64>,
    pub passed: bool,
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
}

/// A validated, ready-to-run model.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    compiled: Compiled,
    certificate: Certificate,
}

impl Model {
    /// Compiles `spec`, rejecting it if its stationarity check fails unless
    /// `allow_nonstationary` is set.
    pub fn new(spec: &ModelSpec, allow_nonstationary: bool) -> Result<Self> {
        let compiled = compile(spec)?;
        let certificate = certify(spec)?;
        if !certificate.passed && !allow_nonstationary {
            return Err(Error::Validation(format!(
                "{} specification fails its stationarity condition (value {:.6})",
                spec.name(),
                certificate.value
            )));
        }
        Ok(Self {
            spec: spec.clone(),
            compiled,
            certificate,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.compiled.d()
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn simulate(&self, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeriesPanel> {
        simulate_segments(&[(self, n)], burn_in, seed)
    }
}

fn compile(spec: &ModelSpec) -> Result<Compiled> {
    let d = spec.d();
    if d == 0 {
        return Err(Error::Validation("dimension must be positive".into()));
    }
    Ok(match spec {
        ModelSpec::Linear(s) => {
            if s.coefficients.is_empty() {
                return Err(Error::Validation("a linear process needs at least C_0".into()));
            }
            Compiled::Linear {
                c: to_dmatrix_list(&s.coefficients, d, d, "C")?,
                noise: Gaussian::new(d, s.psi.as_ref())?,
            }
        }
        ModelSpec::Varma(s) => Compiled::Varma {
            ar: to_dmatrix_list(&s.ar, d, d, "A")?,
            ma: to_dmatrix_list(&s.ma, d, d, "B")?,
            noise: Gaussian::new(d, s.psi.as_ref())?,
        },
        ModelSpec::CccGarch(s) => compile_ccc(s)?,
        ModelSpec::Jeantheau(s) => {
            check_omega(&s.omega, d)?;
            let a = to_dmatrix_list(&s.a, d, d, "A")?;
            let b = to_dmatrix_list(&s.b, d, d, "B")?;
            if a.iter().chain(&b).any(|m| m.iter().any(|&v| v < 0.0)) {
                return Err(Error::Validation("Jeantheau matrices must be entrywise nonnegative".into()));
            }
            Compiled::Jeantheau {
                omega: s.omega.clone(),
                a,
                b,
                noise: Gaussian::new(d, s.psi.as_ref())?,
            }
        }
        ModelSpec::Factor(s) => {
            let k = s.factor.d;
            if k >= d {
                return Err(Error::Validation(format!(
                    "factor dimension {k} must be smaller than d = {d}"
                )));
            }
            Compiled::Factor {
                loadings: to_dmatrix(&s.loadings, d, k, "loadings")?,
                factor: Box::new(compile_ccc(&s.factor)?),
                xi: Gaussian::new(d, s.xi_cov.as_ref())?,
            }
        }
        ModelSpec::ExpGarch(s) => {
            let p = vech_len(d);
            let c = to_dmatrix(&s.c, d, d, "C")?;
            SymMatrix::new(c.clone()).map_err(|_| Error::Validation("C must be symmetric".into()))?;
            let noise = Gaussian::new(d, s.psi.as_ref())?;
            Compiled::ExpGarch {
                d,
                c,
                a: to_dmatrix(&s.a, p, p, "A")?,
                b: to_dmatrix_list(&s.b, p, d, "B")?,
                f: to_dmatrix_list(&s.f, p, d, "F")?,
                abs_means: noise.abs_means(),
                noise,
            }
        }
    })
}

fn compile_ccc(s: &CccGarchSpec) -> Result<Compiled> {
    let d = s.d;
    check_omega(&s.omega, d)?;
    for (l, v) in s.alpha.iter().enumerate() {
        check_vector(v, d, &format!("alpha[{}]", l + 1))?;
    }
    for (l, v) in s.beta.iter().enumerate() {
        check_vector(v, d, &format!("beta[{}]", l + 1))?;
    }
    if s.alpha.iter().chain(&s.beta).flatten().any(|&v| v < 0.0) {
        return Err(Error::Validation("CCC-GARCH coefficients must be nonnegative".into()));
    }
    Ok(Compiled::Ccc {
        omega: s.omega.clone(),
        alpha: s.alpha.clone(),
        beta: s.beta.clone(),
        noise: Gaussian::new(d, s.psi.as_ref())?,
    })
}

fn certify(spec: &ModelSpec) -> Result<Certificate> {
    Ok(match spec {
        ModelSpec::Linear(_) => Certificate {
            value: 0.0,
            se: None,
            passed: true,
        },
        ModelSpec::Varma(s) => {
            let rho = varma_spectral_radius(s)?;
            Certificate {
                value: rho,
                se: None,
                passed: rho < 1.0 - 1e-8,
            }
        }
        ModelSpec::CccGarch(s) => {
            let g = check_gamma_c(s)?;
            Certificate {
                value: g,
                se: None,
                passed: g < 1.0,
            }
        }
        ModelSpec::Jeantheau(s) => {
            let g = check_gamma_j(s, 2.0, DEFAULT_GAMMA_J_DRAWS, DEFAULT_GAMMA_J_SEED)?;
            Certificate {
                value: g.value,
                se: Some(g.se),
                passed: g.value + 3.0 * g.se < 1.0,
            }
        }
        ModelSpec::Factor(s) => {
            let g = check_gamma_c(&s.factor)?;
            Certificate {
                value: g,
                se: None,
                passed: g < 1.0,
            }
        }
        ModelSpec::ExpGarch(s) => {
            let p = vech_len(s.d);
            let norm = spectral_norm(&to_dmatrix(&s.a, p, p, "A")?)?;
            Certificate {
                value: norm,
                se: None,
                passed: norm < 1.0,
            }
        }
    })
}

fn innovation_variances(d: usize, psi: Option<&Matrix>) -> Result<Vec<f64>> {
    Ok(Gaussian::new(d, psi)?.variances)
}

/// `γ_C = max_i Σ_ℓ ‖α_{ℓ,i} + β_{ℓ,i} ε_{0,i}²‖₂` in closed form for gaussian
/// innovations (`E ε⁴ = 3 (E ε²)²`).
pub fn check_gamma_c(spec: &CccGarchSpec) -> Result<f64> {
    compile_ccc(spec)?;
    let m2 = innovation_variances(spec.d, spec.psi.as_ref())?;
    let r = spec.alpha.len().max(spec.beta.len());
    let coef = |v: &Vec<Vec<f64>>, l: usize, i: usize| v.get(l).map_or(0.0, |x| x[i]);
    Ok((0..spec.d)
        .map(|i| {
            let (s2, s4) = (m2[i], 3.0 * m2[i] * m2[i]);
            (0..r)
                .map(|l| {
                    let (a, b) = (coef(&spec.alpha, l, i), coef(&spec.beta, l, i));
                    (a * a + 2.0 * a * b * s2 + b * b * s4).sqrt()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max))
}

/// Monte Carlo version of [`check_gamma_c`]; the standard error is that of the
/// maximising coordinate.
pub fn gamma_c_monte_carlo(spec: &CccGarchSpec, draws: usize, seed: u64) -> Result<McEstimate> {
    compile_ccc(spec)?;
    let noise = Gaussian::new(spec.d, spec.psi.as_ref())?;
    let r = spec.alpha.len().max(spec.beta.len());
    let coef = |v: &Vec<Vec<f64>>, l: usize, i: usize| v.get(l).map_or(0.0, |x| x[i]);
    let mut rng = stream_rng(seed, 0);
    // running first and second moments of (α + β ε²)² per (coordinate, lag)
    let mut m1 = vec![vec![0.0; r]; spec.d];
    let mut m2 = vec![vec![0.0; r]; spec.d];
    for _ in 0..draws {
        let e = noise.draw(&mut rng);
        for i in 0..spec.d {
            for l in 0..r {
                let x = coef(&spec.alpha, l, i) + coef(&spec.beta, l, i) * e[i] * e[i];
                let x2 = x * x;
                m1[i][l] += x2;
                m2[i][l] += x2 * x2;
            }
        }
    }
    let nd = draws as f64;
    let mut best = McEstimate { value: f64::NEG_INFINITY, se: 0.0 };
    for i in 0..spec.d {
        let mut value = 0.0;
        let mut se = 0.0;
        for l in 0..r {
            let mean = m1[i][l] / nd;
            let var = (m2[i][l] / nd - mean * mean).max(0.0);
            let sd_mean = (var / nd).sqrt();
            value += mean.sqrt();
            // delta method for the square root
            se += if mean > 0.0 { sd_mean / (2.0 * mean.sqrt()) } else { 0.0 };
        }
        if value > best.value {
            best = McEstimate { value, se };
        }
    }
    Ok(best)
}

/// `γ_{J,α} = Σ_ℓ ‖A_ℓ + B_ℓ E_0‖_{E,α}` with `E_0 = diag(ε ∘ ε)`, by Monte Carlo.
pub fn check_gamma_j(spec: &JeantheauSpec, alpha_norm: f64, draws: usize, seed: u64) -> Result<McEstimate> {
    if !(alpha_norm >= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha_norm must be at least 1, got {alpha_norm}")));
    }
    if draws < 2 {
        return Err(Error::InvalidArgument("need at least two Monte Carlo draws".into()));
    }
    let d = spec.d;
    let a = to_dmatrix_list(&spec.a, d, d, "A")?;
    let b = to_dmatrix_list(&spec.b, d, d, "B")?;
    let noise = Gaussian::new(d, spec.psi.as_ref())?;
    let r = a.len().max(b.len());
    let zero = DMatrix::<f64>::zeros(d, d);
    let mut rng = stream_rng(seed, 0);
    let mut s1 = vec![0.0; r];
    let mut s2 = vec![0.0; r];
    for _ in 0..draws {
        let e = noise.draw(&mut rng);
        for l in 0..r {
            let mut m = a.get(l).unwrap_or(&zero).clone();
            if let Some(bl) = b.get(l) {
                for j in 0..d {
                    let w = e[j] * e[j];
                    for i in 0..d {
                        m[(i, j)] += bl[(i, j)] * w;
                    }
                }
            }
            let x = spectral_norm(&m)?.powf(alpha_norm);
            s1[l] += x;
            s2[l] += x * x;
        }
    }
    let nd = draws as f64;
    let mut value = 0.0;
    let mut se = 0.0;
    for l in 0..r {
        let mean = s1[l] / nd;
        let var = (s2[l] / nd - mean * mean).max(0.0);
        let sd_mean = (var / nd).sqrt();
        value += mean.powf(1.0 / alpha_norm);
        if mean > 0.0 {
            se += mean.powf(1.0 / alpha_norm - 1.0) / alpha_norm * sd_mean;
        }
    }
    Ok(McEstimate { value, se })
}

/// Spectral radius of the companion matrix of the AR part.
pub fn varma_spectral_radius(spec: &VarmaSpec) -> Result<f64> {
    let d = spec.d;
    let ar = to_dmatrix_list(&spec.ar, d, d, "A")?;
    let p = ar.len();
    if p == 0 {
        return Ok(0.0);
    }
    let mut companion = DMatrix::<f64>::zeros(d * p, d * p);
    for (l, m) in ar.iter().enumerate() {
        companion.view_mut((0, l * d), (d, d)).copy_from(m);
    }
    for i in d..d * p {
        companion[(i, i - d)] = 1.0;
    }
    Ok(spectral_radius(companion))
}

fn spectral_radius(m: DMatrix<f64>) -> f64 {
    if let Some(schur) = m.clone().try_schur(f64::EPSILON, 10_000) {
        return schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    // Gelfand: ‖M^(2^k)‖^(2^-k), renormalizing to stay finite
    let mut power = m;
    let mut log_scale = 0.0;
    let mut exponent = 1.0;
    for _ in 0..40 {
        let norm = power.norm();
        if norm == 0.0 {
            return 0.0;
        }
        power /= norm;
        log_scale += norm.ln() / exponent;
        power = &power * &power;
        exponent *= 2.0;
    }
    (log_scale + power.norm().ln() / exponent).exp()
}

/// True iff every root of `det A(z)` lies outside the closed unit disc.
pub fn check_varma_stationary(spec: &VarmaSpec) -> Result<bool> {
    Ok(varma_spectral_radius(spec)? < 1.0 - 1e-8)
}

/// True iff `spectral_norm(A) < 1`.
pub fn check_expgarch(spec: &ExpGarchSpec) -> Result<bool> {
    Ok(certify(&ModelSpec::ExpGarch(spec.clone()))?.passed)
}

fn simulate_segments(segments: &[(&Model, usize)], burn_in: usize, seed: u64) -> Result<TimeSeriesPanel> {
    let first = segments[0].0;
    let d = first.d();
    let total: usize = segments.iter().map(|(_, n)| n).sum();
    if total == 0 {
        return Err(Error::InvalidArgument("number of rows must be positive".into()));
    }
    let (mut main, mut aux) = (stream_rng(seed, 0), stream_rng(seed, 1));
    let mut state = first.compiled.initial_state();
    let mut t = 0;
    for _ in 0..burn_in {
        first.compiled.step(&mut state, &mut main, &mut aux, t)?;
        t += 1;
    }
    let mut values = Vec::with_capacity(total * d);
    for (model, n) in segments {
        if !model.compiled.accepts(&state) {
            return Err(Error::Validation(format!(
                "cannot continue a {} recursion with a {} specification of different shape",
                state.kind,
                model.spec.name()
            )));
        }
        for _ in 0..*n {
            values.extend(model.compiled.step(&mut state, &mut main, &mut aux, t)?);
            t += 1;
        }
    }
    TimeSeriesPanel::new(total, d, values)
}

/// `n` rows of `spec` after `burn_in` discarded steps.
pub fn simulate(spec: &ModelSpec, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeriesPanel> {
    Model::new(spec, false)?.simulate(n, burn_in, seed)
}

/// Rows `1..=⌊θn⌋` from `pre`; the rest from `post`, continuing from the
/// state `pre` left behind.
pub fn break_panel(pre: &Model, post: &Model, n: usize, theta: f64, burn_in: usize, seed: u64) -> Result<TimeSeriesPanel> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!("theta must lie in (0, 1), got {theta}")));
    }
    if pre.d() != post.d() {
        return Err(Error::DimensionMismatch {
            expected: pre.d(),
            found: post.d(),
        });
    }
    let k = (theta * n as f64).floor() as usize;
    simulate_segments(&[(pre, k), (post, n - k)], burn_in, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sym_exp, SpdMatrix};

    fn sample_cov(p: &TimeSeriesPanel) -> DMatrix<f64> {
        let d = p.d();
        let m = p.column_means();
        let mut c = DMatrix::<f64>::zeros(d, d);
        for r in p.rows() {
            for i in 0..d {
                for j in 0..d {
                    c[(i, j)] += (r[i] - m[i]) * (r[j] - m[j]);
                }
            }
        }
        c / p.n() as f64
    }

    fn rel_spectral_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        spectral_norm(&(a - b)).unwrap() / spectral_norm(b).unwrap()
    }

    fn factor_design(scale: f64) -> FactorSpec {
        FactorSpec {
            d: 4,
            loadings: vec![
                vec![scale, 0.0],
                vec![scale, 0.0],
                vec![0.0, scale],
                vec![0.0, scale],
            ],
            factor: CccGarchSpec::garch11(vec![1.0; 2], vec![0.3; 2], vec![0.3; 2]),
            xi_cov: None,
        }
    }

    #[test]
    fn gamma_c_examples() {
        let g = check_gamma_c(&CccGarchSpec::garch11(vec![1.0], vec![0.9], vec![0.0])).unwrap();
        assert_eq!(g, 0.9);
        let spec = CccGarchSpec::garch11(vec![1.0; 2], vec![0.2, 0.4], vec![0.0; 2]);
        assert!((check_gamma_c(&spec).unwrap() - 0.4).abs() < 1e-15);
        let g = check_gamma_c(&factor_design(1.0).factor).unwrap();
        assert!((g - 0.3 * 6f64.sqrt()).abs() < 1e-12);
        let mc = gamma_c_monte_carlo(&factor_design(1.0).factor, 200_000, 1).unwrap();
        assert!((mc.value - g).abs() < 3.0 * mc.se, "{mc:?} vs {g}");
    }

    #[test]
    fn gamma_j_degenerates_without_b() {
        let spec = JeantheauSpec {
            d: 2,
            omega: vec![1.0; 2],
            a: vec![vec![vec![0.2, 0.1], vec![0.0, 0.3]]],
            b: Vec::new(),
            psi: None,
            innovation: InnovationLaw::Gaussian,
        };
        let g = check_gamma_j(&spec, 2.0, 100, 3).unwrap();
        let exact = spectral_norm(&DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.0, 0.3])).unwrap();
        assert!((g.value - exact).abs() < 1e-12 && g.se < 1e-12);
    }

    #[test]
    fn gamma_j_matches_brute_force_oracle() {
        let spec = JeantheauSpec {
            d: 3,
            omega: vec![1.0; 3],
            a: vec![scaled_identity(3, 0.0)],
            b: vec![scaled_identity(3, 0.1)],
            psi: None,
            innovation: InnovationLaw::Gaussian,
        };
        let g = check_gamma_j(&spec, 2.0, 50_000, 5).unwrap();
        // independent estimate of 0.1 ‖max_i ε_i²‖₂ on a different stream
        let mut rng = stream_rng(99, 7);
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let m = (0..3)
                .map(|_| rng.sample::<f64, _>(StandardNormal).powi(2))
                .fold(0.0, f64::max);
            acc += m * m;
        }
        let oracle = 0.1 * (acc / n as f64).sqrt();
        assert!((g.value - oracle).abs() < 3.0 * g.se + 1e-3 * oracle, "{g:?} vs {oracle}");
    }

    #[test]
    fn diagonal_jeantheau_dominates_ccc() {
        let spec = JeantheauSpec {
            d: 2,
            omega: vec![1.0; 2],
            a: vec![vec![vec![0.3, 0.0], vec![0.0, 0.1]]],
            b: vec![vec![vec![0.2, 0.0], vec![0.0, 0.35]]],
            psi: None,
            innovation: InnovationLaw::Gaussian,
        };
        let ccc = CccGarchSpec::garch11(vec![1.0; 2], vec![0.3, 0.1], vec![0.2, 0.35]);
        let gj = check_gamma_j(&spec, 2.0, 20_000, 1).unwrap();
        assert!(gj.value + 3.0 * gj.se >= check_gamma_c(&ccc).unwrap());
    }

    #[test]
    fn varma_root_condition() {
        assert!(check_varma_stationary(&VarmaSpec::ar1(scaled_identity(4, 0.1))).unwrap());
        assert!(!check_varma_stationary(&VarmaSpec::ar1(scaled_identity(4, 1.0))).unwrap());
        let mut a = scaled_identity(4, 0.1);
        a.iter_mut().flatten().for_each(|v| *v += 0.6);
        let spec = VarmaSpec::ar1(a);
        assert!((varma_spectral_radius(&spec).unwrap() - 2.5).abs() < 1e-10);
        assert!(!check_varma_stationary(&spec).unwrap());
        for shift in [0.5, 0.225, 0.125] {
            let mut a = scaled_identity(4, 0.1);
            a.iter_mut().flatten().for_each(|v| *v += shift);
            let rho = varma_spectral_radius(&VarmaSpec::ar1(a)).unwrap();
            assert!((rho - (0.1 + 4.0 * shift)).abs() < 1e-9, "{shift}: {rho}");
        }
        let jordan = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        assert!((spectral_radius(jordan) - 0.5).abs() < 1e-9);
        // AR(2) with roots inside the unit circle for the companion form
        let spec = VarmaSpec {
            d: 1,
            ar: vec![vec![vec![0.5]], vec![vec![0.3]]],
            ma: Vec::new(),
            psi: None,
            innovation: InnovationLaw::Gaussian,
        };
        let rho = varma_spectral_radius(&spec).unwrap();
        let oracle = (0.5 + (0.25f64 + 1.2).sqrt()) / 2.0;
        assert!((rho - oracle).abs() < 1e-12);
    }

    #[test]
    fn expgarch_norm_condition() {
        let base = ExpGarchSpec {
            d: 2,
            c: scaled_identity(2, 0.2),
            a: scaled_identity(3, 0.0),
            b: Vec::new(),
            f: Vec::new(),
            psi: None,
            innovation: InnovationLaw::Gaussian,
        };
        assert!(check_expgarch(&base).unwrap());
        let mut s = base.clone();
        s.a = scaled_identity(3, 0.1);
        assert!(check_expgarch(&s).unwrap());
        s.a = scaled_identity(3, 1.0);
        assert!(!check_expgarch(&s).unwrap());
    }

    #[test]
    fn simulation_is_deterministic_and_validated() {
        let spec = ModelSpec::Factor(factor_design(1.0));
        let a = simulate(&spec, 200, 50, 9).unwrap();
        let b = simulate(&spec, 200, 50, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate(&spec, 200, 50, 10).unwrap());
        let bad = ModelSpec::Varma(VarmaSpec::ar1(scaled_identity(2, 1.0)));
        assert!(matches!(simulate(&bad, 10, 0, 1), Err(Error::Validation(_))));
        assert!(Model::new(&bad, true).unwrap().simulate(10, 0, 1).is_ok());
    }

    #[test]
    fn explosive_recursions_report_overflow() {
        let spec = ModelSpec::Varma(VarmaSpec::ar1(scaled_identity(1, 3.0)));
        let model = Model::new(&spec, true).unwrap();
        match model.simulate(1000, 0, 1) {
            Err(Error::Overflow { index }) => assert!(index > 200 && index < 400),
            other => panic!("expected overflow, got {other:?}"),
        }
        let garch = ModelSpec::CccGarch(CccGarchSpec::garch11(vec![1.0], vec![1.5], vec![0.5]));
        assert!(matches!(
            Model::new(&garch, true).unwrap().simulate(5000, 0, 1),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn garch_volatility_stays_above_omega() {
        let spec = CccGarchSpec::garch11(vec![0.5, 2.0], vec![0.2, 0.4], vec![0.3, 0.1]);
        let compiled = compile_ccc(&spec).unwrap();
        let mut state = compiled.initial_state();
        let (mut main, mut aux) = (stream_rng(4, 0), stream_rng(4, 1));
        for t in 0..2000 {
            compiled.step(&mut state, &mut main, &mut aux, t).unwrap();
            let s2 = &state.vol[0];
            assert!(s2[0] >= 0.5 && s2[1] >= 2.0);
        }
    }

    #[test]
    fn factor_with_zero_loadings_is_the_noise_stream() {
        let mut spec = factor_design(0.0);
        spec.xi_cov = Some(vec![
            vec![1.0, 0.3, 0.0, 0.0],
            vec![0.3, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.5],
        ]);
        let noise = ModelSpec::Linear(LinearProcessSpec {
            d: 4,
            coefficients: vec![scaled_identity(4, 1.0)],
            psi: spec.xi_cov.clone(),
            innovation: InnovationLaw::Gaussian,
        });
        let a = simulate(&ModelSpec::Factor(spec), 300, 20, 3).unwrap();
        let b = simulate(&noise, 300, 20, 3).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn varma_covariance_matches_lyapunov_solution() {
        let a = vec![vec![0.5, 0.2], vec![-0.1, 0.3]];
        let psi = vec![vec![1.0, 0.4], vec![0.4, 2.0]];
        let spec = VarmaSpec {
            d: 2,
            ar: vec![a.clone()],
            ma: Vec::new(),
            psi: Some(psi.clone()),
            innovation: InnovationLaw::Gaussian,
        };
        let p = simulate(&ModelSpec::Varma(spec), 100_000, 500, 2).unwrap();
        // Γ = A Γ Aᵀ + Ψ by fixed-point iteration
        let am = DMatrix::from_fn(2, 2, |i, j| a[i][j]);
        let pm = DMatrix::from_fn(2, 2, |i, j| psi[i][j]);
        let mut g = pm.clone();
        for _ in 0..500 {
            g = &am * &g * am.transpose() + &pm;
        }
        assert!(rel_spectral_error(&sample_cov(&p), &g) < 0.05);
    }

    #[test]
    fn linear_process_covariance() {
        let c0 = scaled_identity(2, 1.0);
        let c1 = vec![vec![0.5, 0.0], vec![0.3, -0.4]];
        let spec = ModelSpec::Linear(LinearProcessSpec {
            d: 2,
            coefficients: vec![c0, c1.clone()],
            psi: None,
            innovation: InnovationLaw::Gaussian,
        });
        let p = simulate(&spec, 100_000, 10, 6).unwrap();
        let c1m = DMatrix::from_fn(2, 2, |i, j| c1[i][j]);
        let oracle = DMatrix::identity(2, 2) + &c1m * c1m.transpose();
        assert!(rel_spectral_error(&sample_cov(&p), &oracle) < 0.05);
    }

    #[test]
    fn constant_expgarch_covariance() {
        let c = vec![vec![0.4, 0.1], vec![0.1, -0.2]];
        let psi = vec![vec![1.0, 0.5], vec![0.5, 1.0]];
        let spec = ExpGarchSpec {
            d: 2,
            c: c.clone(),
            a: scaled_identity(3, 0.0),
            b: Vec::new(),
            f: Vec::new(),
            psi: Some(psi.clone()),
            innovation: InnovationLaw::Gaussian,
        };
        let p = simulate(&ModelSpec::ExpGarch(spec), 100_000, 10, 8).unwrap();
        let cm = SymMatrix::new(DMatrix::from_fn(2, 2, |i, j| c[i][j])).unwrap();
        let root = sym_exp(&cm.scale(0.5)).unwrap();
        let pm = DMatrix::from_fn(2, 2, |i, j| psi[i][j]);
        let oracle = root.as_matrix() * pm * root.as_matrix();
        assert!(rel_spectral_error(&sample_cov(&p), &oracle) < 0.05);
        let _ = SpdMatrix::new(SymMatrix::symmetrize(&oracle)).unwrap();
    }

    #[test]
    fn ccc_halves_agree() {
        let spec = ModelSpec::CccGarch(factor_design(1.0).factor);
        let n = 50_000;
        let p = simulate(&spec, n, 500, 12).unwrap();
        let series = crate::longrun::vech_outer_series(&p, false).unwrap();
        let half = n / 2;
        let q = 20;
        for a in 0..series.vdim() {
            let col: Vec<f64> = series.rows().map(|r| r[a]).collect();
            let (m1, m2) = (mean(&col[..half]), mean(&col[half..]));
            // batch means over blocks of q·10 rows give a dependence-robust SE
            let se = (batch_var(&col[..half], q * 10) + batch_var(&col[half..], q * 10)).sqrt();
            assert!((m1 - m2).abs() < 4.0 * se, "coordinate {a}: {m1} vs {m2}, se {se}");
        }
    }

    fn mean(x: &[f64]) -> f64 {
        x.iter().sum::<f64>() / x.len() as f64
    }

    fn batch_var(x: &[f64], block: usize) -> f64 {
        let means: Vec<f64> = x.chunks_exact(block).map(mean).collect();
        let m = mean(&means);
        let v = means.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
        v / means.len() as f64
    }

    #[test]
    fn break_panel_mechanics() {
        let pre = Model::new(&ModelSpec::Varma(VarmaSpec::ar1(scaled_identity(2, 0.1))), false).unwrap();
        let same = break_panel(&pre, &pre, 100, 0.5, 30, 4).unwrap();
        assert_eq!(same, pre.simulate(100, 30, 4).unwrap());

        let mut post_a = scaled_identity(2, 0.1);
        post_a[0][1] = 0.5;
        let post = Model::new(&ModelSpec::Varma(VarmaSpec::ar1(post_a)), false).unwrap();
        let mixed = break_panel(&pre, &post, 100, 0.5, 30, 4).unwrap();
        assert_eq!(mixed.slice(0, 50).unwrap(), same.slice(0, 50).unwrap());
        assert_ne!(mixed.row(50), same.row(50));

        let other = Model::new(&ModelSpec::CccGarch(CccGarchSpec::garch11(vec![1.0; 2], vec![0.1; 2], vec![0.1; 2])), false).unwrap();
        assert!(matches!(break_panel(&pre, &other, 100, 0.5, 30, 4), Err(Error::Validation(_))));
        assert!(break_panel(&pre, &pre, 100, 1.0, 30, 4).is_err());
    }
}
