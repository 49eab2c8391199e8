use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{check_level, check_vdim, kiefer_series_cdf, Statistic};
use crate::error::{Error, Result};

/// Number of eigenterms kept explicitly in the characteristic function.
pub const DEFAULT_TRUNCATION: usize = 1000;
/// Number of terms of the parabolic-cylinder series used by the cross-check.
pub const SERIES_TERMS: usize = 50;
const CROSS_CHECK_TOL: f64 = 1e-3;
const QUANTILE_TOL: f64 = 1e-8;
const MAX_POWER: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaMethod {
    /// Numerical inversion of the characteristic function (default).
    CfInversion,
    /// The parabolic-cylinder series; `vdim ≥ 2` only.
    Series,
}

/// The law of `Ω(𝔡) = Σ_{k≥1} χ²_{𝔡,k} / (k²π²)`.
///
/// The CDF comes from Imhof's inversion formula applied to the
/// Karhunen–Loève expansion. Eigenvalues beyond the truncation point are
/// replaced by their mean so that `E Ω = 𝔡/6` holds exactly.
#[derive(Debug, Clone)]
pub struct OmegaLaw {
    vdim: usize,
    method: OmegaMethod,
    table: Arc<EigenTable>,
}

/// Result of comparing the two CDF routes at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaCrossCheck {
    pub x: f64,
    pub cf_inversion: f64,
    pub series: f64,
    pub abs_diff: f64,
    pub agrees: bool,
}

#[derive(Debug)]
struct EigenTable {
    /// `λ_k = 1/(k²π²)` for `k = 1..=K`, stored at index `k-1`.
    lambda: Vec<f64>,
    /// `suffix[k0][p-1] = Σ_{k=k0+1}^{K} λ_k^p`.
    suffix: Vec<[f64; MAX_POWER]>,
    /// `Σ_{k>K} λ_k`.
    tail_mean: f64,
}

impl EigenTable {
    fn new(truncation: usize) -> Self {
        let lambda: Vec<f64> = (1..=truncation)
            .map(|k| 1.0 / ((k * k) as f64 * PI * PI))
            .collect();
        let mut suffix = vec![[0.0; MAX_POWER]; truncation + 1];
        for k0 in (0..truncation).rev() {
            let l = lambda[k0];
            let mut pow = 1.0;
            let mut row = suffix[k0 + 1];
            for s in row.iter_mut() {
                pow *= l;
                *s += pow;
            }
            suffix[k0] = row;
        }
        // Σ_{k≤K} 1/k², summed from the small end
        let head: f64 = (1..=truncation).rev().map(|k| 1.0 / (k * k) as f64).sum();
        let tail_mean = (PI * PI / 6.0 - head) / (PI * PI);
        Self {
            lambda,
            suffix,
            tail_mean,
        }
    }

    fn truncation(&self) -> usize {
        self.lambda.len()
    }

    /// Returns `(Σ_k atan(λ_k u), Σ_k ln(1 + λ_k² u²))` over the kept eigenterms.
    fn sums(&self, u: f64) -> (f64, f64) {
        let k_max = self.truncation();
        // beyond k0, λ_k u ≤ 1/4 and the Taylor series in (λu)² converge fast
        let k0 = ((2.0 * u.sqrt() / PI).ceil() as usize).min(k_max);
        let mut atan_sum = 0.0;
        let mut log_sum = 0.0;
        for &l in &self.lambda[..k0] {
            let w = l * u;
            atan_sum += w.atan();
            log_sum += (w * w).ln_1p();
        }
        if k0 < k_max {
            let s = &self.suffix[k0];
            let u2 = u * u;
            // atan: Σ_m (-1)^m u^{2m+1} S_{2m+1} / (2m+1)
            let mut upow = u;
            let mut sign = 1.0;
            for m in 0..MAX_POWER / 2 {
                let term = sign * upow * s[2 * m] / (2 * m + 1) as f64;
                atan_sum += term;
                if term.abs() < 1e-18 * atan_sum.abs() {
                    break;
                }
                upow *= u2;
                sign = -sign;
            }
            // ln(1+w): Σ_{m≥1} (-1)^{m+1} u^{2m} S_{2m} / m
            let mut upow = u2;
            let mut sign = 1.0;
            for m in 1..=MAX_POWER / 2 {
                let term = sign * upow * s[2 * m - 1] / m as f64;
                log_sum += term;
                if term.abs() < 1e-18 * log_sum.abs() {
                    break;
                }
                upow *= u2;
                sign = -sign;
            }
        }
        (atan_sum, log_sum)
    }

    /// `Σ_k w/(1+w)` with `w = λ_k² u²`: the log-log slope of `ρ` up to a factor.
    fn log_slope(&self, u: f64) -> f64 {
        self.lambda
            .iter()
            .map(|&l| {
                let w = (l * u) * (l * u);
                w / (1.0 + w)
            })
            .sum()
    }
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gauss_kronrod(f, a, b);
    if err <= tol || depth == 0 {
        return val;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
}

impl OmegaLaw {
    pub fn new(vdim: usize) -> Result<Self> {
        Self::with_options(vdim, OmegaMethod::CfInversion, DEFAULT_TRUNCATION)
    }

    pub fn with_options(vdim: usize, method: OmegaMethod, truncation: usize) -> Result<Self> {
        check_vdim(vdim)?;
        if truncation == 0 {
            return Err(Error::InvalidArgument("truncation must be positive".into()));
        }
        if method == OmegaMethod::Series && vdim < 2 {
            return Err(Error::InvalidArgument(
                "the parabolic-cylinder series needs vdim >= 2".into(),
            ));
        }
        Ok(Self {
            vdim,
            method,
            table: Arc::new(EigenTable::new(truncation)),
        })
    }

    pub fn vdim(&self) -> usize {
        self.vdim
    }

    pub fn method(&self) -> OmegaMethod {
        self.method
    }

    pub fn truncation(&self) -> usize {
        self.table.truncation()
    }

    pub fn mean(&self) -> f64 {
        self.vdim as f64 / 6.0
    }

    pub fn variance(&self) -> f64 {
        self.vdim as f64 / 45.0
    }

    /// `P(Ω(𝔡) ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            if x == f64::INFINITY {
                return Ok(1.0);
            }
            return Err(Error::InvalidArgument(format!(
                "Omega CDF needs x > 0, got {x}"
            )));
        }
        if self.log_upper_tail_bound(x) < -39.0 {
            return Ok(1.0);
        }
        match self.method {
            OmegaMethod::CfInversion => Ok(self.cdf_inversion(x)),
            OmegaMethod::Series => kiefer_series_cdf(self.vdim, x, SERIES_TERMS),
        }
    }

    /// Chernoff bound on `ln P(Ω > x)` at `s = π²/4`, where the moment
    /// generating function is `(sin(π/√2) / (π/√2))^(−𝔡/2)`.
    pub fn log_upper_tail_bound(&self, x: f64) -> f64 {
        let r = PI / 2f64.sqrt();
        -PI * PI * x / 4.0 - 0.5 * self.vdim as f64 * (r.sin() / r).ln()
    }

    fn cdf_inversion(&self, x: f64) -> f64 {
        let nu = self.vdim as f64;
        let table = &*self.table;
        let tail = table.tail_mean;
        let integrand = |u: f64| {
            let (atan_sum, log_sum) = table.sums(u);
            let theta = 0.5 * nu * (atan_sum + tail * u) - 0.5 * x * u;
            let log_rho = 0.25 * nu * log_sum;
            theta.sin() * (-log_rho).exp() / u
        };

        let freq = 0.5 * x.max(self.mean()).max(1e-3);
        let width = (PI / freq).min(2.0);
        let mut total = 0.0;
        let mut a = 0.0;
        loop {
            let b = a + width;
            total += adaptive(&integrand, a, b, 1e-13, 30);
            a = b;
            let (_, log_sum) = table.sums(a);
            let log_rho = 0.25 * nu * log_sum;
            let slope = 0.5 * nu * table.log_slope(a);
            let tail_bound = (-log_rho).exp() / (PI * slope);
            if tail_bound < 1e-12 || a > 1e8 {
                break;
            }
        }
        (0.5 - total / PI).clamp(0.0, 1.0)
    }

    /// Smallest `x` with `P(Ω ≤ x) ≥ level`, by bisection on `[0, mean + 20 sd]`.
    pub fn quantile(&self, level: f64) -> Result<f64> {
        check_level(level)?;
        let mut lo = 0.0;
        let mut hi = self.mean() + 20.0 * self.variance().sqrt();
        if self.cdf(hi)? < level {
            return Err(Error::Bracketing {
                level,
                reason: format!("CDF at upper bracket {hi} is below the level"),
            });
        }
        while hi - lo > QUANTILE_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= 0.0 || self.cdf(mid)? < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Quantile on the standardized scale `(x − 𝔡/6)/√(𝔡/45)`.
    pub fn standardized_quantile(&self, level: f64) -> Result<f64> {
        Ok(Statistic::Omega.standardize(self.vdim, self.quantile(level)?))
    }

    /// Compares the inversion route with the parabolic-cylinder series at `x`.
    pub fn cross_check(&self, x: f64) -> Result<OmegaCrossCheck> {
        if x <= 0.0 {
            return Err(Error::InvalidArgument(format!("cross check needs x > 0, got {x}")));
        }
        let cf_inversion = self.cdf_inversion(x);
        let series = kiefer_series_cdf(self.vdim, x, SERIES_TERMS)?;
        let abs_diff = (cf_inversion - series).abs();
        Ok(OmegaCrossCheck {
            x,
            cf_inversion,
            series,
            abs_diff,
            agrees: abs_diff <= CROSS_CHECK_TOL,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn chernoff_bound_dominates_the_tail() {
        for vdim in [1, 10, 78] {
            let law = OmegaLaw::new(vdim).unwrap();
            for x in [law.mean(), law.mean() + 3.0, law.mean() + 6.0] {
                let tail = 1.0 - law.cdf_inversion(x);
                assert!(tail <= law.log_upper_tail_bound(x).exp() + 1e-12, "vdim {vdim}, x {x}");
            }
            // huge arguments return at once instead of integrating ever finer panels
            let start = std::time::Instant::now();
            assert_eq!(law.cdf(1e12).unwrap(), 1.0);
            assert!(start.elapsed().as_secs_f64() < 1.0);
        }
    }

    #[test]
    fn eigen_table_tail_restores_mean() {
        let table = EigenTable::new(50);
        let kept: f64 = table.lambda.iter().sum();
        assert!((kept + table.tail_mean - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn accelerated_sums_match_direct_sums() {
        let table = EigenTable::new(DEFAULT_TRUNCATION);
        for &u in &[0.1, 3.0, 47.0, 900.0, 12_000.0] {
            let (a, l) = table.sums(u);
            let direct_a: f64 = table.lambda.iter().map(|&x| (x * u).atan()).sum();
            let direct_l: f64 = table.lambda.iter().map(|&x| (x * x * u * u).ln_1p()).sum();
            assert!((a - direct_a).abs() < 1e-12 * direct_a.abs().max(1.0), "u={u}");
            assert!((l - direct_l).abs() < 1e-12 * direct_l.abs().max(1.0), "u={u}");
        }
    }

    #[test]
    fn cramer_von_mises_critical_values() {
        // Ω(1) is the Cramér–von Mises limit law; classical 90/95/99% points.
        let law = OmegaLaw::new(1).unwrap();
        for (x, p) in [(0.34730, 0.90), (0.46136, 0.95), (0.74346, 0.99)] {
            let f = law.cdf(x).unwrap();
            assert!((f - p).abs() < 2e-4, "F({x}) = {f}, expected {p}");
        }
    }

    #[test]
    fn cdf_limits_and_errors() {
        let law = OmegaLaw::new(1).unwrap();
        assert!(law.cdf(0.0).is_err());
        assert!(law.cdf(-1.0).is_err());
        assert!(law.cdf(1e-3).unwrap() < 1e-8);
        assert!((law.cdf(40.0).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(law.cdf(f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn cdf_is_monotone_on_a_grid() {
        for vdim in [1usize, 3, 10, 78] {
            let law = OmegaLaw::new(vdim).unwrap();
            let top = law.mean() + 10.0 * law.variance().sqrt();
            let mut prev = 0.0;
            for i in 1..=1000 {
                let x = top * i as f64 / 1000.0;
                let f = law.cdf(x).unwrap();
                assert!(f >= prev - 1e-12, "vdim {vdim}: F({x}) = {f} < {prev}");
                prev = f;
            }
        }
    }

    #[test]
    fn moments_from_the_cdf() {
        // E X = ∫ (1 − F), E X² = ∫ 2x (1 − F), by composite Gauss–Kronrod in x
        let law = OmegaLaw::new(3).unwrap();
        let top = law.mean() + 25.0 * law.variance().sqrt();
        let survival = |x: f64| if x <= 0.0 { 1.0 } else { 1.0 - law.cdf(x).unwrap() };
        let panels = 60;
        let (mut m1, mut m2) = (0.0, 0.0);
        for i in 0..panels {
            let a = top * i as f64 / panels as f64;
            let b = top * (i + 1) as f64 / panels as f64;
            m1 += gauss_kronrod(&survival, a, b).0;
            m2 += gauss_kronrod(&|x| 2.0 * x * survival(x), a, b).0;
        }
        let var = m2 - m1 * m1;
        assert!((m1 / law.mean() - 1.0).abs() < 1e-3, "mean {m1}");
        assert!((var / law.variance() - 1.0).abs() < 1e-2, "variance {var}");
    }

    #[test]
    fn quantile_inverts_cdf() {
        let law = OmegaLaw::new(6).unwrap();
        for p in [0.01, 0.2, 0.5, 0.9, 0.99] {
            let q = law.quantile(p).unwrap();
            assert!((law.cdf(q).unwrap() - p).abs() < 1e-8, "level {p}");
        }
        for x in [0.4, 1.0, 1.7] {
            let p = law.cdf(x).unwrap();
            let back = law.quantile(p).unwrap();
            assert!((back - x).abs() < 1e-6 * x, "x = {x}, back = {back}");
        }
        assert!(law.quantile(1.0).is_err());
    }

    #[test]
    fn karhunen_loeve_monte_carlo_oracle() {
        // 𝔡 = 2, x = 0.3: 10⁶ draws of Σ_k (Z_{k,1}² + Z_{k,2}²)/(k²π²) with 100
        // explicit terms and the remaining eigenvalues replaced by their mean.
        let vdim = 2;
        let x = 0.3;
        let terms = 100;
        let lambda: Vec<f64> = (1..=terms).map(|k| 1.0 / ((k * k) as f64 * PI * PI)).collect();
        let tail = vdim as f64 * (1.0 / 6.0 - lambda.iter().sum::<f64>());
        let reps = 1_000_000;
        let mut rng = crate::rng::stream_rng(20_24, 0);
        let mut hits = 0usize;
        for _ in 0..reps {
            let mut s = tail;
            for &l in &lambda {
                for _ in 0..vdim {
                    let z: f64 = rng.sample(StandardNormal);
                    s += l * z * z;
                }
            }
            if s <= x {
                hits += 1;
            }
        }
        let p_mc = hits as f64 / reps as f64;
        let se = (p_mc * (1.0 - p_mc) / reps as f64).sqrt();
        let p = OmegaLaw::new(vdim).unwrap().cdf(x).unwrap();
        assert!((p - p_mc).abs() < 3.0 * se, "inversion {p} vs MC {p_mc} ± {se}");
    }

    #[test]
    fn series_route_agrees_with_inversion() {
        for vdim in [2usize, 3, 6, 10, 21] {
            let law = OmegaLaw::new(vdim).unwrap();
            for p in [0.05, 0.5, 0.95] {
                let x = law.quantile(p).unwrap();
                let check = law.cross_check(x).unwrap();
                assert!(check.agrees, "vdim {vdim}, x {x}: {check:?}");
                assert!(check.abs_diff < 1e-6, "vdim {vdim}, x {x}: {check:?}");
            }
        }
        assert!(OmegaLaw::with_options(1, OmegaMethod::Series, 10).is_err());
        let series = OmegaLaw::with_options(4, OmegaMethod::Series, 10).unwrap();
        assert!((series.cdf(1.0).unwrap() - OmegaLaw::new(4).unwrap().cdf(1.0).unwrap()).abs() < 1e-6);
    }
}
