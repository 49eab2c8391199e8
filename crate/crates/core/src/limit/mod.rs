//! Null limit laws of the vech-CUSUM statistics.
//!
//! `Ω(𝔡) = Σ_ℓ ∫₀¹ B_ℓ²(t) dt` and `Λ(𝔡) = sup_t Σ_ℓ B_ℓ²(t)` for `𝔡`
//! independent standard Brownian bridges. Both have standardized versions
//! that tend to `N(0, 1)` as `𝔡 → ∞`.

mod kiefer;
mod lambda;
mod omega;

pub use kiefer::{kiefer_series_cdf, parabolic_cylinder_d};
pub use lambda::{LambdaLaw, LambdaSampler, DEFAULT_GRID_POINTS, DEFAULT_REPLICATIONS, DEFAULT_SEED};
pub use omega::{OmegaCrossCheck, OmegaLaw, OmegaMethod};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Which of the two statistics (and limit laws) is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Lambda,
    Omega,
}

impl Statistic {
    /// Mean used for standardization: `𝔡/4` for Λ, `𝔡/6` for Ω.
    pub fn center(self, vdim: usize) -> f64 {
        match self {
            Statistic::Lambda => vdim as f64 / 4.0,
            Statistic::Omega => vdim as f64 / 6.0,
        }
    }

    /// Scale used for standardization: `√(𝔡/8)` for Λ, `√(𝔡/45)` for Ω.
    pub fn scale(self, vdim: usize) -> f64 {
        match self {
            Statistic::Lambda => (vdim as f64 / 8.0).sqrt(),
            Statistic::Omega => (vdim as f64 / 45.0).sqrt(),
        }
    }

    pub fn standardize(self, vdim: usize, raw: f64) -> f64 {
        (raw - self.center(vdim)) / self.scale(vdim)
    }

    pub fn destandardize(self, vdim: usize, z: f64) -> f64 {
        self.center(vdim) + z * self.scale(vdim)
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Lambda => "lambda",
            Statistic::Omega => "omega",
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lambda" => Ok(Statistic::Lambda),
            "omega" => Ok(Statistic::Omega),
            other => Err(Error::InvalidArgument(format!("unknown statistic '{other}'"))),
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A quantile reported both on the raw and the standardized scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizedQuantile {
    pub statistic: Statistic,
    pub vdim: usize,
    pub level: f64,
    pub raw: f64,
    pub standardized: f64,
}

impl StandardizedQuantile {
    pub fn from_raw(statistic: Statistic, vdim: usize, level: f64, raw: f64) -> Self {
        Self {
            statistic,
            vdim,
            level,
            raw,
            standardized: statistic.standardize(vdim, raw),
        }
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "probability level must lie in (0, 1), got {level}"
        )))
    }
}

pub(crate) fn check_vdim(vdim: usize) -> Result<()> {
    if vdim == 0 {
        Err(Error::InvalidArgument("vdim must be positive".into()))
    } else {
        Ok(())
    }
}

/// Standard normal quantile `z_p`.
pub fn normal_quantile(level: f64) -> Result<f64> {
    check_level(level)?;
    Ok(standard_normal().inverse_cdf(level))
}

pub(crate) fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `𝔡/6 + z_p √(𝔡/45)`: the Ω quantile implied by the normal approximation.
pub fn omega_normal_approx_quantile(vdim: usize, level: f64) -> Result<f64> {
    check_vdim(vdim)?;
    Ok(Statistic::Omega.destandardize(vdim, normal_quantile(level)?))
}

/// `P(standardized law ≤ z_p)`: how well the normal quantile covers the exact law.
///
/// The Λ branch evaluates the empirical CDF of `lambda`'s Monte Carlo sample.
pub fn normal_coverage(
    statistic: Statistic,
    vdim: usize,
    level: f64,
    lambda: Option<&LambdaLaw>,
) -> Result<f64> {
    let z = normal_quantile(level)?;
    let x = statistic.destandardize(vdim, z);
    match statistic {
        Statistic::Omega => OmegaLaw::new(vdim)?.cdf(x),
        Statistic::Lambda => {
            let owned;
            let law = match lambda {
                Some(l) => {
                    if l.vdim() != vdim {
                        return Err(Error::DimensionMismatch {
                            expected: vdim,
                            found: l.vdim(),
                        });
                    }
                    l
                }
                None => {
                    owned = LambdaLaw::new(vdim)?;
                    &owned
                }
            };
            Ok(law.cdf(x))
        }
    }
}
