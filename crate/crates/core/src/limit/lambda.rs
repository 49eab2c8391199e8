use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{check_level, check_vdim, Statistic};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng::stream_rng;

pub const DEFAULT_GRID_POINTS: usize = 4097;
pub const DEFAULT_REPLICATIONS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0x005E_ED0F_1A3B_DA;
const CHUNK: usize = 512;

/// How one path of `Σ_ℓ B_ℓ²(t)` is drawn on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSampler {
    /// Exact transitions of the squared Bessel bridge, two draws per grid step
    /// whatever the dimension. Same law on the grid as `BridgeCumsum`.
    SquaredBessel,
    /// `𝔡` Gaussian random walks turned into bridges by subtracting `t·W(1)`.
    BridgeCumsum,
}

/// Monte Carlo representation of `Λ(𝔡) = sup_t Σ_ℓ B_ℓ²(t)` on a uniform grid.
///
/// Replication `r` uses stream `r` of the ChaCha generator seeded by `seed`,
/// so the sample is the same whatever the execution policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaLaw {
    vdim: usize,
    grid_points: usize,
    replications: usize,
    seed: u64,
    sampler: LambdaSampler,
    #[serde(skip)]
    exec: Exec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SampleKey {
    vdim: usize,
    grid_points: usize,
    replications: usize,
    seed: u64,
    sampler: LambdaSampler,
}

fn sample_cache() -> &'static Mutex<HashMap<SampleKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<SampleKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

impl LambdaLaw {
    pub fn new(vdim: usize) -> Result<Self> {
        check_vdim(vdim)?;
        Ok(Self {
            vdim,
            grid_points: DEFAULT_GRID_POINTS,
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
            sampler: LambdaSampler::SquaredBessel,
            exec: Exec::default(),
        })
    }

    pub fn with_grid_points(mut self, grid_points: usize) -> Result<Self> {
        if grid_points < 3 {
            return Err(Error::InvalidArgument("grid needs at least 3 points".into()));
        }
        self.grid_points = grid_points;
        Ok(self)
    }

    pub fn with_replications(mut self, replications: usize) -> Result<Self> {
        if replications == 0 {
            return Err(Error::InvalidArgument("replications must be positive".into()));
        }
        self.replications = replications;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sampler(mut self, sampler: LambdaSampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn vdim(&self) -> usize {
        self.vdim
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampler(&self) -> LambdaSampler {
        self.sampler
    }

    /// One draw of the grid supremum for replication `rep`.
    pub fn draw(&self, rep: u64) -> f64 {
        let mut rng = stream_rng(self.seed, rep);
        match self.sampler {
            LambdaSampler::SquaredBessel => self.draw_bessel(&mut rng),
            LambdaSampler::BridgeCumsum => self.draw_cumsum(&mut rng),
        }
    }

    // |B(t)|² = (1−t)² |W(t/(1−t))|², and |W(s)|² is a squared Bessel process
    // whose increments are scaled noncentral χ² variables.
    fn draw_bessel<R: Rng>(&self, rng: &mut R) -> f64 {
        let m = (self.grid_points - 1) as f64;
        let chi = (self.vdim > 1).then(|| ChiSquared::new((self.vdim - 1) as f64).expect("df > 0"));
        let mut level = 0.0;
        let mut s_prev = 0.0;
        let mut sup = 0.0f64;
        for i in 1..self.grid_points - 1 {
            let t = i as f64 / m;
            let s = t / (1.0 - t);
            let dt = s - s_prev;
            let z: f64 = rng.sample(StandardNormal);
            let shifted = z + (level / dt).sqrt();
            let mut y = shifted * shifted;
            if let Some(chi) = &chi {
                y += chi.sample(rng);
            }
            level = dt * y;
            sup = sup.max((1.0 - t) * (1.0 - t) * level);
            s_prev = s;
        }
        sup
    }

    fn draw_cumsum<R: Rng>(&self, rng: &mut R) -> f64 {
        let steps = self.grid_points - 1;
        let scale = 1.0 / (steps as f64).sqrt();
        let mut sums = vec![0.0; steps + 1];
        let mut walk = vec![0.0; steps + 1];
        for _ in 0..self.vdim {
            let mut w = 0.0;
            for slot in walk.iter_mut().skip(1) {
                let z: f64 = rng.sample(StandardNormal);
                w += scale * z;
                *slot = w;
            }
            for (i, (acc, &wi)) in sums.iter_mut().zip(&walk).enumerate() {
                let b = wi - (i as f64 / steps as f64) * w;
                *acc += b * b;
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    fn key(&self) -> SampleKey {
        SampleKey {
            vdim: self.vdim,
            grid_points: self.grid_points,
            replications: self.replications,
            seed: self.seed,
            sampler: self.sampler,
        }
    }

    /// The sorted Monte Carlo sample, computed once per configuration and process.
    pub fn sample(&self) -> Arc<Vec<f64>> {
        let key = self.key();
        if let Some(hit) = sample_cache().lock().expect("cache lock").get(&key) {
            return Arc::clone(hit);
        }
        let values = Arc::new(self.fresh_sample());
        sample_cache()
            .lock()
            .expect("cache lock")
            .insert(key, Arc::clone(&values));
        values
    }

    /// The sorted Monte Carlo sample, recomputed on every call.
    pub fn fresh_sample(&self) -> Vec<f64> {
        let chunks = self.replications.div_ceil(CHUNK);
        let mut values: Vec<f64> = self
            .exec
            .map(chunks, |c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(self.replications);
                (lo..hi).map(|r| self.draw(r as u64)).collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Empirical quantile: the `⌈p·N⌉`-th order statistic.
    pub fn quantile(&self, level: f64) -> Result<f64> {
        check_level(level)?;
        let sample = self.sample();
        let rank = ((level * sample.len() as f64).ceil() as usize).clamp(1, sample.len());
        Ok(sample[rank - 1])
    }

    pub fn standardized_quantile(&self, level: f64) -> Result<f64> {
        Ok(Statistic::Lambda.standardize(self.vdim, self.quantile(level)?))
    }

    /// Empirical `P(Λ ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let sample = self.sample();
        sample.partition_point(|&v| v <= x) as f64 / sample.len() as f64
    }

    /// Monte Carlo p-value `P(Λ > x)` with its binomial standard error.
    pub fn p_value(&self, x: f64) -> (f64, f64) {
        let p = 1.0 - self.cdf(x);
        let se = (p * (1.0 - p) / self.replications as f64).sqrt();
        (p, se)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(vdim: usize, sampler: LambdaSampler) -> LambdaLaw {
        LambdaLaw::new(vdim)
            .unwrap()
            .with_grid_points(257)
            .unwrap()
            .with_replications(4000)
            .unwrap()
            .with_sampler(sampler)
            .with_seed(11)
    }

    #[test]
    fn deterministic_across_policies() {
        let a = small(3, LambdaSampler::SquaredBessel);
        let seq = a.with_exec(Exec::Sequential);
        let draws_seq: Vec<f64> = (0..50).map(|r| seq.draw(r)).collect();
        let par = a.with_exec(Exec::Parallel);
        let draws_par = Exec::Parallel.map(50, |r| par.draw(r as u64));
        assert_eq!(draws_seq, draws_par);
    }

    #[test]
    fn quantiles_are_monotone_and_bounded_below_by_omega() {
        let law = small(4, LambdaSampler::SquaredBessel);
        let omega = super::super::OmegaLaw::new(4).unwrap();
        let mut prev = 0.0;
        for p in [0.1, 0.5, 0.9, 0.95, 0.99] {
            let q = law.quantile(p).unwrap();
            assert!(q >= prev);
            assert!(q >= omega.quantile(p).unwrap());
            prev = q;
        }
    }

    #[test]
    fn both_samplers_have_the_same_law() {
        // two-sample Kolmogorov–Smirnov at the 0.1% level
        let a = small(3, LambdaSampler::SquaredBessel).sample();
        let b = small(3, LambdaSampler::BridgeCumsum).with_seed(12).sample();
        let mut d: f64 = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        let n = a.len() as f64;
        let crit = 1.95 * (2.0 / n).sqrt();
        assert!(d < crit, "KS distance {d} exceeds {crit}");
    }

    #[test]
    fn mean_of_brownian_bridge_sup_for_one_dimension() {
        // sup|B| has the Kolmogorov law; E sup B² = π²/12 ≈ 0.822. The grid
        // supremum is biased slightly low.
        let law = LambdaLaw::new(1)
            .unwrap()
            .with_grid_points(2049)
            .unwrap()
            .with_replications(20_000)
            .unwrap();
        let sample = law.sample();
        let mean = sample.iter().sum::<f64>() / sample.len() as f64;
        let target = std::f64::consts::PI.powi(2) / 12.0;
        assert!(mean < target + 0.02 && mean > target - 0.04, "mean {mean}");
    }

    #[test]
    fn p_value_and_cdf_are_complementary() {
        let law = small(2, LambdaSampler::SquaredBessel);
        let x = law.quantile(0.9).unwrap();
        let (p, se) = law.p_value(x);
        assert!((p + law.cdf(x) - 1.0).abs() < 1e-15);
        assert!(p <= 0.1 + 1e-12 && se > 0.0);
        assert!(law.quantile(0.0).is_err());
    }
}
