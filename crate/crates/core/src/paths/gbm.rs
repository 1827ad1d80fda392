use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::brownian::{brownian_with, rng_for};
use crate::paths::{SamplePath, TimeGrid};
use crate::rng::{NormalSource, SeedRecord};

/// Geometric Brownian motion `dS/S = mu dt + sigma dB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub mu: f64,
    pub sigma: f64,
    pub s0: f64,
}

impl GbmParams {
    pub fn new(mu: f64, sigma: f64, s0: f64) -> Result<Self> {
        let p = Self { mu, sigma, s0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::param("mu_s", "must be finite"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(
                "sigma_s",
                format!("volatility must be > 0 (a crash is only certain when volatility exists), got {}", self.sigma),
            ));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(Error::param("s0", format!("initial price must be > 0, got {}", self.s0)));
        }
        Ok(())
    }

    /// Log drift `mu - sigma^2 / 2`.
    pub fn log_drift(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }

    /// `S(t)` given the driving Brownian value `B(t)`.
    #[inline]
    pub fn price_at(&self, t: f64, b: f64) -> f64 {
        self.s0 * (self.log_drift() * t + self.sigma * b).exp()
    }
}

/// Exact lognormal sampling on `grid`.
pub fn sample_gbm(params: &GbmParams, grid: &TimeGrid, seed: SeedRecord) -> Result<SamplePath> {
    let mut rng = rng_for(seed);
    let mut path = gbm_with(params, grid, &mut rng)?;
    path.seed = Some(seed);
    Ok(path)
}

pub fn gbm_with<N: NormalSource>(params: &GbmParams, grid: &TimeGrid, noise: &mut N) -> Result<SamplePath> {
    params.validate()?;
    let bm = brownian_with(grid, noise);
    Ok(gbm_from_brownian(params, &bm))
}

/// Maps a Brownian path to prices through the closed-form solution.
pub fn gbm_from_brownian(params: &GbmParams, bm: &SamplePath) -> SamplePath {
    let values = bm
        .times()
        .iter()
        .zip(bm.values())
        .map(|(&t, &b)| params.price_at(t, b))
        .collect();
    SamplePath::from_parts(bm.grid(), values, bm.seed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{map_paths, Estimate};
    use crate::rng::ZeroNoise;

    #[test]
    fn rejects_degenerate_params() {
        assert!(GbmParams::new(0.0, 0.0, 100.0).is_err());
        assert!(GbmParams::new(0.0, -0.2, 100.0).is_err());
        assert!(GbmParams::new(0.0, 0.2, 0.0).is_err());
    }

    #[test]
    fn zero_noise_follows_log_drift() {
        let p = GbmParams::new(0.05, 0.2, 100.0).unwrap();
        let g = TimeGrid::uniform(10, 1.0).unwrap();
        let s = gbm_with(&p, &g, &mut ZeroNoise).unwrap();
        assert!((s.last() - 100.0 * 0.03f64.exp()).abs() < 1e-10);
        assert!((s.last() - 103.045).abs() < 1e-3);
    }

    #[test]
    fn lognormal_mean_and_median() {
        let p = GbmParams::new(0.02, 0.2, 100.0).unwrap();
        let g = TimeGrid::uniform(1, 1.0).unwrap();
        let mut finals = map_paths(100_000, |i| sample_gbm(&p, &g, SeedRecord::new(4, i)).unwrap().last());
        assert!(finals.iter().all(|&s| s > 0.0));
        let est = Estimate::from_samples(&finals);
        let mean = 100.0 * 0.02f64.exp();
        assert!(est.within(mean, 3.0, 0.0), "{est:?} vs {mean}");

        finals.sort_by(f64::total_cmp);
        let median = 0.5 * (finals[49_999] + finals[50_000]);
        let expect = 100.0 * p.log_drift().exp();
        assert!((median / expect - 1.0).abs() < 0.01, "{median} vs {expect}");
    }
}
