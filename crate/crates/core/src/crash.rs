//! Market crash as the first down-crossing of a price level by geometric Brownian motion.
//!
//! Two different probabilities live here and must not be confused:
//!
//! * [`marginal_crash_prob`]: `P{S(t) < S_E} = Φ(B_E / √t)`, the probability that the
//!   price is *below* the crash level at time `t`.
//! * [`first_passage_prob`]: `P{τ <= t}` with `τ = inf{t : S(t) <= S_E}`, the actual
//!   distribution function of the crash time (reflection principle).
//!
//! Since `{S(t) < S_E} ⊂ {τ <= t}`, the first is always bounded by the second.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{map_paths, Estimate, Moments};
use crate::normal;
use crate::paths::{GbmParams, TimeGrid};
use crate::rng::{NormalSource, PathRng, SeedRecord};

/// Broadie–Glasserman–Kou constant `-ζ(1/2)/√(2π)`, used here only to *estimate* the
/// bias of discretely monitored hit frequencies, never to correct them.
pub const DISCRETE_MONITORING_BETA: f64 = 0.582_597_157_939_010_6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrashSpec {
    pub gbm: GbmParams,
    /// Crash level `S_E`, strictly below the initial price.
    pub s_crash: f64,
    /// Insurance payout `I` on the event.
    pub payout: f64,
    pub horizon: f64,
}

impl CrashSpec {
    pub fn new(gbm: GbmParams, s_crash: f64, payout: f64, horizon: f64) -> Result<Self> {
        let s = Self {
            gbm,
            s_crash,
            payout,
            horizon,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.gbm.validate()?;
        if !(self.s_crash > 0.0 && self.s_crash < self.gbm.s0) {
            return Err(Error::param(
                "s_crash",
                format!(
                    "crash level must satisfy 0 < S_E < s0 = {}, got {}",
                    self.gbm.s0, self.s_crash
                ),
            ));
        }
        if !(self.payout >= 0.0 && self.payout.is_finite()) {
            return Err(Error::param("payout", format!("must be >= 0, got {}", self.payout)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("horizon", format!("must be > 0, got {}", self.horizon)));
        }
        Ok(())
    }

    /// `ln(S_E / s0)`, negative.
    pub fn log_distance(&self) -> f64 {
        (self.s_crash / self.gbm.s0).ln()
    }

    fn with_level(&self, s_crash: f64) -> Self {
        Self { s_crash, ..*self }
    }
}

fn require_positive_time(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::param("t", format!("must be > 0, got {t}")))
    }
}

/// `B_E = [ln(S_E / s0) - (mu - sigma²/2) t] / sigma`: the Brownian level below which
/// `S(t)` is under the crash price.
pub fn crash_threshold(spec: &CrashSpec, t: f64) -> Result<f64> {
    require_positive_time(t)?;
    Ok((spec.log_distance() - spec.gbm.log_drift() * t) / spec.gbm.sigma)
}

/// `P{B(t) <= B_E} = Φ(B_E / √t)`.
pub fn marginal_crash_prob(spec: &CrashSpec, t: f64) -> Result<f64> {
    let b = crash_threshold(spec, t)?;
    Ok(normal::cdf_with_variance(b, t))
}

/// `P{τ <= t}` for the running minimum of the log-price.
pub fn first_passage_prob(spec: &CrashSpec, t: f64) -> Result<f64> {
    require_positive_time(t)?;
    let a = spec.log_distance();
    let nu = spec.gbm.log_drift();
    let sig = spec.gbm.sigma;
    let sd = sig * t.sqrt();
    let direct = normal::cdf((a - nu * t) / sd);
    let reflected = (2.0 * nu * a / (sig * sig)).exp() * normal::cdf((a + nu * t) / sd);
    Ok((direct + reflected).min(1.0))
}

/// `E[τ] = ln(S_E/s0) / ν` when the log drift `ν` is negative; infinite otherwise.
pub fn expected_crash_time(spec: &CrashSpec) -> Option<f64> {
    let nu = spec.gbm.log_drift();
    (nu < 0.0).then(|| spec.log_distance() / nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingTimeSample {
    /// First grid time with `S <= S_E`; `None` if no crash within the grid horizon.
    pub tau: Option<f64>,
    pub path_index: u64,
    pub hit_value: Option<f64>,
}

/// First grid time at which the exactly sampled price is at or below the crash level.
pub fn sample_stopping_time(spec: &CrashSpec, grid: &TimeGrid, seed: SeedRecord) -> StoppingTimeSample {
    let mut rng = if seed.antithetic {
        PathRng::antithetic(seed.master, seed.path_index)
    } else {
        PathRng::new(seed.master, seed.path_index)
    };
    let mut out = stopping_time_with(spec, grid, &mut rng);
    out.path_index = seed.path_index;
    out
}

pub fn stopping_time_with<N: NormalSource>(spec: &CrashSpec, grid: &TimeGrid, noise: &mut N) -> StoppingTimeSample {
    let level = spec.log_distance();
    let nu = spec.gbm.log_drift();
    let sig = spec.gbm.sigma;
    let mut log_s = 0.0;
    for (t, dt) in grid.steps() {
        log_s += nu * dt + sig * dt.sqrt() * noise.next_normal();
        if log_s <= level {
            return StoppingTimeSample {
                tau: Some(t + dt),
                path_index: 0,
                hit_value: Some(spec.gbm.s0 * log_s.exp()),
            };
        }
    }
    StoppingTimeSample {
        tau: None,
        path_index: 0,
        hit_value: None,
    }
}

/// Monte Carlo frequency of `{S(t) < S_E}`, sampling `S(t)` exactly.
pub fn mc_marginal_frequency(spec: &CrashSpec, t: f64, n_paths: usize, master_seed: u64) -> Result<Estimate> {
    require_positive_time(t)?;
    let level = spec.log_distance();
    let nu = spec.gbm.log_drift();
    let sd = spec.gbm.sigma * t.sqrt();
    let hits = map_paths(n_paths, |i| {
        let z = PathRng::new(master_seed, i).normal();
        if nu * t + sd * z < level {
            1.0
        } else {
            0.0
        }
    });
    Ok(Estimate::from_samples(&hits))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstPassageMc {
    /// Fraction of paths with a grid time at or below the crash level.
    pub hit_frequency: Estimate,
    /// `E[min(τ, T)]` over the same paths.
    pub mean_capped_tau: Estimate,
    /// Estimated effect of discrete monitoring on `hit_frequency`:
    /// `P{τ <= T}` at the barrier shifted by `exp(-β σ √Δt)` minus `P{τ <= T}`.
    /// Negative, because a discrete grid misses crossings between points.
    pub monitoring_bias: f64,
    pub n_steps: usize,
}

/// Discretely monitored first-passage frequency by the spec horizon on `n_steps` equal steps.
pub fn mc_first_passage(spec: &CrashSpec, n_steps: usize, n_paths: usize, master_seed: u64) -> Result<FirstPassageMc> {
    spec.validate()?;
    let grid = TimeGrid::uniform(n_steps, spec.horizon)?;
    let samples = map_paths(n_paths, |i| sample_stopping_time(spec, &grid, SeedRecord::new(master_seed, i)));
    let mut hits = Moments::default();
    let mut taus = Moments::default();
    for s in &samples {
        hits.push(if s.tau.is_some() { 1.0 } else { 0.0 });
        taus.push(s.tau.unwrap_or(spec.horizon));
    }
    Ok(FirstPassageMc {
        hit_frequency: hits.estimate(),
        mean_capped_tau: taus.estimate(),
        monitoring_bias: monitoring_bias(spec, n_steps)?,
        n_steps,
    })
}

/// Estimated discrete-monitoring bias of the hit frequency on `n_steps` equal steps.
pub fn monitoring_bias(spec: &CrashSpec, n_steps: usize) -> Result<f64> {
    let dt = spec.horizon / n_steps as f64;
    let shifted = spec.with_level(spec.s_crash * (-DISCRETE_MONITORING_BETA * spec.gbm.sigma * dt.sqrt()).exp());
    Ok(first_passage_prob(&shifted, spec.horizon)? - first_passage_prob(spec, spec.horizon)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{sample_brownian, GbmParams};
    use crate::rng::ZeroNoise;
    use proptest::prelude::*;

    fn worked() -> CrashSpec {
        CrashSpec::new(GbmParams::new(0.05, 0.2, 100.0).unwrap(), 80.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn threshold_worked_example() {
        let b = crash_threshold(&worked(), 1.0).unwrap();
        let expect = ((0.8f64).ln() - 0.03) / 0.2;
        assert!((b - expect).abs() < 1e-14);
        assert!((b + 1.2657).abs() < 1e-4);
    }

    #[test]
    fn threshold_vanishes_on_drift_path() {
        let gbm = GbmParams::new(0.05, 0.2, 100.0).unwrap();
        let t = 2.0;
        let s_e = 100.0 * (gbm.log_drift() * t).exp();
        // log drift is positive here, so S_E sits above s0; skip the crash invariant
        let spec = CrashSpec {
            gbm,
            s_crash: s_e,
            payout: 0.0,
            horizon: t,
        };
        assert!(crash_threshold(&spec, t).unwrap().abs() < 1e-14);
        assert_eq!(marginal_crash_prob(&spec, t).unwrap(), 0.5);
    }

    #[test]
    fn doubling_sigma_halves_threshold_when_log_drift_is_zero() {
        let make = |sig: f64| CrashSpec::new(GbmParams::new(0.5 * sig * sig, sig, 100.0).unwrap(), 80.0, 0.0, 1.0).unwrap();
        let a = crash_threshold(&make(0.2), 1.0).unwrap();
        let b = crash_threshold(&make(0.4), 1.0).unwrap();
        assert!((b - 0.5 * a).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_specs() {
        let gbm = GbmParams::new(0.05, 0.2, 100.0).unwrap();
        assert!(CrashSpec::new(gbm, 100.0, 1.0, 1.0).is_err());
        assert!(CrashSpec::new(gbm, 120.0, 1.0, 1.0).is_err());
        assert!(CrashSpec::new(gbm, 80.0, -1.0, 1.0).is_err());
        assert!(crash_threshold(&worked(), 0.0).is_err());
        assert!(first_passage_prob(&worked(), -1.0).is_err());
    }

    #[test]
    fn marginal_worked_example_matches_mc() {
        let p = marginal_crash_prob(&worked(), 1.0).unwrap();
        assert!((p - 0.1028).abs() < 5e-4, "{p}");
        let mc = mc_marginal_frequency(&worked(), 1.0, 100_000, 99).unwrap();
        assert!(mc.within(p, 3.0, 0.0), "{mc:?} vs {p}");
    }

    #[test]
    fn crash_becomes_certain_with_negative_log_drift() {
        let spec = CrashSpec::new(GbmParams::new(0.0, 0.2, 100.0).unwrap(), 80.0, 1.0, 1000.0).unwrap();
        assert!(marginal_crash_prob(&spec, 1000.0).unwrap() > 0.999);
        assert!(first_passage_prob(&spec, 1000.0).unwrap() > 0.999);
    }

    #[test]
    fn positive_log_drift_leaves_survival_mass() {
        let spec = CrashSpec::new(GbmParams::new(0.1, 0.2, 100.0).unwrap(), 80.0, 1.0, 1000.0).unwrap();
        let p = first_passage_prob(&spec, 1000.0).unwrap();
        let limit = (spec.gbm.s0 / spec.s_crash).powf(-2.0 * spec.gbm.log_drift() / 0.04);
        assert!((p - limit).abs() < 1e-6, "{p} vs {limit}");
        assert!(p < 0.9);
    }

    #[test]
    fn driftless_log_price_hits_eventually() {
        let spec = CrashSpec::new(GbmParams::new(0.02, 0.2, 100.0).unwrap(), 80.0, 1.0, 1.0).unwrap();
        assert!(spec.gbm.log_drift().abs() < 1e-15);
        assert!(first_passage_prob(&spec, 1e12).unwrap() > 0.9999);
    }

    #[test]
    fn deterministic_crossing_time() {
        let spec = CrashSpec::new(GbmParams::new(0.0, 0.2, 100.0).unwrap(), 80.0, 1.0, 30.0).unwrap();
        let grid = TimeGrid::uniform(3000, 30.0).unwrap();
        let s = stopping_time_with(&spec, &grid, &mut ZeroNoise);
        let analytic = spec.log_distance() / spec.gbm.log_drift();
        let tau = s.tau.unwrap();
        assert!(tau >= analytic && tau - analytic <= 0.01 + 1e-12, "{tau} vs {analytic}");
        assert!(s.hit_value.unwrap() <= spec.s_crash);
        assert_eq!(expected_crash_time(&spec), Some(analytic));
    }

    #[test]
    fn finer_monitoring_never_detects_fewer_crashes() {
        // coarse grids are sub-grids of the fine one, so detection is nested path by path
        let spec = worked();
        let fine = TimeGrid::uniform(4096, 1.0).unwrap();
        let level = spec.s_crash;
        let mut counts = [0usize; 4];
        for i in 0..2000 {
            let bm = sample_brownian(&fine, SeedRecord::new(13, i));
            let prices: Vec<f64> = bm
                .times()
                .iter()
                .zip(bm.values())
                .map(|(&t, &b)| spec.gbm.price_at(t, b))
                .collect();
            for (k, stride) in [64usize, 16, 4, 1].iter().enumerate() {
                if prices.iter().step_by(*stride).any(|&s| s <= level) {
                    counts[k] += 1;
                }
            }
        }
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
        assert!(counts[3] > counts[0]);
    }

    proptest! {
        #[test]
        fn passage_dominates_marginal(mu in -0.2f64..0.2, sigma in 0.05f64..0.8, frac in 0.3f64..0.99, t in 0.01f64..20.0) {
            let spec = CrashSpec::new(GbmParams::new(mu, sigma, 100.0).unwrap(), 100.0 * frac, 1.0, t).unwrap();
            let m = marginal_crash_prob(&spec, t).unwrap();
            let f = first_passage_prob(&spec, t).unwrap();
            prop_assert!((0.0..=1.0).contains(&m));
            prop_assert!(f + 1e-15 >= m);
        }

        #[test]
        fn passage_is_nondecreasing_in_time(mu in -0.2f64..0.2, sigma in 0.05f64..0.8, t in 0.01f64..20.0) {
            let spec = CrashSpec::new(GbmParams::new(mu, sigma, 100.0).unwrap(), 85.0, 1.0, t).unwrap();
            let a = first_passage_prob(&spec, t).unwrap();
            let b = first_passage_prob(&spec, t * 1.1).unwrap();
            prop_assert!(b + 1e-15 >= a);
        }
    }
}
