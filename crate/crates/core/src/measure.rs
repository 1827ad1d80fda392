//! Girsanov change of measure for the bridge drift `θ(s) = x / (1 - s)`.
//!
//! The density is discretized on the driving path's grid with left-point (Itô) sums:
//!
//! ```text
//! ln M(t_k) = Σ_{i<k} θ(t_i) ΔB_i  -  c · Σ_{i<k} θ(t_i)² Δt_i
//! ```
//!
//! with `c = 1/2` for [`DensityVariant::Standard`] (an exact discrete likelihood ratio, so
//! a martingale) and `c = 1` for [`DensityVariant::PaperLiteral`], which reproduces the
//! printed exponent without the one-half. The literal variant has mean
//! `exp(-½ ∫θ²)` rather than one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{map_paths, Estimate, Moments};
use crate::paths::{sample_brownian, SamplePath, TimeGrid};
use crate::rng::SeedRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DensityVariant {
    #[default]
    Standard,
    PaperLiteral,
}

impl DensityVariant {
    fn quadratic_weight(self) -> f64 {
        match self {
            DensityVariant::Standard => 0.5,
            DensityVariant::PaperLiteral => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DensityVariant::Standard => "standard",
            DensityVariant::PaperLiteral => "paper_literal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GirsanovSpec {
    /// Drift numerator in `θ(s) = x / (1 - s)`.
    pub x: f64,
    pub variant: DensityVariant,
}

impl GirsanovSpec {
    pub fn new(x: f64, variant: DensityVariant) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::param("x", "must be finite"));
        }
        Ok(Self { x, variant })
    }

    #[inline]
    pub fn theta(&self, s: f64) -> f64 {
        self.x / (1.0 - s)
    }
}

/// `∫_0^t θ(s)² ds = x² (1/(1-t) - 1)`.
pub fn theta_sq_integral(x: f64, t: f64) -> f64 {
    x * x * (1.0 / (1.0 - t) - 1.0)
}

/// Expected value of the density at `t` in continuous time: 1 for the standard variant,
/// `exp(-½ ∫θ²)` for the literal one.
pub fn density_mean(spec: &GirsanovSpec, t: f64) -> f64 {
    match spec.variant {
        DensityVariant::Standard => 1.0,
        DensityVariant::PaperLiteral => (-0.5 * theta_sq_integral(spec.x, t)).exp(),
    }
}

/// Density path `M(t)` along a Brownian path.
pub fn girsanov_density(bm: &SamplePath, spec: &GirsanovSpec) -> Result<SamplePath> {
    let grid = bm.grid();
    grid.ensure_below_one()?;
    let c = spec.variant.quadratic_weight();
    let mut values = Vec::with_capacity(bm.len());
    let mut log_m = 0.0;
    values.push(1.0);
    for ((t, dt), db) in grid.steps().zip(bm.increments()) {
        let th = spec.theta(t);
        log_m += th * db - c * th * th * dt;
        values.push(log_m.exp());
    }
    SamplePath::new(grid.clone(), values, bm.seed())
}

/// `B̂(t) = B(t) - Σ θ(t_i) Δt_i`, the Brownian motion under Q (left-point drift sum,
/// matching the density discretization).
pub fn q_brownian(bm: &SamplePath, spec: &GirsanovSpec) -> Result<SamplePath> {
    let grid = bm.grid();
    grid.ensure_below_one()?;
    let mut values = Vec::with_capacity(bm.len());
    let mut drift = 0.0;
    values.push(bm.first());
    for ((t, dt), &b) in grid.steps().zip(&bm.values()[1..]) {
        drift += spec.theta(t) * dt;
        values.push(b - drift);
    }
    SamplePath::new(grid.clone(), values, bm.seed())
}

/// What a functional sees for one sampled path.
pub struct QSample<'a> {
    /// Driving P-Brownian motion.
    pub brownian: &'a SamplePath,
    /// `B̂`, Brownian under Q.
    pub q_brownian: &'a SamplePath,
    /// Density path `M`.
    pub density: &'a SamplePath,
}

/// `E_Q[f] = E_P[M(T) f]` by Monte Carlo, with `T` the grid horizon.
pub fn q_expectation<F>(
    functional: F,
    n_paths: usize,
    spec: &GirsanovSpec,
    grid: &TimeGrid,
    master_seed: u64,
) -> Result<Estimate>
where
    F: Fn(&QSample<'_>) -> f64 + Sync + Send,
{
    grid.ensure_below_one()?;
    if n_paths == 0 {
        return Err(Error::InsufficientData("n_paths must be at least 1".into()));
    }
    let weighted = map_paths(n_paths, |i| {
        let bm = sample_brownian(grid, SeedRecord::new(master_seed, i));
        let density = girsanov_density(&bm, spec)?;
        let qb = q_brownian(&bm, spec)?;
        let f = functional(&QSample {
            brownian: &bm,
            q_brownian: &qb,
            density: &density,
        });
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("functional returned {f} on path {i}")));
        }
        Ok(density.last() * f)
    });
    let mut m = Moments::default();
    for w in weighted {
        m.push(w?);
    }
    Ok(m.estimate())
}

/// Monte Carlo mean of `M(t)` at each of `times` (all must be grid points or are rounded
/// up to the next grid point).
pub fn density_means(
    spec: &GirsanovSpec,
    grid: &TimeGrid,
    times: &[f64],
    n_paths: usize,
    master_seed: u64,
) -> Result<Vec<Estimate>> {
    grid.ensure_below_one()?;
    let idx: Vec<usize> = times
        .iter()
        .map(|&t| {
            grid.index_at_or_after(t)
                .ok_or_else(|| Error::param("t", format!("{t} lies beyond the grid horizon")))
        })
        .collect::<Result<_>>()?;
    let rows = map_paths(n_paths, |i| {
        let bm = sample_brownian(grid, SeedRecord::new(master_seed, i));
        let m = girsanov_density(&bm, spec).expect("grid checked above");
        idx.iter().map(|&k| m.values()[k]).collect::<Vec<_>>()
    });
    Ok((0..idx.len())
        .map(|j| {
            let mut m = Moments::default();
            m.extend(rows.iter().map(|r| r[j]));
            m.estimate()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::uniform(500, 0.5).unwrap()
    }

    #[test]
    fn zero_drift_gives_unit_density() {
        let bm = sample_brownian(&grid(), SeedRecord::new(1, 0));
        for variant in [DensityVariant::Standard, DensityVariant::PaperLiteral] {
            let m = girsanov_density(&bm, &GirsanovSpec::new(0.0, variant).unwrap()).unwrap();
            assert!(m.values().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn literal_over_standard_is_deterministic() {
        let g = grid();
        let x = 0.3;
        let std_spec = GirsanovSpec::new(x, DensityVariant::Standard).unwrap();
        let lit_spec = GirsanovSpec::new(x, DensityVariant::PaperLiteral).unwrap();
        let mut half_sum = vec![0.0];
        for (t, dt) in g.steps() {
            let th = x / (1.0 - t);
            let last = *half_sum.last().unwrap();
            half_sum.push(last + 0.5 * th * th * dt);
        }
        for i in 0..20 {
            let bm = sample_brownian(&g, SeedRecord::new(9, i));
            let a = girsanov_density(&bm, &std_spec).unwrap();
            let b = girsanov_density(&bm, &lit_spec).unwrap();
            for k in 0..g.len() {
                let ratio = b.values()[k] / a.values()[k];
                assert!((ratio - (-half_sum[k]).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn standard_density_is_a_martingale() {
        let spec = GirsanovSpec::new(0.3, DensityVariant::Standard).unwrap();
        let est = density_means(&spec, &grid(), &[0.5], 100_000, 17).unwrap();
        assert!(est[0].within(1.0, 3.0, 0.0), "{:?}", est[0]);
    }

    #[test]
    fn literal_density_mean_loses_the_half() {
        let spec = GirsanovSpec::new(0.3, DensityVariant::PaperLiteral).unwrap();
        let target = density_mean(&spec, 0.5);
        assert!((target - (-0.045f64).exp()).abs() < 1e-15);
        let est = density_means(&spec, &grid(), &[0.5], 100_000, 17).unwrap();
        assert!(est[0].within(target, 3.0, 0.0), "{:?} vs {target}", est[0]);
    }

    #[test]
    fn q_expectations() {
        let spec = GirsanovSpec::new(0.3, DensityVariant::Standard).unwrap();
        let g = grid();
        let one = q_expectation(|_| 1.0, 100_000, &spec, &g, 23).unwrap();
        assert!(one.within(1.0, 3.0, 0.0), "{one:?}");
        let mean = q_expectation(|s| s.q_brownian.last(), 100_000, &spec, &g, 23).unwrap();
        assert!(mean.within(0.0, 3.0, 0.0), "{mean:?}");
        let var = q_expectation(|s| s.q_brownian.last().powi(2), 100_000, &spec, &g, 23).unwrap();
        assert!(var.within(0.5, 3.0, 0.0), "{var:?}");
    }

    #[test]
    fn non_finite_functional_is_an_error() {
        let spec = GirsanovSpec::new(0.3, DensityVariant::Standard).unwrap();
        let r = q_expectation(|_| f64::NAN, 4, &spec, &grid(), 1);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn singular_grid_rejected() {
        let bm = sample_brownian(&TimeGrid::uniform(4, 1.0).unwrap(), SeedRecord::new(0, 0));
        let spec = GirsanovSpec::new(0.3, DensityVariant::Standard).unwrap();
        assert!(girsanov_density(&bm, &spec).is_err());
    }
}
