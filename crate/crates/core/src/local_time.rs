//! Local time of an alpha path at a level, and the measure of its zero set.
//!
//! Normalization: the Tanaka identity is written for twice the local time,
//!
//! ```text
//! 2 L(t, x) = |W(t) - x| - |W(0) - x| - ∫_0^t sgn(W(s) - x) dW(s)
//! ```
//!
//! and everything here returns `L`, i.e. half of the usual semimartingale local time
//! `L^x = lim (1/2ε) Leb{s <= t : |W(s) - x| < ε}`. For standard Brownian motion
//! `E[2 L(1, 0)] = E|B(1)| = sqrt(2/π)`.
//!
//! The start point `W(0)` plays the role of the free constant in the identity, so
//! `L(0, x) = 0`. `sgn(0)` is taken as 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::Moments;
use crate::paths::SamplePath;

/// Default occupation bandwidth.
pub const DEFAULT_BANDWIDTH: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeEstimate {
    pub level: f64,
    pub time: f64,
    /// `L(t, x)` from the discretized Tanaka identity.
    pub tanaka: f64,
    /// `L(t, x)` from the occupation-time estimator, same normalization.
    pub occupation: f64,
    pub epsilon: f64,
    pub n_steps: usize,
}

#[inline]
fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn require_steps(path: &SamplePath) -> Result<()> {
    if path.len() < 2 {
        Err(Error::InsufficientData(format!(
            "local time needs at least 2 points, path has {}",
            path.len()
        )))
    } else {
        Ok(())
    }
}

/// `L(t_k, x)` at every grid point, via left-point Itô sums.
pub fn tanaka_local_time_path(path: &SamplePath, x: f64) -> Result<SamplePath> {
    require_steps(path)?;
    let v = path.values();
    let start = (v[0] - x).abs();
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(v.len());
    out.push(0.0);
    for w in v.windows(2) {
        integral += sgn(w[0] - x) * (w[1] - w[0]);
        out.push(0.5 * ((w[1] - x).abs() - start - integral));
    }
    SamplePath::new(path.grid().clone(), out, path.seed())
}

/// `L(T, x)` at the path's horizon.
pub fn tanaka_local_time(path: &SamplePath, x: f64) -> Result<f64> {
    require_steps(path)?;
    let v = path.values();
    let integral: f64 = v.windows(2).map(|w| sgn(w[0] - x) * (w[1] - w[0])).sum();
    Ok(0.5 * ((path.last() - x).abs() - (v[0] - x).abs() - integral))
}

/// Time the linearly interpolated path spends with `|W - x| <= half_width`.
///
/// Exact for piecewise-linear paths, so a deterministic ramp is measured without error.
pub fn band_time(path: &SamplePath, x: f64, half_width: f64) -> f64 {
    let (lo, hi) = (x - half_width, x + half_width);
    path.times()
        .windows(2)
        .zip(path.values().windows(2))
        .map(|(t, w)| {
            let dt = t[1] - t[0];
            let (a, b) = if w[0] <= w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            if b == a {
                return if a >= lo && a <= hi { dt } else { 0.0 };
            }
            let overlap = (b.min(hi) - a.max(lo)).max(0.0);
            dt * overlap / (b - a)
        })
        .sum()
}

/// Raw occupation density `(1/2ε) Leb{s <= T : |W(s) - x| < ε}`, the semimartingale
/// normalization (equal to `2 L`).
pub fn occupation_density(path: &SamplePath, x: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("bandwidth must be > 0, got {epsilon}")));
    }
    Ok(band_time(path, x, epsilon) / (2.0 * epsilon))
}

/// Occupation-time estimate of `L(T, x)` (half the raw density).
pub fn occupation_local_time(path: &SamplePath, x: f64, epsilon: f64) -> Result<f64> {
    Ok(0.5 * occupation_density(path, x, epsilon)?)
}

/// Both estimators at the path horizon.
pub fn local_time_estimate(path: &SamplePath, x: f64, epsilon: f64) -> Result<LocalTimeEstimate> {
    Ok(LocalTimeEstimate {
        level: x,
        time: path.grid().horizon(),
        tanaka: tanaka_local_time(path, x)?,
        occupation: occupation_local_time(path, x, epsilon)?,
        epsilon,
        n_steps: path.len() - 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetReport {
    pub level: f64,
    pub tolerance: f64,
    /// `Leb{t : |W(t) - x| <= tol}`, in time units.
    pub lebesgue_measure: f64,
    /// Grid-average of `(W(t) - x)²`.
    pub path_variance: f64,
}

pub fn zero_set_measure(path: &SamplePath, x: f64, tol: f64) -> Result<ZeroSetReport> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("tolerance must be > 0, got {tol}")));
    }
    let sq = path.values().iter().map(|v| (v - x).powi(2)).sum::<f64>() / path.len() as f64;
    Ok(ZeroSetReport {
        level: x,
        tolerance: tol,
        lebesgue_measure: band_time(path, x, tol),
        path_variance: sq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaNonzeroReport {
    /// Pooled second moment of alpha over paths and grid points.
    pub variance: f64,
    /// Standard error of `variance`, treating paths as independent.
    pub variance_std_error: f64,
    /// Mean fraction of the horizon spent within `tol` of zero.
    pub fraction_time_at_zero: f64,
    pub tolerance: f64,
    pub n_paths: usize,
    /// Every path is identically zero.
    pub degenerate: bool,
}

/// Evidence that alpha is not zero: its second moment is bounded away from 0 while the
/// time it spends at 0 vanishes with the tolerance.
pub fn alpha_nonzero_test<'a, I>(paths: I, tol: f64) -> Result<AlphaNonzeroReport>
where
    I: IntoIterator<Item = &'a SamplePath>,
{
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("tolerance must be > 0, got {tol}")));
    }
    let mut second = Moments::default();
    let mut frac = Moments::default();
    let mut degenerate = true;
    for p in paths {
        let report = zero_set_measure(p, 0.0, tol)?;
        let horizon = p.grid().horizon();
        second.push(report.path_variance);
        frac.push(if horizon > 0.0 { report.lebesgue_measure / horizon } else { 1.0 });
        degenerate &= p.values().iter().all(|&v| v == 0.0);
    }
    if second.count() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 paths, got {}",
            second.count()
        )));
    }
    let est = second.estimate();
    Ok(AlphaNonzeroReport {
        variance: est.mean,
        variance_std_error: est.std_error,
        fraction_time_at_zero: frac.mean(),
        tolerance: tol,
        n_paths: second.count(),
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{map_paths, Estimate};
    use crate::paths::{sample_brownian, TimeGrid};
    use crate::rng::SeedRecord;

    #[test]
    fn constant_path_has_no_local_time() {
        let g = TimeGrid::uniform(100, 1.0).unwrap();
        let p = SamplePath::from_fn(&g, |_| 0.7);
        assert_eq!(tanaka_local_time(&p, 0.0).unwrap(), 0.0);
        assert_eq!(occupation_local_time(&p, 0.0, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn monotone_path_above_level() {
        let g = TimeGrid::uniform(1000, 1.0).unwrap();
        let p = SamplePath::from_fn(&g, |t| 1.0 + t * t);
        assert!(tanaka_local_time(&p, 0.0).unwrap().abs() < 1e-3);
    }

    #[test]
    fn ramp_occupation() {
        let g = TimeGrid::uniform(1000, 1.0).unwrap();
        let p = SamplePath::from_fn(&g, |t| t);
        let raw = occupation_density(&p, 0.5, 0.1).unwrap();
        assert!((raw - 1.0).abs() < 1e-12, "{raw}");
        assert!((occupation_local_time(&p, 0.5, 0.1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let one = SamplePath::from_fn(&TimeGrid::origin(), |_| 0.0);
        assert!(tanaka_local_time(&one, 0.0).is_err());
        let g = TimeGrid::uniform(4, 1.0).unwrap();
        let p = SamplePath::from_fn(&g, |t| t);
        assert!(occupation_local_time(&p, 0.0, 0.0).is_err());
        assert!(zero_set_measure(&p, 0.0, -1.0).is_err());
        assert!(alpha_nonzero_test(std::iter::empty(), 0.1).is_err());
    }

    #[test]
    fn wide_tolerance_covers_horizon() {
        let g = TimeGrid::uniform(500, 2.0).unwrap();
        let p = sample_brownian(&g, SeedRecord::new(3, 3));
        let r = zero_set_measure(&p, 0.0, 1e6).unwrap();
        assert!((r.lebesgue_measure - 2.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_paths_are_flagged() {
        let g = TimeGrid::uniform(10, 1.0).unwrap();
        let paths = vec![SamplePath::from_fn(&g, |_| 0.0); 3];
        let r = alpha_nonzero_test(&paths, 1e-3).unwrap();
        assert_eq!(r.variance, 0.0);
        assert_eq!(r.fraction_time_at_zero, 1.0);
        assert!(r.degenerate);
    }

    #[test]
    fn tanaka_path_starts_at_zero_and_grows() {
        let g = TimeGrid::uniform(10_000, 1.0).unwrap();
        let n = g.n_steps() as f64;
        let tol = 5.0 * n.powf(-0.25);
        for i in 0..50 {
            let p = sample_brownian(&g, SeedRecord::new(41, i));
            let l = tanaka_local_time_path(&p, 0.0).unwrap();
            assert_eq!(l.first(), 0.0);
            let mut running_max = f64::NEG_INFINITY;
            for &v in l.values() {
                assert!(v >= -tol);
                running_max = running_max.max(v);
                assert!(v >= running_max - tol);
            }
            let end = tanaka_local_time(&p, 0.0).unwrap();
            assert!((end - l.last()).abs() < 1e-9);
        }
    }

    #[test]
    fn half_tolerance_halves_measure() {
        let g = TimeGrid::uniform(20_000, 1.0).unwrap();
        let pairs = map_paths(1000, |i| {
            let p = sample_brownian(&g, SeedRecord::new(5, i));
            let a = zero_set_measure(&p, 0.0, 1e-2).unwrap().lebesgue_measure;
            let b = zero_set_measure(&p, 0.0, 5e-3).unwrap().lebesgue_measure;
            assert!(b <= a);
            (a, b)
        });
        let a = pairs.iter().map(|p| p.0).sum::<f64>();
        let b = pairs.iter().map(|p| p.1).sum::<f64>();
        let ratio = a / b;
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn expected_local_time_of_brownian_motion() {
        // smaller than the acceptance run: 2000 paths x 20_000 steps
        let g = TimeGrid::uniform(20_000, 1.0).unwrap();
        let two_l = map_paths(2000, |i| {
            2.0 * tanaka_local_time(&sample_brownian(&g, SeedRecord::new(6, i)), 0.0).unwrap()
        });
        let est = Estimate::from_samples(&two_l);
        let target = (2.0 / std::f64::consts::PI).sqrt();
        assert!(est.within(target, 3.0, 0.0), "{est:?}");
    }
}
