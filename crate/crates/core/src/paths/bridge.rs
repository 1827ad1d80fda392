//! The alpha Brownian bridge in its three constructions.
//!
//! * [`sample_bridge_paper_sde`]: Euler scheme for `dγ = x/(1-t) dt - dB`, `γ(0) = x`.
//!   The drift numerator is the constant starting level, so the process does *not*
//!   return to a fixed point at `t = 1`; its mean grows like `x(1 - ln(1-t))`.
//! * [`sample_bridge_pinned`]: Euler scheme for the state-dependent bridge
//!   `dX = (pin - X)/(1-t) dt + dB`, which is pinned at `pin` when `t -> 1`.
//! * [`sample_doob_bridge`]: the Gaussian representation `G(s) = (1-s) B(s/(1-s))`.
//!
//! The two SDEs are distinct processes and are never substituted for one another.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::brownian::{brownian_with, rng_for};
use crate::paths::{SamplePath, TimeGrid};
use crate::rng::{NormalSource, SeedRecord};

/// Default distance from the `t = 1` singularity at which bridge grids stop.
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Parameters of the constant-numerator alpha bridge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeSpec {
    /// Starting level / hurdle rate, `x >= 0`.
    pub x: f64,
    /// Terminal target.
    pub pin: f64,
}

impl BridgeSpec {
    pub const HORIZON: f64 = 1.0;

    pub fn new(x: f64, pin: f64) -> Result<Self> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::param("x", format!("starting level must be finite and >= 0, got {x}")));
        }
        if !pin.is_finite() {
            return Err(Error::param("pin", "must be finite"));
        }
        Ok(Self { x, pin })
    }
}

/// Which bridge construction produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeKind {
    PaperSde,
    Pinned,
    Doob,
}

impl BridgeKind {
    /// Value reported at exactly `t = 1`. `None` means undefined: the constant-numerator
    /// drift diverges there.
    pub fn terminal_at_one(self, pin: f64) -> Option<f64> {
        match self {
            BridgeKind::PaperSde => None,
            BridgeKind::Pinned => Some(pin),
            BridgeKind::Doob => Some(0.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BridgeKind::PaperSde => "paper_sde",
            BridgeKind::Pinned => "pinned",
            BridgeKind::Doob => "doob",
        }
    }
}

pub fn sample_bridge_paper_sde(spec: &BridgeSpec, grid: &TimeGrid, seed: SeedRecord) -> Result<SamplePath> {
    let mut rng = rng_for(seed);
    let mut path = bridge_paper_sde_with(spec, grid, &mut rng)?;
    path.seed = Some(seed);
    Ok(path)
}

/// Euler–Maruyama for `dγ = x/(1-t) dt - dB` from `γ(0) = x`.
pub fn bridge_paper_sde_with<N: NormalSource>(
    spec: &BridgeSpec,
    grid: &TimeGrid,
    noise: &mut N,
) -> Result<SamplePath> {
    grid.ensure_below_one()?;
    let x = spec.x;
    let mut values = Vec::with_capacity(grid.len());
    let mut g = x;
    values.push(g);
    for (t, dt) in grid.steps() {
        let dw = dt.sqrt() * noise.next_normal();
        g = g + x / (1.0 - t) * dt - dw;
        values.push(g);
    }
    Ok(SamplePath::from_parts(grid, values, None))
}

/// Same scheme, driven by the increments of an existing Brownian path.
pub fn bridge_paper_sde_from_brownian(spec: &BridgeSpec, bm: &SamplePath) -> Result<SamplePath> {
    let grid = bm.grid();
    grid.ensure_below_one()?;
    let x = spec.x;
    let mut values = Vec::with_capacity(grid.len());
    let mut g = x;
    values.push(g);
    for ((t, dt), db) in grid.steps().zip(bm.increments()) {
        g = g + x / (1.0 - t) * dt - db;
        values.push(g);
    }
    Ok(SamplePath::from_parts(grid, values, bm.seed()))
}

/// Mean of the constant-numerator bridge, `x (1 - ln(1 - t))`.
pub fn paper_sde_mean(x: f64, t: f64) -> f64 {
    x * (1.0 - (1.0 - t).ln())
}

pub fn sample_bridge_pinned(start: f64, pin: f64, grid: &TimeGrid, seed: SeedRecord) -> Result<SamplePath> {
    let mut rng = rng_for(seed);
    let mut path = bridge_pinned_with(start, pin, grid, &mut rng)?;
    path.seed = Some(seed);
    Ok(path)
}

/// Euler–Maruyama for `dX = (pin - X)/(1-t) dt + dB` from `X(0) = start`.
pub fn bridge_pinned_with<N: NormalSource>(
    start: f64,
    pin: f64,
    grid: &TimeGrid,
    noise: &mut N,
) -> Result<SamplePath> {
    grid.ensure_below_one()?;
    if !(start.is_finite() && pin.is_finite()) {
        return Err(Error::param("start/pin", "must be finite"));
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut x = start;
    values.push(x);
    for (t, dt) in grid.steps() {
        let dw = dt.sqrt() * noise.next_normal();
        x = x + (pin - x) / (1.0 - t) * dt + dw;
        values.push(x);
    }
    Ok(SamplePath::from_parts(grid, values, None))
}

/// Maps bridge times `s` to Brownian times `s / (1 - s)`.
pub fn doob_image_grid(bridge_grid: &TimeGrid) -> Result<TimeGrid> {
    bridge_grid.ensure_below_one()?;
    TimeGrid::new(bridge_grid.points().iter().map(|&s| s / (1.0 - s)).collect())
}

/// `G(s) = (1 - s) B(s / (1 - s))` for a Brownian path sampled on a Doob image grid.
///
/// The output grid is recovered pointwise through `s = u / (1 + u)`.
pub fn doob_transform_bridge(bm: &SamplePath) -> Result<SamplePath> {
    let mut times = Vec::with_capacity(bm.len());
    let mut values = Vec::with_capacity(bm.len());
    for (&u, &b) in bm.times().iter().zip(bm.values()) {
        let s = u / (1.0 + u);
        if s >= 1.0 {
            return Err(Error::SingularHorizon { t: s });
        }
        times.push(s);
        values.push((1.0 - s) * b);
    }
    let grid = TimeGrid::new(times)?;
    SamplePath::new(grid, values, bm.seed())
}

/// Samples Brownian motion on the Doob image of `bridge_grid` and maps it back.
pub fn sample_doob_bridge(bridge_grid: &TimeGrid, seed: SeedRecord) -> Result<SamplePath> {
    let image = doob_image_grid(bridge_grid)?;
    let mut rng = rng_for(seed);
    let mut bm = brownian_with(&image, &mut rng);
    bm.seed = Some(seed);
    let mut out = doob_transform_bridge(&bm)?;
    // s -> s/(1-s) -> u/(1+u) can move the last ulp; report on the caller's grid.
    out.grid = bridge_grid.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{map_paths, Estimate};
    use crate::paths::sample_brownian;
    use crate::rng::{PathRng, ZeroNoise};

    #[test]
    fn x_zero_is_negated_brownian() {
        let grid = TimeGrid::bridge(200, 1e-3).unwrap();
        let spec = BridgeSpec::new(0.0, 0.0).unwrap();
        let seed = SeedRecord::new(3, 1);
        let bm = sample_brownian(&grid, seed);
        let g = bridge_paper_sde_from_brownian(&spec, &bm).unwrap();
        for (a, b) in g.values().iter().zip(bm.values()) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn paper_sde_matches_hand_written_euler_loop() {
        let spec = BridgeSpec::new(0.5, 0.0).unwrap();
        let grid = TimeGrid::bridge(1000, 1e-4).unwrap();
        let seed = SeedRecord::new(77, 12);
        let got = sample_bridge_paper_sde(&spec, &grid, seed).unwrap();

        let mut rng = PathRng::new(77, 12);
        let mut g = 0.5_f64;
        let mut expected = vec![g];
        let pts = grid.points();
        for i in 0..pts.len() - 1 {
            let t = pts[i];
            let dt = pts[i + 1] - pts[i];
            let z = rng.normal();
            g = g + 0.5 / (1.0 - t) * dt - dt.sqrt() * z;
            expected.push(g);
        }
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(got.values()), bits(&expected));
    }

    #[test]
    fn paper_sde_mean_follows_drift_integral() {
        let spec = BridgeSpec::new(0.5, 0.0).unwrap();
        let grid = TimeGrid::uniform(500, 0.5).unwrap();
        let finals = map_paths(100_000, |i| {
            sample_bridge_paper_sde(&spec, &grid, SeedRecord::new(8, i)).unwrap().last()
        });
        let est = Estimate::from_samples(&finals);
        // left-point Riemann sum of x/(1-s) differs from x ln 2 by O(dt)
        let riemann: f64 = grid.steps().map(|(t, dt)| 0.5 / (1.0 - t) * dt).sum();
        assert!((riemann - 0.5 * 2f64.ln()).abs() < 1e-3);
        let target = paper_sde_mean(0.5, 0.5);
        assert!((target - 0.8466).abs() < 1e-4);
        assert!(est.within(target, 3.0, (0.5 + riemann - target).abs()), "{est:?} vs {target}");
    }

    #[test]
    fn paper_sde_does_not_pin() {
        let spec = BridgeSpec::new(0.5, 0.0).unwrap();
        let grid = TimeGrid::bridge(10_000, 1e-4).unwrap();
        let p = bridge_paper_sde_with(&spec, &grid, &mut ZeroNoise).unwrap();
        // deterministic part: x(1 + ln(1/eps)) ~ 5.1, far from 0
        assert!(p.last() > 4.0);
        assert_eq!(BridgeKind::PaperSde.terminal_at_one(0.0), None);
    }

    #[test]
    fn rejects_grid_reaching_one() {
        let spec = BridgeSpec::new(0.5, 0.0).unwrap();
        let grid = TimeGrid::uniform(10, 1.0).unwrap();
        assert!(matches!(
            sample_bridge_paper_sde(&spec, &grid, SeedRecord::new(0, 0)),
            Err(Error::SingularHorizon { .. })
        ));
        assert!(sample_bridge_pinned(0.0, 1.0, &grid, SeedRecord::new(0, 0)).is_err());
        assert!(doob_image_grid(&grid).is_err());
    }

    #[test]
    fn negative_start_rejected() {
        assert!(BridgeSpec::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn pinned_zero_noise_fixed_point() {
        let grid = TimeGrid::bridge(100, 1e-3).unwrap();
        let p = bridge_pinned_with(0.0, 0.0, &grid, &mut ZeroNoise).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pinned_bridge_reaches_pin() {
        let grid = TimeGrid::bridge(10_000, 1e-4).unwrap();
        let devs = map_paths(1000, |i| {
            let p = sample_bridge_pinned(0.0, 1.0, &grid, SeedRecord::new(19, i)).unwrap();
            (p.last() - 1.0).abs()
        });
        let mean = devs.iter().sum::<f64>() / devs.len() as f64;
        assert!(mean < 0.05, "mean terminal deviation {mean}");
    }

    #[test]
    fn pinned_midpoint_variance() {
        let grid = TimeGrid::bridge(200, 1e-4).unwrap();
        let idx = grid.index_at_or_after(0.5).unwrap();
        let t = grid.points()[idx];
        let sq = map_paths(100_000, |i| {
            let p = sample_bridge_pinned(0.0, 0.0, &grid, SeedRecord::new(21, i)).unwrap();
            p.values()[idx].powi(2)
        });
        let est = Estimate::from_samples(&sq);
        // Euler on the bridge carries an O(dt) variance bias; allow it explicitly.
        assert!(est.within(t * (1.0 - t), 3.0, 5e-3), "{est:?}");
    }

    #[test]
    fn doob_starts_at_zero_and_has_bridge_covariance() {
        let grid = TimeGrid::new(vec![0.0, 0.25, 0.5]).unwrap();
        let pairs = map_paths(100_000, |i| {
            let g = sample_doob_bridge(&grid, SeedRecord::new(31, i)).unwrap();
            assert_eq!(g.first(), 0.0);
            (g.values()[1] * g.values()[2], g.values()[2].powi(2))
        });
        let cross = Estimate::from_samples(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        let sq = Estimate::from_samples(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        assert!(cross.within(0.125, 3.0, 0.0), "{cross:?}");
        assert!(sq.within(0.25, 3.0, 0.0), "{sq:?}");
    }

    #[test]
    fn doob_image_grid_maps_times() {
        let grid = TimeGrid::new(vec![0.0, 0.25, 0.5, 0.75]).unwrap();
        let image = doob_image_grid(&grid).unwrap();
        let expect = [0.0, 1.0 / 3.0, 1.0, 3.0];
        for (a, b) in image.points().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
