//! Multi-factor trade-strategy alpha and the regression test for a constant alpha.
//!
//! [`hedge_transform`] maps cumulative alpha back to hedge-factor sensitivities through
//! the pseudo-inverse `A = (ZᵀZ)⁻¹Zᵀ`; [`simulate_kfactor_returns`] and
//! [`estimate_alpha_ols`] run the econometrician's experiment of regressing excess
//! returns on factor excess returns and testing the intercept.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::mc::map_paths;
use crate::paths::{GbmParams, SamplePath};
use crate::rng::PathRng;

/// Largest singular-value ratio accepted before a matrix counts as rank deficient.
pub const CONDITION_LIMIT: f64 = 1e12;

pub const TRADING_DT: f64 = 1.0 / 252.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeFactorMatrix {
    z: DMatrix<f64>,
}

impl HedgeFactorMatrix {
    pub fn new(z: DMatrix<f64>) -> Result<Self> {
        if z.nrows() == 0 || z.ncols() == 0 {
            return Err(Error::DimensionMismatch("hedge factor matrix is empty".into()));
        }
        if z.ncols() > z.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "p = {} factors exceeds n = {} rows",
                z.ncols(),
                z.nrows()
            )));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("hedge factor matrix entry".into()));
        }
        Ok(Self { z })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::new(DMatrix::from_element(n, 1, 1.0))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn p(&self) -> usize {
        self.z.ncols()
    }
}

/// Moore–Penrose inverse of a tall matrix through its SVD, refusing condition numbers
/// above [`CONDITION_LIMIT`].
fn pseudo_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    let s = &svd.singular_values;
    let smax = s.max();
    let smin = s.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::RankDeficient { condition });
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let s_inv = DMatrix::from_diagonal(&s.map(|x| 1.0 / x));
    Ok(v_t.transpose() * s_inv * u.transpose())
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    let smin = s.min();
    if smin > 0.0 {
        s.max() / smin
    } else {
        f64::INFINITY
    }
}

/// `A = (ZᵀZ)⁻¹Zᵀ`, a `p × n` matrix with `A Z = I`.
pub fn hedge_transform(z: &HedgeFactorMatrix) -> Result<DMatrix<f64>> {
    pseudo_inverse(&z.z)
}

/// Per-factor increment `dγ_i = (Σ_k a_ik) (x/(1-t) dt - dB)`. All factors share the one
/// background Brownian increment, so the sum collapses to the row sums of `A`.
pub fn gamma_increment(z: &HedgeFactorMatrix, x: f64, t: f64, dt: f64, db: f64) -> Result<Vec<f64>> {
    if !(t < 1.0) {
        return Err(Error::SingularHorizon { t });
    }
    let a = hedge_transform(z)?;
    let scalar = x / (1.0 - t) * dt - db;
    Ok(a.row_iter().map(|row| row.sum() * scalar).collect())
}

/// Applies [`gamma_increment`] along a Brownian path, returning the `p` factor paths.
pub fn gamma_paths(z: &HedgeFactorMatrix, x: f64, bm: &SamplePath) -> Result<Vec<SamplePath>> {
    let grid = bm.grid();
    grid.ensure_below_one()?;
    let a = hedge_transform(z)?;
    let row_sums: Vec<f64> = a.row_iter().map(|r| r.sum()).collect();
    let mut out: Vec<Vec<f64>> = row_sums.iter().map(|_| vec![x]).collect();
    for ((t, dt), db) in grid.steps().zip(bm.increments()) {
        let scalar = x / (1.0 - t) * dt - db;
        for (path, w) in out.iter_mut().zip(&row_sums) {
            let last = *path.last().unwrap();
            path.push(last + w * scalar);
        }
    }
    out.into_iter()
        .map(|v| SamplePath::new(grid.clone(), v, bm.seed()))
        .collect()
}

/// `A(t) = Z γ(t)` on each grid point: `p` paths in, `n` paths out.
pub fn cumulative_alpha(z: &HedgeFactorMatrix, gamma: &[SamplePath]) -> Result<Vec<SamplePath>> {
    if gamma.len() != z.p() {
        return Err(Error::DimensionMismatch(format!(
            "{} gamma paths for {} hedge factors",
            gamma.len(),
            z.p()
        )));
    }
    let grid = gamma[0].grid();
    if gamma.iter().any(|g| g.len() != grid.len() || g.times() != grid.points()) {
        return Err(Error::DimensionMismatch("gamma paths live on different grids".into()));
    }
    let zm = &z.z;
    (0..z.n())
        .map(|i| {
            let values = (0..grid.len())
                .map(|k| (0..z.p()).map(|j| zm[(i, j)] * gamma[j].values()[k]).sum())
                .collect();
            SamplePath::new(grid.clone(), values, gamma[0].seed())
        })
        .collect()
}

/// Factor loading: constant, or one value per simulation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Beta {
    Constant(f64),
    Path(Vec<f64>),
}

impl Beta {
    fn at(&self, step: usize) -> f64 {
        match self {
            Beta::Constant(b) => *b,
            Beta::Path(v) => v[step],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFactorModel {
    pub betas: Vec<Beta>,
    pub factors: Vec<GbmParams>,
    /// Idiosyncratic volatility `δ` per unit time.
    pub delta: f64,
    pub rate: f64,
    pub dt: f64,
}

impl KFactorModel {
    pub fn single(beta: f64, factor: GbmParams, delta: f64, rate: f64) -> Self {
        Self {
            betas: vec![Beta::Constant(beta)],
            factors: vec![factor],
            delta,
            rate,
            dt: TRADING_DT,
        }
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn validate(&self, n_steps: usize) -> Result<()> {
        if self.betas.len() != self.factors.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} betas for {} factors",
                self.betas.len(),
                self.factors.len()
            )));
        }
        for b in &self.betas {
            match b {
                Beta::Constant(v) if !v.is_finite() => return Err(Error::param("betas", "must be finite")),
                Beta::Path(v) if v.len() < n_steps => {
                    return Err(Error::DimensionMismatch(format!(
                        "beta path has {} values for {n_steps} steps",
                        v.len()
                    )))
                }
                _ => {}
            }
        }
        for f in &self.factors {
            f.validate()?;
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::param("delta", format!("must be >= 0, got {}", self.delta)));
        }
        if !self.rate.is_finite() {
            return Err(Error::param("rate", "must be finite"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFactorSample {
    /// Security excess return per step, `dS/S - r dt`.
    pub excess: Vec<f64>,
    /// `factor_excess[k][i]` is `dX_k/X_k - r dt` on step `i`.
    pub factor_excess: Vec<Vec<f64>>,
    pub dt: f64,
}

/// Simple per-step returns with factors sampled exactly as GBM and an additive constant
/// `alpha` per unit time.
pub fn simulate_kfactor_returns(model: &KFactorModel, alpha: f64, n_steps: usize, rng: &mut PathRng) -> Result<KFactorSample> {
    model.validate(n_steps)?;
    let dt = model.dt;
    let sq = dt.sqrt();
    let k = model.k();
    let mut factor_excess = vec![Vec::with_capacity(n_steps); k];
    let mut excess = Vec::with_capacity(n_steps);
    for i in 0..n_steps {
        let mut r = alpha * dt;
        for (j, f) in model.factors.iter().enumerate() {
            let gross = (f.log_drift() * dt + f.sigma * sq * rng.normal()).exp();
            let fx = gross - 1.0 - model.rate * dt;
            factor_excess[j].push(fx);
            r += model.betas[j].at(i) * fx;
        }
        if model.delta > 0.0 {
            r += model.delta * sq * rng.normal();
        }
        excess.push(r);
    }
    Ok(KFactorSample { excess, factor_excess, dt })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    /// Intercept per unit time.
    pub alpha: f64,
    pub alpha_std_error: f64,
    pub t_stat: f64,
    pub betas: Vec<f64>,
    pub beta_std_errors: Vec<f64>,
    pub r_squared: f64,
    pub n_obs: usize,
    pub condition: f64,
}

impl AlphaFit {
    /// Two-sided test of `α = 0` at `level` against Student-t with `n - K - 1` degrees of freedom.
    pub fn rejects(&self, level: f64) -> bool {
        self.t_stat.abs() > critical_t(self.n_obs - self.betas.len() - 1, level)
    }
}

pub fn critical_t(df: usize, level: f64) -> f64 {
    let t = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    t.inverse_cdf(1.0 - 0.5 * level)
}

/// OLS of `returns` on an intercept and the factor excess returns, with
/// homoskedastic standard errors.
pub fn estimate_alpha_ols(returns: &[f64], factor_returns: &[Vec<f64>], dt: f64) -> Result<AlphaFit> {
    let n = returns.len();
    let k = factor_returns.len();
    if n < k + 2 {
        return Err(Error::InsufficientData(format!("{n} observations for {k} factors plus intercept")));
    }
    if let Some(bad) = factor_returns.iter().find(|f| f.len() != n) {
        return Err(Error::DimensionMismatch(format!("factor series of length {} vs {n} returns", bad.len())));
    }
    if !(dt > 0.0) {
        return Err(Error::param("dt", "must be > 0"));
    }
    let x = DMatrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { factor_returns[j - 1][i] });
    let condition = condition_number(&x);
    let pinv = pseudo_inverse(&x)?;
    let y = DVector::from_column_slice(returns);
    let coef = &pinv * &y;
    let resid = &y - &x * &coef;
    let rss = resid.norm_squared();
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let s2 = rss / (n - k - 1) as f64;
    let cov_diag: Vec<f64> = (0..=k).map(|j| pinv.row(j).norm_squared() * s2).collect();
    let se: Vec<f64> = cov_diag.iter().map(|v| v.sqrt()).collect();
    let t_stat = if se[0] > 0.0 { coef[0] / se[0] } else { 0.0 };
    Ok(AlphaFit {
        alpha: coef[0] / dt,
        alpha_std_error: se[0] / dt,
        t_stat,
        betas: coef.iter().skip(1).copied().collect(),
        beta_std_errors: se[1..].to_vec(),
        r_squared,
        n_obs: n,
        condition,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub fit: AlphaFit,
}

/// Repeats simulate-then-estimate `n_trials` times, each trial on its own stream.
pub fn alpha_trials(model: &KFactorModel, alpha: f64, n_steps: usize, n_trials: usize, master_seed: u64) -> Result<Vec<TrialRecord>> {
    model.validate(n_steps)?;
    map_paths(n_trials, |trial| {
        let mut rng = PathRng::new(master_seed, trial);
        let s = simulate_kfactor_returns(model, alpha, n_steps, &mut rng)?;
        let fit = estimate_alpha_ols(&s.excess, &s.factor_excess, s.dt)?;
        Ok(TrialRecord { trial, fit })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::Estimate;
    use crate::paths::{bridge_paper_sde_from_brownian, sample_brownian, BridgeSpec, TimeGrid};
    use crate::rng::SeedRecord;
    use proptest::prelude::*;

    fn market() -> GbmParams {
        GbmParams::new(0.08, 0.2, 1.0).unwrap()
    }

    #[test]
    fn ones_column_averages() {
        let a = hedge_transform(&HedgeFactorMatrix::ones(5).unwrap()).unwrap();
        assert_eq!(a.shape(), (1, 5));
        assert!(a.iter().all(|v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn identity_inverts_to_identity() {
        let a = hedge_transform(&HedgeFactorMatrix::new(DMatrix::identity(4, 4)).unwrap()).unwrap();
        assert!((a - DMatrix::<f64>::identity(4, 4)).abs().max() < 1e-15);
    }

    #[test]
    fn left_inverse_matches_normal_equations() {
        let mut rng = PathRng::new(4, 0);
        let z = DMatrix::from_fn(20, 3, |_, _| rng.normal());
        let a = hedge_transform(&HedgeFactorMatrix::new(z.clone()).unwrap()).unwrap();
        assert!((&a * &z - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-10);
        let ztz = z.transpose() * &z;
        let normal = ztz.lu().solve(&z.transpose()).unwrap();
        assert!((a - normal).abs().max() < 1e-10);
    }

    #[test]
    fn rank_deficient_is_reported() {
        let z = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        match hedge_transform(&HedgeFactorMatrix::new(z).unwrap()) {
            Err(Error::RankDeficient { condition }) => assert!(condition > CONDITION_LIMIT),
            other => panic!("{other:?}"),
        }
        assert!(HedgeFactorMatrix::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn single_factor_reduces_to_bridge() {
        let grid = TimeGrid::bridge(1000, 1e-4).unwrap();
        let bm = sample_brownian(&grid, SeedRecord::new(8, 0));
        let bridge = bridge_paper_sde_from_brownian(&BridgeSpec::new(0.5, 0.0).unwrap(), &bm).unwrap();
        let z = HedgeFactorMatrix::ones(1).unwrap();
        for (((t, dt), db), want) in grid.steps().zip(bm.increments()).zip(bridge.increments()) {
            let got = gamma_increment(&z, 0.5, t, dt, db).unwrap();
            assert!((got[0] - want).abs() < 1e-12);
        }
        let g = gamma_paths(&z, 0.5, &bm).unwrap();
        assert!(g[0].values().iter().zip(bridge.values()).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn gamma_increment_cases() {
        let z = HedgeFactorMatrix::ones(3).unwrap();
        assert_eq!(gamma_increment(&z, 0.0, 0.3, 0.01, 0.0).unwrap(), vec![0.0]);
        let z2 = HedgeFactorMatrix::new(DMatrix::from_element(3, 1, 2.0)).unwrap();
        let a = gamma_increment(&z, 0.4, 0.3, 0.01, 0.02).unwrap()[0];
        let b = gamma_increment(&z2, 0.4, 0.3, 0.01, 0.02).unwrap()[0];
        assert!((b - 0.5 * a).abs() < 1e-15);
        assert!(gamma_increment(&z, 0.4, 1.0, 0.01, 0.0).is_err());
    }

    #[test]
    fn cumulative_alpha_round_trip() {
        let grid = TimeGrid::bridge(200, 1e-4).unwrap();
        let mut rng = PathRng::new(6, 1);
        let z = HedgeFactorMatrix::new(DMatrix::from_fn(6, 2, |_, _| rng.normal())).unwrap();
        let gammas: Vec<SamplePath> = (0..2)
            .map(|j| sample_brownian(&grid, SeedRecord::new(11, j)))
            .collect();
        let big_a = cumulative_alpha(&z, &gammas).unwrap();
        assert_eq!(big_a.len(), 6);
        let a = hedge_transform(&z).unwrap();
        for k in 0..grid.len() {
            let col = DVector::from_iterator(6, big_a.iter().map(|p| p.values()[k]));
            let back = &a * col;
            for j in 0..2 {
                assert!((back[j] - gammas[j].values()[k]).abs() < 1e-10);
            }
        }
        let zeros = vec![SamplePath::from_fn(&grid, |_| 0.0); 2];
        assert!(cumulative_alpha(&z, &zeros).unwrap().iter().all(|p| p.values().iter().all(|&v| v == 0.0)));
        assert!(cumulative_alpha(&z, &gammas[..1]).is_err());
        let ones = HedgeFactorMatrix::ones(3).unwrap();
        let rep = cumulative_alpha(&ones, &gammas[..1]).unwrap();
        assert!(rep.iter().all(|p| p.values() == gammas[0].values()));
    }

    #[test]
    fn degenerate_model_has_zero_excess() {
        let model = KFactorModel {
            betas: vec![],
            factors: vec![],
            delta: 0.0,
            rate: 0.03,
            dt: TRADING_DT,
        };
        let s = simulate_kfactor_returns(&model, 0.0, 100, &mut PathRng::new(1, 0)).unwrap();
        assert!(s.excess.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exact_linear_relation() {
        let model = KFactorModel::single(1.3, market(), 0.0, 0.03);
        let s = simulate_kfactor_returns(&model, 0.0, 500, &mut PathRng::new(2, 0)).unwrap();
        let fit = estimate_alpha_ols(&s.excess, &s.factor_excess, s.dt).unwrap();
        assert!(fit.alpha.abs() * s.dt < 1e-12, "{fit:?}");
        assert!((fit.betas[0] - 1.3).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-10);
    }

    #[test]
    fn collinear_factors_rejected() {
        let f: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let r = estimate_alpha_ols(&f, &[f.clone(), f.iter().map(|v| 2.0 * v).collect()], 1.0);
        assert!(matches!(r, Err(Error::RankDeficient { .. })));
        assert!(estimate_alpha_ols(&f[..2], &[f[..2].to_vec()], 1.0).is_err());
    }

    #[test]
    fn alpha_and_beta_recovery() {
        let model = KFactorModel::single(1.0, market(), 0.1, 0.03);
        let trials = alpha_trials(&model, 0.01, 10_000, 300, 12).unwrap();
        let alphas: Vec<f64> = trials.iter().map(|t| t.fit.alpha).collect();
        let betas: Vec<f64> = trials.iter().map(|t| t.fit.betas[0]).collect();
        let a = Estimate::from_samples(&alphas);
        let b = Estimate::from_samples(&betas);
        assert!(a.within(0.01, 3.0, 0.0), "{a:?}");
        assert!(b.within(1.0, 3.0, 0.0), "{b:?}");
        // reported standard error tracks the spread across trials
        let mean_se = trials.iter().map(|t| t.fit.alpha_std_error).sum::<f64>() / 300.0;
        let spread = a.std_error * (300f64).sqrt();
        assert!((mean_se / spread - 1.0).abs() < 0.15, "{mean_se} vs {spread}");
    }

    proptest! {
        #[test]
        fn left_inverse_identity(seed in 0u64..10_000, n in 3usize..12, p in 1usize..4) {
            prop_assume!(p <= n);
            let mut rng = PathRng::new(seed, 0);
            let z = DMatrix::from_fn(n, p, |_, _| rng.normal());
            let a = hedge_transform(&HedgeFactorMatrix::new(z.clone()).unwrap()).unwrap();
            prop_assert!((&a * &z - DMatrix::<f64>::identity(p, p)).abs().max() < 1e-10);
        }
    }
}
