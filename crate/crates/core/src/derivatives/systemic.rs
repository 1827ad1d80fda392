//! Perpetual event swap, market-systemic alpha, and the scenario sign patterns.
//!
//! Discretization: on step `[t_i, t_{i+1})` the residual alpha is
//!
//! ```text
//! α_i Δt = ΔS/S - (r + β₁(t_i) c) Δt - σ ΔB - χ_E(t_i) β₁(t_i) (X₁(t_i) - I)/X₁(t_i) Δt
//! ```
//!
//! with simple returns `ΔS/S` and the jump term treated as a rate over the step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{SamplePath, TimeGrid};

/// Tolerance on `r + β₁ c` for the zero-alpha classification.
pub const ALPHA_ZERO_TOL: f64 = 1e-12;

/// Market state along a grid: rate, spread, trade-strategy factor, event indicator,
/// event payout, and the factor price path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketScenario {
    pub r: f64,
    pub c: f64,
    pub payout: f64,
    pub grid: TimeGrid,
    pub beta1: Vec<f64>,
    pub event: Vec<bool>,
    pub factor: Vec<f64>,
}

impl MarketScenario {
    pub fn new(
        r: f64,
        c: f64,
        payout: f64,
        grid: TimeGrid,
        beta1: Vec<f64>,
        event: Vec<bool>,
        factor: Vec<f64>,
    ) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::param("r", format!("risk-free rate must be > 0, got {r}")));
        }
        if !c.is_finite() {
            return Err(Error::param("c", "must be finite"));
        }
        if !(payout >= 0.0 && payout.is_finite()) {
            return Err(Error::param("payout", format!("must be >= 0, got {payout}")));
        }
        let n = grid.len();
        if beta1.len() != n || event.len() != n || factor.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "grid has {n} points; beta1 {}, event {}, factor {}",
                beta1.len(),
                event.len(),
                factor.len()
            )));
        }
        Ok(Self {
            r,
            c,
            payout,
            grid,
            beta1,
            event,
            factor,
        })
    }

    /// Constant `β₁`, no events, flat factor at `x1`.
    pub fn flat(r: f64, c: f64, payout: f64, grid: TimeGrid, beta1: f64, x1: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(r, c, payout, grid, vec![beta1; n], vec![false; n], vec![x1; n])
    }

    fn factor_at(&self, i: usize) -> Result<f64> {
        let x = self.factor[i];
        if x > 0.0 {
            Ok(x)
        } else {
            Err(Error::param("factor", format!("X_1 must be > 0, got {x} at index {i}")))
        }
    }

    /// `χ_E β₁ (X₁ - I)/X₁` at grid index `i`.
    pub fn jump_rate(&self, i: usize) -> Result<f64> {
        if !self.event[i] {
            return Ok(0.0);
        }
        let x = self.factor_at(i)?;
        Ok(self.beta1[i] * (-self.payout + x) / x)
    }
}

/// Return on the event-swap factor: `(X_K - I)/X_K` on an event step, `c + r` otherwise.
pub fn event_swap_return(scenario: &MarketScenario, t_index: usize) -> Result<f64> {
    if t_index >= scenario.grid.len() {
        return Err(Error::param("t_index", format!("{t_index} is outside the grid")));
    }
    let x = scenario.factor_at(t_index)?;
    Ok(if scenario.event[t_index] {
        (-scenario.payout + x) / x
    } else {
        scenario.c + scenario.r
    })
}

/// Per-step residual alpha `α_i Δt`.
pub fn systemic_alpha_increments(
    scenario: &MarketScenario,
    price_path: &SamplePath,
    noise_path: &SamplePath,
    sigma: f64,
) -> Result<Vec<f64>> {
    let grid = &scenario.grid;
    if !grid.shares_points_with(price_path.grid()) || !grid.shares_points_with(noise_path.grid()) {
        return Err(Error::DimensionMismatch(
            "price, noise and scenario must share one grid".into(),
        ));
    }
    let s = price_path.values();
    let b = noise_path.values();
    grid.steps()
        .enumerate()
        .map(|(i, (_, dt))| {
            if s[i] <= 0.0 {
                return Err(Error::param("price_path", format!("price must be > 0, got {}", s[i])));
            }
            let ret = (s[i + 1] - s[i]) / s[i];
            let carry = (scenario.r + scenario.beta1[i] * scenario.c) * dt;
            let jump = scenario.jump_rate(i)? * dt;
            Ok(ret - carry - sigma * (b[i + 1] - b[i]) - jump)
        })
        .collect()
}

/// Cumulative residual alpha `∫ α dt`, starting at 0.
pub fn systemic_alpha_residual(
    scenario: &MarketScenario,
    price_path: &SamplePath,
    noise_path: &SamplePath,
    sigma: f64,
) -> Result<SamplePath> {
    let inc = systemic_alpha_increments(scenario, price_path, noise_path, sigma)?;
    let mut values = Vec::with_capacity(inc.len() + 1);
    let mut acc = 0.0;
    values.push(acc);
    for d in inc {
        acc += d;
        values.push(acc);
    }
    SamplePath::new(scenario.grid.clone(), values, noise_path.seed())
}

/// `β₁(t)` making the carry equal the bridge drift: `x/(1-t) = -(r + β₁ c)`.
pub fn identifying_beta(x: f64, r: f64, c: f64, t: f64) -> Result<f64> {
    if c == 0.0 {
        return Err(Error::param("c", "spread must be non-zero to solve for beta1"));
    }
    if t >= 1.0 {
        return Err(Error::SingularHorizon { t });
    }
    Ok(-(r + x / (1.0 - t)) / c)
}

/// `β₁` that zeroes alpha: `r + β₁ c = 0`.
pub fn alpha_zero_beta(r: f64, c: f64) -> Result<f64> {
    identifying_beta(0.0, r, c, 0.0)
}

/// Price path that satisfies the flat-until-event restriction step by step:
/// `S_{i+1} = S_i (1 + χ_E β₁ (X₁ - I)/X₁ Δt)`.
pub fn restricted_price_path(scenario: &MarketScenario, s0: f64) -> Result<SamplePath> {
    let mut values = Vec::with_capacity(scenario.grid.len());
    let mut s = s0;
    values.push(s);
    for (i, (_, dt)) in scenario.grid.steps().enumerate() {
        s *= 1.0 + scenario.jump_rate(i)? * dt;
        values.push(s);
    }
    SamplePath::new(scenario.grid.clone(), values, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Trapezoid,
    LeftRiemann,
}

/// Integral over `[a, b]` of grid values interpolated linearly (trapezoid) or held
/// constant from the left (Riemann).
fn integrate_window(grid: &TimeGrid, f: &[f64], a: f64, b: f64, rule: Quadrature) -> f64 {
    let pts = grid.points();
    let mut total = 0.0;
    for i in 0..pts.len() - 1 {
        let (t0, t1) = (pts[i], pts[i + 1]);
        let lo = t0.max(a);
        let hi = t1.min(b);
        if hi <= lo {
            continue;
        }
        total += match rule {
            Quadrature::LeftRiemann => f[i] * (hi - lo),
            Quadrature::Trapezoid => {
                let at = |t: f64| f[i] + (f[i + 1] - f[i]) * (t - t0) / (t1 - t0);
                0.5 * (at(lo) + at(hi)) * (hi - lo)
            }
        };
    }
    total
}

/// Price multiplier `S(t)/S(t-Δ) = exp(∫_{t-Δ}^t χ_E β₁ (X₁ - I)/X₁ du)`.
pub fn asset_jump_price(scenario: &MarketScenario, t: f64, delta: f64, rule: Quadrature) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("window must be > 0, got {delta}")));
    }
    let start = t - delta;
    let horizon = scenario.grid.horizon();
    if start < -1e-12 || t > horizon + 1e-12 {
        return Err(Error::param(
            "t",
            format!("window [{start}, {t}] must lie inside [0, {horizon}]"),
        ));
    }
    let pts = scenario.grid.points();
    // points whose segments overlap the window; X₁ is only checked there
    let first = pts.partition_point(|&u| u <= start).saturating_sub(1);
    let last = pts.partition_point(|&u| u < t).min(pts.len() - 1);
    let mut integrand = vec![0.0; pts.len()];
    for (i, f) in integrand.iter_mut().enumerate().take(last + 1).skip(first) {
        *f = scenario.jump_rate(i)?;
    }
    let total = integrate_window(&scenario.grid, &integrand, start.max(0.0), t.min(horizon), rule);
    if !total.is_finite() {
        return Err(Error::NonFinite("jump integrand".into()));
    }
    Ok(total.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPattern {
    /// `β₁ > 0` and `c < 0`: long the factor, receiving the premium.
    Scenario1,
    /// `β₁ < 0` and `c > 0`: short the factor, paying the premium.
    Scenario2,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioClass {
    pub signs: SignPattern,
    /// `|r + β₁ c| <= 1e-12`.
    pub alpha_zero: bool,
}

pub fn scenario_classify(r: f64, c: f64, beta1: f64) -> ScenarioClass {
    let signs = if beta1 > 0.0 && c < 0.0 {
        SignPattern::Scenario1
    } else if beta1 < 0.0 && c > 0.0 {
        SignPattern::Scenario2
    } else {
        SignPattern::Neither
    };
    ScenarioClass {
        signs,
        alpha_zero: (r + beta1 * c).abs() <= ALPHA_ZERO_TOL,
    }
}
