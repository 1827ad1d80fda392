//! Down barrier puts on a dividend-paying stock.
//!
//! Closed forms assume continuous barrier monitoring and European exercise. The
//! knock-in put uses the Hull-style expression; the knock-out put is priced
//! independently with the Rubinstein–Reiner decomposition, so in-out parity against the
//! Black–Scholes–Merton put is a real cross-check rather than a definition.

use serde::{Deserialize, Serialize};

use crate::crash::DISCRETE_MONITORING_BETA;
use crate::error::{Error, Result};
use crate::mc::{map_paths, Estimate, Moments};
use crate::normal::cdf;
use crate::paths::GbmParams;
use crate::rng::PathRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PutSide {
    DownInPut,
    DownOutPut,
    VanillaPut,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierOptionSpec {
    /// Spot `s0` and volatility; the drift is ignored for pricing (risk-neutral drift `r - q`).
    pub gbm: GbmParams,
    pub strike: f64,
    /// Barrier `S_E`, below both spot and strike.
    pub barrier: f64,
    pub dividend_yield: f64,
    pub rate: f64,
    pub maturity: f64,
    pub side: PutSide,
}

impl BarrierOptionSpec {
    pub fn validate(&self) -> Result<()> {
        self.gbm.validate()?;
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::param("strike", format!("must be > 0, got {}", self.strike)));
        }
        if !(self.barrier > 0.0) {
            return Err(Error::param("barrier", format!("must be > 0, got {}", self.barrier)));
        }
        if self.barrier >= self.gbm.s0 {
            return Err(Error::param(
                "barrier",
                format!("barrier {} is at or above spot {}: already knocked in", self.barrier, self.gbm.s0),
            ));
        }
        if self.barrier >= self.strike {
            return Err(Error::param(
                "barrier",
                format!("barrier {} must lie below the strike {}", self.barrier, self.strike),
            ));
        }
        if !(self.dividend_yield >= 0.0 && self.dividend_yield.is_finite()) {
            return Err(Error::param("dividend_yield", "must be >= 0"));
        }
        if !self.rate.is_finite() {
            return Err(Error::param("rate", "must be finite"));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(Error::param("maturity", format!("must be > 0, got {}", self.maturity)));
        }
        Ok(())
    }

    pub fn with_barrier(&self, barrier: f64) -> Self {
        Self { barrier, ..*self }
    }

    pub fn with_side(&self, side: PutSide) -> Self {
        Self { side, ..*self }
    }

    fn spot(&self) -> f64 {
        self.gbm.s0
    }

    fn vol(&self) -> f64 {
        self.gbm.sigma
    }
}

/// Black–Scholes–Merton put with continuous dividend yield.
pub fn vanilla_put_price(spec: &BarrierOptionSpec) -> f64 {
    let (s, k, r, q, t, sig) = (spec.spot(), spec.strike, spec.rate, spec.dividend_yield, spec.maturity, spec.vol());
    let sd = sig * t.sqrt();
    let d1 = ((s / k).ln() + (r - q + 0.5 * sig * sig) * t) / sd;
    let d2 = d1 - sd;
    k * (-r * t).exp() * cdf(-d2) - s * (-q * t).exp() * cdf(-d1)
}

/// Down-and-in put, barrier below strike (Hull form).
pub fn down_and_in_put_price(spec: &BarrierOptionSpec) -> Result<f64> {
    spec.validate()?;
    let (s, k, h, r, q, t, sig) = (
        spec.spot(),
        spec.strike,
        spec.barrier,
        spec.rate,
        spec.dividend_yield,
        spec.maturity,
        spec.vol(),
    );
    let sd = sig * t.sqrt();
    let lambda = (r - q + 0.5 * sig * sig) / (sig * sig);
    let x1 = (s / h).ln() / sd + lambda * sd;
    let y = (h * h / (s * k)).ln() / sd + lambda * sd;
    let y1 = (h / s).ln() / sd + lambda * sd;
    let disc_s = s * (-q * t).exp();
    let disc_k = k * (-r * t).exp();
    let hs = h / s;
    let price = -disc_s * cdf(-x1) + disc_k * cdf(-x1 + sd)
        + disc_s * hs.powf(2.0 * lambda) * (cdf(y) - cdf(y1))
        - disc_k * hs.powf(2.0 * lambda - 2.0) * (cdf(y - sd) - cdf(y1 - sd));
    Ok(price)
}

/// Down-and-out put, barrier below strike (Rubinstein–Reiner `A - B + C - D`).
pub fn down_and_out_put_price(spec: &BarrierOptionSpec) -> Result<f64> {
    spec.validate()?;
    let (s, k, h, r, q, t, sig) = (
        spec.spot(),
        spec.strike,
        spec.barrier,
        spec.rate,
        spec.dividend_yield,
        spec.maturity,
        spec.vol(),
    );
    let sd = sig * t.sqrt();
    let b = r - q;
    let mu = (b - 0.5 * sig * sig) / (sig * sig);
    let phi = -1.0;
    let eta = 1.0;
    let x1 = (s / k).ln() / sd + (1.0 + mu) * sd;
    let x2 = (s / h).ln() / sd + (1.0 + mu) * sd;
    let y1 = (h * h / (s * k)).ln() / sd + (1.0 + mu) * sd;
    let y2 = (h / s).ln() / sd + (1.0 + mu) * sd;
    let carry = ((b - r) * t).exp();
    let disc = (-r * t).exp();
    let hs = h / s;
    let a_term = phi * s * carry * cdf(phi * x1) - phi * k * disc * cdf(phi * x1 - phi * sd);
    let b_term = phi * s * carry * cdf(phi * x2) - phi * k * disc * cdf(phi * x2 - phi * sd);
    let c_term = phi * s * carry * hs.powf(2.0 * (mu + 1.0)) * cdf(eta * y1)
        - phi * k * disc * hs.powf(2.0 * mu) * cdf(eta * y1 - eta * sd);
    let d_term = phi * s * carry * hs.powf(2.0 * (mu + 1.0)) * cdf(eta * y2)
        - phi * k * disc * hs.powf(2.0 * mu) * cdf(eta * y2 - eta * sd);
    Ok(a_term - b_term + c_term - d_term)
}

/// Closed-form price for the spec's side.
pub fn put_price(spec: &BarrierOptionSpec) -> Result<f64> {
    match spec.side {
        PutSide::DownInPut => down_and_in_put_price(spec),
        PutSide::DownOutPut => down_and_out_put_price(spec),
        PutSide::VanillaPut => {
            spec.validate()?;
            Ok(vanilla_put_price(spec))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierPayoffKind {
    /// `(S(τ) - K)⁺ 1{S_E < K < S}`.
    Call,
    /// `(K - S(τ))⁺ 1{S_E < S < K}`.
    Put,
}

/// Indicator-gated intrinsic value at the crash time. `s_now` is the price entering the
/// gate, `s_at_tau` the price at the stopping time.
pub fn barrier_payoff(kind: BarrierPayoffKind, strike: f64, barrier: f64, s_at_tau: f64, s_now: f64) -> f64 {
    match kind {
        BarrierPayoffKind::Call => {
            if barrier < strike && strike < s_now {
                (s_at_tau - strike).max(0.0)
            } else {
                0.0
            }
        }
        BarrierPayoffKind::Put => {
            if barrier < s_now && s_now < strike {
                (strike - s_at_tau).max(0.0)
            } else {
                0.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierMc {
    /// Discounted `(K - S_T)⁺` on paths that touched the barrier on the monitoring grid.
    pub european: Estimate,
    /// Discounted put intrinsic paid at the first grid hit, gated with the initial spot.
    pub intrinsic_at_hit: Estimate,
    pub knock_in_frequency: Estimate,
    /// Closed form at the barrier shifted by `exp(-β σ √Δt)` minus the closed form:
    /// the expected effect of monitoring only on the grid.
    pub monitoring_bias: f64,
    pub n_steps: usize,
}

/// Risk-neutral Monte Carlo of the down-and-in put with discrete monitoring.
///
/// Log-prices are stepped exactly. After the first grid hit the remaining time to
/// maturity is covered in a single exact lognormal step.
pub fn mc_down_and_in_put(spec: &BarrierOptionSpec, n_steps: usize, n_paths: usize, master_seed: u64) -> Result<BarrierMc> {
    spec.validate()?;
    if n_steps == 0 || n_paths == 0 {
        return Err(Error::param("n_steps/n_paths", "must be at least 1"));
    }
    let (s0, k, r, t, sig) = (spec.spot(), spec.strike, spec.rate, spec.maturity, spec.vol());
    let nu = r - spec.dividend_yield - 0.5 * sig * sig;
    let dt = t / n_steps as f64;
    let drift = nu * dt;
    let vol = sig * dt.sqrt();
    let level = (spec.barrier / s0).ln();
    let disc_t = (-r * t).exp();

    let rows = map_paths(n_paths, |i| {
        let mut rng = PathRng::new(master_seed, i);
        let mut x = 0.0;
        for step in 1..=n_steps {
            x += drift + vol * rng.normal();
            if x <= level {
                let tau = step as f64 * dt;
                let s_tau = s0 * x.exp();
                let rest = t - tau;
                let x_t = x + nu * rest + sig * rest.sqrt() * rng.normal();
                let euro = disc_t * (k - s0 * x_t.exp()).max(0.0);
                let at_hit = (-r * tau).exp() * barrier_payoff(BarrierPayoffKind::Put, k, spec.barrier, s_tau, s0);
                return (euro, at_hit, 1.0);
            }
        }
        (0.0, 0.0, 0.0)
    });
    let mut euro = Moments::default();
    let mut hit = Moments::default();
    let mut freq = Moments::default();
    for (e, h, f) in rows {
        euro.push(e);
        hit.push(h);
        freq.push(f);
    }
    let shifted = spec.with_barrier(spec.barrier * (-DISCRETE_MONITORING_BETA * sig * dt.sqrt()).exp());
    Ok(BarrierMc {
        european: euro.estimate(),
        intrinsic_at_hit: hit.estimate(),
        knock_in_frequency: freq.estimate(),
        monitoring_bias: down_and_in_put_price(&shifted)? - down_and_in_put_price(spec)?,
        n_steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Greeks {
    pub delta: f64,
    pub gamma: f64,
    pub vega: f64,
    pub rho: f64,
}

/// Central finite differences of [`put_price`] with relative bumps.
pub fn put_greeks(spec: &BarrierOptionSpec) -> Result<Greeks> {
    let base = put_price(spec)?;
    let hs = 1e-4 * spec.gbm.s0;
    let bump_spot = |ds: f64| {
        let mut s = *spec;
        s.gbm.s0 += ds;
        put_price(&s)
    };
    let up = bump_spot(hs)?;
    let dn = bump_spot(-hs)?;
    let hv = 1e-4;
    let mut v_up = *spec;
    v_up.gbm.sigma += hv;
    let mut v_dn = *spec;
    v_dn.gbm.sigma -= hv;
    let hr = 1e-5;
    let mut r_up = *spec;
    r_up.rate += hr;
    let mut r_dn = *spec;
    r_dn.rate -= hr;
    Ok(Greeks {
        delta: (up - dn) / (2.0 * hs),
        gamma: (up - 2.0 * base + dn) / (hs * hs),
        vega: (put_price(&v_up)? - put_price(&v_dn)?) / (2.0 * hv),
        rho: (put_price(&r_up)? - put_price(&r_dn)?) / (2.0 * hr),
    })
}
