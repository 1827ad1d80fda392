//! Black-style swaption on the floating leg `β₁c` against a fixed rate.

use serde::{Deserialize, Serialize};

use crate::crash::{sample_stopping_time, CrashSpec};
use crate::error::{Error, Result};
use crate::mc::{map_paths, Estimate, Moments};
use crate::normal::cdf;
use crate::paths::TimeGrid;
use crate::rng::SeedRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SwaptionVariant {
    #[default]
    StandardBlack,
    /// Put with the signs flipped on both terms.
    PaperLiteral,
}

impl SwaptionVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SwaptionVariant::StandardBlack => "standard_black",
            SwaptionVariant::PaperLiteral => "paper_literal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwaptionInputs {
    /// Floating forward `F = -E[β₁(τ) c]`.
    pub forward: f64,
    pub strike: f64,
    pub sigma: f64,
    pub expiry: f64,
    /// `P(0, τ)`.
    pub discount: f64,
}

impl SwaptionInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.forward > 0.0 && self.forward.is_finite()) {
            return Err(Error::param(
                "forward",
                format!(
                    "must be > 0 for the log in d1, got {}; the scenario does not support a positive floating forward",
                    self.forward
                ),
            ));
        }
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::param("strike", format!("must be > 0, got {}", self.strike)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param("sigma", format!("must be > 0, got {}", self.sigma)));
        }
        if !(self.expiry > 0.0 && self.expiry.is_finite()) {
            return Err(Error::param("expiry", format!("must be > 0, got {}", self.expiry)));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::param("discount", format!("must lie in (0, 1], got {}", self.discount)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwaptionQuote {
    pub variant: SwaptionVariant,
    pub d1: f64,
    pub d2: f64,
    pub call: f64,
    pub put: f64,
    /// Set when the put came out negative (possible only for the literal variant).
    pub put_negative: bool,
}

pub fn d1_d2(inputs: &SwaptionInputs) -> (f64, f64) {
    let sd = inputs.sigma * inputs.expiry.sqrt();
    let d1 = ((inputs.forward / inputs.strike).ln() + 0.5 * sd * sd) / sd;
    (d1, d1 - sd)
}

pub fn swaption_prices(inputs: &SwaptionInputs, variant: SwaptionVariant) -> Result<SwaptionQuote> {
    inputs.validate()?;
    let (d1, d2) = d1_d2(inputs);
    let (f, k, p0) = (inputs.forward, inputs.strike, inputs.discount);
    let call = p0 * (f * cdf(d1) - k * cdf(d2));
    let put = match variant {
        SwaptionVariant::StandardBlack => p0 * (k * cdf(-d2) - f * cdf(-d1)),
        SwaptionVariant::PaperLiteral => p0 * (-k * cdf(-d2) + f * cdf(-d1)),
    };
    Ok(SwaptionQuote {
        variant,
        d1,
        d2,
        call,
        put,
        put_negative: put < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwaptionGreeks {
    pub call_delta: f64,
    pub put_delta: f64,
    pub call_vega: f64,
    pub put_vega: f64,
}

/// Central differences in the forward and the volatility.
pub fn swaption_greeks(inputs: &SwaptionInputs, variant: SwaptionVariant) -> Result<SwaptionGreeks> {
    inputs.validate()?;
    let hf = 1e-6 * inputs.forward.max(1e-3);
    let hs = 1e-6;
    let at = |f: f64, s: f64| swaption_prices(&SwaptionInputs { forward: f, sigma: s, ..*inputs }, variant);
    let fu = at(inputs.forward + hf, inputs.sigma)?;
    let fd = at(inputs.forward - hf, inputs.sigma)?;
    let su = at(inputs.forward, inputs.sigma + hs)?;
    let sdn = at(inputs.forward, inputs.sigma - hs)?;
    Ok(SwaptionGreeks {
        call_delta: (fu.call - fd.call) / (2.0 * hf),
        put_delta: (fu.put - fd.put) / (2.0 * hf),
        call_vega: (su.call - sdn.call) / (2.0 * hs),
        put_vega: (su.put - sdn.put) / (2.0 * hs),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardEstimate {
    /// `-c · mean β₁(τ)` over paths that crashed on the grid.
    pub forward: Estimate,
    /// Mean crash time among crashed paths.
    pub mean_tau: Estimate,
    pub hit_fraction: f64,
    /// `exp(-r · mean_tau)`.
    pub discount_from_tau: f64,
}

/// Monte Carlo estimate of `-E[β₁(τ) c]` over crash times sampled on `grid`, conditional
/// on the crash happening within the grid horizon.
pub fn estimate_forward<B>(
    crash: &CrashSpec,
    grid: &TimeGrid,
    beta1: B,
    c: f64,
    rate: f64,
    n_paths: usize,
    master_seed: u64,
) -> Result<ForwardEstimate>
where
    B: Fn(f64) -> f64 + Sync + Send,
{
    crash.validate()?;
    if n_paths == 0 {
        return Err(Error::param("n_paths", "must be at least 1"));
    }
    let taus = map_paths(n_paths, |i| sample_stopping_time(crash, grid, SeedRecord::new(master_seed, i)));
    let mut fwd = Moments::default();
    let mut tau_m = Moments::default();
    for s in taus {
        if let Some(t) = s.tau {
            fwd.push(-beta1(t) * c);
            tau_m.push(t);
        }
    }
    if fwd.count() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} of {n_paths} paths crashed within the horizon",
            fwd.count()
        )));
    }
    let mean_tau = tau_m.estimate();
    Ok(ForwardEstimate {
        forward: fwd.estimate(),
        mean_tau,
        hit_fraction: fwd.count() as f64 / n_paths as f64,
        discount_from_tau: (-rate * mean_tau.mean).exp(),
    })
}
