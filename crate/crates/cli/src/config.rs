//! Experiment configuration: one TOML file, a `[run]` table plus one table per module.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use zeroset::crash::CrashSpec;
use zeroset::derivatives::{BarrierOptionSpec, PutSide, SwaptionInputs, SwaptionVariant};
use zeroset::measure::DensityVariant;
use zeroset::multifactor::{Beta, KFactorModel, TRADING_DT};
use zeroset::paths::{GbmParams, DEFAULT_EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub run: RunSection,
    pub bridge: Option<BridgeSection>,
    pub girsanov: Option<GirsanovSection>,
    pub local_time: Option<LocalTimeSection>,
    pub crash: Option<CrashSection>,
    pub barrier: Option<BarrierSection>,
    pub swaption: Option<SwaptionSection>,
    pub scenario: Option<ScenarioSection>,
    pub kfactor: Option<KFactorSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default)]
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            n_paths: default_paths(),
            n_steps: default_steps(),
            seed: 0,
            format: None,
            out: None,
        }
    }
}

fn default_paths() -> usize {
    1000
}

fn default_steps() -> usize {
    1000
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeKindCfg {
    PaperSde,
    Pinned,
    Doob,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeSection {
    pub kind: BridgeKindCfg,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub pin: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub antithetic: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GirsanovSection {
    pub x: f64,
    #[serde(default)]
    pub variant: DensityVariant,
    #[serde(default = "default_girsanov_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_girsanov_times() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalTimeProcess {
    Brownian,
    PinnedBridge,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LocalTimeSection {
    #[serde(default = "default_process")]
    pub process: LocalTimeProcess,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "one")]
    pub horizon: f64,
    /// Evaluation times; the horizon when empty.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
    #[serde(default = "default_tolerances")]
    pub tolerances: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_process() -> LocalTimeProcess {
    LocalTimeProcess::Brownian
}

fn default_levels() -> Vec<f64> {
    vec![0.0]
}

fn default_bandwidth() -> f64 {
    zeroset::local_time::DEFAULT_BANDWIDTH
}

fn default_tolerances() -> Vec<f64> {
    vec![1e-2, 5e-3]
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CrashSection {
    pub mu: f64,
    pub sigma: f64,
    pub s0: f64,
    pub s_crash: f64,
    #[serde(default)]
    pub payout: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    /// Evaluation time for the closed forms; defaults to the horizon.
    pub t: Option<f64>,
}

impl CrashSection {
    pub fn spec(&self) -> zeroset::Result<CrashSpec> {
        CrashSpec::new(GbmParams::new(self.mu, self.sigma, self.s0)?, self.s_crash, self.payout, self.horizon)
    }

    pub fn eval_time(&self) -> f64 {
        self.t.unwrap_or(self.horizon)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierSection {
    pub s0: f64,
    pub sigma: f64,
    pub strike: f64,
    pub barrier: f64,
    #[serde(default)]
    pub dividend_yield: f64,
    pub rate: f64,
    pub maturity: f64,
    #[serde(default = "default_side")]
    pub side: PutSide,
    #[serde(default = "yes")]
    pub mc: bool,
}

fn default_side() -> PutSide {
    PutSide::DownInPut
}

fn yes() -> bool {
    true
}

impl BarrierSection {
    pub fn spec(&self) -> zeroset::Result<BarrierOptionSpec> {
        let s = BarrierOptionSpec {
            gbm: GbmParams::new(self.rate - self.dividend_yield, self.sigma, self.s0)?,
            strike: self.strike,
            barrier: self.barrier,
            dividend_yield: self.dividend_yield,
            rate: self.rate,
            maturity: self.maturity,
            side: self.side,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum DiscountCfg {
    Constant(f64),
    Mode(DiscountMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscountMode {
    /// `exp(-r E[τ])` with `E[τ]` from crash-time Monte Carlo.
    ExpectedTau,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SwaptionSection {
    /// Given forward; estimated from crash times when absent.
    pub forward: Option<f64>,
    pub strike: f64,
    pub sigma: f64,
    pub expiry: f64,
    pub discount: DiscountCfg,
    #[serde(default)]
    pub variant: SwaptionVariant,
    pub beta1: Option<f64>,
    pub c: Option<f64>,
    pub rate: Option<f64>,
}

impl SwaptionSection {
    pub fn needs_crash(&self) -> bool {
        self.forward.is_none() || matches!(self.discount, DiscountCfg::Mode(_))
    }

    pub fn inputs(&self, forward: f64, discount: f64) -> SwaptionInputs {
        SwaptionInputs {
            forward,
            strike: self.strike,
            sigma: self.sigma,
            expiry: self.expiry,
            discount,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub r: f64,
    pub c: f64,
    pub beta1: f64,
    #[serde(default)]
    pub payout: f64,
    #[serde(default = "one")]
    pub x1: f64,
    /// Events switch on from this time; none when absent.
    pub event_start: Option<f64>,
    #[serde(default = "default_window")]
    pub delta: f64,
    /// Bridge start for the stochastic-equivalence check.
    #[serde(default = "default_bridge_x")]
    pub x: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_window() -> f64 {
    0.1
}

fn default_bridge_x() -> f64 {
    0.4
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KFactorSection {
    pub betas: Vec<f64>,
    pub factor_mu: Vec<f64>,
    pub factor_sigma: Vec<f64>,
    pub delta: f64,
    pub rate: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_dt() -> f64 {
    TRADING_DT
}

fn default_level() -> f64 {
    0.05
}

impl KFactorSection {
    pub fn model(&self) -> zeroset::Result<KFactorModel> {
        let factors = self
            .factor_mu
            .iter()
            .zip(&self.factor_sigma)
            .map(|(&mu, &sigma)| GbmParams::new(mu, sigma, 1.0))
            .collect::<zeroset::Result<Vec<_>>>()?;
        Ok(KFactorModel {
            betas: self.betas.iter().map(|&b| Beta::Constant(b)).collect(),
            factors,
            delta: self.delta,
            rate: self.rate,
            dt: self.dt,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config parse error at line {}, column {}: {}", self.line, self.column, self.message)
    }
}

pub fn parse(text: &str) -> Result<Config, ParseError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => line_col(text, span.start),
            None => (1, 1),
        };
        ParseError {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.out.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    fn positive(&mut self, field: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.push(field, format!("must be > 0, got {v}"));
        }
    }

    fn finite(&mut self, field: &str, v: f64) {
        if !v.is_finite() {
            self.push(field, format!("must be finite, got {v}"));
        }
    }

    fn epsilon(&mut self, field: &str, v: f64) {
        if !(v > 0.0 && v < 1.0) {
            self.push(field, format!("must lie in (0, 1), got {v}"));
        }
    }

    fn core(&mut self, section: &str, err: zeroset::Error) {
        match err {
            zeroset::Error::InvalidParameter { name, reason } => self.push(format!("{section}.{name}"), reason),
            other => self.push(section, other.to_string()),
        }
    }
}

/// Every rule a run would enforce, for all sections present.
pub fn validate(cfg: &Config) -> Vec<Violation> {
    let mut c = Checker { out: Vec::new() };
    if cfg.run.n_paths == 0 {
        c.push("run.n_paths", "must be at least 1");
    }
    if cfg.run.n_steps == 0 {
        c.push("run.n_steps", "must be at least 1");
    }
    if let Some(b) = &cfg.bridge {
        c.epsilon("bridge.epsilon", b.epsilon);
        c.finite("bridge.pin", b.pin);
        if !(b.x >= 0.0 && b.x.is_finite()) {
            c.push("bridge.x", format!("bridge start must be >= 0, got {}", b.x));
        }
        if b.kind == BridgeKindCfg::Doob && (b.x != 0.0 || b.pin != 0.0) {
            c.push("bridge.kind", "the doob bridge runs from 0 to 0; leave x and pin at 0");
        }
    }
    if let Some(g) = &cfg.girsanov {
        c.finite("girsanov.x", g.x);
        c.epsilon("girsanov.epsilon", g.epsilon);
        if g.times.is_empty() {
            c.push("girsanov.times", "needs at least one time");
        }
        for &t in &g.times {
            if !(t > 0.0 && t <= 1.0 - g.epsilon) {
                c.push("girsanov.times", format!("{t} must lie in (0, 1 - epsilon]"));
            }
        }
    }
    if let Some(l) = &cfg.local_time {
        c.positive("local_time.horizon", l.horizon);
        c.positive("local_time.bandwidth", l.bandwidth);
        c.epsilon("local_time.epsilon", l.epsilon);
        if l.levels.is_empty() {
            c.push("local_time.levels", "needs at least one level");
        }
        for &x in &l.levels {
            c.finite("local_time.levels", x);
        }
        for &tol in &l.tolerances {
            c.positive("local_time.tolerances", tol);
        }
        let end = match l.process {
            LocalTimeProcess::Brownian => l.horizon,
            LocalTimeProcess::PinnedBridge => {
                if l.horizon != 1.0 {
                    c.push("local_time.horizon", "the pinned bridge lives on [0, 1]; leave horizon at 1");
                }
                1.0 - l.epsilon
            }
        };
        for &t in &l.times {
            if !(t > 0.0 && t <= end) {
                c.push("local_time.times", format!("{t} must lie in (0, {end}]"));
            }
        }
    }
    if let Some(k) = &cfg.crash {
        check_crash(&mut c, k);
    }
    if let Some(b) = &cfg.barrier {
        if !(b.sigma > 0.0) {
            c.push("barrier.sigma", format!("volatility must be > 0, got {}", b.sigma));
        } else if let Err(e) = b.spec() {
            c.core("barrier", e);
        }
    }
    if let Some(s) = &cfg.swaption {
        c.positive("swaption.strike", s.strike);
        c.positive("swaption.sigma", s.sigma);
        c.positive("swaption.expiry", s.expiry);
        match s.discount {
            DiscountCfg::Constant(p) if !(p > 0.0 && p <= 1.0) => {
                c.push("swaption.discount", format!("must lie in (0, 1], got {p}"))
            }
            DiscountCfg::Mode(DiscountMode::ExpectedTau) if s.rate.is_none() => {
                c.push("swaption.rate", "required when discount = \"expected_tau\"")
            }
            _ => {}
        }
        match s.forward {
            Some(f) if !(f > 0.0 && f.is_finite()) => c.push(
                "swaption.forward",
                format!("must be > 0, got {f}; a non-positive floating forward has no log in d1"),
            ),
            None if s.beta1.is_none() || s.c.is_none() => {
                c.push("swaption.forward", "give a forward, or beta1 and c to estimate it from crash times")
            }
            _ => {}
        }
        if s.needs_crash() && cfg.crash.is_none() {
            c.push("crash", "a [crash] table is required to estimate the forward or the discount");
        }
    }
    if let Some(s) = &cfg.scenario {
        c.positive("scenario.r", s.r);
        c.finite("scenario.c", s.c);
        c.finite("scenario.beta1", s.beta1);
        c.positive("scenario.x1", s.x1);
        c.positive("scenario.delta", s.delta);
        c.epsilon("scenario.epsilon", s.epsilon);
        if !(s.payout >= 0.0) {
            c.push("scenario.payout", format!("must be >= 0, got {}", s.payout));
        }
        if !(s.x >= 0.0) {
            c.push("scenario.x", format!("bridge start must be >= 0, got {}", s.x));
        }
        if s.c == 0.0 {
            c.push("scenario.c", "spread must be non-zero to impose the identifying restriction on beta1");
        }
    }
    if let Some(k) = &cfg.kfactor {
        if k.betas.len() != k.factor_mu.len() || k.betas.len() != k.factor_sigma.len() {
            c.push(
                "kfactor.betas",
                format!(
                    "betas ({}), factor_mu ({}) and factor_sigma ({}) must have equal length",
                    k.betas.len(),
                    k.factor_mu.len(),
                    k.factor_sigma.len()
                ),
            );
        } else if let Err(e) = k.model().and_then(|m| m.validate(cfg.run.n_steps)) {
            c.core("kfactor", e);
        }
        if !(k.level > 0.0 && k.level < 1.0) {
            c.push("kfactor.level", format!("must lie in (0, 1), got {}", k.level));
        }
        if cfg.run.n_steps < k.betas.len() + 2 {
            c.push("run.n_steps", "too few steps for the regression");
        }
    }
    c.out
}

fn check_crash(c: &mut Checker, k: &CrashSection) {
    if !(k.sigma > 0.0 && k.sigma.is_finite()) {
        c.push(
            "crash.sigma",
            format!("= {}: volatility must be strictly positive; without it the crash is not certain to occur", k.sigma),
        );
    }
    if !(k.s0 > 0.0) {
        c.push("crash.s0", format!("initial price must be > 0, got {}", k.s0));
    }
    if !(k.s_crash > 0.0) {
        c.push("crash.s_crash", format!("crash level must be > 0, got {}", k.s_crash));
    } else if k.s_crash >= k.s0 {
        c.push(
            "crash.s_crash",
            format!(
                "= {} is not below s0 = {}: a crash is a down-crossing, so the level must lie below the initial price",
                k.s_crash, k.s0
            ),
        );
    }
    c.finite("crash.mu", k.mu);
    if !(k.payout >= 0.0) {
        c.push("crash.payout", format!("must be >= 0, got {}", k.payout));
    }
    c.positive("crash.horizon", k.horizon);
    if let Some(t) = k.t {
        c.positive("crash.t", t);
    }
}
