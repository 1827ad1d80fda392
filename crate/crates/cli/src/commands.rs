use serde_json::{json, Value};
use zeroset::crash::{
    crash_threshold, expected_crash_time, first_passage_prob, marginal_crash_prob, mc_first_passage,
    mc_marginal_frequency,
};
use zeroset::derivatives::{
    alpha_zero_beta, asset_jump_price, down_and_in_put_price, down_and_out_put_price, estimate_forward,
    event_swap_return, identifying_beta, mc_down_and_in_put, put_greeks, put_price, restricted_price_path,
    scenario_classify, swaption_greeks, swaption_prices, systemic_alpha_increments, vanilla_put_price,
    MarketScenario, Quadrature,
};
use zeroset::local_time::{occupation_local_time, tanaka_local_time_path, zero_set_measure};
use zeroset::mc::{map_paths, Estimate, Moments};
use zeroset::measure::{density_mean, density_means, GirsanovSpec};
use zeroset::multifactor::{alpha_trials, critical_t};
use zeroset::paths::{
    bridge_paper_sde_from_brownian, sample_bridge_paper_sde, sample_bridge_pinned, sample_brownian,
    sample_doob_bridge, BridgeSpec, TimeGrid,
};
use zeroset::rng::{SeedRecord, GENERATOR_ID};
use zeroset::SamplePath;

use crate::config::{
    BridgeKindCfg, Config, DiscountCfg, Format, LocalTimeProcess, Violation,
};
use crate::output::{json_bytes, num, value, Artifact, Table};

#[derive(Debug)]
pub enum RunError {
    Invalid(Vec<Violation>),
    Runtime(String),
}

impl From<zeroset::Error> for RunError {
    fn from(e: zeroset::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

type Run = Result<Artifact, RunError>;

fn missing(section: &str) -> RunError {
    RunError::Invalid(vec![Violation {
        field: section.to_string(),
        message: format!("this subcommand needs a [{section}] table"),
    }])
}

fn seed_with_antithetic(master: u64, i: u64, antithetic: bool) -> SeedRecord {
    let mut s = SeedRecord::new(master, i);
    s.antithetic = antithetic;
    s
}

pub fn simulate_bridge(cfg: &Config, format: Format) -> Run {
    let b = cfg.bridge.as_ref().ok_or_else(|| missing("bridge"))?;
    let run = &cfg.run;
    let grid = TimeGrid::bridge(run.n_steps, b.epsilon)?;
    let paths = map_paths(run.n_paths, |i| {
        let seed = seed_with_antithetic(run.seed, i, b.antithetic);
        match b.kind {
            BridgeKindCfg::PaperSde => sample_bridge_paper_sde(&BridgeSpec::new(b.x, b.pin)?, &grid, seed),
            BridgeKindCfg::Pinned => sample_bridge_pinned(b.x, b.pin, &grid, seed),
            BridgeKindCfg::Doob => sample_doob_bridge(&grid, seed),
        }
    })
    .into_iter()
    .collect::<zeroset::Result<Vec<SamplePath>>>()?;
    let terminal = match b.kind {
        BridgeKindCfg::PaperSde => None,
        BridgeKindCfg::Pinned => Some(b.pin),
        BridgeKindCfg::Doob => Some(0.0),
    };
    let kind = match b.kind {
        BridgeKindCfg::PaperSde => "paper_sde",
        BridgeKindCfg::Pinned => "pinned",
        BridgeKindCfg::Doob => "doob",
    };
    Ok(Artifact::single(match format {
        Format::Csv => {
            let mut t = Table::new(std::iter::once("t".to_string()).chain((0..paths.len()).map(|i| format!("path_{i}"))));
            for (k, &time) in grid.points().iter().enumerate() {
                let mut row = vec![num(time)];
                row.extend(paths.iter().map(|p| num(p.values()[k])));
                t.push(row);
            }
            if let Some(pin) = terminal {
                let mut row = vec![num(1.0)];
                row.extend(paths.iter().map(|_| num(pin)));
                t.push(row);
            }
            t.to_csv()
        }
        Format::Json => json_bytes(&json!({
            "kind": kind,
            "x": b.x,
            "pin": b.pin,
            "epsilon": b.epsilon,
            "n_paths": run.n_paths,
            "n_steps": run.n_steps,
            "seed": run.seed,
            "antithetic": b.antithetic,
            "generator": GENERATOR_ID,
            "terminal_at_one": terminal.map_or(json!("undefined"), |v| json!(v)),
            "times": grid.points(),
            "paths": paths.iter().map(|p| p.values()).collect::<Vec<_>>(),
        })),
    }))
}

pub fn girsanov(cfg: &Config, format: Format) -> Run {
    let g = cfg.girsanov.as_ref().ok_or_else(|| missing("girsanov"))?;
    let run = &cfg.run;
    let spec = GirsanovSpec::new(g.x, g.variant)?;
    let grid = TimeGrid::bridge(run.n_steps, g.epsilon)?;
    let est = density_means(&spec, &grid, &g.times, run.n_paths, run.seed)?;
    let records: Vec<Value> = g
        .times
        .iter()
        .zip(&est)
        .map(|(&t, e)| {
            let grid_t = grid.points()[grid.index_at_or_after(t).expect("validated")];
            json!({
                "variant": g.variant.as_str(),
                "x": g.x,
                "t": grid_t,
                "estimate": e.mean,
                "std_error": e.std_error,
                "expected": density_mean(&spec, grid_t),
                "n_paths": run.n_paths,
                "seed": run.seed,
            })
        })
        .collect();
    Ok(Artifact::single(match format {
        Format::Json => json_bytes(&json!({ "records": records })),
        Format::Csv => {
            let mut t = Table::new(["variant", "x", "t", "estimate", "std_error", "expected", "n_paths", "seed"]);
            for r in &records {
                t.push(vec![
                    g.variant.as_str().to_string(),
                    num(g.x),
                    num(r["t"].as_f64().unwrap()),
                    num(r["estimate"].as_f64().unwrap()),
                    num(r["std_error"].as_f64().unwrap()),
                    num(r["expected"].as_f64().unwrap()),
                    run.n_paths.to_string(),
                    run.seed.to_string(),
                ]);
            }
            t.to_csv()
        }
    }))
}

/// Prefix of `path` up to grid index `k` inclusive.
fn truncate(path: &SamplePath, k: usize) -> zeroset::Result<SamplePath> {
    let grid = TimeGrid::new(path.times()[..=k].to_vec())?;
    SamplePath::new(grid, path.values()[..=k].to_vec(), path.seed())
}

struct PathStats {
    /// `(L, occupation)` per level and time, level-major.
    lt: Vec<f64>,
    /// Band measure per level and tolerance, level-major.
    band: Vec<f64>,
    /// `L` at the horizon per level.
    l_end: Vec<f64>,
    variance: f64,
    /// Fraction of the horizon within the smallest tolerance of 0.
    frac_at_zero: f64,
}

pub fn local_time(cfg: &Config, format: Format) -> Run {
    let l = cfg.local_time.as_ref().ok_or_else(|| missing("local_time"))?;
    let run = &cfg.run;
    let grid = match l.process {
        LocalTimeProcess::Brownian => TimeGrid::uniform(run.n_steps, l.horizon)?,
        LocalTimeProcess::PinnedBridge => TimeGrid::bridge(run.n_steps, l.epsilon)?,
    };
    let times: Vec<f64> = if l.times.is_empty() {
        vec![grid.horizon()]
    } else {
        l.times.clone()
    };
    let idx: Vec<usize> = times.iter().map(|&t| grid.index_at_or_after(t).expect("validated")).collect();
    let last = grid.len() - 1;
    let min_tol = l.tolerances.iter().copied().fold(f64::INFINITY, f64::min);
    let rows = map_paths(run.n_paths, |i| -> zeroset::Result<PathStats> {
        let seed = SeedRecord::new(run.seed, i);
        let path = match l.process {
            LocalTimeProcess::Brownian => sample_brownian(&grid, seed),
            LocalTimeProcess::PinnedBridge => sample_bridge_pinned(0.0, 0.0, &grid, seed)?,
        };
        let mut stats = PathStats {
            lt: Vec::new(),
            band: Vec::new(),
            l_end: Vec::new(),
            variance: 0.0,
            frac_at_zero: 0.0,
        };
        for &x in &l.levels {
            let tanaka = tanaka_local_time_path(&path, x)?;
            for &k in &idx {
                let occ = if k == last {
                    occupation_local_time(&path, x, l.bandwidth)?
                } else {
                    occupation_local_time(&truncate(&path, k)?, x, l.bandwidth)?
                };
                stats.lt.push(tanaka.values()[k]);
                stats.lt.push(occ);
            }
            stats.l_end.push(tanaka.last());
            for &tol in &l.tolerances {
                stats.band.push(zero_set_measure(&path, x, tol)?.lebesgue_measure);
            }
        }
        if min_tol.is_finite() {
            let r = zero_set_measure(&path, 0.0, min_tol)?;
            stats.variance = r.path_variance;
            stats.frac_at_zero = r.lebesgue_measure / grid.horizon();
        }
        Ok(stats)
    })
    .into_iter()
    .collect::<zeroset::Result<Vec<_>>>()?;

    let col = |f: &dyn Fn(&PathStats) -> f64| -> Estimate {
        let mut m = Moments::default();
        m.extend(rows.iter().map(f));
        m.estimate()
    };
    let nt = idx.len();
    let ntol = l.tolerances.len();
    let mut estimates = Vec::new();
    let mut zero_set = Vec::new();
    let mut table = Table::new(["x", "t", "tanaka", "occupation"]);
    for (li, &x) in l.levels.iter().enumerate() {
        for (ti, &k) in idx.iter().enumerate() {
            let base = 2 * (li * nt + ti);
            let tan = col(&|r| r.lt[base]);
            let occ = col(&|r| r.lt[base + 1]);
            let t = grid.points()[k];
            table.push(vec![num(x), num(t), num(tan.mean), num(occ.mean)]);
            estimates.push(json!({
                "level": x,
                "t": t,
                "tanaka": value(&tan),
                "occupation": value(&occ),
                "relative_gap": (occ.mean - tan.mean).abs() / tan.mean.abs(),
                "epsilon": l.bandwidth,
                "n_steps": run.n_steps,
            }));
        }
        let l_end = col(&|r| r.l_end[li]);
        for (ki, &tol) in l.tolerances.iter().enumerate() {
            let meas = col(&|r| r.band[li * ntol + ki]);
            zero_set.push(json!({
                "level": x,
                "tolerance": tol,
                "lebesgue_measure": value(&meas),
                // band time / (2 tol) estimates the semimartingale local time 2L
                "ratio_to_2l": meas.mean / (2.0 * tol) / (2.0 * l_end.mean),
            }));
        }
    }
    let doc = json!({
        "process": match l.process { LocalTimeProcess::Brownian => "brownian", LocalTimeProcess::PinnedBridge => "pinned_bridge" },
        "horizon": grid.horizon(),
        "n_paths": run.n_paths,
        "n_steps": run.n_steps,
        "seed": run.seed,
        "normalization": "tanaka and occupation report L, half the semimartingale local time",
        "estimates": estimates,
        "zero_set": zero_set,
        "alpha_nonzero": {
            "variance": value(&col(&|r| r.variance)),
            "fraction_time_at_zero": col(&|r| r.frac_at_zero).mean,
            "tolerance": if min_tol.is_finite() { json!(min_tol) } else { Value::Null },
        },
    });
    Ok(Artifact::single(match format {
        Format::Json => json_bytes(&doc),
        Format::Csv => table.to_csv(),
    }))
}

fn flat_table(pairs: &[(&str, f64)]) -> Vec<u8> {
    let mut t = Table::new(pairs.iter().map(|p| p.0));
    t.push(pairs.iter().map(|p| num(p.1)).collect());
    t.to_csv()
}

pub fn crash(cfg: &Config, format: Format) -> Run {
    let k = cfg.crash.as_ref().ok_or_else(|| missing("crash"))?;
    let run = &cfg.run;
    let spec = k.spec()?;
    let t = k.eval_time();
    let marginal = marginal_crash_prob(&spec, t)?;
    let passage = first_passage_prob(&spec, t)?;
    let threshold = crash_threshold(&spec, t)?;
    let freq = mc_marginal_frequency(&spec, t, run.n_paths, run.seed)?;
    let fp = mc_first_passage(&spec, run.n_steps, run.n_paths, run.seed)?;
    let passage_at_horizon = first_passage_prob(&spec, spec.horizon)?;
    Ok(Artifact::single(match format {
        Format::Json => json_bytes(&json!({
            "spec": { "mu": k.mu, "sigma": k.sigma, "s0": k.s0, "s_crash": k.s_crash, "payout": k.payout, "horizon": k.horizon },
            "t": t,
            "threshold": threshold,
            "marginal": marginal,
            "first_passage": passage,
            "first_passage_at_horizon": passage_at_horizon,
            "expected_crash_time": expected_crash_time(&spec),
            "mc_estimate": {
                "marginal_frequency": freq.mean,
                "hit_frequency": fp.hit_frequency.mean,
                "mean_capped_tau": fp.mean_capped_tau.mean,
                "monitoring_bias": fp.monitoring_bias,
                "n_steps": fp.n_steps,
                "n_paths": run.n_paths,
            },
            "se": {
                "marginal_frequency": freq.std_error,
                "hit_frequency": fp.hit_frequency.std_error,
                "mean_capped_tau": fp.mean_capped_tau.std_error,
            },
            "seed": run.seed,
        })),
        Format::Csv => flat_table(&[
            ("t", t),
            ("threshold", threshold),
            ("marginal", marginal),
            ("first_passage", passage),
            ("first_passage_at_horizon", passage_at_horizon),
            ("marginal_frequency", freq.mean),
            ("marginal_frequency_se", freq.std_error),
            ("hit_frequency", fp.hit_frequency.mean),
            ("hit_frequency_se", fp.hit_frequency.std_error),
            ("monitoring_bias", fp.monitoring_bias),
        ]),
    }))
}

pub fn price_barrier(cfg: &Config, format: Format) -> Run {
    let b = cfg.barrier.as_ref().ok_or_else(|| missing("barrier"))?;
    let run = &cfg.run;
    let spec = b.spec()?;
    let price = put_price(&spec)?;
    let din = down_and_in_put_price(&spec)?;
    let dout = down_and_out_put_price(&spec)?;
    let vanilla = vanilla_put_price(&spec);
    let greeks = put_greeks(&spec)?;
    let mc = if b.mc {
        Some(mc_down_and_in_put(&spec, run.n_steps, run.n_paths, run.seed)?)
    } else {
        None
    };
    Ok(Artifact::single(match format {
        Format::Json => json_bytes(&json!({
            "inputs": value(b),
            "variant": value(&spec.side),
            "price": price,
            "prices": {
                "down_in_put": din,
                "down_out_put": dout,
                "vanilla_put": vanilla,
                "parity_gap": din + dout - vanilla,
            },
            "greeks": value(&greeks),
            "mc_cross_check": mc.map(|m| json!({
                "down_in_put": m.european.mean,
                "intrinsic_at_hit": m.intrinsic_at_hit.mean,
                "knock_in_frequency": m.knock_in_frequency.mean,
                "monitoring_bias": m.monitoring_bias,
                "n_steps": m.n_steps,
                "n_paths": run.n_paths,
                "seed": run.seed,
            })),
            "se": mc.map(|m| json!({
                "down_in_put": m.european.std_error,
                "intrinsic_at_hit": m.intrinsic_at_hit.std_error,
                "knock_in_frequency": m.knock_in_frequency.std_error,
            })),
        })),
        Format::Csv => {
            let mut cols = vec![
                ("price", price),
                ("down_in_put", din),
                ("down_out_put", dout),
                ("vanilla_put", vanilla),
                ("delta", greeks.delta),
                ("gamma", greeks.gamma),
                ("vega", greeks.vega),
                ("rho", greeks.rho),
            ];
            if let Some(m) = mc {
                cols.extend([
                    ("mc_down_in_put", m.european.mean),
                    ("mc_se", m.european.std_error),
                    ("monitoring_bias", m.monitoring_bias),
                ]);
            }
            flat_table(&cols)
        }
    }))
}

pub fn price_swaption(cfg: &Config, format: Format) -> Run {
    let s = cfg.swaption.as_ref().ok_or_else(|| missing("swaption"))?;
    let run = &cfg.run;
    let estimate = if s.needs_crash() {
        let k = cfg.crash.as_ref().ok_or_else(|| missing("crash"))?;
        let spec = k.spec()?;
        let grid = TimeGrid::uniform(run.n_steps, spec.horizon)?;
        let beta1 = s.beta1.unwrap_or(0.0);
        let c = s.c.unwrap_or(0.0);
        Some(estimate_forward(&spec, &grid, |_| beta1, c, s.rate.unwrap_or(0.0), run.n_paths, run.seed)?)
    } else {
        None
    };
    let forward = match (s.forward, &estimate) {
        (Some(f), _) => f,
        (None, Some(e)) => e.forward.mean,
        (None, None) => unreachable!("needs_crash covers a missing forward"),
    };
    let discount = match (s.discount, &estimate) {
        (DiscountCfg::Constant(p), _) => p,
        (DiscountCfg::Mode(_), Some(e)) => e.discount_from_tau,
        (DiscountCfg::Mode(_), None) => unreachable!("needs_crash covers the discount mode"),
    };
    let inputs = s.inputs(forward, discount);
    let quote = swaption_prices(&inputs, s.variant)?;
    let greeks = swaption_greeks(&inputs, s.variant)?;
    Ok(Artifact::single(match format {
        Format::Json => json_bytes(&json!({
            "inputs": value(&inputs),
            "variant": s.variant.as_str(),
            "prices": {
                "call": quote.call,
                "put": quote.put,
                "d1": quote.d1,
                "d2": quote.d2,
                "put_negative": quote.put_negative,
            },
            "greeks": value(&greeks),
            "mc_cross_check": estimate.map(|e| json!({
                "forward": e.forward.mean,
                "mean_tau": e.mean_tau.mean,
                "hit_fraction": e.hit_fraction,
                "discount_from_tau": e.discount_from_tau,
                "n_paths": run.n_paths,
                "n_steps": run.n_steps,
                "seed": run.seed,
            })),
            "se": estimate.map(|e| json!({
                "forward": e.forward.std_error,
                "mean_tau": e.mean_tau.std_error,
            })),
        })),
        Format::Csv => flat_table(&[
            ("forward", inputs.forward),
            ("strike", inputs.strike),
            ("discount", inputs.discount),
            ("d1", quote.d1),
            ("d2", quote.d2),
            ("call", quote.call),
            ("put", quote.put),
            ("call_vega", greeks.call_vega),
            ("put_vega", greeks.put_vega),
        ]),
    }))
}

pub fn scenario(cfg: &Config, format: Format) -> Run {
    let s = cfg.scenario.as_ref().ok_or_else(|| missing("scenario"))?;
    let run = &cfg.run;
    let class = scenario_classify(s.r, s.c, s.beta1);
    let grid = TimeGrid::bridge(run.n_steps, s.epsilon)?;
    let n = grid.len();
    let event: Vec<bool> = grid
        .points()
        .iter()
        .map(|&t| s.event_start.is_some_and(|e| t >= e))
        .collect();
    let flat = MarketScenario::new(s.r, s.c, s.payout, grid.clone(), vec![s.beta1; n], event.clone(), vec![s.x1; n])?;
    let horizon = grid.horizon();
    let jump = asset_jump_price(&flat, horizon, s.delta.min(horizon), Quadrature::Trapezoid)?;

    // identifying restriction: beta1(t) solves x/(1-t) = -(r + beta1 c)
    let beta_path = grid
        .points()
        .iter()
        .map(|&t| identifying_beta(s.x, s.r, s.c, t))
        .collect::<zeroset::Result<Vec<_>>>()?;
    let restricted = MarketScenario::new(s.r, s.c, s.payout, grid.clone(), beta_path, event.clone(), vec![s.x1; n])?;
    let price = restricted_price_path(&restricted, 1.0)?;
    let bridge_spec = BridgeSpec::new(s.x, 0.0)?;
    let gaps = map_paths(run.n_paths, |i| -> zeroset::Result<(f64, Vec<(f64, f64)>)> {
        let bm = sample_brownian(&grid, SeedRecord::new(run.seed, i));
        let resid = systemic_alpha_increments(&restricted, &price, &bm, 1.0)?;
        let bridge = bridge_paper_sde_from_brownian(&bridge_spec, &bm)?;
        let pairs: Vec<(f64, f64)> = resid.iter().copied().zip(bridge.increments()).collect();
        let worst = pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok((worst, if i == 0 { pairs } else { Vec::new() }))
    })
    .into_iter()
    .collect::<zeroset::Result<Vec<_>>>()?;
    let max_gap = gaps.iter().map(|g| g.0).fold(0.0, f64::max);
    let first = &gaps[0].1;

    let swap: Vec<f64> = (0..n).map(|i| event_swap_return(&flat, i)).collect::<zeroset::Result<_>>()?;
    Ok(Artifact::single(match format {
        Format::Json => json_bytes(&json!({
            "inputs": value(s),
            "classification": {
                "signs": value(&class.signs),
                "alpha_zero": class.alpha_zero,
            },
            "alpha_zero_beta": alpha_zero_beta(s.r, s.c).ok(),
            "event_swap_return": {
                "no_event": s.c + s.r,
                "on_event": (s.x1 - s.payout) / s.x1,
                "event_steps": event.iter().filter(|&&e| e).count(),
            },
            "jump_multiplier": { "t": horizon, "delta": s.delta.min(horizon), "value": jump },
            "stochastic_equivalence": {
                "n_paths": run.n_paths,
                "n_steps": run.n_steps,
                "max_abs_gap": max_gap,
                "seed": run.seed,
            },
        })),
        Format::Csv => {
            let mut t = Table::new(["t", "event", "event_swap_return", "residual_increment", "bridge_increment"]);
            for (i, (a, b)) in first.iter().enumerate() {
                t.push(vec![
                    num(grid.points()[i]),
                    (event[i] as u8).to_string(),
                    num(swap[i]),
                    num(*a),
                    num(*b),
                ]);
            }
            t.to_csv()
        }
    }))
}

pub fn kfactor_sim(cfg: &Config, format: Format) -> Run {
    let k = cfg.kfactor.as_ref().ok_or_else(|| missing("kfactor"))?;
    let run = &cfg.run;
    let model = k.model()?;
    let trials = alpha_trials(&model, k.alpha, run.n_steps, run.n_paths, run.seed)?;
    let crit = critical_t(run.n_steps - model.k() - 1, k.level);
    let rejections = trials.iter().filter(|t| t.fit.t_stat.abs() > crit).count();
    let alphas: Vec<f64> = trials.iter().map(|t| t.fit.alpha).collect();
    let alpha_est = Estimate::from_samples(&alphas);
    let betas: Vec<Estimate> = (0..model.k())
        .map(|j| Estimate::from_samples(&trials.iter().map(|t| t.fit.betas[j]).collect::<Vec<_>>()))
        .collect();
    let summary = json!({
        "n_trials": run.n_paths,
        "n_steps": run.n_steps,
        "dt": k.dt,
        "alpha_injected": k.alpha,
        "level": k.level,
        "critical_t": crit,
        "rejection_rate": rejections as f64 / run.n_paths as f64,
        "alpha_hat": value(&alpha_est),
        "beta_hat": value(&betas),
        "true_betas": k.betas,
        "seed": run.seed,
    });
    let mut table = Table::new(["trial", "alpha_hat", "t_stat"]);
    for t in &trials {
        table.push(vec![t.trial.to_string(), num(t.fit.alpha), num(t.fit.t_stat)]);
    }
    Ok(match format {
        Format::Csv => Artifact {
            main: table.to_csv(),
            companions: vec![("summary.json".into(), json_bytes(&summary))],
        },
        Format::Json => {
            let mut doc = summary;
            doc["trials"] = trials
                .iter()
                .map(|t| json!({ "trial": t.trial, "alpha_hat": t.fit.alpha, "t_stat": t.fit.t_stat }))
                .collect();
            Artifact::single(json_bytes(&doc))
        }
    })
}
