//! `zeroset`: batch runner for the alpha, crash and hedging experiments.
//!
//! Exit status: 0 success, 2 usage error, 3 invalid or unparseable config,
//! 4 runtime failure (including unwritable output).

mod commands;
mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::RunError;
use config::{Config, Format};
use output::{emit, json_bytes, sha256_hex, write_manifest, Artifact, Manifest};

const EXIT_INVALID: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(name = "zeroset", version, about = "Seeded experiments on bridge alpha, local time, crashes and hedges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent. A manifest is written to `<out>.manifest.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample bridge paths (the alpha fan) on [0, 1 - epsilon].
    SimulateBridge(Common),
    /// Mean of the change-of-measure density at chosen times.
    Girsanov(Common),
    /// Tanaka and occupation local time, zero-set measure.
    LocalTime(Common),
    /// Crash probabilities: marginal, first passage, Monte Carlo.
    Crash(Common),
    /// Down barrier put closed forms, greeks and a Monte Carlo check.
    PriceBarrier(Common),
    /// Swaption on the floating leg.
    PriceSwaption(Common),
    /// Scenario classification, event swap, price jump, stochastic equivalence.
    Scenario(Common),
    /// Repeated K-factor simulation and OLS alpha test.
    KfactorSim(Common),
    /// Check a config without running anything.
    Validate(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::SimulateBridge(c) => ("simulate-bridge", c),
            Command::Girsanov(c) => ("girsanov", c),
            Command::LocalTime(c) => ("local-time", c),
            Command::Crash(c) => ("crash", c),
            Command::PriceBarrier(c) => ("price-barrier", c),
            Command::PriceSwaption(c) => ("price-swaption", c),
            Command::Scenario(c) => ("scenario", c),
            Command::KfactorSim(c) => ("kfactor-sim", c),
            Command::Validate(c) => ("validate", c),
        }
    }
}

fn default_format(name: &str) -> Format {
    match name {
        "simulate-bridge" | "kfactor-sim" => Format::Csv,
        _ => Format::Json,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.parts();
    let started = Instant::now();

    let text = match fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", common.config.display());
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let mut cfg: Config = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    let out = common.out.clone().or_else(|| cfg.run.out.clone());
    let format = common.format.or(cfg.run.format).unwrap_or_else(|| default_format(name));

    let violations = config::validate(&cfg);
    if name == "validate" {
        let doc = json!({ "valid": violations.is_empty(), "violations": violations });
        for v in &violations {
            eprintln!("violation: {v}");
        }
        if let Err(e) = emit(&Artifact::single(json_bytes(&doc)), out.as_deref()) {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
        return if violations.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(EXIT_INVALID)
        };
    }
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        return ExitCode::from(EXIT_INVALID);
    }

    let result = match &cli.command {
        Command::SimulateBridge(_) => commands::simulate_bridge(&cfg, format),
        Command::Girsanov(_) => commands::girsanov(&cfg, format),
        Command::LocalTime(_) => commands::local_time(&cfg, format),
        Command::Crash(_) => commands::crash(&cfg, format),
        Command::PriceBarrier(_) => commands::price_barrier(&cfg, format),
        Command::PriceSwaption(_) => commands::price_swaption(&cfg, format),
        Command::Scenario(_) => commands::scenario(&cfg, format),
        Command::KfactorSim(_) => commands::kfactor_sim(&cfg, format),
        Command::Validate(_) => unreachable!(),
    };
    let artifact = match result {
        Ok(a) => a,
        Err(RunError::Invalid(vs)) => {
            for v in &vs {
                eprintln!("violation: {v}");
            }
            return ExitCode::from(EXIT_INVALID);
        }
        Err(RunError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let records = match emit(&artifact, out.as_deref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    if let Some(out) = &out {
        let manifest = Manifest {
            subcommand: name.to_string(),
            config_sha256: sha256_hex(text.as_bytes()),
            seed: cfg.run.seed,
            format: format!("{format:?}").to_lowercase(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            generator: zeroset::rng::GENERATOR_ID.to_string(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            outputs: records,
        };
        if let Err(e) = write_manifest(out, &manifest) {
            eprintln!("error: cannot write manifest: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    ExitCode::SUCCESS
}
