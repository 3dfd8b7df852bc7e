//! Command-line front end: argument parsing, configuration resolution and
//! run-directory bookkeeping around the `photoconv-core` library.

pub mod args;
pub mod commands;
pub mod output;

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use photoconv_core::config::ExperimentConfig;
use photoconv_core::noise::RetrainScope;

pub use args::{Cli, Command, ScopeArg};
pub use commands::{Outcome, RunContext};
pub use output::RunDir;

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";

/// Reads the configuration file (if any) and applies command-line overrides.
/// Precedence is flag, then file, then built-in default.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml_str(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed.or(cfg.seed) {
        cfg.apply_seed(seed);
    }
    if let Some(preset) = &cli.preset {
        cfg.network.preset = Some(preset.clone());
        cfg.network.layers.clear();
    }
    if cli.desk_scale {
        cfg.train.epochs = 10;
        cfg.train.train_subset = Some(10_000);
        cfg.train.test_subset = Some(2_000);
    }
    if let Some(sigma) = cli.sigma {
        cfg.retrain.sigma = sigma;
    }
    if let Some(scope) = cli.scope {
        cfg.retrain.scope = scope_of(scope);
    }
    cfg.validate()?;
    cfg.network.stack()?;
    Ok(cfg)
}

fn scope_of(arg: ScopeArg) -> RetrainScope {
    match arg {
        ScopeArg::Final => RetrainScope::FinalLayerOnly,
        ScopeArg::Full => RetrainScope::Full,
    }
}

/// Output directory: `--out`, then `output_dir` from the file, then
/// `runs/<command>`.
pub fn output_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(cli.command.name()))
}

/// Runs one subcommand end to end and returns its report.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let config = resolve_config(cli)?;
    let mut dir = RunDir::create(&output_dir(cli, &config))?;
    dir.write(RESOLVED_CONFIG, config.to_toml_string()?.as_bytes())?;
    let ctx = RunContext {
        config,
        data_dir: cli.data_dir.clone(),
    };
    let sigma = cli.sigma;
    let scope = cli.scope.map(scope_of);
    let mut outcome = match &cli.command {
        Command::Design { sweep } => commands::design(&ctx, *sweep, &mut dir)?,
        Command::Train => commands::train_cmd(&ctx, &mut dir)?,
        Command::Evaluate { checkpoint } => commands::evaluate_cmd(&ctx, checkpoint, &mut dir)?,
        Command::Noise { checkpoint } => commands::noise_cmd(&ctx, checkpoint.as_deref(), sigma, &mut dir)?,
        Command::Retrain { checkpoint } => commands::retrain_cmd(&ctx, checkpoint.as_deref(), sigma, scope, &mut dir)?,
        Command::Footprint { ports } => commands::footprint_cmd(&ctx, *ports, &mut dir)?,
        Command::Gradcheck => commands::gradcheck_cmd(&ctx, &mut dir)?,
        Command::Sweep => commands::sweep_cmd(&ctx, &mut dir)?,
    };
    let root = dir.root().to_path_buf();
    let manifest = dir.finish()?;
    outcome.lines.push(format!("output = {}", root.display()));
    log::debug!("manifest written to {}", manifest.display());
    Ok(outcome)
}
