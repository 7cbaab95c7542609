use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::info;
use otasec::check::{check_precoder, run_checks};
use otasec::config::{parse_methods, Config, ConfigError, FULL_TRIALS};
use otasec::design::{run_design, run_evaluate, ChannelSource, DesignRequest, Target, UsageError};
use otasec::output::{plot_csv, plot_path, summary_table, sweep_csv, write_atomic, MatrixDump};
use otasec::sweep::run_sweep_parallel;
use otasec_core::Error as CoreError;

const EXIT_INTERNAL: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// Secure over-the-air computation with zero-forced artificial noise.
#[derive(Parser, Debug)]
#[command(name = "otasec", version, about)]
struct Cli {
    /// TOML configuration file (defaults to the built-in reference setup).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set sweep.trials=100`. Applied
    /// after the file and the OTASEC__SECTION__KEY environment variables.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Seed for sampled channels and sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design scaling and precoder for one channel and print them.
    Design(DesignArgs),
    /// Design, then compare the closed-form levels with sampled estimates.
    Evaluate {
        #[command(flatten)]
        design: DesignArgs,
        /// Sampled transmissions.
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
    },
    /// Monte Carlo sweep over the receive-SNR grid.
    Sweep(SweepArgs),
    /// Structural invariants on sampled instances.
    Check {
        /// Sampled channel instances.
        #[arg(long, default_value_t = 200)]
        instances: u64,
        /// Also check a stored precoder dump for zero forcing.
        #[arg(long, value_name = "PATH")]
        precoder: Option<PathBuf>,
        /// Legitimate channel for `--precoder` when the dump has no `# h:` line.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        h: Option<Vec<f64>>,
    },
}

#[derive(Args, Debug)]
struct DesignArgs {
    /// MSE requirement at the legitimate receiver.
    #[arg(long, conflicts_with = "snr_db")]
    mu: Option<f64>,
    /// Receive SNR in dB.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Legitimate channel, comma-separated (sampled from the seed if absent).
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    /// Eavesdropper channel, comma-separated.
    #[arg(long, value_delimiter = ',', requires = "h")]
    g: Option<Vec<f64>>,
    /// Precoder method (overrides precoding.method).
    #[arg(long)]
    method: Option<String>,
    /// Scaling bound (overrides scaling.bound).
    #[arg(long)]
    bound: Option<String>,
    /// Write the precoder matrix to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    trials: Option<u64>,
    /// Paper-scale run with 1e6 trials.
    #[arg(long, conflicts_with = "trials")]
    full: bool,
    /// Comma-separated precoder methods.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_grid_db: Option<Vec<f64>>,
    /// Worker threads (0: one per core). Does not change the output.
    #[arg(long)]
    workers: Option<usize>,
    /// Long-format CSV output; the plot data goes next to it as NAME.plot.csv.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<ConfigError>() || cause.is::<UsageError>() {
            return EXIT_CONFIG;
        }
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::InfeasibleMse { .. }
                | CoreError::InfeasibleBudget { .. }
                | CoreError::InfeasibleScaling { .. } => EXIT_INFEASIBLE,
                CoreError::InvalidConfig(_) => EXIT_CONFIG,
                _ => EXIT_INTERNAL,
            };
        }
    }
    EXIT_INTERNAL
}

fn design_request(cfg: &Config, args: &DesignArgs, seed: Option<u64>) -> anyhow::Result<DesignRequest> {
    let target = match (args.mu.or(cfg.scaling.mu), args.snr_db.or(cfg.scaling.snr_db)) {
        (Some(mu), None) => Target::Mse(mu),
        (None, Some(db)) => Target::SnrDb(db),
        // Command-line flags win over the config file.
        (Some(mu), Some(_)) if args.mu.is_some() => Target::Mse(mu),
        (Some(_), Some(db)) if args.snr_db.is_some() => Target::SnrDb(db),
        _ => return Err(UsageError("give exactly one of --mu and --snr-db".into()).into()),
    };
    let mut cfg = cfg.clone();
    if let Some(m) = &args.method {
        cfg.precoding.method = m.clone();
    }
    if let Some(b) = &args.bound {
        cfg.scaling.bound = b.clone();
    }
    let channel = match &args.h {
        Some(h) => ChannelSource::Given {
            h: h.clone(),
            g: args.g.clone(),
        },
        None => ChannelSource::Sampled {
            seed: seed.unwrap_or(cfg.sweep.seed),
        },
    };
    Ok(DesignRequest {
        target,
        channel,
        method: cfg.method()?,
        bound: cfg.scaling_bound()?,
    })
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let config = Config::load(cli.config.as_deref(), std::env::vars(), &cli.overrides)?;
    let system = config.system_config()?;
    let proto = config.channel_protocol()?;
    match cli.command {
        Command::Design(args) => {
            let req = design_request(&config, &args, cli.seed)?;
            let out = run_design(&system, &proto, &req)?;
            print!("{}", out.render());
            if let Some(path) = &args.out {
                write_atomic(path, out.dump().render().as_bytes())?;
                info!("precoder written to {}", path.display());
            }
        }
        Command::Evaluate { design, draws } => {
            let req = design_request(&config, &design, cli.seed)?;
            let seed = cli.seed.unwrap_or(config.sweep.seed);
            let eval = run_evaluate(&system, &proto, &req, draws, seed)?;
            print!("{}", eval.render());
            if let Some(path) = &design.out {
                write_atomic(path, eval.design.dump().render().as_bytes())?;
            }
        }
        Command::Sweep(args) => {
            let mut spec = config.sweep_spec()?;
            if let Some(t) = args.trials {
                spec.trials = t;
            }
            if args.full {
                spec.trials = FULL_TRIALS;
            }
            if let Some(m) = &args.methods {
                spec.methods = parse_methods(m.iter().map(String::as_str))?;
            }
            if let Some(grid) = &args.snr_grid_db {
                spec.snr_grid_db = grid.clone();
            }
            if let Some(seed) = cli.seed {
                spec.master_seed = seed;
            }
            let workers = args.workers.unwrap_or(config.sweep.workers);
            let out = args.out.clone().unwrap_or_else(|| config.sweep.out.clone());
            info!(
                "sweep: {} SNR points x {} methods x {} trials",
                spec.snr_grid_db.len(),
                spec.methods.len(),
                spec.trials
            );
            let result = run_sweep_parallel(&system, &proto, &spec, workers)?;
            write_atomic(&out, &sweep_csv(&result)?).with_context(|| format!("writing {}", out.display()))?;
            let plot = plot_path(&out);
            write_atomic(&plot, &plot_csv(&result)?).with_context(|| format!("writing {}", plot.display()))?;
            print!("{}", summary_table(&result));
            println!("wrote {} and {}", out.display(), plot.display());
        }
        Command::Check { instances, precoder, h } => {
            let spec = config.sweep_spec()?;
            let seed = cli.seed.unwrap_or(config.sweep.seed);
            let mut report = run_checks(
                &system,
                &proto,
                &spec,
                config.scaling.mu,
                config.scaling.snr_db,
                config.scaling_bound()?,
                instances,
                seed,
            );
            if let Some(path) = precoder {
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let dump = MatrixDump::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
                let h = h
                    .or(dump.h.clone())
                    .ok_or_else(|| UsageError(format!("{} has no `# h:` line; pass --h", path.display())))?;
                report.items.push(check_precoder(&dump.matrix, &h));
            }
            print!("{}", report.render());
            if !report.passed() {
                return Ok(EXIT_INTERNAL);
            }
        }
    }
    Ok(0)
}
