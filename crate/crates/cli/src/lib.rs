//! Command-line front end for dependent Dirichlet process fits: data
//! ingestion, single fits, `(q, c)` grids, prior and urn simulation, and
//! self-checks against closed forms.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::SimMode;
pub use config::{DataFormat, Precision, RunConfig};
pub use dataset::Dataset;
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "ddp",
    version,
    about = "Dependent Dirichlet process fits on a finite partition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a dataset and report T, m_t and the value range.
    Ingest(CommonArgs),
    /// Fit one configuration; writes summary.csv and stats.json.
    Fit(CommonArgs),
    /// Fit every (q, c) cell of a moving-average grid; writes grid.csv.
    Grid(CommonArgs),
    /// Draw from the prior or generate urn sequences without data.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "prior")]
        mode: SimMode,
    },
    /// Compare Monte Carlo and sampler output with closed forms.
    Check(CommonArgs),
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the configured seed; DDP_SEED is used when neither is set.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Number of bins.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub c0: Option<f64>,
    /// Latent count sizes: one value, or a comma list (per index for fit,
    /// grid values for grid).
    #[arg(long)]
    pub c: Option<String>,
    /// Moving-average order, or a comma list of orders for grid.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
    /// Also write every stored draw to chain.csv.
    #[arg(long)]
    pub chain: bool,
    /// Number of indices when there is no dataset.
    #[arg(long)]
    pub series: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Prior draws written by simulate.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Observations per index written by simulate.
    #[arg(long)]
    pub n_per_t: Option<usize>,
    /// Monte Carlo replicates used by check.
    #[arg(long)]
    pub replicates: Option<usize>,
}

/// Load the config file (or defaults), apply flag overrides, resolve the
/// seed and validate. `grid` routes `--q`/`--c` lists to the grid keys.
pub fn resolve_config(args: &CommonArgs, grid: bool, env_seed: Option<&str>) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = args.$field.clone() {
                cfg.$field = v.into();
            }
        )*};
    }
    set!(iterations, burn_in, thin, k, c0, nu, format, series, draws, n_per_t, replicates);
    if let Some(v) = &args.out {
        cfg.out = v.clone();
    }
    if args.data.is_some() {
        cfg.data = args.data.clone();
    }
    if args.x_min.is_some() {
        cfg.x_min = args.x_min;
    }
    if args.x_max.is_some() {
        cfg.x_max = args.x_max;
    }
    if args.chain {
        cfg.chain_dump = true;
    }
    if let Some(text) = &args.c {
        let list = config::parse_list::<u32>(text, "c")?;
        if grid {
            cfg.grid_c = list;
        } else {
            cfg.c = if list.len() == 1 {
                Precision::Constant(list[0])
            } else {
                Precision::PerIndex(list)
            };
        }
    }
    if let Some(text) = &args.q {
        let list = config::parse_list::<usize>(text, "q")?;
        if grid {
            cfg.grid_q = list;
        } else if list.len() == 1 {
            cfg.q = list[0];
        } else {
            return Err(CliError::Config("--q takes a single order outside grid".into()));
        }
    }
    cfg.seed = Some(config::resolve_seed(args.seed, cfg.seed, env_seed)?);
    cfg.validate()?;
    Ok(cfg)
}

fn load_data(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg
        .data
        .as_ref()
        .ok_or_else(|| CliError::Config("no dataset given (--data or data = ...)".into()))?;
    dataset::ingest(path, cfg.format)
}

/// Execute one command, writing the human-readable report to `log`.
pub fn run(cli: &Cli, env_seed: Option<&str>, log: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Ingest(args) => {
            let cfg = resolve_config(args, false, env_seed)?;
            let ds = load_data(&cfg)?;
            let _ = writeln!(log, "{ds}");
        }
        Command::Fit(args) => {
            let cfg = resolve_config(args, false, env_seed)?;
            let ds = load_data(&cfg)?;
            commands::fit(&cfg, &ds, log)?;
        }
        Command::Grid(args) => {
            let cfg = resolve_config(args, true, env_seed)?;
            let ds = load_data(&cfg)?;
            commands::grid(&cfg, &ds, log)?;
        }
        Command::Simulate { common, mode } => {
            let cfg = resolve_config(common, false, env_seed)?;
            commands::simulate(&cfg, *mode, log)?;
        }
        Command::Check(args) => {
            let cfg = resolve_config(args, false, env_seed)?;
            let ds = cfg.data.as_ref().map(|_| load_data(&cfg)).transpose()?;
            commands::check(&cfg, ds.as_ref(), log)?;
        }
    }
    Ok(())
}
