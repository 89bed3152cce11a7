//! The `fit`, `grid`, `simulate` and `check` pipelines.

use std::io::Write;
use std::path::Path;

use ddp_core::stats::{mean_se, mean_var, variance_se};
use ddp_core::{
    base_masses, build_partition, corr_same_set, default_base_params, exact_posterior_small, marginal_moments,
    mc_correlation, run_gibbs, sample_prior, simulate_sequences, summarize, Chain64, Data64, DdpError, FitSummary,
    Model64, Params64, Partition64, RngStream, RunError,
};
use rayon::prelude::*;

use crate::config::{Precision, RunConfig, StructureKind};
use crate::dataset::Dataset;
use crate::error::{CliError, Result};
use crate::output::{self, FitStats, GridRow};

/// Partition, centring measure and model for one configuration and dataset.
pub struct Prepared {
    pub partition: Partition64,
    pub mu0: f64,
    pub sigma0: f64,
    pub model: Model64,
    pub data: Data64,
}

fn bounds(cfg: &RunConfig, ds: &Dataset) -> Result<(f64, f64)> {
    let (lo, hi) = ds.range();
    let (x_min, x_max) = (cfg.x_min.unwrap_or(lo), cfg.x_max.unwrap_or(hi));
    if lo < x_min || hi > x_max {
        return Err(CliError::Data(format!(
            "observations span [{lo}, {hi}], outside the configured bounds [{x_min}, {x_max}]"
        )));
    }
    if x_min >= x_max {
        return Err(CliError::Data(format!(
            "all observations equal {lo}; set x_min and x_max to fix the partition"
        )));
    }
    Ok((x_min, x_max))
}

fn centring(cfg: &RunConfig, sample: &[f64]) -> Result<(f64, f64)> {
    match (cfg.mu0, cfg.sigma0) {
        (Some(m), Some(s)) => Ok((m, s)),
        _ => default_base_params(sample).map_err(CliError::from_data),
    }
}

fn build_model(
    cfg: &RunConfig,
    partition: &Partition64,
    mu0: f64,
    sigma0: f64,
    len: usize,
    q: usize,
    c: &Precision,
) -> Result<Model64> {
    let base = base_masses(mu0, sigma0, partition).map_err(CliError::from_model)?;
    let params = Params64::new(cfg.c0, c.expand(len)?).map_err(CliError::from_model)?;
    let structure = cfg.structure_for(len, q)?;
    Model64::new(params, structure, base).map_err(CliError::from_model)
}

pub fn prepare(cfg: &RunConfig, ds: &Dataset, q: usize, c: &Precision) -> Result<Prepared> {
    let (x_min, x_max) = bounds(cfg, ds)?;
    let partition = build_partition(x_min, x_max, cfg.k).map_err(CliError::from_model)?;
    let (mu0, sigma0) = centring(cfg, &ds.all_values())?;
    let model = build_model(cfg, &partition, mu0, sigma0, ds.len(), q, c)?;
    let data = Data64::from_values(ds.series.clone(), &partition).map_err(CliError::from_data)?;
    Ok(Prepared {
        partition,
        mu0,
        sigma0,
        model,
        data,
    })
}

fn seed_of(cfg: &RunConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

/// Runs the chain; a numeric failure leaves the partial chain and the
/// failing state in `out` before returning.
fn run_chain(cfg: &RunConfig, prep: &Prepared, seed: u64, dump_dir: Option<&Path>) -> Result<Chain64> {
    match run_gibbs(&prep.data, &prep.model, &cfg.gibbs(seed)) {
        Ok(chain) => Ok(chain),
        Err(RunError::Setup(e)) => Err(CliError::from_model(e)),
        Err(RunError::Numeric(failure)) => {
            if let Some(dir) = dump_dir {
                output::ensure_dir(dir)?;
                output::write_states(
                    &dir.join("chain_partial.csv"),
                    "iteration",
                    &failure.partial.iterations,
                    &failure.partial.draws,
                )?;
                output::write_states(
                    &dir.join("failure_state.csv"),
                    "iteration",
                    &[failure.iteration],
                    &[failure.state.clone()],
                )?;
            }
            Err(CliError::Numeric(failure.to_string()))
        }
    }
}

fn summarise(chain: &Chain64, prep: &Prepared, nu: f64) -> Result<FitSummary> {
    summarize(chain, &prep.data, &prep.partition, nu).map_err(|e| match e {
        DdpError::InvalidArgument(m) | DdpError::DimensionMismatch(m) => CliError::Data(m),
        other => CliError::Numeric(other.to_string()),
    })
}

pub fn fit(cfg: &RunConfig, ds: &Dataset, log: &mut dyn Write) -> Result<FitSummary> {
    let prep = prepare(cfg, ds, cfg.q, &cfg.c)?;
    let chain = run_chain(cfg, &prep, seed_of(cfg), Some(&cfg.out))?;
    let summary = summarise(&chain, &prep, cfg.nu)?;

    output::ensure_dir(&cfg.out)?;
    output::write_summary(&cfg.out.join("summary.csv"), &summary, &prep.partition)?;
    let rates = chain.acceptance_rates();
    let stats = FitStats {
        lpml_log: summary.lpml.lpml_log,
        lpml_paper: summary.lpml.lpml_paper,
        lmea: summary.lmea(),
        nu: cfg.nu,
        lmea_variance: summary.lmeasure.variance,
        lmea_bias: summary.lmeasure.bias,
        zero_density: summary.lpml.zero_density,
        acceptance_rates: rates.clone(),
        draws: chain.len(),
        series: prep.model.len(),
        bins: prep.model.bins(),
        x_min: prep.partition.left(0),
        x_max: prep.partition.right(prep.partition.bins() - 1),
        mu0: prep.mu0,
        sigma0: prep.sigma0,
        g_mean: &summary.g_mean,
        config: cfg,
    };
    output::write_json(&cfg.out.join("stats.json"), &stats)?;
    if cfg.chain_dump {
        output::write_states(&cfg.out.join("chain.csv"), "iteration", &chain.iterations, &chain.draws)?;
    }

    let shown: Vec<String> = rates
        .iter()
        .map(|r| r.map_or_else(|| "-".to_string(), |r| format!("{r:.4}")))
        .collect();
    let _ = writeln!(log, "draws        {}", chain.len());
    let _ = writeln!(log, "lpml_log     {}", summary.lpml.lpml_log);
    let _ = writeln!(log, "lpml_paper   {}", summary.lpml.lpml_paper);
    let _ = writeln!(log, "lmea({})    {}", cfg.nu, summary.lmea());
    let _ = writeln!(log, "acceptance   {}", shown.join(" "));
    Ok(summary)
}

/// Cells ordered by `(c, q)`.
pub fn grid_cells(cfg: &RunConfig) -> Vec<(usize, u32)> {
    let mut cells: Vec<(usize, u32)> = cfg
        .grid_c
        .iter()
        .flat_map(|&c| cfg.grid_q.iter().map(move |&q| (q, c)))
        .collect();
    cells.sort_by_key(|&(q, c)| (c, q));
    cells.dedup();
    cells
}

/// Seed of one cell, determined by the run seed and the cell's `(q, c)`.
pub fn cell_seed(seed: u64, q: usize, c: u32) -> u64 {
    RngStream::seeded(seed).derive_seed(((q as u64) << 32) | c as u64)
}

fn grid_cell(cfg: &RunConfig, ds: &Dataset, q: usize, c: u32) -> Result<(f64, f64, f64)> {
    let prep = prepare(cfg, ds, q, &Precision::Constant(c))?;
    let chain = run_chain(cfg, &prep, cell_seed(seed_of(cfg), q, c), None)?;
    let s = summarise(&chain, &prep, cfg.nu)?;
    Ok((s.lpml.lpml_log, s.lpml.lpml_paper, s.lmea()))
}

pub fn grid(cfg: &RunConfig, ds: &Dataset, log: &mut dyn Write) -> Result<Vec<GridRow>> {
    if cfg.structure != StructureKind::Ma {
        return Err(CliError::Config("grid needs structure = \"ma\"".into()));
    }
    if cfg.grid_q.is_empty() || cfg.grid_c.is_empty() {
        return Err(CliError::Config("grid_q and grid_c must be nonempty".into()));
    }
    // Surface configuration and data problems before any cell runs.
    let (q0, c0) = grid_cells(cfg)[0];
    prepare(cfg, ds, q0, &Precision::Constant(c0))?;

    let rows: Vec<GridRow> = grid_cells(cfg)
        .into_par_iter()
        .map(|(q, c)| match grid_cell(cfg, ds, q, c) {
            Ok((lpml_log, lpml_paper, lmea)) => GridRow {
                q,
                c,
                lpml_log,
                lpml_paper,
                lmea,
                status: "ok".into(),
            },
            Err(e) => GridRow {
                q,
                c,
                lpml_log: f64::NAN,
                lpml_paper: f64::NAN,
                lmea: f64::NAN,
                status: e.to_string(),
            },
        })
        .collect();

    output::ensure_dir(&cfg.out)?;
    output::write_grid(&cfg.out.join("grid.csv"), &rows)?;
    for r in &rows {
        let _ = writeln!(
            log,
            "q={:<3} c={:<5} lpml_log={:<22} lmea={} {}",
            r.q, r.c, r.lpml_log, r.lmea, r.status
        );
    }
    if let Some(best) = best_cell(&rows) {
        let _ = writeln!(log, "best by lpml_log: q={} c={}", best.q, best.c);
    }
    Ok(rows)
}

/// The successful cell with the largest `lpml_log`; ties go to the earlier row.
pub fn best_cell(rows: &[GridRow]) -> Option<&GridRow> {
    rows.iter()
        .filter(|r| r.lpml_log.is_finite())
        .fold(None, |best: Option<&GridRow>, r| match best {
            Some(b) if b.lpml_log >= r.lpml_log => Some(b),
            _ => Some(r),
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SimMode {
    Prior,
    Sequences,
}

/// Model for data-free runs: explicit bounds, `T` from the configuration.
pub fn synthetic_model(cfg: &RunConfig) -> Result<(Model64, Partition64)> {
    let (Some(x_min), Some(x_max)) = (cfg.x_min, cfg.x_max) else {
        return Err(CliError::Config("simulation needs explicit x_min and x_max".into()));
    };
    let len = cfg
        .configured_len()
        .ok_or_else(|| CliError::Config("simulation needs series (the number of indices)".into()))?;
    let partition = build_partition(x_min, x_max, cfg.k).map_err(CliError::from_model)?;
    let (mu0, sigma0) = centring(cfg, &[x_min, x_max])?;
    let model = build_model(cfg, &partition, mu0, sigma0, len, cfg.q, &cfg.c)?;
    Ok((model, partition))
}

pub fn simulate(cfg: &RunConfig, mode: SimMode, log: &mut dyn Write) -> Result<()> {
    let (model, partition) = synthetic_model(cfg)?;
    let root = RngStream::seeded(seed_of(cfg));
    output::ensure_dir(&cfg.out)?;
    match mode {
        SimMode::Prior => {
            let states: Vec<_> = (0..cfg.draws)
                .into_par_iter()
                .map(|i| sample_prior(&model, &mut root.substream(i as u64)).into())
                .collect();
            let labels: Vec<usize> = (1..=cfg.draws).collect();
            let path = cfg.out.join("prior.csv");
            output::write_states(&path, "draw", &labels, &states)?;
            let _ = writeln!(log, "wrote {} prior draws to {}", cfg.draws, path.display());
        }
        SimMode::Sequences => {
            let mut rng = root.substream(0);
            let seqs = simulate_sequences(&model, cfg.n_per_t, &mut rng);
            let values = seqs.values(&partition, &mut rng);
            let path = cfg.out.join("sequences.csv");
            output::write_long_values(&path, &values)?;
            let _ = writeln!(
                log,
                "wrote {} x {} observations to {}",
                model.len(),
                cfg.n_per_t,
                path.display()
            );
        }
    }
    Ok(())
}

/// One line of the `check` report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: Option<bool>,
    pub detail: String,
}

fn check_line(name: String, passed: Option<bool>, detail: String) -> CheckLine {
    CheckLine { name, passed, detail }
}

/// Model for `check`: from the dataset when there is one, otherwise from the
/// configuration with a uniform centring measure unless bounds are set.
fn check_model(cfg: &RunConfig, ds: Option<&Dataset>) -> Result<(Model64, Option<Prepared>)> {
    if let Some(ds) = ds {
        let prep = prepare(cfg, ds, cfg.q, &cfg.c)?;
        return Ok((prep.model.clone(), Some(prep)));
    }
    if cfg.x_min.is_some() && cfg.x_max.is_some() {
        return Ok((synthetic_model(cfg)?.0, None));
    }
    let len = cfg
        .configured_len()
        .ok_or_else(|| CliError::Config("check needs data or series".into()))?;
    let params = Params64::new(cfg.c0, cfg.c.expand(len)?).map_err(CliError::from_model)?;
    let base = vec![1.0 / cfg.k as f64; cfg.k];
    let model = Model64::new(params, cfg.structure_for(len, cfg.q)?, base).map_err(CliError::from_model)?;
    Ok((model, None))
}

pub fn check(cfg: &RunConfig, ds: Option<&Dataset>, log: &mut dyn Write) -> Result<Vec<CheckLine>> {
    let (model, prep) = check_model(cfg, ds)?;
    let reps = cfg.replicates.max(ddp_core::prior::MIN_REPLICATES);
    let root = RngStream::seeded(seed_of(cfg));
    let mut lines = Vec::new();

    // Marginal law of F_1(B_1).
    let b = model.base()[0];
    if b < 1.0 {
        let mut rng = root.substream(0);
        let xs: Vec<f64> = (0..reps).map(|_| sample_prior(&model, &mut rng).f[0].get(0)).collect();
        let (m, v) = mean_var(&xs);
        let (em, ev) = marginal_moments(b, cfg.c0).map_err(CliError::from_model)?;
        let (sm, sv) = (mean_se(&xs), variance_se(&xs));
        let ok = (m - em).abs() <= 3.0 * sm && (v - ev).abs() <= 3.0 * sv;
        lines.push(check_line(
            "marginal F_1(B_1)".into(),
            Some(ok),
            format!("mean {m:.5} vs {em:.5} (se {sm:.1e}), var {v:.5} vs {ev:.5} (se {sv:.1e})"),
        ));
    }

    // Analytic vs Monte Carlo correlation for the first few adjacent pairs.
    let params = model.params();
    for t in 0..model.len().saturating_sub(1).min(3) {
        let analytic = corr_same_set(t, t + 1, params, model.structure()).map_err(CliError::from_model)?;
        let est = mc_correlation(&model, t, t + 1, 0, reps, &mut root.substream(1 + t as u64))
            .map_err(CliError::from_model)?;
        lines.push(check_line(
            format!("corr F_{}(B_1), F_{}(B_1)", t + 1, t + 2),
            Some(est.covers(analytic, 3.0)),
            format!("analytic {analytic:.5}, mc {:.5} (se {:.1e})", est.estimate, est.se),
        ));
    }

    // Gibbs sampler against exact enumeration on small instances.
    if let Some(prep) = prep {
        match exact_posterior_small(&prep.data, &prep.model) {
            Ok(exact) => {
                let chain = run_chain(cfg, &prep, seed_of(cfg), None)?;
                let mut worst: f64 = 0.0;
                for t in 0..prep.model.len() {
                    for k in 0..prep.model.bins() {
                        let (m, _) = mean_var(&chain.f_trace(t, k));
                        worst = worst.max((m - exact.f_mean[t][k]).abs());
                    }
                }
                lines.push(check_line(
                    "gibbs vs enumeration".into(),
                    Some(worst < 0.01),
                    format!(
                        "max |mean - exact| = {worst:.5} over {} configurations",
                        exact.configurations
                    ),
                ));
            }
            Err(DdpError::StateSpaceTooLarge { size, limit }) => lines.push(check_line(
                "gibbs vs enumeration".into(),
                None,
                format!("skipped: {size} configurations exceed {limit}"),
            )),
            Err(e) => return Err(CliError::from_model(e)),
        }
    }

    for l in &lines {
        let tag = match l.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        let _ = writeln!(log, "{tag} {}: {}", l.name, l.detail);
    }
    let failed = lines.iter().filter(|l| l.passed == Some(false)).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(lines)
}
