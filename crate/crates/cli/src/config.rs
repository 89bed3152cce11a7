//! Run configuration: a flat TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use ddp_core::{GibbsConfig, MhPartner, NeighborStructure};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "DDP_SEED";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    /// `t,value` records with a header row.
    #[default]
    Long,
    /// One row of comma-separated values per index, no header.
    Wide,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    /// `∂_t = {t-q, ..., t}`.
    #[default]
    Ma,
    Circular,
    /// Undirected `edges` between indices.
    Spatial,
    /// Explicit neighbour `sets`.
    Custom,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partner {
    #[default]
    Weighted,
    LastBin,
}

impl From<Partner> for MhPartner {
    fn from(p: Partner) -> Self {
        match p {
            Partner::Weighted => MhPartner::Weighted,
            Partner::LastBin => MhPartner::LastBin,
        }
    }
}

/// Latent count sizes `c_t`: one value for every index, or one per index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Precision {
    Constant(u32),
    PerIndex(Vec<u32>),
}

impl Precision {
    pub fn expand(&self, len: usize) -> Result<Vec<u32>> {
        match self {
            Precision::Constant(c) => Ok(vec![*c; len]),
            Precision::PerIndex(v) if v.len() == len => Ok(v.clone()),
            Precision::PerIndex(v) => Err(CliError::Config(format!(
                "c lists {} values but there are {len} indices",
                v.len()
            ))),
        }
    }
}

/// Every setting of a run. Indices in `edges` and `sets` are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    pub format: DataFormat,
    pub out: PathBuf,

    pub structure: StructureKind,
    pub q: usize,
    pub edges: Vec<[usize; 2]>,
    pub sets: Vec<Vec<usize>>,
    /// Number of indices `T` when there is no dataset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<usize>,

    pub c0: f64,
    pub c: Precision,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,

    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub mh_moves: usize,
    pub mh_partner: Partner,
    pub nu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub chain_dump: bool,

    pub grid_q: Vec<usize>,
    pub grid_c: Vec<u32>,

    /// Prior draws written by `simulate --mode prior`.
    pub draws: usize,
    /// Observations per index written by `simulate --mode sequences`.
    pub n_per_t: usize,
    /// Monte Carlo replicates used by `check`.
    pub replicates: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let g = GibbsConfig::default();
        Self {
            data: None,
            format: DataFormat::Long,
            out: PathBuf::from("out"),
            structure: StructureKind::Ma,
            q: 1,
            edges: Vec::new(),
            sets: Vec::new(),
            series: None,
            c0: 0.1,
            c: Precision::Constant(10),
            k: 50,
            mu0: None,
            sigma0: None,
            x_min: None,
            x_max: None,
            iterations: g.iterations,
            burn_in: g.burn_in,
            thin: g.thin,
            mh_moves: g.mh_moves_per_sweep,
            mh_partner: Partner::Weighted,
            nu: 0.5,
            seed: None,
            chain_dump: false,
            grid_q: vec![1, 2, 3],
            grid_c: vec![5, 10, 15, 20],
            draws: 1000,
            n_per_t: 30,
            replicates: 50_000,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// Checks that do not need the dataset.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.c0.is_finite() && self.c0 > 0.0) {
            return bad(format!("c0 must be positive and finite, got {}", self.c0));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.nu) {
            return bad(format!("nu must lie in [0, 1], got {}", self.nu));
        }
        self.gibbs(0).validate().map_err(|e| CliError::Config(e.to_string()))?;
        match (self.mu0, self.sigma0) {
            (Some(_), None) | (None, Some(_)) => return bad("mu0 and sigma0 must be given together".into()),
            (Some(m), Some(s)) if !(m.is_finite() && s.is_finite() && s > 0.0) => {
                return bad(format!("need finite mu0 and positive sigma0, got {m}, {s}"))
            }
            _ => {}
        }
        if let (Some(lo), Some(hi)) = (self.x_min, self.x_max) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("need finite x_min < x_max, got {lo}, {hi}"));
            }
        }
        if let Precision::PerIndex(v) = &self.c {
            if v.is_empty() {
                return bad("c must not be an empty list".into());
            }
        }
        if self.structure == StructureKind::Custom && self.sets.is_empty() {
            return bad("structure = \"custom\" needs sets".into());
        }
        if self.series == Some(0) {
            return bad("series must be at least 1".into());
        }
        Ok(())
    }

    pub fn gibbs(&self, seed: u64) -> GibbsConfig {
        GibbsConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            mh_moves_per_sweep: self.mh_moves,
            mh_partner: self.mh_partner.into(),
            seed,
        }
    }

    /// The neighbour structure over `len` indices, with `q` overriding the
    /// configured moving-average order.
    pub fn structure_for(&self, len: usize, q: usize) -> Result<NeighborStructure> {
        let to_zero = |i: usize| -> Result<usize> {
            if i == 0 || i > len {
                Err(CliError::Config(format!("index {i} outside 1..={len}")))
            } else {
                Ok(i - 1)
            }
        };
        let built = match self.structure {
            StructureKind::Ma => NeighborStructure::moving_average(len, q),
            StructureKind::Circular => NeighborStructure::circular(len),
            StructureKind::Spatial => {
                let edges = self
                    .edges
                    .iter()
                    .map(|&[a, b]| Ok((to_zero(a)?, to_zero(b)?)))
                    .collect::<Result<Vec<_>>>()?;
                NeighborStructure::spatial(len, &edges)
            }
            StructureKind::Custom => {
                if self.sets.len() != len {
                    return Err(CliError::Config(format!(
                        "{} neighbour sets for {len} indices",
                        self.sets.len()
                    )));
                }
                let sets = self
                    .sets
                    .iter()
                    .map(|s| s.iter().map(|&i| to_zero(i)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                NeighborStructure::custom(sets)
            }
        };
        built.map_err(|e| CliError::Config(e.to_string()))
    }

    /// Index count implied by the configuration alone.
    pub fn configured_len(&self) -> Option<usize> {
        self.series
            .or(match &self.c {
                Precision::PerIndex(v) => Some(v.len()),
                Precision::Constant(_) => None,
            })
            .or((self.structure == StructureKind::Custom).then_some(self.sets.len()))
    }
}

/// Seed precedence: flag, then the config file, then `DDP_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        None => Ok(0),
    }
}

/// Parses `"10"` or `"5,10,20"`.
pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Config(format!("{what} list is empty")));
    }
    items
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("invalid {what} value {s:?}")))
        })
        .collect()
}
