//! Run configuration: command-line flags merged over an optional JSON file.
//!
//! Defaults used when neither source sets a value:
//!
//! | setting                | default      |
//! |------------------------|--------------|
//! | `nmax`                 | `1e5`        |
//! | `ppo`                  | `4`          |
//! | `picture`              | `manifold`   |
//! | `normalization`        | `dimension`  |
//! | `divergence-threshold` | `0.1`        |
//! | `vanishing-ratio`      | `1e-3`       |
//! | `laplacian-order`      | `2`          |
//! | `a`, `b`               | `-e`, `1`    |
//! | `alpha`                | `zero`       |
//! | `order`                | `1`          |
//! | `dim`                  | `1` (boundary Weyl cutoff) |
//! | `sigma`                | `inverse` (`eigenvalue` for `parametrix`) |
//! | `samples`              | `64`         |
//! | `s-grid`               | `0,0.5,1,1.5,2,3` |
//! | `tail-ratio`           | `0.9`        |
//! | `cutoff`               | `50`         |
//! | `cap`                  | `10000`      |
//! | `oracle-tol`           | `1e-9`       |

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, ValueEnum};
use serde::{Deserialize, Serialize};

pub const DEFAULT_NMAX: f64 = 1e5;
pub const DEFAULT_PPO: u32 = 4;
pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_S_GRID: &str = "0,0.5,1,1.5,2,3";
pub const DEFAULT_CUTOFF: f64 = 50.0;
pub const DEFAULT_CAP: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Trace,
    Residue,
    Quasinorm,
    Weyl,
    Boundary,
    Parametrix,
    OracleCheck,
    S0Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PictureArg {
    Manifold,
    Group,
    Homogeneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationArg {
    Dimension,
    LogCount,
    Unit,
}

#[derive(Parser, Debug)]
#[command(name = "dixtrace", version, about = "Dixmier traces and residues of Fourier multipliers")]
pub struct Cli {
    /// What to compute; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// JSON file with the same keys as the long flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Worker threads for the summation engine.
    #[arg(long, env = "DIXTRACE_THREADS")]
    pub threads: Option<usize>,

    #[command(flatten)]
    pub run: RunConfig,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct RunConfig {
    #[arg(skip)]
    pub command: Option<Command>,

    /// torus:N, su2, so3, su3, sphere:N or file:PATH
    #[arg(long)]
    pub geometry: Option<String>,
    /// e.g. bessel:3:2, radial:1, power:1:1, shifted:0.5:1, const:2,
    /// table-diag:PATH, table-full:PATH; terms joined by `+`, scaled by `c*`,
    /// `@mask` suffix for class-one masking
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long, value_enum)]
    pub picture: Option<PictureArg>,
    #[arg(long)]
    pub nmax: Option<f64>,
    /// Grid points per octave.
    #[arg(long)]
    pub ppo: Option<u32>,
    /// Order of the Laplacian power defining the weight of a file geometry.
    #[arg(long)]
    pub laplacian_order: Option<f64>,

    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_integral: Option<f64>,
    /// Torus density for quadrature, e.g. `2+0.5*cos:1+sin2:0,1`.
    #[arg(long)]
    pub density: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,

    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// zero, power:C:EPS or table:PATH
    #[arg(long)]
    pub alpha: Option<String>,
    /// Operator order m of the boundary model.
    #[arg(long)]
    pub order: Option<f64>,
    /// Manifold dimension for boundary Weyl cutoffs and file geometries.
    #[arg(long)]
    pub dim: Option<u32>,
    #[arg(long)]
    pub jmax: Option<u64>,
    /// Table file with lines `j re(λ) im(λ) re(σ) im(σ)`.
    #[arg(long)]
    pub boundary_symbol: Option<PathBuf>,
    /// inverse, eigenvalue, const:C or abs-power:S
    #[arg(long)]
    pub sigma: Option<String>,
    /// Cut on |λ|^{1/m} instead of the enumeration index.
    #[arg(long)]
    #[serde(default)]
    pub weyl: bool,
    #[arg(long)]
    pub s_grid: Option<String>,
    #[arg(long)]
    pub tail_ratio: Option<f64>,

    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub cap: Option<usize>,
    /// Assemble the full truncated matrix (dimension ≤ 300).
    #[arg(long)]
    #[serde(default)]
    pub dense: bool,
    #[arg(long)]
    pub oracle_tol: Option<f64>,

    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
    #[arg(long)]
    pub divergence_threshold: Option<f64>,
    #[arg(long)]
    pub vanishing_ratio: Option<f64>,

    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// `top` wins wherever it sets a value.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        overlay!(self, top;
            command, geometry, symbol, picture, nmax, ppo, laplacian_order, p, a_integral, density,
            samples, a, b, alpha, order, dim, jmax, boundary_symbol, sigma, s_grid, tail_ratio,
            cutoff, cap, oracle_tol, normalization, divergence_threshold, vanishing_ratio, csv, json,
        );
        self.weyl |= top.weyl;
        self.dense |= top.dense;
        self
    }
}

impl Cli {
    pub fn resolve(self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::read(path)?,
            None => RunConfig::default(),
        };
        let mut flags = self.run;
        flags.command = self.command;
        let merged = base.overlay(flags);
        if merged.command.is_none() {
            anyhow::bail!("no command given (on the command line or as \"command\" in the config file)");
        }
        Ok(merged)
    }
}
