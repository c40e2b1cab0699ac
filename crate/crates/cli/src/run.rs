use std::f64::consts::E;

use anyhow::{bail, Context, Result};
use dixtrace::boundary::{
    boundary_dixmier_weyl, boundary_series, boundary_weyl_series, interval_spectrum, s0_summability_check,
    BoundarySymbol, IntervalBC, S0_TAIL_RATIO,
};
use dixtrace::oracle::{compare_symbol_vs_oracle, OracleMode, OracleOptions, DEFAULT_TOLERANCE};
use dixtrace::summation::{dyadic_grid, partial_sums, weyl_fit};
use dixtrace::trace::{
    dixmier_estimate_with, measurability_probe, quasinorm, residue_factored, torus_density_integral, DixmierOptions,
    Normalization,
};
use dixtrace::{Geometry, GeometryKind, PartialSumSeries, Picture, SymbolSpec, Verdict};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{
    Command, NormalizationArg, PictureArg, RunConfig, DEFAULT_CAP, DEFAULT_CUTOFF, DEFAULT_NMAX, DEFAULT_PPO,
    DEFAULT_SAMPLES, DEFAULT_S_GRID,
};
use crate::parse::{self, Sigma};

pub const SCHEMA_VERSION: u32 = 1;

pub struct Outcome {
    pub summary: String,
    pub result: Value,
    /// Computed, but divergent, unstable or failing its check.
    pub flagged: bool,
    pub series: Option<PartialSumSeries>,
}

impl Outcome {
    pub fn document(&self, cfg: &RunConfig) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": cfg.command,
            "config": cfg,
            "flagged": self.flagged,
            "result": self.result,
        })
    }
}

fn require<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().with_context(|| format!("--{flag} is required for this command"))
}

fn laplacian_order(cfg: &RunConfig) -> f64 {
    cfg.laplacian_order.unwrap_or(2.0)
}

fn geometry(cfg: &RunConfig) -> Result<Geometry> {
    parse::geometry(require(&cfg.geometry, "geometry")?, cfg.dim, laplacian_order(cfg))
}

fn symbol(cfg: &RunConfig, g: &Geometry) -> Result<SymbolSpec> {
    parse::symbol(require(&cfg.symbol, "symbol")?, g.laplacian_order())
}

fn grid(cfg: &RunConfig) -> Result<Vec<f64>> {
    Ok(dyadic_grid(cfg.nmax.unwrap_or(DEFAULT_NMAX), cfg.ppo.unwrap_or(DEFAULT_PPO))?)
}

fn picture(cfg: &RunConfig) -> Picture {
    match cfg.picture.unwrap_or(PictureArg::Manifold) {
        PictureArg::Manifold => Picture::Manifold,
        PictureArg::Group => Picture::Group,
        PictureArg::Homogeneous => Picture::Homogeneous,
    }
}

fn dixmier_options(cfg: &RunConfig, default: Normalization) -> DixmierOptions {
    let mut o = DixmierOptions::with_normalization(match cfg.normalization {
        None => default,
        Some(NormalizationArg::Dimension) => Normalization::Dimension,
        Some(NormalizationArg::LogCount) => Normalization::LogCount,
        Some(NormalizationArg::Unit) => Normalization::Unit,
    });
    if let Some(t) = cfg.divergence_threshold {
        o.divergence_threshold = t;
    }
    if let Some(r) = cfg.vanishing_ratio {
        o.vanishing_ratio = r;
    }
    o
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.context("no command")? {
        Command::Trace => trace(cfg),
        Command::Residue => residue(cfg),
        Command::Quasinorm => quasi(cfg),
        Command::Weyl => weyl(cfg),
        Command::Boundary => boundary(cfg, false),
        Command::Parametrix => boundary(cfg, true),
        Command::OracleCheck => oracle(cfg),
        Command::S0Check => s0(cfg),
    }
}

fn trace(cfg: &RunConfig) -> Result<Outcome> {
    let g = geometry(cfg)?;
    let spec = symbol(cfg, &g)?;
    let series = partial_sums(&g, &spec, &grid(cfg)?, picture(cfg))?;
    let est = dixmier_estimate_with(&series, &dixmier_options(cfg, Normalization::Dimension))?;
    let dispersion = if series.len() >= 8 { measurability_probe(&series).ok() } else { None };
    Ok(Outcome {
        summary: format!(
            "{} {} on {}: tau = {:.10} ({:?}), naive {:.10}, fit residual {:.2e}",
            g.kind(),
            spec,
            series.picture_name(),
            est.value,
            est.verdict,
            est.naive_last,
            est.fit_residual
        ),
        result: json!({ "estimate": est, "dispersion": dispersion }),
        flagged: est.verdict == Verdict::Divergent,
        series: Some(series),
    })
}

trait PictureName {
    fn picture_name(&self) -> String;
}

impl PictureName for PartialSumSeries {
    fn picture_name(&self) -> String {
        serde_json::to_value(self.picture)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }
}

fn residue(cfg: &RunConfig) -> Result<Outcome> {
    let g = geometry(cfg)?;
    let spec = symbol(cfg, &g)?;
    let a_integral = match (cfg.a_integral, &cfg.density) {
        (Some(a), None) => a,
        (None, Some(d)) => {
            let GeometryKind::Torus(n) = g.kind() else {
                bail!("--density quadrature is only available on tori; pass --a-integral for {}", g.kind());
            };
            let density = parse::density(d, *n as usize)?;
            torus_density_integral(cfg.samples.unwrap_or(DEFAULT_SAMPLES), *n as usize, |x| density.eval(x))?
        }
        (Some(_), Some(_)) => bail!("give either --a-integral or --density, not both"),
        (None, None) => bail!("residue needs --a-integral or --density"),
    };
    let series = partial_sums(&g, &spec, &grid(cfg)?, Picture::Group)?;
    let est = residue_factored(a_integral, &series)?;
    Ok(Outcome {
        summary: format!(
            "res = {:.10} ({:?}) with integral of a = {a_integral:.10}",
            est.value, est.verdict
        ),
        result: json!({ "a_integral": a_integral, "estimate": est }),
        flagged: est.verdict == Verdict::Divergent,
        series: Some(series),
    })
}

fn quasi(cfg: &RunConfig) -> Result<Outcome> {
    let p = *require(&cfg.p, "p")?;
    let g = geometry(cfg)?;
    let spec = symbol(cfg, &g)?;
    let series = partial_sums(&g, &spec, &grid(cfg)?, picture(cfg))?;
    let q = quasinorm(&series, p)?;
    Ok(Outcome {
        summary: format!(
            "gamma_{p} = {:.10} at N = {}, {}",
            q.gamma,
            q.argmax_cutoff,
            if q.stable { "stable" } else { "unstable" }
        ),
        result: json!({ "quasinorm": q }),
        flagged: !q.stable,
        series: Some(series),
    })
}

fn weyl(cfg: &RunConfig) -> Result<Outcome> {
    let g = geometry(cfg)?;
    let series = partial_sums(&g, &SymbolSpec::constant(1.0), &grid(cfg)?, Picture::Manifold)?;
    let fit = weyl_fit(&series)?;
    Ok(Outcome {
        summary: format!(
            "{}: count ~ {:.6} N^{:.6} (residual {:.2e})",
            g.kind(),
            fit.coefficient,
            fit.exponent,
            fit.residual
        ),
        result: json!({ "weyl": fit }),
        flagged: false,
        series: Some(series),
    })
}

fn interval(cfg: &RunConfig) -> Result<IntervalBC> {
    let a = cfg.a.as_deref().map(parse::complex).transpose()?.unwrap_or(Complex64::new(-E, 0.0));
    let b = cfg.b.as_deref().map(parse::complex).transpose()?.unwrap_or(Complex64::new(1.0, 0.0));
    let alpha = parse::alpha(cfg.alpha.as_deref().unwrap_or("zero"))?;
    Ok(IntervalBC::new(a, b, alpha, cfg.order.unwrap_or(1.0))?)
}

/// Indices needed so that both cutoff kinds stay inside the loaded spectrum.
fn default_jmax(bc: &IntervalBC, n_max: f64) -> u64 {
    let index = (n_max / 2.0).ceil();
    let weyl = (n_max.powf(bc.order) + bc.log_ratio().norm() + 1.0) / (2.0 * std::f64::consts::PI);
    index.max(weyl.ceil()) as u64 + 2
}

fn boundary_symbol(cfg: &RunConfig, default_sigma: Sigma, n_max: f64) -> Result<(BoundarySymbol, f64)> {
    if let Some(path) = &cfg.boundary_symbol {
        let sym = BoundarySymbol::read_table(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok((sym, cfg.order.unwrap_or(1.0)));
    }
    let bc = interval(cfg)?;
    let sigma = cfg.sigma.as_deref().map(parse::sigma).transpose()?.unwrap_or(default_sigma);
    let j_max = cfg.jmax.unwrap_or_else(|| default_jmax(&bc, n_max));
    Ok((BoundarySymbol::from_interval(&bc, j_max, |l| sigma.eval(l))?, bc.order))
}

fn boundary(cfg: &RunConfig, parametrix: bool) -> Result<Outcome> {
    let grid = grid(cfg)?;
    let n_max = *grid.last().unwrap();
    let default_sigma = if parametrix { Sigma::Eigenvalue } else { Sigma::Inverse };
    let (sym, order) = boundary_symbol(cfg, default_sigma, n_max)?;
    let sym = if parametrix { sym.reciprocal()? } else { sym };
    let (series, est) = if cfg.weyl {
        let dim = cfg.dim.unwrap_or(1);
        let series = boundary_weyl_series(&sym, dim, order, &grid)?;
        (series, boundary_dixmier_weyl(&sym, dim, order, &grid)?)
    } else {
        let series = boundary_series(&sym, &grid)?;
        let est = dixmier_estimate_with(&series, &dixmier_options(cfg, Normalization::Unit))?;
        (series, est)
    };
    Ok(Outcome {
        summary: format!(
            "{} over {} values ({} cutoff): tau = {:.10} ({:?}), sup|sigma| = {:.6e}",
            if parametrix { "parametrix trace" } else { "boundary trace" },
            sym.len(),
            if cfg.weyl { "eigenvalue" } else { "index" },
            est.value,
            est.verdict,
            sym.sup_abs()
        ),
        result: json!({ "estimate": est, "values": sym.len(), "sup_abs": sym.sup_abs() }),
        flagged: est.verdict == Verdict::Divergent,
        series: Some(series),
    })
}

fn oracle(cfg: &RunConfig) -> Result<Outcome> {
    let g = geometry(cfg)?;
    let spec = symbol(cfg, &g)?;
    let options = OracleOptions {
        cap: cfg.cap.unwrap_or(DEFAULT_CAP),
        tolerance: cfg.oracle_tol.unwrap_or(DEFAULT_TOLERANCE),
        mode: if cfg.dense { OracleMode::Dense } else { OracleMode::Blocks },
    };
    let report = compare_symbol_vs_oracle(&g, &spec, cfg.cutoff.unwrap_or(DEFAULT_CUTOFF), &options)?;
    Ok(Outcome {
        summary: format!(
            "dimension {}: max |symbol - operator| = {:.3e}, sum relative error {:.3e}: {}",
            report.total_dim,
            report.max_abs,
            report.sum_relative_error,
            if report.passed() { "agree" } else { "MISMATCH" }
        ),
        result: serde_json::to_value(&report)?,
        flagged: !report.passed(),
        series: None,
    })
}

fn s0(cfg: &RunConfig) -> Result<Outcome> {
    let (eigenvalues, order): (Vec<Complex64>, f64) = match &cfg.boundary_symbol {
        Some(path) => {
            let sym = BoundarySymbol::read_table(path)?;
            (sym.entries().iter().map(|e| e.eigenvalue).collect(), cfg.order.unwrap_or(1.0))
        }
        None => {
            let bc = interval(cfg)?;
            let spec = interval_spectrum(&bc, cfg.jmax.unwrap_or(10_000))?;
            (spec.into_iter().map(|(_, l)| l).collect(), bc.order)
        }
    };
    let s_grid = parse::real_list(cfg.s_grid.as_deref().unwrap_or(DEFAULT_S_GRID))?;
    let report = s0_summability_check(&eigenvalues, order, &s_grid, cfg.tail_ratio.unwrap_or(S0_TAIL_RATIO))?;
    let mut summary: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "s = {:<6} sum {:.10e} tail ratio {:.4} {}",
                r.s,
                r.sum,
                r.tail_ratio,
                if r.convergent { "convergent" } else { "divergent" }
            )
        })
        .collect();
    summary.push(match report.s0 {
        Some(s) => format!("s0 = {s}"),
        None => "no s on the grid is summable".to_string(),
    });
    Ok(Outcome {
        summary: summary.join("\n"),
        result: serde_json::to_value(&report)?,
        flagged: false,
        series: None,
    })
}
