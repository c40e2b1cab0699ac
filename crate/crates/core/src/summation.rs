//! Partial sums `S(N) = Σ_{⟨ξ⟩≤N} Tr|σ|` over a cutoff grid and Weyl fits
//! of the counting function.
//!
//! The dual is cut into shells: each grid interval `(N_{k-1}, N_k]` is split
//! geometrically into a fixed number of sub-shells. Shell totals are
//! compensated sums over the shell's points in label order, and the running
//! sums add shell totals in ascending shell order. The partition does not
//! depend on the thread count, so serial and parallel runs agree bit for
//! bit.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DualPoint, Geometry};
use crate::symbol::{eval_symbol, nuclear_trace_abs, SymbolSpec};

/// Which counting convention produced a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Picture {
    /// `Tr|σ(l)|` over eigenspaces, cut on the weight.
    Manifold,
    /// `d_ξ · Tr|σ(ξ)|` over a unitary dual, cut on the weight.
    Group,
    /// `d_π · Tr|σ(π)|` over class-I representations with masked symbols.
    Homogeneous,
    /// `|σ(ξ_l)|` cut on the enumeration index `l ≤ N`.
    BoundaryIndex,
    /// `|σ(ξ_l)|` cut on `|λ_l|^{1/m} ≤ N`.
    BoundaryWeyl,
}

impl Picture {
    /// Whether cutoffs are in a weight variable scaling like the dimension.
    pub fn is_weight_cut(self) -> bool {
        !matches!(self, Picture::BoundaryIndex)
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSumSeries {
    pub cutoffs: Vec<f64>,
    pub counts: Vec<u128>,
    pub sums: Vec<f64>,
    /// Manifold dimension κ used by normalizations downstream.
    pub dim: u32,
    pub picture: Picture,
}

impl PartialSumSeries {
    pub fn new(cutoffs: Vec<f64>, counts: Vec<u128>, sums: Vec<f64>, dim: u32, picture: Picture) -> Result<Self> {
        if cutoffs.len() != counts.len() || cutoffs.len() != sums.len() {
            return Err(Error::Contract(format!(
                "series columns differ in length: {} cutoffs, {} counts, {} sums",
                cutoffs.len(),
                counts.len(),
                sums.len()
            )));
        }
        if cutoffs.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::Contract("cutoffs must be strictly increasing".into()));
        }
        if sums.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Contract("sums must be finite and nonnegative".into()));
        }
        Ok(PartialSumSeries {
            cutoffs,
            counts,
            sums,
            dim,
            picture,
        })
    }

    pub fn len(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cutoffs.is_empty()
    }

    /// `S(N)/(κ log N)` for weight cuts, `S(N)/log N` for index cuts.
    pub fn normalized(&self) -> Vec<f64> {
        let kappa = if self.picture.is_weight_cut() { self.dim as f64 } else { 1.0 };
        self.cutoffs
            .iter()
            .zip(&self.sums)
            .map(|(n, s)| s / (kappa * n.ln()))
            .collect()
    }

    /// CSV with header `cutoff,count,sum,f`, floats with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cutoff", "count", "sum", "f"])?;
        for ((n, c), (s, f)) in self
            .cutoffs
            .iter()
            .zip(&self.counts)
            .zip(self.sums.iter().zip(self.normalized()))
        {
            w.write_record([
                format!("{n:.16e}"),
                c.to_string(),
                format!("{s:.16e}"),
                format!("{f:.16e}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV form; the `f` column is optional and ignored.
    pub fn read_csv<R: Read>(input: R, dim: u32, picture: Picture) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            cutoff: f64,
            count: u128,
            sum: f64,
        }
        let mut r = csv::Reader::from_reader(input);
        let mut cutoffs = Vec::new();
        let mut counts = Vec::new();
        let mut sums = Vec::new();
        for row in r.deserialize::<Row>() {
            let row = row?;
            cutoffs.push(row.cutoff);
            counts.push(row.count);
            sums.push(row.sum);
        }
        Self::new(cutoffs, counts, sums, dim, picture)
    }
}

/// Geometric grid from 2 to `n_max` with `points_per_octave` points per
/// doubling; the last point is `n_max`.
pub fn dyadic_grid(n_max: f64, points_per_octave: u32) -> Result<Vec<f64>> {
    if !(n_max >= 4.0 && n_max.is_finite()) {
        return Err(Error::Config(format!("grid maximum must be finite and >= 4, got {n_max}")));
    }
    if points_per_octave == 0 {
        return Err(Error::Config("points per octave must be >= 1".into()));
    }
    let ppo = points_per_octave as f64;
    let steps = ((n_max / 2.0).log2() * ppo + 1e-9).floor() as u32;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|i| {
            let (octaves, rest) = (i / points_per_octave, i % points_per_octave);
            2.0 * 2f64.powi(octaves as i32) * 2f64.powf(rest as f64 / ppo)
        })
        .collect();
    let last = grid.last_mut().expect("grid holds at least the point 2");
    if (*last - n_max).abs() <= 1e-9 * n_max {
        *last = n_max;
    } else {
        grid.push(n_max);
    }
    Ok(grid)
}

#[derive(Clone, Debug)]
pub struct SumOptions {
    pub parallel: bool,
    /// Sub-shells per grid interval.
    pub sub_shells: usize,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions {
            parallel: true,
            sub_shells: 8,
        }
    }
}

/// Shell boundaries: `(lower, upper, grid index closed by this shell)`.
fn shells(grid: &[f64], sub_shells: usize) -> Vec<(Option<f64>, f64, Option<usize>)> {
    let s = sub_shells.max(1);
    let mut out = Vec::with_capacity(grid.len() * s);
    let mut lower: Option<f64> = None;
    let mut start = 1.0f64;
    for (k, &upper) in grid.iter().enumerate() {
        if upper > start {
            let ratio = upper / start;
            for j in 1..s {
                let b = start * ratio.powf(j as f64 / s as f64);
                out.push((lower, b, None));
                lower = Some(b);
            }
        }
        out.push((lower, upper, Some(k)));
        lower = Some(upper);
        start = upper.max(1.0);
    }
    out
}

/// Contribution of one point to `S(N)` in the given picture.
pub fn contribution(spec: &SymbolSpec, point: &DualPoint, picture: Picture) -> Result<f64> {
    let masked = picture == Picture::Homogeneous;
    let factor = match picture {
        Picture::Manifold => point.block_copies() as f64,
        _ => point.rep_dim as f64,
    };
    if let Some(c) = spec.scalar_value(point)? {
        let diag = if masked { point.class_one_dim } else { point.rep_dim };
        return Ok(factor * diag as f64 * c.abs());
    }
    let mut value = eval_symbol(spec, point)?;
    if masked {
        value = value.masked(point.class_one_dim as usize);
    }
    Ok(factor * nuclear_trace_abs(&value)?)
}

pub fn partial_sums(geometry: &Geometry, spec: &SymbolSpec, grid: &[f64], picture: Picture) -> Result<PartialSumSeries> {
    partial_sums_with(geometry, spec, grid, picture, &SumOptions::default())
}

pub fn partial_sums_with(
    geometry: &Geometry,
    spec: &SymbolSpec,
    grid: &[f64],
    picture: Picture,
    options: &SumOptions,
) -> Result<PartialSumSeries> {
    if grid.is_empty() {
        return Err(Error::Config("cutoff grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::Config("cutoff grid must be strictly increasing".into()));
    }
    match picture {
        Picture::Group if !geometry.is_group() => {
            return Err(Error::Contract(format!("{} has no group dual", geometry.kind())));
        }
        Picture::Homogeneous if !geometry.is_homogeneous() => {
            return Err(Error::Contract(format!("{} is not a homogeneous space model", geometry.kind())));
        }
        Picture::BoundaryIndex | Picture::BoundaryWeyl => {
            return Err(Error::Contract("boundary pictures are built by the boundary module".into()));
        }
        _ => {}
    }

    let shell_list = shells(grid, options.sub_shells);
    let shell_total = |&(lower, upper, _): &(Option<f64>, f64, Option<usize>)| -> Result<(f64, u128)> {
        let mut acc = CompensatedSum::new();
        let mut count: u128 = 0;
        geometry.visit_shell(lower, upper, |p| {
            acc.add(contribution(spec, p, picture)?);
            count += p.eigenspace_dim as u128;
            Ok(())
        })?;
        Ok((acc.value(), count))
    };
    let totals: Vec<(f64, u128)> = if options.parallel {
        shell_list.par_iter().map(shell_total).collect::<Result<_>>()?
    } else {
        shell_list.iter().map(shell_total).collect::<Result<_>>()?
    };

    let mut running = CompensatedSum::new();
    let mut count: u128 = 0;
    let mut sums = vec![0.0; grid.len()];
    let mut counts = vec![0; grid.len()];
    for (shell, (total, c)) in shell_list.iter().zip(totals) {
        running.add(total);
        count += c;
        if let Some(k) = shell.2 {
            sums[k] = running.value();
            counts[k] = count;
        }
    }
    PartialSumSeries::new(grid.to_vec(), counts, sums, geometry.dim(), picture)
}

/// Least-squares fit `log count ≈ κ̂ log N + log Ĉ₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

/// Fits the counting function on the upper half of the grid.
pub fn weyl_fit(series: &PartialSumSeries) -> Result<WeylFit> {
    if series.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 grid points, got {}", series.len())));
    }
    let start = series.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = series.cutoffs[start..]
        .iter()
        .zip(&series.counts[start..])
        .filter(|(_, &c)| c >= 1)
        .map(|(n, &c)| (n.ln(), (c as f64).ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::Fit("fewer than two grid points with nonzero counts".into()));
    }
    if ys.iter().all(|y| *y == ys[0]) {
        return Err(Error::Fit("counting function is constant over the fit window".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(WeylFit {
        exponent: slope,
        coefficient: intercept.exp(),
        residual,
    })
}
