//! Multipliers on manifolds with boundary, given by spectral data.
//!
//! The model case is the interval `[0, 1]` with `L = -i d/dx` and the
//! boundary condition `a u(0) + b u(1) = 0` (up to an integral term that does
//! not affect the spectrum), whose eigenvalues are
//! `λ_j = 2πj - i ln(-a/b) + α_j`, `j ∈ ℤ`, with the principal logarithm.
//! Indices are enumerated by increasing `|j|`, positive before negative:
//! `0, 1, -1, 2, -2, …`. The index cutoff `l ≤ N` counts positions in that
//! order, starting at 1.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::{CompensatedSum, PartialSumSeries, Picture};
use crate::trace::{dixmier_estimate, dixmier_estimate_with, DixmierOptions, Normalization, TraceEstimate};

/// Eigenvalues closer to zero than this have no inverse.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

/// Tail ratio below which a sum is flagged convergent.
pub const S0_TAIL_RATIO: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub enum AlphaModel {
    Zero,
    /// `α_j = c / (1 + |j|)^{1+ε}`
    PowerDecay { c: f64, eps: f64 },
    /// Explicit perturbations; indices not listed get `α_j = 0`.
    Table(BTreeMap<i64, Complex64>),
}

impl AlphaModel {
    pub fn alpha(&self, j: i64) -> Complex64 {
        match self {
            AlphaModel::Zero => Complex64::new(0.0, 0.0),
            AlphaModel::PowerDecay { c, eps } => {
                Complex64::new(c / (1.0 + j.unsigned_abs() as f64).powf(1.0 + eps), 0.0)
            }
            AlphaModel::Table(t) => t.get(&j).copied().unwrap_or_default(),
        }
    }

    /// Reads lines `j re(α) im(α)`.
    pub fn read_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_table(&text, path)
    }

    pub fn parse_table(text: &str, origin: &Path) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (no, fields) in records(text) {
            if fields.len() != 3 {
                return Err(Error::parse(origin, no, format!("expected 3 fields, found {}", fields.len())));
            }
            let j = parse_index(fields[0], origin, no)?;
            let re = parse_real(fields[1], origin, no)?;
            let im = parse_real(fields[2], origin, no)?;
            if table.insert(j, Complex64::new(re, im)).is_some() {
                return Err(Error::parse(origin, no, format!("duplicate index {j}")));
            }
        }
        Ok(AlphaModel::Table(table))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalBC {
    pub a: Complex64,
    pub b: Complex64,
    pub alpha: AlphaModel,
    /// Order `m` of the reference operator.
    pub order: f64,
}

impl IntervalBC {
    pub fn new(a: Complex64, b: Complex64, alpha: AlphaModel, order: f64) -> Result<Self> {
        if a == Complex64::new(0.0, 0.0) || b == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("boundary coefficients a and b must be nonzero".into()));
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain("boundary coefficients must be finite".into()));
        }
        if !(order > 0.0 && order.is_finite()) {
            return Err(Error::Domain(format!("operator order must be positive, got {order}")));
        }
        if let AlphaModel::PowerDecay { c, eps } = alpha {
            if !(eps > 0.0 && c.is_finite() && eps.is_finite()) {
                return Err(Error::Domain(format!("power-decay perturbation needs finite c and ε > 0, got c={c}, ε={eps}")));
            }
        }
        Ok(IntervalBC { a, b, alpha, order })
    }

    /// First-order model with real `a/b = ratio` and no perturbation.
    pub fn first_order(ratio: f64) -> Result<Self> {
        Self::new(Complex64::new(ratio, 0.0), Complex64::new(1.0, 0.0), AlphaModel::Zero, 1.0)
    }

    /// `ln(-a/b)`; on the negative real axis the argument is `π`.
    pub fn log_ratio(&self) -> Complex64 {
        let mut z = -self.a / self.b;
        if z.im == 0.0 {
            z.im = 0.0; // drop a negative zero so the branch is fixed
        }
        z.ln()
    }
}

/// `j`-th index in the order `0, 1, -1, 2, -2, …`.
pub fn enumeration_index(position: usize) -> i64 {
    let k = position.div_ceil(2) as i64;
    if position % 2 == 1 {
        k
    } else {
        -k
    }
}

pub fn interval_eigenvalue(bc: &IntervalBC, j: i64) -> Result<Complex64> {
    let lambda = Complex64::new(2.0 * std::f64::consts::PI * j as f64, 0.0)
        - Complex64::i() * bc.log_ratio()
        + bc.alpha.alpha(j);
    if lambda.norm() < ZERO_EIGENVALUE {
        return Err(Error::Domain(format!("eigenvalue λ_{j} vanishes, L has no inverse")));
    }
    Ok(lambda)
}

/// `(j, λ_j)` for `|j| ≤ j_max` in enumeration order.
pub fn interval_spectrum(bc: &IntervalBC, j_max: u64) -> Result<Vec<(i64, Complex64)>> {
    if j_max < 1 {
        return Err(Error::Config("j_max must be at least 1".into()));
    }
    (0..=2 * j_max as usize)
        .map(|pos| {
            let j = enumeration_index(pos);
            interval_eigenvalue(bc, j).map(|l| (j, l))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub index: i64,
    pub eigenvalue: Complex64,
    pub value: Complex64,
}

/// Symbol values `σ(ξ_l)` with their eigenvalues, in enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySymbol {
    entries: Vec<BoundaryEntry>,
}

fn order_key(j: i64) -> (u64, bool) {
    (j.unsigned_abs(), j < 0)
}

impl BoundarySymbol {
    pub fn from_values(mut entries: Vec<BoundaryEntry>) -> Result<Self> {
        entries.sort_by_key(|e| order_key(e.index));
        if let Some(w) = entries.windows(2).find(|w| w[0].index == w[1].index) {
            return Err(Error::Domain(format!("duplicate boundary index {}", w[0].index)));
        }
        if let Some(e) = entries.iter().find(|e| !(e.value.is_finite() && e.eigenvalue.is_finite())) {
            return Err(Error::Domain(format!(
                "non-finite data at index {}: σ = {}, λ = {}",
                e.index, e.value, e.eigenvalue
            )));
        }
        Ok(BoundarySymbol { entries })
    }

    /// `σ(λ_j) = f(λ_j)` on the interval spectrum.
    pub fn from_interval<F>(bc: &IntervalBC, j_max: u64, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let entries = interval_spectrum(bc, j_max)?
            .into_iter()
            .map(|(index, eigenvalue)| BoundaryEntry {
                index,
                eigenvalue,
                value: f(eigenvalue),
            })
            .collect();
        Self::from_values(entries)
    }

    /// Reads lines `j re(λ) im(λ) re(σ) im(σ)`.
    pub fn read_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_table(&text, path)
    }

    pub fn parse_table(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (no, fields) in records(text) {
            if fields.len() != 5 {
                return Err(Error::parse(origin, no, format!("expected 5 fields, found {}", fields.len())));
            }
            let index = parse_index(fields[0], origin, no)?;
            let v: Vec<f64> = fields[1..].iter().map(|f| parse_real(f, origin, no)).collect::<Result<_>>()?;
            entries.push(BoundaryEntry {
                index,
                eigenvalue: Complex64::new(v[0], v[1]),
                value: Complex64::new(v[2], v[3]),
            });
        }
        Self::from_values(entries)
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| {
                format!(
                    "{} {:.16e} {:.16e} {:.16e} {:.16e}\n",
                    e.index, e.eigenvalue.re, e.eigenvalue.im, e.value.re, e.value.im
                )
            })
            .collect()
    }

    pub fn entries(&self) -> &[BoundaryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `sup |σ|` over the loaded range.
    pub fn sup_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.value.norm()))
    }

    /// Same eigenvalues, symbol values replaced by their reciprocals.
    pub fn reciprocal(&self) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                if e.value.norm() == 0.0 {
                    Err(Error::Ellipticity(e.index))
                } else {
                    Ok(BoundaryEntry {
                        value: e.value.inv(),
                        ..*e
                    })
                }
            })
            .collect::<Result<_>>()?;
        Ok(BoundarySymbol { entries })
    }

    pub fn map_values<F: Fn(&BoundaryEntry) -> Complex64>(&self, f: F) -> Self {
        BoundarySymbol {
            entries: self.entries.iter().map(|e| BoundaryEntry { value: f(e), ..*e }).collect(),
        }
    }
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
}

fn parse_index(s: &str, origin: &Path, line: usize) -> Result<i64> {
    s.parse().map_err(|_| Error::parse(origin, line, format!("invalid index `{s}`")))
}

fn parse_real(s: &str, origin: &Path, line: usize) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::parse(origin, line, format!("invalid number `{s}`"))),
    }
}

/// Partial sums `Σ_{l ≤ N} |σ(ξ_l)|` on the integer parts of the grid.
pub fn boundary_series(sym: &BoundarySymbol, grid: &[f64]) -> Result<PartialSumSeries> {
    let mut cutoffs: Vec<f64> = grid.iter().map(|n| n.floor()).filter(|n| *n >= 1.0).collect();
    cutoffs.dedup();
    let n_max = cutoffs.last().copied().unwrap_or(0.0);
    if n_max > sym.len() as f64 {
        return Err(Error::Lookup(format!(
            "index cutoff {n_max} needs {n_max} symbol values, {} loaded",
            sym.len()
        )));
    }
    let mut acc = CompensatedSum::new();
    let mut taken = 0usize;
    let mut sums = Vec::with_capacity(cutoffs.len());
    let mut counts = Vec::with_capacity(cutoffs.len());
    for &n in &cutoffs {
        let upto = n as usize;
        acc.extend(sym.entries[taken..upto].iter().map(|e| e.value.norm()));
        taken = upto;
        sums.push(acc.value());
        counts.push(upto as u128);
    }
    PartialSumSeries::new(cutoffs, counts, sums, 1, Picture::BoundaryIndex)
}

/// `τ' = lim (1/log N) Σ_{l≤N} |σ(ξ_l)|`.
pub fn boundary_dixmier(sym: &BoundarySymbol, grid: &[f64]) -> Result<TraceEstimate> {
    let series = boundary_series(sym, grid)?;
    dixmier_estimate_with(&series, &DixmierOptions::with_normalization(Normalization::Unit))
}

/// Partial sums cut on `|λ_l|^{1/m} ≤ N`.
pub fn boundary_weyl_series(sym: &BoundarySymbol, dim: u32, order: f64, grid: &[f64]) -> Result<PartialSumSeries> {
    if !(order > 0.0 && order.is_finite()) {
        return Err(Error::Domain(format!("operator order must be positive, got {order}")));
    }
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut weighted: Vec<(f64, f64)> = sym
        .entries
        .iter()
        .map(|e| (e.eigenvalue.norm().powf(1.0 / order), e.value.norm()))
        .collect();
    weighted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let reach = weighted.last().map_or(0.0, |w| w.0);
    if let Some(&n_max) = grid.last() {
        if n_max > reach {
            return Err(Error::Lookup(format!(
                "eigenvalue cutoff {n_max} exceeds the loaded spectrum (largest weight {reach})"
            )));
        }
    }
    let mut acc = CompensatedSum::new();
    let mut taken = 0usize;
    let mut sums = Vec::with_capacity(grid.len());
    let mut counts = Vec::with_capacity(grid.len());
    for &n in grid {
        let upto = taken + weighted[taken..].partition_point(|w| w.0 <= n);
        acc.extend(weighted[taken..upto].iter().map(|w| w.1));
        taken = upto;
        sums.push(acc.value());
        counts.push(upto as u128);
    }
    PartialSumSeries::new(grid.to_vec(), counts, sums, dim, Picture::BoundaryWeyl)
}

/// `τ' = (1/κ) lim (1/log N) Σ_{|λ_l|^{1/m} ≤ N} |σ(ξ_l)|`.
pub fn boundary_dixmier_weyl(sym: &BoundarySymbol, dim: u32, order: f64, grid: &[f64]) -> Result<TraceEstimate> {
    dixmier_estimate(&boundary_weyl_series(sym, dim, order, grid)?)
}

/// Dixmier trace of a parametrix of `P`, from the reciprocal symbol of `P`.
pub fn parametrix_trace(p_symbol: &BoundarySymbol, grid: &[f64]) -> Result<TraceEstimate> {
    boundary_dixmier(&p_symbol.reciprocal()?, grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityRow {
    pub s: f64,
    pub sum: f64,
    /// `(S(L) - S(L/2)) / (S(L/2) - S(L/4))` over the weight-sorted terms.
    pub tail_ratio: f64,
    pub convergent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub rows: Vec<SummabilityRow>,
    /// Smallest `s` flagged convergent.
    pub s0: Option<f64>,
}

/// Truncated sums `Σ ⟨ξ_l⟩^{-s}` with `⟨ξ⟩ = (1+|λ|²)^{1/2m}` for each `s`.
pub fn s0_summability_check(
    eigenvalues: &[Complex64],
    order: f64,
    s_grid: &[f64],
    threshold: f64,
) -> Result<SummabilityReport> {
    if !(order > 0.0 && order.is_finite()) {
        return Err(Error::Domain(format!("operator order must be positive, got {order}")));
    }
    if eigenvalues.len() < 4 {
        return Err(Error::Contract(format!("need at least 4 eigenvalues, got {}", eigenvalues.len())));
    }
    if s_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("s grid must be increasing".into()));
    }
    let mut weights: Vec<f64> = eigenvalues
        .iter()
        .map(|l| (1.0 + l.norm_sqr()).powf(0.5 / order))
        .collect();
    weights.sort_by(f64::total_cmp);
    let len = weights.len();
    let rows: Vec<SummabilityRow> = s_grid
        .iter()
        .map(|&s| {
            let mut acc = CompensatedSum::new();
            let mut marks = [0.0; 3];
            for (i, w) in weights.iter().enumerate() {
                acc.add(w.powf(-s));
                if i + 1 == len / 4 {
                    marks[0] = acc.value();
                }
                if i + 1 == len / 2 {
                    marks[1] = acc.value();
                }
            }
            marks[2] = acc.value();
            let (num, den) = (marks[2] - marks[1], marks[1] - marks[0]);
            let tail_ratio = if den > 0.0 {
                num / den
            } else if num > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            SummabilityRow {
                s,
                sum: marks[2],
                tail_ratio,
                convergent: tail_ratio < threshold,
            }
        })
        .collect();
    let s0 = rows.iter().find(|r| r.convergent).map(|r| r.s);
    Ok(SummabilityReport { rows, s0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    use crate::summation::dyadic_grid;
    use crate::trace::Verdict;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn enumeration_order() {
        let js: Vec<i64> = (0..7).map(enumeration_index).collect();
        assert_eq!(js, vec![0, 1, -1, 2, -2, 3, -3]);
    }

    #[test]
    fn spectrum_examples() {
        let bc = IntervalBC::first_order(-E).unwrap();
        let l1 = interval_eigenvalue(&bc, 1).unwrap();
        assert!((l1 - c(2.0 * PI, -1.0)).norm() < 1e-14);

        let bc = IntervalBC::first_order(-1.0).unwrap();
        assert!((interval_eigenvalue(&bc, 3).unwrap() - c(6.0 * PI, 0.0)).norm() < 1e-13);
        assert!(matches!(interval_eigenvalue(&bc, 0), Err(Error::Domain(m)) if m.contains("λ_0")));
        assert!(interval_spectrum(&bc, 2).is_err());

        let bc = IntervalBC::new(c(-1.0, 0.0), c(1.0, 0.0), AlphaModel::PowerDecay { c: 1.0, eps: 1.0 }, 1.0).unwrap();
        let l2 = interval_eigenvalue(&bc, 2).unwrap();
        assert!((l2 - c(4.0 * PI + 1.0 / 9.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn invalid_conditions() {
        assert!(IntervalBC::new(c(0.0, 0.0), c(1.0, 0.0), AlphaModel::Zero, 1.0).is_err());
        assert!(IntervalBC::new(c(1.0, 0.0), c(0.0, 0.0), AlphaModel::Zero, 1.0).is_err());
        assert!(IntervalBC::new(c(1.0, 0.0), c(1.0, 0.0), AlphaModel::Zero, 0.0).is_err());
        let bad = AlphaModel::PowerDecay { c: 1.0, eps: 0.0 };
        assert!(IntervalBC::new(c(1.0, 0.0), c(1.0, 0.0), bad, 1.0).is_err());
    }

    #[test]
    fn branch_on_negative_axis() {
        // a/b = 1: -a/b = -1, principal log is iπ
        let bc = IntervalBC::first_order(1.0).unwrap();
        assert!((bc.log_ratio() - c(0.0, PI)).norm() < 1e-15);
        let neg_zero = IntervalBC::new(c(1.0, -0.0), c(1.0, 0.0), AlphaModel::Zero, 1.0).unwrap();
        assert_eq!(neg_zero.log_ratio(), bc.log_ratio());
    }

    #[test]
    fn conjugate_pair_symmetry() {
        let bc = IntervalBC::first_order(-2.5).unwrap();
        let spec: BTreeMap<i64, Complex64> = interval_spectrum(&bc, 50).unwrap().into_iter().collect();
        for j in 1..=50 {
            assert!((spec[&j].norm() - spec[&-j].norm()).abs() < 1e-12 * spec[&j].norm());
        }
    }

    #[test]
    fn alpha_table() {
        let m = AlphaModel::parse_table("# j re im\n0 0.5 0\n-3 0 1e-2\n", Path::new("a")).unwrap();
        assert_eq!(m.alpha(-3), c(0.0, 0.01));
        assert_eq!(m.alpha(7), c(0.0, 0.0));
        assert!(matches!(
            AlphaModel::parse_table("1 2\n", Path::new("a")),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(AlphaModel::parse_table("1 0 0\n1 1 0\n", Path::new("a")).is_err());
    }

    #[test]
    fn table_round_trip() {
        let bc = IntervalBC::first_order(-E).unwrap();
        let sym = BoundarySymbol::from_interval(&bc, 5, |l| l.inv()).unwrap();
        let again = BoundarySymbol::parse_table(&sym.to_text(), Path::new("t")).unwrap();
        assert_eq!(sym, again);
        // file order does not matter
        let shuffled: String = sym.to_text().lines().rev().map(|l| format!("{l}\n")).collect();
        assert_eq!(BoundarySymbol::parse_table(&shuffled, Path::new("t")).unwrap(), sym);
    }

    #[test]
    fn index_series_counts() {
        let bc = IntervalBC::first_order(-E).unwrap();
        let sym = BoundarySymbol::from_interval(&bc, 10, |_| c(1.0, 0.0)).unwrap();
        let s = boundary_series(&sym, &[2.5, 3.0, 7.9, 21.0]).unwrap();
        assert_eq!(s.cutoffs, vec![2.0, 3.0, 7.0, 21.0]);
        assert_eq!(s.sums, vec![2.0, 3.0, 7.0, 21.0]);
        assert!(matches!(boundary_series(&sym, &[22.0]), Err(Error::Lookup(_))));
    }

    #[test]
    fn trivial_symbols() {
        let bc = IntervalBC::first_order(-E).unwrap();
        let grid = dyadic_grid(2e4, 4).unwrap();
        let zero = BoundarySymbol::from_interval(&bc, 10_000, |_| c(0.0, 0.0)).unwrap();
        let est = boundary_dixmier(&zero, &grid).unwrap();
        assert_eq!((est.value, est.verdict), (0.0, Verdict::Vanishing));
        let w = boundary_dixmier_weyl(&zero, 1, 1.0, &dyadic_grid(1e4, 4).unwrap()).unwrap();
        assert_eq!(w.value, 0.0);

        let one = zero.map_values(|_| c(1.0, 0.0));
        assert_eq!(boundary_dixmier(&one, &grid).unwrap().verdict, Verdict::Divergent);
        let one_over_c = parametrix_trace(&zero.map_values(|_| c(0.0, 2.0)), &grid).unwrap();
        assert_eq!(one_over_c.verdict, Verdict::Divergent);
    }

    #[test]
    fn parametrix_of_trace_class_reciprocal_vanishes() {
        let entries = (0..20_000)
            .map(|l| BoundaryEntry {
                index: l,
                eigenvalue: c(l as f64 + 1.0, 0.0),
                value: c((l as f64 + 1.0).powi(2), 0.0),
            })
            .collect();
        let sym = BoundarySymbol::from_values(entries).unwrap();
        let est = parametrix_trace(&sym, &dyadic_grid(2e4, 4).unwrap()).unwrap();
        assert_eq!(est.verdict, Verdict::Vanishing, "{est:?}");
    }

    #[test]
    fn ellipticity_violation_names_index() {
        let bc = IntervalBC::first_order(-E).unwrap();
        let sym = BoundarySymbol::from_interval(&bc, 4, |l| l).unwrap();
        let holed = sym.map_values(|e| if e.index == -3 { c(0.0, 0.0) } else { e.value });
        assert!(matches!(parametrix_trace(&holed, &[2.0, 4.0, 6.0, 8.0]), Err(Error::Ellipticity(-3))));
    }

    #[test]
    fn weyl_dimension_factor() {
        let bc = IntervalBC::first_order(-E).unwrap();
        let sym = BoundarySymbol::from_interval(&bc, 20_000, |l| l.inv()).unwrap();
        let grid = dyadic_grid(1e5, 4).unwrap();
        let one = boundary_dixmier_weyl(&sym, 1, 1.0, &grid).unwrap();
        let two = boundary_dixmier_weyl(&sym, 2, 1.0, &grid).unwrap();
        assert!((one.value - 2.0 * two.value).abs() < 1e-14);
        assert!(matches!(boundary_dixmier_weyl(&sym, 1, 1.0, &[1e6]), Err(Error::Lookup(_))));
    }

    #[test]
    fn summability_examples() {
        let bc = IntervalBC::first_order(-E).unwrap();
        let ev: Vec<Complex64> = interval_spectrum(&bc, 20_000).unwrap().into_iter().map(|(_, l)| l).collect();
        let report = s0_summability_check(&ev, 1.0, &[0.0, 1.0, 2.0], S0_TAIL_RATIO).unwrap();
        let flags: Vec<bool> = report.rows.iter().map(|r| r.convergent).collect();
        assert_eq!(flags, vec![false, false, true]);
        assert_eq!(report.s0, Some(2.0));
        // Σ (1 + 4π²j²)^{-1} over ℤ with θ = 1: close to the j-sum over 1/(1+|λ_j|²)
        let expected: f64 = ev.iter().map(|l| 1.0 / (1.0 + l.norm_sqr())).sum();
        assert!((report.rows[2].sum - expected).abs() < 1e-12);
    }
}
