//! Brute-force check of the symbol side against the truncated operator.
//!
//! A multiplier is block diagonal in the eigenbasis: every dual point
//! contributes `D/d` copies of its `d × d` symbol (for a group, `d` copies of
//! `σ(ξ)`, the Peter–Weyl multiplicity). The default path takes singular
//! values block by block; the dense path assembles the whole truncation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enumerate_dual, DualPoint, Geometry};
use crate::summation::CompensatedSum;
use crate::symbol::{eval_symbol, nuclear_trace_abs, DenseMatrix, MatrixSymbolValue, SymbolSpec};

/// Largest truncation the dense path will assemble.
pub const DENSE_LIMIT: usize = 300;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorBlock {
    pub point: DualPoint,
    pub value: MatrixSymbolValue,
    pub copies: u64,
}

impl OperatorBlock {
    pub fn size(&self) -> usize {
        self.value.dim() * self.copies as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator {
    pub blocks: Vec<OperatorBlock>,
    pub total_dim: usize,
}

impl TruncatedOperator {
    /// The full block-diagonal matrix; only for `total_dim ≤ DENSE_LIMIT`.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        if self.total_dim > DENSE_LIMIT {
            return Err(Error::SizeExceeded {
                required: self.total_dim as u128,
                cap: DENSE_LIMIT,
            });
        }
        let mut m = DenseMatrix::zeros(self.total_dim);
        let mut offset = 0;
        for block in &self.blocks {
            let d = block.value.dim();
            for _ in 0..block.copies {
                for i in 0..d {
                    for j in 0..d {
                        m.set(offset + i, offset + j, block.value.entry(i, j));
                    }
                }
                offset += d;
            }
        }
        Ok(m)
    }
}

/// Restriction of the multiplier to `⟨ξ⟩ ≤ weight_cutoff`.
pub fn truncate_operator(geometry: &Geometry, spec: &SymbolSpec, weight_cutoff: f64, cap: usize) -> Result<TruncatedOperator> {
    let points = enumerate_dual(geometry, weight_cutoff)?;
    let required: u128 = points.iter().map(|p| p.eigenspace_dim as u128).sum();
    if required > cap as u128 {
        return Err(Error::SizeExceeded { required, cap });
    }
    let blocks = points
        .into_iter()
        .map(|point| {
            let value = eval_symbol(spec, &point)?;
            let copies = point.block_copies();
            Ok(OperatorBlock { point, value, copies })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncatedOperator {
        blocks,
        total_dim: required as usize,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    #[default]
    Blocks,
    Dense,
}

/// All singular values, nonincreasing, with multiplicity.
pub fn operator_singular_values(op: &TruncatedOperator, mode: OracleMode) -> Result<Vec<f64>> {
    let mut sv = match mode {
        OracleMode::Blocks => {
            let per_block = op
                .blocks
                .par_iter()
                .map(|b| {
                    let s = b.value.singular_values()?;
                    Ok(s.iter().flat_map(|v| std::iter::repeat_n(*v, b.copies as usize)).collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()?;
            per_block.concat()
        }
        OracleMode::Dense => crate::symbol::singular_values(&op.to_dense()?).map_err(|e| Error::Numeric {
            label: format!("dense truncation of dimension {}", op.total_dim),
            message: format!("Jacobi iteration did not converge (off-diagonal ratio {:e})", e.off_ratio),
        })?,
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// `(1/log N) Σ_{n≤N} s_n`.
pub fn dixmier_partial_norm(svals: &[f64], n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("N must be at least 2, got {n}")));
    }
    Ok(head_sum(svals, n)? / (n as f64).ln())
}

/// `N^{1/p - 1} Σ_{n≤N} s_n`.
pub fn lpinf_partial_norm(svals: &[f64], n: usize, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must lie in (1, ∞), got {p}")));
    }
    if n < 1 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    Ok((n as f64).powf(1.0 / p - 1.0) * head_sum(svals, n)?)
}

fn head_sum(svals: &[f64], n: usize) -> Result<f64> {
    if n > svals.len() {
        return Err(Error::Range {
            requested: n,
            available: svals.len(),
        });
    }
    let mut acc = CompensatedSum::new();
    acc.extend(svals[..n].iter().copied());
    Ok(acc.value())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub max_abs: f64,
    /// First rank (1-based) where the two sides differ by more than the tolerance.
    pub first_mismatch_rank: Option<usize>,
    pub total_dim: usize,
    pub tolerance: f64,
    /// `|Σ s_n - Σ (D/d) Tr|σ|| / Σ (D/d) Tr|σ|`.
    pub sum_relative_error: f64,
}

impl DiscrepancyReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch_rank.is_none() && self.sum_relative_error <= self.tolerance
    }

    pub fn into_result(self) -> Result<Self> {
        match self.first_mismatch_rank {
            None if self.passed() => Ok(self),
            _ => Err(Error::Contract(format!(
                "symbol and operator disagree: max_abs {:e}, sum relative error {:e}, first mismatch at rank {:?}",
                self.max_abs, self.sum_relative_error, self.first_mismatch_rank
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    pub cap: usize,
    pub tolerance: f64,
    pub mode: OracleMode,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            cap: 10_000,
            tolerance: DEFAULT_TOLERANCE,
            mode: OracleMode::Blocks,
        }
    }
}

/// Sorted union of the per-point singular values (symbol side) against the
/// operator's singular values, plus the total-sum identity.
pub fn compare_symbol_vs_oracle(
    geometry: &Geometry,
    spec: &SymbolSpec,
    weight_cutoff: f64,
    options: &OracleOptions,
) -> Result<DiscrepancyReport> {
    let points = enumerate_dual(geometry, weight_cutoff)?;
    let mut union = Vec::new();
    let mut trace_sum = CompensatedSum::new();
    for p in &points {
        let v = eval_symbol(spec, p)?;
        let copies = p.block_copies();
        for s in v.singular_values()? {
            union.extend(std::iter::repeat_n(s, copies as usize));
        }
        trace_sum.add(copies as f64 * nuclear_trace_abs(&v)?);
    }
    union.sort_by(|a, b| b.total_cmp(a));

    let op = truncate_operator(geometry, spec, weight_cutoff, options.cap)?;
    let svals = operator_singular_values(&op, options.mode)?;
    if svals.len() != union.len() {
        return Err(Error::Contract(format!(
            "operator has {} singular values, symbol side {}",
            svals.len(),
            union.len()
        )));
    }
    let mut max_abs = 0.0f64;
    let mut first_mismatch_rank = None;
    for (rank, (a, b)) in union.iter().zip(&svals).enumerate() {
        let diff = (a - b).abs();
        max_abs = max_abs.max(diff);
        if diff > options.tolerance && first_mismatch_rank.is_none() {
            first_mismatch_rank = Some(rank + 1);
        }
    }
    let mut op_sum = CompensatedSum::new();
    op_sum.extend(svals.iter().copied());
    let reference = trace_sum.value();
    let sum_relative_error = if reference == 0.0 {
        op_sum.value().abs()
    } else {
        (op_sum.value() - reference).abs() / reference
    };
    Ok(DiscrepancyReport {
        max_abs,
        first_mismatch_rank,
        total_dim: op.total_dim,
        tolerance: options.tolerance,
        sum_relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_truncation_example() {
        let g = Geometry::torus(1).unwrap();
        let op = truncate_operator(&g, &SymbolSpec::bessel(1.0, 2.0), 2f64.sqrt(), 100).unwrap();
        assert_eq!(op.total_dim, 3);
        let sv = operator_singular_values(&op, OracleMode::Blocks).unwrap();
        let h = 0.5f64.sqrt();
        assert!((sv[0] - 1.0).abs() < 1e-15 && (sv[1] - h).abs() < 1e-15 && (sv[2] - h).abs() < 1e-15);
        let dense = operator_singular_values(&op, OracleMode::Dense).unwrap();
        assert_eq!(dense.len(), 3);
    }

    #[test]
    fn su2_block_sizes() {
        // n = 1 (l = 1/2) has λ = 3/4, weight sqrt(7/4)
        let g = Geometry::su2();
        let op = truncate_operator(&g, &SymbolSpec::bessel(3.0, 2.0), 1.75f64.sqrt(), 100).unwrap();
        let sizes: Vec<(usize, u64)> = op.blocks.iter().map(|b| (b.value.dim(), b.copies)).collect();
        assert_eq!(sizes, vec![(1, 1), (2, 2)]);
        assert_eq!(op.total_dim, 5);
    }

    #[test]
    fn cap_reports_required_size() {
        let g = Geometry::su2();
        match truncate_operator(&g, &SymbolSpec::bessel(3.0, 2.0), 10.0, 20) {
            Err(Error::SizeExceeded { required, cap }) => {
                assert_eq!(cap, 20);
                assert!(required > 20);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_symbol_is_zero_operator() {
        let g = Geometry::torus(1).unwrap();
        let op = truncate_operator(&g, &SymbolSpec::constant(0.0), 2.5, 100).unwrap();
        assert_eq!(op.total_dim, 5);
        assert_eq!(operator_singular_values(&op, OracleMode::Blocks).unwrap(), vec![0.0; 5]);
        let r = compare_symbol_vs_oracle(&g, &SymbolSpec::constant(0.0), 2.5, &OracleOptions::default()).unwrap();
        assert_eq!(r.max_abs, 0.0);
        assert!(r.passed());
    }

    #[test]
    fn partial_norms() {
        let ones = [1.0; 4];
        assert!((dixmier_partial_norm(&ones, 4).unwrap() - 4.0 / 4f64.ln()).abs() < 1e-15);
        assert!((lpinf_partial_norm(&ones, 4, 2.0).unwrap() - 2.0).abs() < 1e-15);
        let spike = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!((lpinf_partial_norm(&spike, 9, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(dixmier_partial_norm(&ones, 5), Err(Error::Range { requested: 5, available: 4 })));
        assert!(dixmier_partial_norm(&ones, 1).is_err());
        assert!(lpinf_partial_norm(&ones, 2, 1.0).is_err());
        let decay: Vec<f64> = (1..=40_000).map(|n| (n as f64).powf(-0.5)).collect();
        let values: Vec<f64> = [100, 1000, 10_000, 40_000].iter().map(|&n| lpinf_partial_norm(&decay, n, 2.0).unwrap()).collect();
        assert!(values.iter().all(|v| *v < 2.0));
    }

    #[test]
    fn partial_norm_perturbation_is_lipschitz() {
        let base: Vec<f64> = (1..=100).map(|n| 1.0 / n as f64).collect();
        let eps = 1e-6;
        let bumped: Vec<f64> = base.iter().map(|v| v + eps).collect();
        let n = 50;
        let diff = dixmier_partial_norm(&bumped, n).unwrap() - dixmier_partial_norm(&base, n).unwrap();
        assert!(diff.abs() <= n as f64 * eps / (n as f64).ln() * (1.0 + 1e-6));
    }

    #[test]
    fn two_block_union() {
        use crate::geometry::{FileSpectrum, Label};
        use crate::symbol::{SymbolTable, TableKind};
        use num_complex::Complex64;
        use std::path::Path;

        let spec = FileSpectrum::parse("0 2 2 1\n1 1 1 2\n", Path::new("s")).unwrap();
        let g = Geometry::from_spectrum(spec, 1, 2.0).unwrap();
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut table = SymbolTable::new(TableKind::Full);
        table.insert(MatrixSymbolValue::dense(
            Label::scalar(0),
            DenseMatrix::from_rows(2, vec![c(0.0), c(1.0), c(0.0), c(0.0)]),
        ));
        table.insert(MatrixSymbolValue::scalar(Label::scalar(1), c(3.0), 1));
        let op = truncate_operator(&g, &SymbolSpec::table(table), 2.0, 10).unwrap();
        let sv = operator_singular_values(&op, OracleMode::Blocks).unwrap();
        assert_eq!(sv, vec![3.0, 1.0, 0.0]);
    }

    #[test]
    fn spec_comparisons() {
        let opts = OracleOptions::default();
        let t1 = compare_symbol_vs_oracle(&Geometry::torus(1).unwrap(), &SymbolSpec::bessel(1.0, 2.0), 50.0, &opts).unwrap();
        assert!(t1.max_abs < 1e-10 && t1.passed(), "{t1:?}");
        assert_eq!(t1.total_dim, 99);
        let su2 = compare_symbol_vs_oracle(&Geometry::su2(), &SymbolSpec::bessel(3.0, 2.0), 48f64.sqrt(), &opts).unwrap();
        // n ≤ 12: λ = 42 < 47, n = 13 has λ = 48.75
        assert!(su2.max_abs < 1e-10 && su2.passed(), "{su2:?}");
        let dense = OracleOptions {
            mode: OracleMode::Dense,
            ..opts
        };
        let d = compare_symbol_vs_oracle(&Geometry::su2(), &SymbolSpec::bessel(3.0, 2.0), 4.0, &dense).unwrap();
        assert!(d.passed(), "{d:?}");
    }
}
