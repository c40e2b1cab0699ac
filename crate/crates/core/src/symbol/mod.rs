//! Multiplier symbols and their nuclear absolute traces.

mod jacobi;
mod table;

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{DualPoint, Label};

pub use jacobi::{hermitian_eigenvalues, singular_values, NoConvergence};
pub use table::{format_complex, parse_complex, SymbolTable, TableKind};

/// Hermiticity tolerance for the eigenvalue fast path, relative to the
/// largest entry.
const HERMITIAN_TOLERANCE: f64 = 1e-13;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn from_rows(dim: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), dim * dim, "entry count must be dim²");
        DenseMatrix { dim, entries }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == Complex64::new(0.0, 0.0)))
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.dim).all(|i| (i..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tolerance * scale))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.dim;
        assert_eq!(n, other.dim);
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    /// `value · I_dim`
    Scalar { value: Complex64, dim: usize },
    Diagonal(Vec<Complex64>),
    Dense(DenseMatrix),
}

/// Value of a symbol at one dual point: a `d × d` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSymbolValue {
    label: Label,
    repr: Repr,
}

impl MatrixSymbolValue {
    pub fn scalar(label: Label, value: Complex64, dim: usize) -> Self {
        MatrixSymbolValue {
            label,
            repr: Repr::Scalar { value, dim },
        }
    }

    pub fn diagonal(label: Label, diag: Vec<Complex64>) -> Self {
        MatrixSymbolValue {
            label,
            repr: Repr::Diagonal(diag),
        }
    }

    pub fn dense(label: Label, matrix: DenseMatrix) -> Self {
        MatrixSymbolValue {
            label,
            repr: Repr::Dense(matrix),
        }
    }

    pub fn label(&self) -> &Label {
        &self.label
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Scalar { dim, .. } => *dim,
            Repr::Diagonal(d) => d.len(),
            Repr::Dense(m) => m.dim(),
        }
    }

    /// The scalar `c` when the value is `c · I`.
    pub fn as_scalar(&self) -> Option<Complex64> {
        match &self.repr {
            Repr::Scalar { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        match &self.repr {
            Repr::Scalar { value, .. } => {
                if i == j {
                    *value
                } else {
                    zero
                }
            }
            Repr::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    zero
                }
            }
            Repr::Dense(m) => m.get(i, j),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.repr {
            Repr::Scalar { value, dim } => DenseMatrix::from_diagonal(&vec![*value; *dim]),
            Repr::Diagonal(d) => DenseMatrix::from_diagonal(d),
            Repr::Dense(m) => m.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.repr {
            Repr::Scalar { value, .. } => value.is_finite(),
            Repr::Diagonal(d) => d.iter().all(|z| z.is_finite()),
            Repr::Dense(m) => m.entries().iter().all(|z| z.is_finite()),
        }
    }

    /// Zeroes every entry outside the top-left `k × k` block.
    pub fn masked(self, k: usize) -> Self {
        let d = self.dim();
        if k >= d {
            return self;
        }
        let zero = Complex64::new(0.0, 0.0);
        let repr = match self.repr {
            Repr::Scalar { value, dim } => {
                Repr::Diagonal((0..dim).map(|i| if i < k { value } else { zero }).collect())
            }
            Repr::Diagonal(mut diag) => {
                diag[k..].iter_mut().for_each(|z| *z = zero);
                Repr::Diagonal(diag)
            }
            Repr::Dense(mut m) => {
                for i in 0..d {
                    for j in 0..d {
                        if i >= k || j >= k {
                            m.set(i, j, zero);
                        }
                    }
                }
                Repr::Dense(m)
            }
        };
        MatrixSymbolValue {
            label: self.label,
            repr,
        }
    }

    /// Singular values in nonincreasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let mut sv = match &self.repr {
            Repr::Scalar { value, dim } => vec![value.norm(); *dim],
            Repr::Diagonal(d) => d.iter().map(|z| z.norm()).collect(),
            Repr::Dense(m) => singular_values(m).map_err(|e| self.no_convergence(e))?,
        };
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    fn no_convergence(&self, e: NoConvergence) -> Error {
        Error::Numeric {
            label: self.label.to_string(),
            message: format!(
                "Jacobi iteration did not converge in {} sweeps (off-diagonal ratio {:e})",
                e.sweeps, e.off_ratio
            ),
        }
    }
}

impl Mul<MatrixSymbolValue> for f64 {
    type Output = MatrixSymbolValue;

    fn mul(self, rhs: MatrixSymbolValue) -> MatrixSymbolValue {
        let repr = match rhs.repr {
            Repr::Scalar { value, dim } => Repr::Scalar {
                value: value * self,
                dim,
            },
            Repr::Diagonal(d) => Repr::Diagonal(d.into_iter().map(|z| z * self).collect()),
            Repr::Dense(m) => Repr::Dense(DenseMatrix {
                dim: m.dim,
                entries: m.entries.into_iter().map(|z| z * self).collect(),
            }),
        };
        MatrixSymbolValue {
            label: rhs.label,
            repr,
        }
    }
}

impl Add for MatrixSymbolValue {
    type Output = MatrixSymbolValue;

    /// Both operands must have the same dimension.
    fn add(self, rhs: MatrixSymbolValue) -> MatrixSymbolValue {
        assert_eq!(self.dim(), rhs.dim(), "symbol dimensions differ");
        let label = self.label.clone();
        let repr = match (self.repr, rhs.repr) {
            (Repr::Scalar { value: a, dim }, Repr::Scalar { value: b, .. }) => Repr::Scalar { value: a + b, dim },
            (a @ (Repr::Scalar { .. } | Repr::Diagonal(_)), b @ (Repr::Scalar { .. } | Repr::Diagonal(_))) => {
                let da = diagonal_of(&a);
                let db = diagonal_of(&b);
                Repr::Diagonal(da.iter().zip(&db).map(|(x, y)| x + y).collect())
            }
            (a, b) => {
                let ma = dense_of(a);
                let mb = dense_of(b);
                Repr::Dense(DenseMatrix {
                    dim: ma.dim,
                    entries: ma.entries.iter().zip(&mb.entries).map(|(x, y)| x + y).collect(),
                })
            }
        };
        MatrixSymbolValue { label, repr }
    }
}

fn diagonal_of(r: &Repr) -> Vec<Complex64> {
    match r {
        Repr::Scalar { value, dim } => vec![*value; *dim],
        Repr::Diagonal(d) => d.clone(),
        Repr::Dense(m) => (0..m.dim()).map(|i| m.get(i, i)).collect(),
    }
}

fn dense_of(r: Repr) -> DenseMatrix {
    match r {
        Repr::Scalar { value, dim } => DenseMatrix::from_diagonal(&vec![value; dim]),
        Repr::Diagonal(d) => DenseMatrix::from_diagonal(&d),
        Repr::Dense(m) => m,
    }
}

/// `Tr |m|`, the sum of the singular values of `m`.
pub fn nuclear_trace_abs(m: &MatrixSymbolValue) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::Numeric {
            label: m.label.to_string(),
            message: "symbol value has non-finite entries".into(),
        });
    }
    match &m.repr {
        Repr::Scalar { value, dim } => Ok(*dim as f64 * value.norm()),
        Repr::Diagonal(d) => Ok(d.iter().map(|z| z.norm()).sum()),
        Repr::Dense(dense) => {
            if dense.is_diagonal() {
                return Ok((0..dense.dim()).map(|i| dense.get(i, i).norm()).sum());
            }
            if dense.is_hermitian(HERMITIAN_TOLERANCE) {
                let ev = hermitian_eigenvalues(dense).map_err(|e| m.no_convergence(e))?;
                return Ok(ev.iter().map(|v| v.abs()).sum());
            }
            let sv = singular_values(dense).map_err(|e| m.no_convergence(e))?;
            Ok(sv.iter().sum())
        }
    }
}

/// Manifold-picture contribution of a group dual point: `d · Tr|σ(ξ)|`.
pub fn group_block_lift(point: &DualPoint, trace_abs: f64) -> f64 {
    point.rep_dim as f64 * trace_abs
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolVariant {
    /// `⟨ξ⟩^{-s}`
    RadialWeight { exponent: f64 },
    /// `(1+λ)^{-s/ν}`
    BesselPotential { s: f64, order: f64 },
    /// `(c+λ)^{-s}`
    PowerOfEigenvalue { s: f64, shift: f64 },
    /// `(c + λ^{1/ν})^{-s}`; on tori with ν = 2 this is `(c + |ξ|)^{-s}`.
    ShiftedRoot { s: f64, shift: f64, order: f64 },
    Table(Arc<SymbolTable>),
    Scaled(f64, Box<SymbolSpec>),
    Sum(Vec<SymbolSpec>),
}

/// Declarative multiplier symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSpec {
    pub variant: SymbolVariant,
    /// Enforce `σ(π)_{ij} = 0` for `i, j > k_π`.
    pub homogeneous_mask: bool,
}

impl From<SymbolVariant> for SymbolSpec {
    fn from(variant: SymbolVariant) -> Self {
        SymbolSpec {
            variant,
            homogeneous_mask: false,
        }
    }
}

impl SymbolSpec {
    pub fn radial(exponent: f64) -> Self {
        SymbolVariant::RadialWeight { exponent }.into()
    }

    pub fn bessel(s: f64, order: f64) -> Self {
        SymbolVariant::BesselPotential { s, order }.into()
    }

    pub fn power(s: f64, shift: f64) -> Self {
        SymbolVariant::PowerOfEigenvalue { s, shift }.into()
    }

    pub fn shifted_root(s: f64, shift: f64, order: f64) -> Self {
        SymbolVariant::ShiftedRoot { s, shift, order }.into()
    }

    /// `c · I`
    pub fn constant(c: f64) -> Self {
        Self::radial(0.0).scaled(c)
    }

    pub fn table(table: SymbolTable) -> Self {
        SymbolVariant::Table(Arc::new(table)).into()
    }

    pub fn scaled(self, c: f64) -> Self {
        SymbolVariant::Scaled(c, Box::new(self)).into()
    }

    pub fn sum(terms: Vec<SymbolSpec>) -> Self {
        SymbolVariant::Sum(terms).into()
    }

    pub fn with_mask(mut self) -> Self {
        self.homogeneous_mask = true;
        self
    }

    /// Whether the symbol is `c(ξ) · I` everywhere with no mask.
    pub fn is_plain_scalar(&self) -> bool {
        if self.homogeneous_mask {
            return false;
        }
        match &self.variant {
            SymbolVariant::Table(_) => false,
            SymbolVariant::Scaled(_, inner) => inner.is_plain_scalar(),
            SymbolVariant::Sum(terms) => terms.iter().all(SymbolSpec::is_plain_scalar),
            _ => true,
        }
    }

    /// Scalar value at `point`; `None` when the symbol is not a plain scalar.
    pub fn scalar_value(&self, point: &DualPoint) -> Result<Option<f64>> {
        if !self.is_plain_scalar() {
            return Ok(None);
        }
        let v = self.scalar_unchecked(point);
        if v.is_finite() {
            Ok(Some(v))
        } else {
            Err(self.domain_error(point, v))
        }
    }

    fn scalar_unchecked(&self, p: &DualPoint) -> f64 {
        let lambda = p.eigenvalue;
        match &self.variant {
            SymbolVariant::RadialWeight { exponent } => {
                if *exponent == 0.0 {
                    1.0
                } else {
                    p.weight.powf(-exponent)
                }
            }
            SymbolVariant::BesselPotential { s, order } => (1.0 + lambda).powf(-s / order),
            SymbolVariant::PowerOfEigenvalue { s, shift } => (shift + lambda).powf(-s),
            SymbolVariant::ShiftedRoot { s, shift, order } => {
                let root = if *order == 2.0 { lambda.sqrt() } else { lambda.powf(1.0 / order) };
                (shift + root).powf(-s)
            }
            SymbolVariant::Scaled(c, inner) => c * inner.scalar_unchecked(p),
            SymbolVariant::Sum(terms) => terms.iter().map(|t| t.scalar_unchecked(p)).sum(),
            SymbolVariant::Table(_) => unreachable!("tables are not scalar"),
        }
    }

    fn domain_error(&self, point: &DualPoint, v: f64) -> Error {
        Error::Domain(format!(
            "symbol {self} is {v} at label {} (λ = {})",
            point.label, point.eigenvalue
        ))
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.variant {
            SymbolVariant::RadialWeight { exponent } => write!(f, "radial:{exponent}")?,
            SymbolVariant::BesselPotential { s, order } => write!(f, "bessel:{s}:{order}")?,
            SymbolVariant::PowerOfEigenvalue { s, shift } => write!(f, "power:{s}:{shift}")?,
            SymbolVariant::ShiftedRoot { s, shift, .. } => write!(f, "shifted:{s}:{shift}")?,
            SymbolVariant::Table(t) => write!(f, "table({} labels)", t.len())?,
            SymbolVariant::Scaled(c, inner) => write!(f, "{c}*({inner})")?,
            SymbolVariant::Sum(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{t}")?;
                }
            }
        }
        if self.homogeneous_mask {
            f.write_str("@mask")?;
        }
        Ok(())
    }
}

/// Evaluates `spec` at `point` as a `d × d` matrix.
pub fn eval_symbol(spec: &SymbolSpec, point: &DualPoint) -> Result<MatrixSymbolValue> {
    let d = point.rep_dim as usize;
    let value = match &spec.variant {
        SymbolVariant::Table(table) => {
            let m = table
                .get(&point.label)
                .ok_or_else(|| Error::MissingEntry(point.label.clone()))?;
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    label: point.label.clone(),
                    expected: d,
                    found: m.dim(),
                });
            }
            m.clone()
        }
        SymbolVariant::Scaled(c, inner) => *c * eval_symbol(inner, point)?,
        SymbolVariant::Sum(terms) => {
            let mut acc = MatrixSymbolValue::scalar(point.label.clone(), Complex64::new(0.0, 0.0), d);
            for t in terms {
                acc = acc + eval_symbol(t, point)?;
            }
            acc
        }
        _ => {
            let v = spec.scalar_unchecked(point);
            if !v.is_finite() {
                return Err(spec.domain_error(point, v));
            }
            MatrixSymbolValue::scalar(point.label.clone(), Complex64::new(v, 0.0), d)
        }
    };
    if !value.is_finite() {
        return Err(Error::Domain(format!("symbol {spec} is not finite at label {}", point.label)));
    }
    Ok(if spec.homogeneous_mask {
        value.masked(point.class_one_dim as usize)
    } else {
        value
    })
}
