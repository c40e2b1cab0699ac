//! Spectral data of the supported model geometries.
//!
//! Every geometry is described by its dual: a set of labelled points, each
//! carrying a representation dimension `d`, an eigenspace dimension `D`, a
//! Laplace-type eigenvalue `λ` and the weight `⟨ξ⟩ = (1+λ)^{1/ν}`.
//!
//! Built-in geometries keep an exact integer multiple of the eigenvalue so
//! that cutoff membership is decided in integer arithmetic. Cutoffs are
//! inclusive.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Label of a dual point: an integer vector.
///
/// SU(2) labels hold `2l`, SU(3) labels hold `(a, b)`, torus labels hold the
/// lattice point. The text form is comma separated (`3`, `1,0`, `-2,5`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(SmallVec<[i64; 4]>);

impl Label {
    pub fn new(coords: &[i64]) -> Self {
        Label(SmallVec::from_slice(coords))
    }

    pub fn scalar(value: i64) -> Self {
        Label::new(&[value])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let coords = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<SmallVec<[i64; 4]>, _>>()
            .map_err(|e| format!("invalid label `{s}`: {e}"))?;
        Ok(Label(coords))
    }
}

/// One spectral datum of a geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub label: Label,
    /// `d_ξ`, the size of the symbol matrix at this point.
    pub rep_dim: u64,
    /// `D`, the dimension of the eigenspace in the manifold picture.
    pub eigenspace_dim: u64,
    /// `k_π`, the number of invariant vectors (1 unless homogeneous).
    pub class_one_dim: u64,
    pub eigenvalue: f64,
    pub weight: f64,
}

impl DualPoint {
    /// Number of copies of the `d × d` symbol block inside the eigenspace.
    pub fn block_copies(&self) -> u64 {
        self.eigenspace_dim / self.rep_dim
    }
}

/// Spectrum read from a user file, sorted by label.
#[derive(Clone, Debug, PartialEq)]
pub struct FileSpectrum {
    points: Vec<DualPoint>,
}

impl FileSpectrum {
    /// Parses `label d D lambda` records. Weights are filled in by the
    /// owning [`Geometry`] and read 0 until then.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("expected 4 fields `label d D lambda`, found {}", fields.len()),
                ));
            }
            let label: Label = fields[0]
                .parse()
                .map_err(|e: String| Error::parse(origin, line_no, e))?;
            let rep_dim: u64 = parse_field(fields[1], "d", origin, line_no)?;
            let eigenspace_dim: u64 = parse_field(fields[2], "D", origin, line_no)?;
            let eigenvalue: f64 = parse_field(fields[3], "lambda", origin, line_no)?;
            if rep_dim == 0 || eigenspace_dim == 0 {
                return Err(Error::parse(origin, line_no, "dimensions must be positive"));
            }
            if !eigenspace_dim.is_multiple_of(rep_dim) {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("D = {eigenspace_dim} is not a multiple of d = {rep_dim}"),
                ));
            }
            if !eigenvalue.is_finite() || eigenvalue < 0.0 {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("eigenvalue must be finite and nonnegative, got {eigenvalue}"),
                ));
            }
            points.push(DualPoint {
                label,
                rep_dim,
                eigenspace_dim,
                class_one_dim: 1,
                eigenvalue,
                weight: 0.0,
            });
        }
        points.sort_by(|a, b| a.label.cmp(&b.label));
        if let Some(w) = points.windows(2).find(|w| w[0].label == w[1].label) {
            return Err(Error::parse(
                origin,
                0,
                format!("duplicate label {}", w[0].label),
            ));
        }
        Ok(FileSpectrum { points })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn points(&self) -> &[DualPoint] {
        &self.points
    }

    /// Renders the spectrum in its file format with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# label d D lambda\n");
        for p in &self.points {
            out.push_str(&format!(
                "{} {} {} {:.16e}\n",
                p.label, p.rep_dim, p.eigenspace_dim, p.eigenvalue
            ));
        }
        out
    }
}

fn parse_field<T: FromStr>(s: &str, name: &str, origin: &Path, line: usize) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.parse()
        .map_err(|e| Error::parse(origin, line, format!("field `{name}`: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryKind {
    Torus(u32),
    Su2,
    So3,
    Su3,
    Sphere(u32),
    File(Arc<FileSpectrum>),
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryKind::Torus(n) => write!(f, "torus:{n}"),
            GeometryKind::Su2 => f.write_str("su2"),
            GeometryKind::So3 => f.write_str("so3"),
            GeometryKind::Su3 => f.write_str("su3"),
            GeometryKind::Sphere(n) => write!(f, "sphere:{n}"),
            GeometryKind::File(_) => f.write_str("file"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    kind: GeometryKind,
    dim: u32,
    laplacian_order: f64,
}

impl Geometry {
    pub fn torus(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("torus dimension must be positive".into()));
        }
        Ok(Geometry {
            kind: GeometryKind::Torus(n),
            dim: n,
            laplacian_order: 2.0,
        })
    }

    pub fn su2() -> Self {
        Geometry {
            kind: GeometryKind::Su2,
            dim: 3,
            laplacian_order: 2.0,
        }
    }

    pub fn so3() -> Self {
        Geometry {
            kind: GeometryKind::So3,
            dim: 3,
            laplacian_order: 2.0,
        }
    }

    pub fn su3() -> Self {
        Geometry {
            kind: GeometryKind::Su3,
            dim: 8,
            laplacian_order: 2.0,
        }
    }

    pub fn sphere(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("sphere dimension must be >= 2, got {n}")));
        }
        Ok(Geometry {
            kind: GeometryKind::Sphere(n),
            dim: n,
            laplacian_order: 2.0,
        })
    }

    /// Wraps a file spectrum of a `dim`-dimensional manifold whose model
    /// operator has order `laplacian_order`.
    pub fn from_spectrum(mut spectrum: FileSpectrum, dim: u32, laplacian_order: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("manifold dimension must be positive".into()));
        }
        if !(laplacian_order > 0.0 && laplacian_order.is_finite()) {
            return Err(Error::Config(format!(
                "operator order must be positive, got {laplacian_order}"
            )));
        }
        for p in &mut spectrum.points {
            p.weight = weight_of(p.eigenvalue, laplacian_order);
        }
        Ok(Geometry {
            kind: GeometryKind::File(Arc::new(spectrum)),
            dim,
            laplacian_order,
        })
    }

    pub fn from_file(path: &Path, dim: u32, laplacian_order: f64) -> Result<Self> {
        Self::from_spectrum(FileSpectrum::read(path)?, dim, laplacian_order)
    }

    pub fn kind(&self) -> &GeometryKind {
        &self.kind
    }

    /// Manifold dimension κ.
    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Order ν of the reference operator.
    pub fn laplacian_order(&self) -> f64 {
        self.laplacian_order
    }

    /// Whether the dual is the unitary dual of a compact group.
    pub fn is_group(&self) -> bool {
        matches!(
            self.kind,
            GeometryKind::Torus(_) | GeometryKind::Su2 | GeometryKind::So3 | GeometryKind::Su3
        )
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.kind, GeometryKind::Sphere(_))
    }

    pub fn weight(&self, eigenvalue: f64) -> f64 {
        weight_of(eigenvalue, self.laplacian_order)
    }

    /// Largest eigenvalue admitted by the weight cutoff `w ≤ cutoff`.
    pub fn eigenvalue_bound(&self, cutoff: f64) -> f64 {
        if self.laplacian_order == 2.0 {
            cutoff * cutoff - 1.0
        } else {
            cutoff.powf(self.laplacian_order) - 1.0
        }
    }

    /// Visits every point with `lower < w ≤ upper` (or `w ≤ upper` when
    /// `lower` is `None`) in label-lexicographic order.
    pub fn visit_shell<F>(&self, lower: Option<f64>, upper: f64, mut visit: F) -> Result<()>
    where
        F: FnMut(&DualPoint) -> Result<()>,
    {
        if let GeometryKind::File(spectrum) = &self.kind {
            let upper_lambda = inclusive(self.eigenvalue_bound(upper));
            let lower_lambda = match lower {
                Some(l) if l >= 1.0 => Some(inclusive(self.eigenvalue_bound(l))),
                _ => None,
            };
            for p in &spectrum.points {
                let above = lower_lambda.is_none_or(|l| p.eigenvalue > l);
                if above && p.eigenvalue <= upper_lambda {
                    visit(p)?;
                }
            }
            return Ok(());
        }
        let scale = self.eigenvalue_scale();
        let hi = self.integer_bound(upper, scale);
        let lo = match lower {
            Some(l) if l >= 1.0 => self.integer_bound(l, scale),
            _ => -1,
        };
        if hi <= lo {
            return Ok(());
        }
        match &self.kind {
            GeometryKind::Torus(n) => {
                let mut coords = vec![0i64; *n as usize];
                visit_torus(&mut coords, 0, 0, lo, hi, &mut visit)
            }
            GeometryKind::Su2 => visit_monotone(|n| n * (n + 2), lo, hi, |n| {
                let d = (n + 1) as u64;
                let eigenvalue = (n * (n + 2)) as f64 / 4.0;
                visit(&self.group_point(Label::scalar(n as i64), d, eigenvalue))
            }),
            GeometryKind::So3 => visit_monotone(|l| l * (l + 1), lo, hi, |l| {
                let d = (2 * l + 1) as u64;
                let eigenvalue = (l * (l + 1)) as f64;
                visit(&self.group_point(Label::scalar(l as i64), d, eigenvalue))
            }),
            GeometryKind::Su3 => {
                let casimir = |a: i128, b: i128| a * a + b * b + a * b + 3 * a + 3 * b;
                let mut a: i128 = 0;
                while casimir(a, 0) <= hi {
                    visit_monotone(|b| casimir(a, b), lo, hi, |b| {
                        let d = ((a + 1) * (b + 1) * (a + b + 2) / 2) as u64;
                        let eigenvalue = casimir(a, b) as f64 / 9.0;
                        visit(&self.group_point(Label::new(&[a as i64, b as i64]), d, eigenvalue))
                    })?;
                    a += 1;
                }
                Ok(())
            }
            GeometryKind::Sphere(n) => {
                let shift = *n as i128 - 1;
                let n = *n;
                visit_monotone(|l| l * (l + shift), lo, hi, |l| {
                    let d = sphere_harmonics_dim(n, l as u64);
                    let eigenvalue = (l * (l + shift)) as f64;
                    visit(&DualPoint {
                        label: Label::scalar(l as i64),
                        rep_dim: d,
                        eigenspace_dim: d,
                        class_one_dim: 1,
                        eigenvalue,
                        weight: self.weight(eigenvalue),
                    })
                })
            }
            GeometryKind::File(_) => unreachable!(),
        }
    }

    fn group_point(&self, label: Label, d: u64, eigenvalue: f64) -> DualPoint {
        DualPoint {
            label,
            rep_dim: d,
            eigenspace_dim: d * d,
            class_one_dim: 1,
            eigenvalue,
            weight: self.weight(eigenvalue),
        }
    }

    /// Built-in eigenvalues are `μ / scale` with integer `μ`.
    fn eigenvalue_scale(&self) -> f64 {
        match self.kind {
            GeometryKind::Su2 => 4.0,
            GeometryKind::Su3 => 9.0,
            _ => 1.0,
        }
    }

    fn integer_bound(&self, cutoff: f64, scale: f64) -> i128 {
        let x = inclusive(self.eigenvalue_bound(cutoff) * scale);
        if x < 0.0 {
            -1
        } else {
            x.floor() as i128
        }
    }
}

/// Widens a bound by a few ulps so that exact ties are included.
fn inclusive(x: f64) -> f64 {
    x + x.abs() * 4.0 * f64::EPSILON + 1e-12
}

pub fn weight_of(eigenvalue: f64, laplacian_order: f64) -> f64 {
    if laplacian_order == 2.0 {
        (1.0 + eigenvalue).sqrt()
    } else {
        (1.0 + eigenvalue).powf(1.0 / laplacian_order)
    }
}

/// Dimension of the degree-`l` spherical harmonics on `S^n`:
/// `(2l+n-1)/(n-1) · C(l+n-2, n-2)`.
pub fn sphere_harmonics_dim(n: u32, l: u64) -> u64 {
    let n = n as u128;
    let l = l as u128;
    let mut binom: u128 = 1;
    for i in 1..=(n - 2) {
        binom = binom * (l + i) / i;
    }
    ((2 * l + n - 1) * binom / (n - 1)) as u64
}

/// Calls `visit(x)` for every `x ≥ 0` with `lo < f(x) ≤ hi`, `f` increasing.
fn visit_monotone<F, V>(f: F, lo: i128, hi: i128, mut visit: V) -> Result<()>
where
    F: Fn(i128) -> i128,
    V: FnMut(i128) -> Result<()>,
{
    let mut x = first_above(&f, lo);
    while f(x) <= hi {
        visit(x)?;
        x += 1;
    }
    Ok(())
}

fn first_above<F: Fn(i128) -> i128>(f: &F, threshold: i128) -> i128 {
    if f(0) > threshold {
        return 0;
    }
    let mut hi: i128 = 1;
    while f(hi) <= threshold {
        hi *= 2;
    }
    let mut lo = hi / 2;
    // f(lo) <= threshold < f(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid) <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn isqrt(v: i128) -> i128 {
    if v <= 0 {
        return 0;
    }
    let mut r = (v as f64).sqrt() as i128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

fn visit_torus<F>(coords: &mut [i64], depth: usize, used: i128, lo: i128, hi: i128, visit: &mut F) -> Result<()>
where
    F: FnMut(&DualPoint) -> Result<()>,
{
    let xmax = isqrt(hi - used);
    if depth + 1 == coords.len() {
        let need = lo + 1 - used;
        let xmin = if need <= 0 {
            0
        } else {
            let r = isqrt(need);
            if r * r == need {
                r
            } else {
                r + 1
            }
        };
        if xmin > xmax {
            return Ok(());
        }
        let mut emit = |x: i128, coords: &mut [i64]| {
            coords[depth] = x as i64;
            let r2 = used + x * x;
            let eigenvalue = r2 as f64;
            visit(&DualPoint {
                label: Label::new(coords),
                rep_dim: 1,
                eigenspace_dim: 1,
                class_one_dim: 1,
                eigenvalue,
                weight: (1.0 + eigenvalue).sqrt(),
            })
        };
        if xmin == 0 {
            for x in -xmax..=xmax {
                emit(x, coords)?;
            }
        } else {
            for x in -xmax..=-xmin {
                emit(x, coords)?;
            }
            for x in xmin..=xmax {
                emit(x, coords)?;
            }
        }
        return Ok(());
    }
    for x in -xmax..=xmax {
        coords[depth] = x as i64;
        visit_torus(coords, depth + 1, used + x * x, lo, hi, visit)?;
    }
    Ok(())
}

/// All points with `w ≤ weight_cutoff`, sorted by eigenvalue then label.
pub fn enumerate_dual(geometry: &Geometry, weight_cutoff: f64) -> Result<Vec<DualPoint>> {
    check_cutoff(weight_cutoff)?;
    let mut points = Vec::new();
    geometry.visit_shell(None, weight_cutoff, |p| {
        points.push(p.clone());
        Ok(())
    })?;
    points.sort_by(|a, b| {
        a.eigenvalue
            .total_cmp(&b.eigenvalue)
            .then_with(|| a.label.cmp(&b.label))
    });
    Ok(points)
}

/// Weyl counting function: `Σ D` over points with `w ≤ weight_cutoff`.
pub fn counting_function(geometry: &Geometry, weight_cutoff: f64) -> Result<u128> {
    check_cutoff(weight_cutoff)?;
    let mut total: u128 = 0;
    geometry.visit_shell(None, weight_cutoff, |p| {
        total += p.eigenspace_dim as u128;
        Ok(())
    })?;
    Ok(total)
}

/// `Σ d_(a,b)` over SU(3) highest weights with `a + b ≤ max_degree`.
pub fn su3_rep_dim_sum(max_degree: u64) -> u128 {
    let n = max_degree as u128;
    let mut total = 0;
    for a in 0..=n {
        for b in 0..=(n - a) {
            total += (a + 1) * (b + 1) * (a + b + 2) / 2;
        }
    }
    total
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff >= 1.0 && cutoff.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("weight cutoff must be finite and >= 1, got {cutoff}")))
    }
}
