//! Dixmier-trace estimates, Marcinkiewicz quasi-norms and residues from
//! partial-sum series.
//!
//! The log-averages `f_k = S(N_k)/(κ log N_k)` converge like
//! `τ + c₁/log N + c₂/(log N)²`; the estimate is the intercept of that
//! model fitted by least squares on the upper half of the grid.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::{CompensatedSum, PartialSumSeries, Picture};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Vanishing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `S(N)/(κ log N)`
    Dimension,
    /// `S(N)/log(count(N))`, the un-rescaled form with the counting function.
    LogCount,
    /// `S(N)/log N`, for index cutoffs.
    Unit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DixmierOptions {
    pub normalization: Normalization,
    /// Relative increase of `f` over the last three octaves that flags divergence.
    pub divergence_threshold: f64,
    /// Estimates below this fraction of `max f_k` (signed) are vanishing.
    pub vanishing_ratio: f64,
}

impl Default for DixmierOptions {
    fn default() -> Self {
        DixmierOptions {
            normalization: Normalization::Dimension,
            divergence_threshold: 0.1,
            vanishing_ratio: 1e-3,
        }
    }
}

impl DixmierOptions {
    pub fn with_normalization(normalization: Normalization) -> Self {
        DixmierOptions {
            normalization,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub value: f64,
    pub naive_last: f64,
    pub fit_coeffs: [f64; 2],
    pub fit_residual: f64,
    pub verdict: Verdict,
    pub grid_max: f64,
}

/// Least-squares fit of `f ≈ τ + c₁/log N + c₂/(log N)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogFit {
    pub intercept: f64,
    pub coeffs: [f64; 2],
    pub residual: f64,
}

/// Fits the model on the upper half of the points (at least three).
pub fn log_extrapolate(cutoffs: &[f64], values: &[f64]) -> Result<LogFit> {
    let n = cutoffs.len();
    if n != values.len() {
        return Err(Error::Fit("cutoffs and values differ in length".into()));
    }
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {n}")));
    }
    let window = (n - n / 2).max(3);
    let xs: Vec<f64> = cutoffs[n - window..].iter().map(|c| 1.0 / c.ln()).collect();
    let ys = &values[n - window..];
    if xs.iter().any(|x| !x.is_finite() || *x <= 0.0) || ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::Fit("fit window needs finite values at cutoffs > 1".into()));
    }
    let design = DMatrix::from_fn(window, 3, |i, j| xs[i].powi(j as i32));
    let rhs = DVector::from_column_slice(ys);
    let solution = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-15)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let fitted = &design * &solution;
    let residual = ((fitted - &rhs).norm_squared() / window as f64).sqrt();
    Ok(LogFit {
        intercept: solution[0],
        coeffs: [solution[1], solution[2]],
        residual,
    })
}

/// Builds an estimate from already-normalized log-averages `f_k`.
pub fn estimate_from_ratios(cutoffs: &[f64], values: &[f64], options: &DixmierOptions) -> Result<TraceEstimate> {
    if cutoffs.len() < 4 {
        return Err(Error::Contract(format!("need at least 4 grid points >= 2, got {}", cutoffs.len())));
    }
    let fit = log_extrapolate(cutoffs, values)?;
    let last = cutoffs.len() - 1;
    let n_max = cutoffs[last];

    let start = cutoffs.iter().position(|&c| c >= n_max / 8.0).unwrap_or(0).min(last.saturating_sub(1));
    let (f0, f1) = (values[start], values[last]);
    let increase = if f0 != 0.0 {
        (f1 - f0) / f0.abs()
    } else if f1 > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let max_f = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let verdict = if increase > options.divergence_threshold {
        Verdict::Divergent
    } else if max_f == 0.0 || fit.intercept < options.vanishing_ratio * max_f {
        // sums are nonnegative, so a negative intercept is a zero limit
        Verdict::Vanishing
    } else {
        Verdict::Convergent
    };
    Ok(TraceEstimate {
        value: fit.intercept,
        naive_last: values[last],
        fit_coeffs: fit.coeffs,
        fit_residual: fit.residual,
        verdict,
        grid_max: n_max,
    })
}

pub fn dixmier_estimate(series: &PartialSumSeries) -> Result<TraceEstimate> {
    dixmier_estimate_with(series, &DixmierOptions::default())
}

pub fn dixmier_estimate_with(series: &PartialSumSeries, options: &DixmierOptions) -> Result<TraceEstimate> {
    if series.picture == Picture::BoundaryIndex && options.normalization != Normalization::Unit {
        return Err(Error::Contract(
            "index-cutoff series are normalized by log N alone; use the boundary estimators".into(),
        ));
    }
    let kappa = series.dim as f64;
    let (cutoffs, values): (Vec<f64>, Vec<f64>) = series
        .cutoffs
        .iter()
        .zip(series.sums.iter().zip(&series.counts))
        .filter(|(n, (_, &c))| **n >= 2.0 && (options.normalization != Normalization::LogCount || c >= 2))
        .map(|(&n, (&s, &c))| {
            let f = match options.normalization {
                Normalization::Dimension => s / (kappa * n.ln()),
                Normalization::LogCount => s / (c as f64).ln(),
                Normalization::Unit => s / n.ln(),
            };
            (n, f)
        })
        .unzip();
    estimate_from_ratios(&cutoffs, &values, options)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiNormResult {
    pub p: f64,
    pub gamma: f64,
    pub argmax_cutoff: f64,
    /// The supremum changed by less than 1% over the last decade of cutoffs.
    pub stable: bool,
}

/// Relative change of the supremum over the last decade below which it is stable.
pub const QUASINORM_STABILITY: f64 = 0.01;

/// `γ_p = max_k N_k^e S(N_k)` with `e = κ(1/p − 1)` (weight cuts) or
/// `e = 1/p − 1` (index cuts).
pub fn quasinorm(series: &PartialSumSeries, p: f64) -> Result<QuasiNormResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must lie in (1, ∞), got {p}")));
    }
    if series.is_empty() {
        return Err(Error::Contract("empty series".into()));
    }
    let kappa = if series.picture.is_weight_cut() { series.dim as f64 } else { 1.0 };
    let exponent = kappa * (1.0 / p - 1.0);
    let weighted: Vec<f64> = series
        .cutoffs
        .iter()
        .zip(&series.sums)
        .map(|(n, s)| n.powf(exponent) * s)
        .collect();
    let (arg, gamma) = weighted
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(i, m), (j, v)| if v > m { (j, v) } else { (i, m) });
    let n_max = *series.cutoffs.last().unwrap();
    let before = series
        .cutoffs
        .iter()
        .zip(&weighted)
        .filter(|(n, _)| **n <= n_max / 10.0)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let stable = if gamma == 0.0 {
        true
    } else if before.is_finite() {
        (gamma - before) / gamma < QUASINORM_STABILITY
    } else {
        false
    };
    Ok(QuasiNormResult {
        p,
        gamma,
        argmax_cutoff: series.cutoffs[arg],
        stable,
    })
}

/// Residue of `a(x)·σ(ξ)`: the Dixmier estimate of the multiplier series
/// scaled by `∫ a dx` (normalized Haar measure).
pub fn residue_factored(a_integral: f64, multiplier_series: &PartialSumSeries) -> Result<TraceEstimate> {
    if multiplier_series.picture != Picture::Group {
        return Err(Error::Contract("residues are computed from group-picture series".into()));
    }
    if !a_integral.is_finite() {
        return Err(Error::Domain(format!("density integral must be finite, got {a_integral}")));
    }
    let base = dixmier_estimate(multiplier_series)?;
    let verdict = match base.verdict {
        Verdict::Divergent => Verdict::Divergent,
        _ if a_integral == 0.0 => Verdict::Vanishing,
        v => v,
    };
    Ok(TraceEstimate {
        value: a_integral * base.value,
        naive_last: a_integral * base.naive_last,
        fit_coeffs: [a_integral * base.fit_coeffs[0], a_integral * base.fit_coeffs[1]],
        fit_residual: a_integral.abs() * base.fit_residual,
        verdict,
        grid_max: base.grid_max,
    })
}

/// Rectangle rule for `∫ a` over the unit torus `[0,1)^dims`; exact for
/// trigonometric polynomials of degree below `samples_per_dim`.
pub fn torus_density_integral<F>(samples_per_dim: usize, dims: usize, a: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if samples_per_dim < 2 {
        return Err(Error::Config("quadrature needs at least 2 samples per dimension".into()));
    }
    if dims == 0 {
        return Err(Error::Config("quadrature dimension must be positive".into()));
    }
    let total = samples_per_dim
        .checked_pow(dims as u32)
        .ok_or_else(|| Error::Config("quadrature grid too large".into()))?;
    let h = 1.0 / samples_per_dim as f64;
    let mut x = vec![0.0; dims];
    let mut acc = CompensatedSum::new();
    for flat in 0..total {
        let mut rest = flat;
        for xi in x.iter_mut() {
            *xi = (rest % samples_per_dim) as f64 * h;
            rest /= samples_per_dim;
        }
        let v = a(&x);
        if !v.is_finite() {
            return Err(Error::Numeric {
                label: format!("{x:?}"),
                message: format!("density is {v}"),
            });
        }
        acc.add(v);
    }
    Ok(acc.value() / total as f64)
}

/// Spread of the extrapolated limits of the even- and odd-octave
/// subsequences of `f_k`.
pub fn measurability_probe(series: &PartialSumSeries) -> Result<f64> {
    if series.len() < 8 {
        return Err(Error::Contract(format!("need at least 8 grid points, got {}", series.len())));
    }
    let f = series.normalized();
    let n0 = series.cutoffs[0];
    let upper_start = series.cutoffs[series.len() / 2];
    let mut intercepts = Vec::with_capacity(2);
    for parity in 0..2u64 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = series
            .cutoffs
            .iter()
            .zip(&f)
            .filter(|(n, _)| ((**n / n0).log2() + 1e-9).floor() as u64 % 2 == parity)
            .map(|(n, v)| (*n, *v))
            .unzip();
        let in_upper = xs.iter().filter(|n| **n >= upper_start).count();
        let keep = in_upper.max(3).min(xs.len());
        if keep < 3 {
            return Err(Error::Fit("octave subsequence has fewer than 3 points".into()));
        }
        let fit = log_extrapolate(&xs[xs.len() - keep..], &ys[ys.len() - keep..])?;
        intercepts.push(fit.intercept);
    }
    Ok((intercepts[0] - intercepts[1]).abs())
}

/// Multiplies every partial sum by `c ≥ 0`.
pub fn scale_series(series: &PartialSumSeries, c: f64) -> Result<PartialSumSeries> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("scale must be finite and nonnegative, got {c}")));
    }
    let mut out = series.clone();
    out.sums.iter_mut().for_each(|s| *s *= c);
    Ok(out)
}

/// Log-averages of the reduced SU(2) Bessel-potential series
/// `Σ_{n=1}^{N+1} (n²/8)(n²+3)^{-3/2}` over `log[(N+1)(2N²+7N+1)/6]`,
/// evaluated at `N = ⌊c⌋` for every cutoff `c`.
pub fn su2_bessel_example_ratios(cutoffs: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    let mut n_done: u64 = 0;
    cutoffs
        .iter()
        .map(|&c| {
            let big_n = c.floor() as u64;
            while n_done < big_n + 1 {
                n_done += 1;
                let n2 = (n_done * n_done) as f64;
                acc.add(n2 / 8.0 * (n2 + 3.0).powf(-1.5));
            }
            let nf = big_n as f64;
            acc.value() / ((nf + 1.0) * (2.0 * nf * nf + 7.0 * nf + 1.0) / 6.0).ln()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(values: impl Fn(f64) -> f64, dim: u32) -> PartialSumSeries {
        let cutoffs = crate::summation::dyadic_grid(1e6, 4).unwrap();
        let sums = cutoffs.iter().map(|&n| values(n)).collect();
        let counts = cutoffs.iter().map(|&n| n as u128).collect();
        PartialSumSeries::new(cutoffs, counts, sums, dim, Picture::Group).unwrap()
    }

    #[test]
    fn exact_model_is_recovered() {
        // S = κ log N (τ + c₁/log N + c₂/log² N)
        let s = synthetic(|n| 3.0 * n.ln() * (0.7 + 0.3 / n.ln() - 0.2 / n.ln().powi(2)), 3);
        let est = dixmier_estimate(&s).unwrap();
        assert!((est.value - 0.7).abs() < 1e-10, "{est:?}");
        assert!((est.fit_coeffs[0] - 0.3).abs() < 1e-8);
        assert!((est.fit_coeffs[1] + 0.2).abs() < 1e-7);
        assert_eq!(est.verdict, Verdict::Convergent);
    }

    #[test]
    fn verdicts() {
        assert_eq!(dixmier_estimate(&synthetic(|n| 2.0 * n, 1)).unwrap().verdict, Verdict::Divergent);
        assert_eq!(dixmier_estimate(&synthetic(|_| 1.5, 1)).unwrap().verdict, Verdict::Vanishing);
        let zero = dixmier_estimate(&synthetic(|_| 0.0, 1)).unwrap();
        assert_eq!((zero.value, zero.verdict), (0.0, Verdict::Vanishing));
    }

    #[test]
    fn boundary_index_needs_unit_normalization() {
        let mut s = synthetic(|n| n.ln(), 1);
        s.picture = Picture::BoundaryIndex;
        assert!(matches!(dixmier_estimate(&s), Err(Error::Contract(_))));
        let est = dixmier_estimate_with(&s, &DixmierOptions::with_normalization(Normalization::Unit)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let s = PartialSumSeries::new(vec![2.0, 4.0, 8.0], vec![1, 2, 3], vec![1.0, 2.0, 3.0], 1, Picture::Manifold)
            .unwrap();
        assert!(dixmier_estimate(&s).is_err());
    }

    #[test]
    fn quasinorm_domain() {
        let s = synthetic(|n| n.sqrt(), 1);
        for p in [0.5, 1.0, f64::INFINITY, f64::NAN] {
            assert!(matches!(quasinorm(&s, p), Err(Error::Domain(_))), "p = {p}");
        }
        let q = quasinorm(&s, 2.0).unwrap();
        assert!((q.gamma - 1.0).abs() < 1e-12 && q.stable);
        let zero = quasinorm(&synthetic(|_| 0.0, 1), 2.0).unwrap();
        assert_eq!(zero.gamma, 0.0);
        let lin = quasinorm(&synthetic(|n| 2.0 * n, 1), 2.0).unwrap();
        assert!(!lin.stable);
        assert_eq!(lin.argmax_cutoff, 1e6);
    }

    #[test]
    fn residue_scaling() {
        let s = synthetic(|n| 3.0 * (0.5 * n.ln() + 1.0), 3);
        let base = dixmier_estimate(&s).unwrap();
        assert_eq!(residue_factored(1.0, &s).unwrap().value, base.value);
        let two = residue_factored(2.0, &s).unwrap();
        assert!((two.value - 2.0 * base.value).abs() <= 1e-15 * base.value.abs());
        let zero = residue_factored(0.0, &s).unwrap();
        assert_eq!((zero.value, zero.verdict), (0.0, Verdict::Vanishing));
        let div = residue_factored(3.0, &synthetic(|n| n, 3)).unwrap();
        assert_eq!(div.verdict, Verdict::Divergent);
        let mut manifold = s.clone();
        manifold.picture = Picture::Manifold;
        assert!(residue_factored(1.0, &manifold).is_err());
    }

    #[test]
    fn quadrature_examples() {
        use std::f64::consts::PI;
        assert!((torus_density_integral(4, 2, |_| 3.5).unwrap() - 3.5).abs() < 1e-15);
        let cos = torus_density_integral(64, 1, |x| (2.0 * PI * x[0]).cos()).unwrap();
        assert!(cos.abs() < 1e-12);
        let sin2 = torus_density_integral(64, 1, |x| 2.0 + (2.0 * PI * x[0]).sin().powi(2)).unwrap();
        assert!((sin2 - 2.5).abs() < 1e-12);
        let err = torus_density_integral(8, 1, |x| 1.0 / x[0]).unwrap_err();
        assert!(err.to_string().contains("[0.0]"), "{err}");
        assert!(torus_density_integral(1, 1, |_| 1.0).is_err());
    }

    #[test]
    fn probe_on_exact_and_zero_series() {
        let s = synthetic(|n| n.ln() * (2.0 + 1.0 / n.ln()), 1);
        assert!(measurability_probe(&s).unwrap() < 1e-9);
        assert_eq!(measurability_probe(&synthetic(|_| 0.0, 1)).unwrap(), 0.0);
        let short = PartialSumSeries::new(vec![2.0, 3.0, 4.0], vec![1, 2, 3], vec![0.0; 3], 1, Picture::Manifold).unwrap();
        assert!(measurability_probe(&short).is_err());
    }

    #[test]
    fn scale_series_contract() {
        let s = synthetic(|n| n.ln(), 1);
        assert_eq!(scale_series(&s, 1.0).unwrap(), s);
        assert!(scale_series(&s, 0.0).unwrap().sums.iter().all(|v| *v == 0.0));
        assert!(scale_series(&s, -1.0).is_err());
    }

    #[test]
    fn su2_example_ratio_small_n() {
        // N = 1: (1/8)·4^{-3/2} + (4/8)·7^{-3/2} over log(1·... (2)(10)/6)
        let r = su2_bessel_example_ratios(&[1.0]);
        let num = 1.0 / 8.0 * 4f64.powf(-1.5) + 0.5 * 7f64.powf(-1.5);
        let expected = num / (2.0 * 10.0 / 6.0f64).ln();
        assert!((r[0] - expected).abs() < 1e-15);
    }
}
