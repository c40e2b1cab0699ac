//! Jacobi iterations for small dense complex matrices.
//!
//! `singular_values` is the one-sided (Hestenes) scheme: plane rotations
//! orthogonalise pairs of columns until every pair is numerically
//! orthogonal, then the column norms are the singular values.
//! `hermitian_eigenvalues` is the classical two-sided cyclic scheme.

use num_complex::Complex64;

use super::DenseMatrix;

/// Pairs with `|<a_p, a_q>| <= TOLERANCE · |a_p| |a_q|` count as orthogonal.
pub const TOLERANCE: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct NoConvergence {
    pub sweeps: usize,
    pub off_ratio: f64,
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>, NoConvergence> {
    let n = m.dim();
    // column-major copy
    let mut cols: Vec<Complex64> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| m.get(i, j))
        .collect();

    let mut converged = n < 2;
    let mut worst = 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        worst = 0.0f64;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let cp = &cols[p * n..(p + 1) * n];
                    let cq = &cols[q * n..(q + 1) * n];
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = Complex64::new(0.0, 0.0);
                    for (x, y) in cp.iter().zip(cq) {
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 {
                    continue;
                }
                let ratio = g / (alpha * beta).sqrt();
                worst = worst.max(ratio);
                if ratio <= TOLERANCE {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let ap = cols[p * n + i];
                    let aq = cols[q * n + i] * phase;
                    cols[p * n + i] = ap * c - aq * s;
                    cols[q * n + i] = ap * s + aq * c;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(NoConvergence {
            sweeps: MAX_SWEEPS,
            off_ratio: worst,
        });
    }
    let mut sv: Vec<f64> = cols
        .chunks(n.max(1))
        .take(n)
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Real eigenvalues of a Hermitian matrix, unordered.
///
/// Only the Hermitian part is used; the caller checks hermiticity.
pub fn hermitian_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>, NoConvergence> {
    let n = m.dim();
    let mut a = m.clone();
    let frob = a.frobenius_norm();
    if n < 2 || frob == 0.0 {
        return Ok((0..n).map(|i| a.get(i, i).re).collect());
    }
    let threshold = TOLERANCE * frob;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            return Ok((0..n).map(|i| a.get(i, i).re).collect());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let g = apq.norm();
                if g <= f64::MIN_POSITIVE {
                    continue;
                }
                // Phase change on index q makes a_pq real and positive.
                let phase = apq / g;
                for r in 0..n {
                    let v = a.get(r, q) * phase.conj();
                    a.set(r, q, v);
                }
                for r in 0..n {
                    let v = a.get(q, r) * phase;
                    a.set(q, r, v);
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let xp = a.get(r, p);
                    let xq = a.get(r, q);
                    a.set(r, p, xp * c - xq * s);
                    a.set(r, q, xp * s + xq * c);
                }
                for r in 0..n {
                    let xp = a.get(p, r);
                    let xq = a.get(q, r);
                    a.set(p, r, xp * c - xq * s);
                    a.set(q, r, xp * s + xq * c);
                }
                a.set(p, q, Complex64::new(0.0, 0.0));
                a.set(q, p, Complex64::new(0.0, 0.0));
                a.set(p, p, Complex64::new(app - t * g, 0.0));
                a.set(q, q, Complex64::new(aqq + t * g, 0.0));
            }
        }
    }
    Err(NoConvergence {
        sweeps: MAX_SWEEPS,
        off_ratio: off_diagonal_norm(&a) / frob,
    })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn nilpotent_two_by_two() {
        let m = DenseMatrix::from_rows(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-15);
        assert!(sv[1].abs() < 1e-15);
    }

    #[test]
    fn hermitian_two_by_two_closed_form() {
        // [[2, 1-i], [1+i, 3]]: eigenvalues (5 ± sqrt(1 + 8)) / 2 = 1, 4
        let m = DenseMatrix::from_rows(2, vec![c(2.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(3.0, 0.0)]);
        let mut ev = hermitian_eigenvalues(&m).unwrap();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-13);
        assert!((ev[1] - 4.0).abs() < 1e-13);
    }

    #[test]
    fn svd_of_rank_one() {
        // u v^* with |u| = sqrt(2), |v| = sqrt(5)
        let u = [c(1.0, 0.0), c(0.0, 1.0)];
        let v = [c(1.0, 0.0), c(2.0, 0.0)];
        let entries = (0..4).map(|k| u[k / 2] * v[k % 2].conj()).collect();
        let sv = singular_values(&DenseMatrix::from_rows(2, entries)).unwrap();
        assert!((sv[0] - 10f64.sqrt()).abs() < 1e-14);
        assert!(sv[1] < 1e-14);
    }

    #[test]
    fn empty_and_scalar() {
        assert!(singular_values(&DenseMatrix::zeros(0)).unwrap().is_empty());
        let m = DenseMatrix::from_rows(1, vec![c(-3.0, 4.0)]);
        assert_eq!(singular_values(&m).unwrap(), vec![5.0]);
    }
}
