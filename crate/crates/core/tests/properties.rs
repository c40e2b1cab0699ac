use std::collections::BTreeMap;
use std::path::Path;

use dixtrace::boundary::{boundary_dixmier, interval_spectrum, BoundarySymbol, IntervalBC};
use dixtrace::geometry::{counting_function, enumerate_dual, FileSpectrum};
use dixtrace::summation::{dyadic_grid, partial_sums, partial_sums_with, SumOptions};
use dixtrace::symbol::{eval_symbol, nuclear_trace_abs, singular_values, DenseMatrix};
use dixtrace::trace::{dixmier_estimate, scale_series};
use dixtrace::{Geometry, Label, MatrixSymbolValue, PartialSumSeries, Picture, SymbolSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> DenseMatrix {
    let entries = (0..d * d)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    DenseMatrix::from_rows(d, entries)
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.dim(), m.dim(), |i, j| m.get(i, j))
}

fn from_nalgebra(m: &DMatrix<Complex64>) -> DenseMatrix {
    let d = m.nrows();
    DenseMatrix::from_rows(d, (0..d * d).map(|k| m[(k / d, k % d)]).collect())
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex64> {
    to_nalgebra(&random_matrix(rng, d)).qr().q()
}

fn trace_abs(m: DenseMatrix) -> f64 {
    nuclear_trace_abs(&MatrixSymbolValue::dense(Label::scalar(0), m)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_matches_nalgebra_svd(seed in any::<u64>(), d in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, d);
        let ours = singular_values(&m).unwrap();
        let mut theirs: Vec<f64> = to_nalgebra(&m).singular_values().iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        let scale = theirs[0].max(1e-300);
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() <= 1e-10 * scale, "{ours:?} vs {theirs:?}");
        }
        let total: f64 = theirs.iter().sum();
        prop_assert!((trace_abs(m) - total).abs() <= 1e-10 * total);
    }

    #[test]
    fn hermitian_fast_path_matches_svd(seed in any::<u64>(), d in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = to_nalgebra(&random_matrix(&mut rng, d));
        let h = &a + a.adjoint();
        let total: f64 = h.singular_values().iter().sum();
        prop_assert!((trace_abs(from_nalgebra(&h)) - total).abs() <= 1e-10 * total);
    }

    #[test]
    fn unitary_invariance(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, d);
        let u = random_unitary(&mut rng, d);
        let v = random_unitary(&mut rng, d);
        let rotated = from_nalgebra(&(&u * to_nalgebra(&m) * &v));
        let (a, b) = (trace_abs(m), trace_abs(rotated));
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn subadditive_and_homogeneous(seed in any::<u64>(), d in 1usize..=6, c in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = MatrixSymbolValue::dense(Label::scalar(0), random_matrix(&mut rng, d));
        let b = MatrixSymbolValue::dense(Label::scalar(0), random_matrix(&mut rng, d));
        let ta = nuclear_trace_abs(&a).unwrap();
        let tb = nuclear_trace_abs(&b).unwrap();
        let tab = nuclear_trace_abs(&(a.clone() + b)).unwrap();
        prop_assert!(tab <= (ta + tb) * (1.0 + 1e-12));
        let tc = nuclear_trace_abs(&(c * a)).unwrap();
        prop_assert!((tc - c.abs() * ta).abs() <= 1e-11 * ta.max(1e-300));
    }

    #[test]
    fn parallel_and_serial_sums_are_bit_identical(n_max in 8.0f64..400.0, ppo in 1u32..6, which in 0usize..4) {
        let (g, picture) = match which {
            0 => (Geometry::torus(2).unwrap(), Picture::Manifold),
            1 => (Geometry::su2(), Picture::Group),
            2 => (Geometry::su3(), Picture::Group),
            _ => (Geometry::sphere(3).unwrap(), Picture::Homogeneous),
        };
        let spec = SymbolSpec::bessel(1.3, 2.0);
        let grid = dyadic_grid(n_max.min(if which == 2 { 40.0 } else { 400.0 }), ppo).unwrap();
        let par = partial_sums_with(&g, &spec, &grid, picture, &SumOptions { parallel: true, sub_shells: 8 }).unwrap();
        let ser = partial_sums_with(&g, &spec, &grid, picture, &SumOptions { parallel: false, sub_shells: 8 }).unwrap();
        prop_assert_eq!(
            par.sums.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            ser.sums.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        prop_assert_eq!(par.counts, ser.counts);
    }

    #[test]
    fn sums_are_additive_and_homogeneous(s1 in 0.5f64..3.0, s2 in 0.5f64..3.0, c in 0.0f64..10.0) {
        let g = Geometry::su2();
        let grid = dyadic_grid(200.0, 3).unwrap();
        let a = SymbolSpec::bessel(s1, 2.0);
        let b = SymbolSpec::radial(s2);
        let sa = partial_sums(&g, &a, &grid, Picture::Group).unwrap();
        let sb = partial_sums(&g, &b, &grid, Picture::Group).unwrap();
        let sab = partial_sums(&g, &SymbolSpec::sum(vec![a.clone(), b]), &grid, Picture::Group).unwrap();
        let sc = partial_sums(&g, &a.scaled(c), &grid, Picture::Group).unwrap();
        for k in 0..grid.len() {
            let expected = sa.sums[k] + sb.sums[k];
            prop_assert!((sab.sums[k] - expected).abs() <= 1e-12 * expected);
            prop_assert!((sc.sums[k] - c * sa.sums[k]).abs() <= 1e-12 * c * sa.sums[k] + 1e-300);
        }
    }

    #[test]
    fn trace_homogeneity(c in 0.01f64..100.0, tau in 0.1f64..5.0, c1 in 0.0f64..3.0) {
        let grid = dyadic_grid(1e5, 4).unwrap();
        let sums = grid.iter().map(|n| n.ln() * tau + c1 + 1.0 / n).collect();
        let counts = grid.iter().map(|n| *n as u128).collect();
        let s = PartialSumSeries::new(grid, counts, sums, 1, Picture::Manifold).unwrap();
        let base = dixmier_estimate(&s).unwrap();
        let scaled = dixmier_estimate(&scale_series(&s, c).unwrap()).unwrap();
        prop_assert!((scaled.value - c * base.value).abs() <= 1e-9 * c * base.value.abs());
        prop_assert!((base.value - tau).abs() < 1e-2 * tau);
    }

    #[test]
    fn shell_split_is_a_partition(split in 1.0f64..20.0, n in 2u32..4) {
        let g = Geometry::torus(n).unwrap();
        let upper = 20.0;
        let mut below = 0u128;
        let mut above = 0u128;
        g.visit_shell(None, split, |p| { below += p.eigenspace_dim as u128; Ok(()) }).unwrap();
        g.visit_shell(Some(split), upper, |p| { above += p.eigenspace_dim as u128; Ok(()) }).unwrap();
        prop_assert_eq!(below + above, counting_function(&g, upper).unwrap());
    }

    #[test]
    fn csv_round_trip_is_bit_identical(values in prop::collection::vec(0.0f64..1e12, 1..30)) {
        let cutoffs: Vec<f64> = (0..values.len()).map(|k| 2.0 + k as f64 * 1.37).collect();
        let counts = (0..values.len()).map(|k| k as u128 * 7).collect();
        let s = PartialSumSeries::new(cutoffs, counts, values, 3, Picture::Group).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = PartialSumSeries::read_csv(buf.as_slice(), 3, Picture::Group).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn spectrum_file_round_trip(lams in prop::collection::vec(0.0f64..1e6, 1..20)) {
        let text: String = lams.iter().enumerate().map(|(k, l)| format!("{k} 2 {} {l:e}\n", 2 * (k % 3 + 1))).collect();
        let spec = FileSpectrum::parse(&text, Path::new("p")).unwrap();
        let again = FileSpectrum::parse(&spec.to_text(), Path::new("q")).unwrap();
        prop_assert_eq!(&spec, &again);
        prop_assert_eq!(spec.to_text(), again.to_text());
    }

    #[test]
    fn conjugate_pairs_for_real_log(a in 0.1f64..10.0, b in 0.1f64..10.0, flip in any::<bool>()) {
        // ln(-a/b) is real exactly when a/b < 0
        let (a, b) = if flip { (-a, b) } else { (a, -b) };
        let bc = IntervalBC::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0), dixtrace::boundary::AlphaModel::Zero, 1.0).unwrap();
        let Ok(spec) = interval_spectrum(&bc, 30) else { return Ok(()) };
        let map: BTreeMap<i64, Complex64> = spec.into_iter().collect();
        for j in 1..=30 {
            prop_assert!((map[&j].norm() - map[&-j].norm()).abs() <= 1e-12 * map[&j].norm());
        }
    }

    #[test]
    fn finite_perturbation_leaves_boundary_trace(k in 1usize..20, bump in 0.0f64..50.0) {
        let bc = IntervalBC::first_order(-std::f64::consts::E).unwrap();
        let sym = BoundarySymbol::from_interval(&bc, 50_000, |l| l.inv()).unwrap();
        let grid = dyadic_grid(1e5, 4).unwrap();
        let base = boundary_dixmier(&sym, &grid).unwrap();
        let perturbed = sym.map_values(|e| {
            if e.index.unsigned_abs() as usize <= k { e.value + bump } else { e.value }
        });
        let moved = boundary_dixmier(&perturbed, &grid).unwrap();
        prop_assert!((moved.value - base.value).abs() <= base.fit_residual.max(1e-9), "{base:?} {moved:?}");
    }
}

#[test]
fn torus_enumeration_is_complete() {
    // brute force over the bounding box
    for n in 1..=3u32 {
        let g = Geometry::torus(n).unwrap();
        let cutoff = 7.3f64;
        let r = cutoff.ceil() as i64;
        let mut expected = Vec::new();
        let mut idx = vec![-r; n as usize];
        loop {
            let r2: i64 = idx.iter().map(|x| x * x).sum();
            if ((1 + r2) as f64).sqrt() <= cutoff {
                expected.push(Label::new(&idx));
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] <= r {
                    break;
                }
                idx[k] = -r;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
        expected.sort();
        let mut found: Vec<Label> = enumerate_dual(&g, cutoff).unwrap().into_iter().map(|p| p.label).collect();
        found.sort();
        assert_eq!(found, expected, "torus {n}");
    }
}

#[test]
fn su2_counts_match_closed_sum() {
    let g = Geometry::su2();
    for &cutoff in &[1.0f64, 2.0, 5.5, 17.0, 100.0] {
        // λ_n = n(n+2)/4 ≤ N² - 1, exact in integers for these cutoffs
        let bound = (4.0 * (cutoff * cutoff - 1.0)) as u128;
        let expected: u128 = (0..).take_while(|n| n * (n + 2) <= bound).map(|n| (n + 1) * (n + 1)).sum();
        assert_eq!(counting_function(&g, cutoff).unwrap(), expected, "cutoff {cutoff}");
    }
}

#[test]
fn masked_sphere_symbols_use_class_one_dimension() {
    let g = Geometry::sphere(2).unwrap();
    let spec = SymbolSpec::bessel(2.0, 2.0).with_mask();
    for p in enumerate_dual(&g, 6.0).unwrap() {
        let v = eval_symbol(&spec, &p).unwrap();
        let t = nuclear_trace_abs(&v).unwrap();
        assert!((t - (1.0 + p.eigenvalue).powf(-1.0)).abs() < 1e-15);
    }
}

#[test]
fn naive_average_approaches_extrapolation() {
    let g = Geometry::torus(1).unwrap();
    let spec = SymbolSpec::bessel(1.0, 2.0);
    let gaps: Vec<f64> = [1e4, 1e5, 1e6]
        .iter()
        .map(|&n| {
            let est = dixmier_estimate(&partial_sums(&g, &spec, &dyadic_grid(n, 4).unwrap(), Picture::Manifold).unwrap()).unwrap();
            (est.naive_last - est.value).abs()
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn quasinorm_dominance() {
    use dixtrace::trace::quasinorm;
    let g = Geometry::torus(1).unwrap();
    let s = partial_sums(&g, &SymbolSpec::shifted_root(0.5, 1.0, 2.0), &dyadic_grid(1e5, 4).unwrap(), Picture::Manifold).unwrap();
    // p < q gives 1/q - 1 < 1/p - 1, so γ_q ≤ γ_p on N ≥ 1: finite γ_p forces finite γ_q
    let gammas: Vec<f64> = [2.0, 3.0, 8.0, 50.0].iter().map(|&p| quasinorm(&s, p).unwrap().gamma).collect();
    assert!(gammas.windows(2).all(|w| w[0] >= w[1]), "{gammas:?}");
    assert!(gammas.iter().all(|g| g.is_finite()));
}

#[test]
fn measurability_dispersion() {
    use dixtrace::trace::measurability_probe;
    let g = Geometry::torus(1).unwrap();
    let grid = dyadic_grid(1e6, 4).unwrap();
    let s = partial_sums(&g, &SymbolSpec::bessel(1.0, 2.0), &grid, Picture::Manifold).unwrap();
    assert!(measurability_probe(&s).unwrap() < 0.02);
    let ones = partial_sums(&g, &SymbolSpec::constant(1.0), &grid, Picture::Manifold).unwrap();
    assert!(measurability_probe(&ones).unwrap() > 1.0);
}
