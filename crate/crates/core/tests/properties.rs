use std::f64::consts::PI;

use matkern::abelian::{
    analyze, brute_force_strict, character_table, strict_criterion, synthesize, FourierSpectrum,
};
use matkern::counterexample::{
    circle_example, dot_product_example, embed, gaussian_example, witness,
};
use matkern::kernels::{gram, MatrixKernel, ScalarKernel};
use matkern::numcore::{classify, quadratic_form, HermitianMatrix, PdKind, Tolerances};
use matkern::spaces::{Point, Space};
use matkern::symmetry::{orbit_decompose, SymmetryMap};
use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;

type C = Complex<f64>;

fn complex() -> impl Strategy<Value = C> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C::new(re, im))
}

fn nonzero_vector(len: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec(complex(), len).prop_filter("nonzero", |v| {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3
    })
}

/// `B* B + shift I` for a random square `B`.
fn hermitian(dim: usize) -> impl Strategy<Value = (DMatrix<C>, f64)> {
    (prop::collection::vec(complex(), dim * dim), -0.5..0.5f64).prop_map(move |(entries, shift)| {
        let b = DMatrix::from_vec(dim, dim, entries);
        (
            b.adjoint() * &b + DMatrix::identity(dim, dim) * C::new(shift, 0.0),
            shift,
        )
    })
}

fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

fn catalog() -> Vec<(ScalarKernel<f64>, Space<f64>, f64)> {
    let r3 = Space::euclidean(3).unwrap();
    let cs = Space::complex_sphere(2).unwrap();
    vec![
        (ScalarKernel::circle_exp_cos(), Space::circle(), 1.0),
        (ScalarKernel::gaussian(3, 0.7).unwrap(), r3.clone(), 2.0),
        (
            ScalarKernel::dot_exp(r3.clone(), 0.5, 0.25).unwrap(),
            r3,
            1.0,
        ),
        (
            ScalarKernel::dot_exp(cs.clone(), 1.0, 0.0).unwrap(),
            cs,
            1.0,
        ),
    ]
}

fn random_points(space: &Space<f64>, n: usize, radius: f64, seed: u64) -> Vec<Point<f64>> {
    let mut r = matkern::rng::rng(seed);
    (0..n).map(|_| space.random_point(&mut r, radius)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_form_matches_spectral_sum((m, _) in hermitian(5), c in nonzero_vector(5)) {
        let h = HermitianMatrix::new(m).unwrap();
        let q = quadratic_form(&h, &c).unwrap();
        let eig = h.eigen().unwrap();
        let spectral: f64 = eig.values.iter().zip(&eig.vectors).map(|(l, u)| {
            let p: C = u.iter().zip(&c).map(|(a, b)| a.conj() * b).sum();
            l * p.norm_sqr()
        }).sum();
        let scale = eig.scale() * c.iter().map(|z| z.norm_sqr()).sum::<f64>();
        prop_assert!((q.value - spectral).abs() <= 1e-10 * scale.max(1.0));
        prop_assert!(!q.imag_exceeds(1e-10, scale.max(1.0)));
    }

    #[test]
    fn classify_is_scale_equivariant((m, _) in hermitian(4), log_alpha in -3.0..3.0f64) {
        let h = HermitianMatrix::new(m).unwrap();
        let alpha = 10f64.powf(log_alpha);
        let tol = Tolerances::default();
        let a = classify(&h, &tol).unwrap();
        let b = classify(&h.scaled(alpha), &tol).unwrap();
        let rel = a.relative_min_eigenvalue();
        if (rel.abs() - tol.pd_tol).abs() > 1e-6 {
            prop_assert_eq!(a.kind, b.kind);
        }
        prop_assert!((a.relative_min_eigenvalue() - b.relative_min_eigenvalue()).abs() <= 1e-10);
    }

    #[test]
    fn low_rank_null_vectors(vs in prop::collection::vec(nonzero_vector(6), 1..5)) {
        let mut m = DMatrix::<C>::zeros(6, 6);
        for v in &vs {
            let col = DMatrix::from_column_slice(6, 1, v);
            m += &col * col.adjoint();
        }
        let h = HermitianMatrix::new(m.clone()).unwrap();
        let verdict = classify(&h, &Tolerances::default()).unwrap();
        prop_assert_eq!(verdict.kind, PdKind::PositiveSemidefiniteDegenerate);
        prop_assert_eq!(verdict.numeric_rank + verdict.null_vectors.len(), 6);
        prop_assert!(verdict.null_vectors.len() >= 6 - vs.len());
        for u in &verdict.null_vectors {
            let mu = &m * DMatrix::from_column_slice(6, 1, u);
            prop_assert!(max_abs(&mu) <= 1e-9 * verdict.scale);
        }
    }

    #[test]
    fn catalog_kernels_are_hermitian(seed in any::<u64>()) {
        for (k, space, radius) in catalog() {
            let xs = random_points(&space, 100, radius, seed);
            let ys = random_points(&space, 100, radius, seed ^ 0x5555);
            for (x, y) in xs.iter().zip(&ys) {
                let a = k.eval(x, y).unwrap();
                let b = k.eval(y, x).unwrap();
                prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn projection_is_sesquilinear(v in nonzero_vector(2), w in nonzero_vector(2), alpha in complex(), seed in any::<u64>()) {
        let cx = circle_example(1.0).unwrap();
        let pts = random_points(&Space::circle(), 8, 1.0, seed);
        let p = |u: &[C]| cx.as_matrix.project(u).unwrap();
        let av: Vec<C> = v.iter().map(|z| alpha * z).collect();
        let sum: Vec<C> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
        let diff: Vec<C> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
        for x in &pts {
            for y in &pts {
                let kv = p(&v).eval(x, y).unwrap();
                let kw = p(&w).eval(x, y).unwrap();
                let scaled = if alpha.norm() > 1e-6 { p(&av).eval(x, y).unwrap() } else { C::new(0.0, 0.0) };
                prop_assert!((scaled - kv * alpha.norm_sqr()).norm() <= 1e-12 * kv.norm().max(1.0));
                let lhs = p(&sum).eval(x, y).unwrap() + p(&diff).eval(x, y).unwrap();
                prop_assert!((lhs - (kv + kw) * 2.0).norm() <= 1e-12 * lhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn projected_gram_is_contraction_of_blocked_gram(v in nonzero_vector(2), seed in any::<u64>()) {
        let cx = gaussian_example(1.0, vec![1.0, 0.0, 0.0]).unwrap();
        let space = Space::euclidean(3).unwrap();
        let pts = space.sample_distinct(6, 0.05, seed).unwrap();
        let n = pts.len();
        let big = gram(&cx.as_matrix, &pts).unwrap();
        let small = gram(&cx.as_matrix.project(&v).unwrap(), &pts).unwrap();
        let contracted = DMatrix::from_fn(n, n, |a, b| {
            let mut s = C::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    s += v[i].conj() * v[j] * big.get(i * n + a, j * n + b);
                }
            }
            s
        });
        prop_assert!(max_abs(&(small.as_matrix() - contracted)) <= 1e-12 * max_abs(small.as_matrix()).max(1.0));
    }

    #[test]
    fn circle_witness_for_any_rotation(rho in 0.05..6.2f64, x in -PI..PI) {
        let cx = circle_example(rho).unwrap();
        let w = witness(&cx, &Point::angle(x)).unwrap();
        prop_assert!(w.achieved_form_value.abs() <= 1e-8 * w.scale);
        let g = gram(&cx.as_matrix, &w.points).unwrap();
        let flat = w.flattened();
        let gc = g.apply(&flat).unwrap();
        prop_assert!(gc.iter().all(|z| z.norm() <= 1e-8 * g.eigen().unwrap().scale()));
    }

    #[test]
    fn shifted_dot_witness(r in 1.2..3.0f64, t in 0.2..1.5f64) {
        let cx = dot_product_example(2, r).unwrap();
        let w = witness(&cx, &Point::vector(vec![t, 0.0])).unwrap();
        prop_assert!(w.achieved_form_value.abs() <= 1e-8 * w.scale);
    }

    #[test]
    fn embedding_preserves_projections(ell in 2..6usize, v in nonzero_vector(2), seed in any::<u64>()) {
        let cx = circle_example(1.0).unwrap();
        let e = embed(&cx.as_matrix, ell, &ScalarKernel::circle_exp_cos()).unwrap();
        let mut padded = v.clone();
        padded.resize(ell, C::new(0.0, 0.0));
        let a = cx.as_matrix.project(&v).unwrap();
        let b = e.project(&padded).unwrap();
        let pts = random_points(&Space::circle(), 10, 1.0, seed);
        for x in &pts {
            for y in &pts {
                let (p, q) = (a.eval(x, y).unwrap(), b.eval(x, y).unwrap());
                prop_assert!((p - q).norm() <= 1e-12 * p.norm().max(1.0));
            }
        }
    }

    #[test]
    fn orbit_of_integer_translation(set in prop::collection::btree_set(-8i32..8, 1..10), step in 1i32..3) {
        let pts: Vec<Point<f64>> = set.iter().map(|&x| Point::vector(vec![x as f64])).collect();
        let phi = SymmetryMap::translation(vec![step as f64]).unwrap();
        let d = orbit_decompose(&phi, &pts).unwrap();
        let ints: Vec<i32> = set.iter().copied().collect();
        let mut f = Vec::new();
        let mut tau = Vec::new();
        for (mu, x) in ints.iter().enumerate() {
            if let Some(nu) = ints.iter().position(|y| *y == x + step) {
                f.push(mu);
                tau.push((mu, nu));
            }
        }
        let mut union: Vec<i32> = ints.iter().flat_map(|x| [*x, x + step]).collect();
        union.sort();
        union.dedup();
        prop_assert_eq!(&d.f, &f);
        prop_assert_eq!(&d.tau, &tau);
        prop_assert_eq!(d.z_points.len(), union.len());
        prop_assert_eq!(d.m + 2 * d.p, union.len());
    }

    #[test]
    fn fourier_roundtrip_and_parseval(moduli in prop::sample::select(vec![vec![2u32], vec![5], vec![2, 3], vec![4, 2], vec![3, 3], vec![2, 2, 2]]),
                                      raw in prop::collection::vec(0.0..1.0f64, 18)) {
        let group = Space::finite_abelian(moduli).unwrap();
        let n = group.order().unwrap();
        let a: Vec<f64> = raw[..n].to_vec();
        let spectrum = FourierSpectrum::scalar(group.clone(), a.clone()).unwrap();
        let psi = synthesize(&spectrum).unwrap().scalar_values();
        let back = analyze(&psi, &group).unwrap();
        for (x, y) in back.raw.iter().zip(&a) {
            prop_assert!((x - C::new(*y, 0.0)).norm() <= 1e-12);
        }
        let energy: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        let coeff: f64 = a.iter().map(|x| x * x).sum();
        prop_assert!((energy - coeff).abs() <= 1e-12 * coeff.max(1.0));
    }

    #[test]
    fn strictness_criterion_matches_gram(moduli in prop::sample::select(vec![vec![3u32], vec![2, 2], vec![6], vec![2, 3]]),
                                         raw in prop::collection::vec(prop_oneof![Just(0.0), 0.1..1.0f64], 6)) {
        let group = Space::finite_abelian(moduli).unwrap();
        let n = group.order().unwrap();
        let a = raw[..n].to_vec();
        prop_assume!(a.iter().any(|x| *x > 0.0));
        let spectrum = FourierSpectrum::scalar(group, a.clone()).unwrap();
        let verdict = brute_force_strict(&synthesize(&spectrum).unwrap().kernel()).unwrap();
        prop_assert_eq!(strict_criterion(&spectrum), verdict.is_positive_definite());
        prop_assert_eq!(strict_criterion(&spectrum), a.iter().all(|x| *x > 0.0));
    }
}

#[test]
fn characters_are_orthogonal() {
    for moduli in [vec![2u32], vec![3, 4], vec![2, 2, 3], vec![5, 5]] {
        let group = Space::<f64>::finite_abelian(moduli).unwrap();
        let table = character_table(&group).unwrap();
        let n = table.len();
        for (i, row_i) in table.iter().enumerate() {
            for (j, row_j) in table.iter().enumerate() {
                let s: C = row_i.iter().zip(row_j).map(|(a, b)| a * b.conj()).sum();
                let expected = if i == j { n as f64 } else { 0.0 };
                assert!(
                    (s - C::new(expected, 0.0)).norm() <= 1e-10,
                    "rows {i},{j}: {s}"
                );
            }
        }
    }
}

#[test]
fn single_precision_gram_classifies() {
    let k = matkern::ScalarKernel32::circle_exp_cos();
    let pts: Vec<Point<f32>> = [0.0f32, 1.0, 2.5]
        .iter()
        .map(|&t| Point::angle(t))
        .collect();
    let g = gram(&MatrixKernel::diagonal(&k, 1).unwrap(), &pts).unwrap();
    let verdict = classify(&g, &Tolerances::<f32>::default()).unwrap();
    assert!(verdict.is_positive_definite());
}
