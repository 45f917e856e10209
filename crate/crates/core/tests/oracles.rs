//! Checks against closed forms computed by hand, independent of the
//! library's own eigen and rank routines wherever possible.

use realization_core::feedback::{completion_disjoint, siso_all_d_check};
use realization_core::generate::{companion_minimal, rng_from_seed};
use realization_core::minimality::{is_minimal, rank_formula_check};
use realization_core::numeric::{
    cluster_eigenvalues, identity, null_space, real_matrix, spectra_intersect, spectrum,
};
use realization_core::{c, CMatrix, Complex64, Realization, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Roots of `s² − t s + d` for a 2×2 matrix with trace `t` and determinant `d`.
fn quadratic_eigenvalues(m: &CMatrix) -> [Complex64; 2] {
    let t = m[(0, 0)] + m[(1, 1)];
    let d = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (t * t - d * 4.0).sqrt();
    [(t + disc) / 2.0, (t - disc) / 2.0]
}

#[test]
fn two_by_two_spectra_match_quadratic_formula() {
    let mut rng = rng_from_seed(41);
    for _ in 0..200 {
        let m = realization_core::generate::complex_gaussian(2, 2, &mut rng);
        let s = spectrum(&m).unwrap();
        for root in quadratic_eigenvalues(&m) {
            assert!(s.distance_to(root) < 1e-10 * (1.0 + root.norm()));
        }
    }
}

#[test]
fn companion_poles_are_recovered() {
    // last row holds the coefficients of (s − 1)(s + 2)(s − 3i)
    let poles = [c(1., 0.), c(-2., 0.), c(0., 3.)];
    let e1 = poles.iter().sum::<Complex64>();
    let e2 = poles[0] * poles[1] + poles[0] * poles[2] + poles[1] * poles[2];
    let e3 = poles[0] * poles[1] * poles[2];
    let mut a = CMatrix::zeros(3, 3);
    a[(0, 1)] = c(1., 0.);
    a[(1, 2)] = c(1., 0.);
    a[(2, 0)] = e3;
    a[(2, 1)] = -e2;
    a[(2, 2)] = e1;
    let s = spectrum(&a).unwrap();
    for p in poles {
        assert!(s.distance_to(p) < 1e-10);
    }
}

#[test]
fn scalar_rank_formula_by_determinant() {
    // [[λ, 1], [1, 0]] has determinant −1 for every λ
    let r = Realization::new(
        CMatrix::zeros(1, 1),
        identity(1),
        identity(1),
        CMatrix::zeros(1, 1),
    )
    .unwrap();
    let f = rank_formula_check(&r, &tol()).unwrap();
    assert_eq!((f.lhs, f.rhs), (2, 2));
}

#[test]
fn bordered_null_vector_at_zero() {
    for (al, be, ga) in [(1.0, 1.0, 1.0), (2.0, -1.0, 0.5)] {
        let m = real_matrix(4, 3, &[-al, 0., be, 0., al, ga, ga, be, 0., 0., al, ga]);
        let ns = null_space(&m, &tol());
        assert_eq!(ns.ncols(), 1);
        let v = ns.column(0);
        let expected = [-be, ga, -al];
        let norm = expected.iter().map(|x| x * x).sum::<f64>().sqrt();
        let phase = v[0] / c(expected[0] / norm, 0.0);
        for (i, e) in expected.iter().enumerate() {
            assert!((v[i] - phase * (e / norm)).norm() < 1e-10);
        }
    }
}

#[test]
fn jordan_multiplicities() {
    // J2(3) ⊕ J1(3) ⊕ J1(−1): α = 2 at 3
    let a = real_matrix(
        4,
        4,
        &[
            3., 1., 0., 0., 0., 3., 0., 0., 0., 0., 3., 0., 0., 0., 0., -1.,
        ],
    );
    let cl = cluster_eigenvalues(&a, &tol()).unwrap();
    let i3 = cl
        .representatives
        .iter()
        .position(|z| (z - c(3., 0.)).norm() < 1e-6)
        .unwrap();
    assert_eq!(cl.algebraic_mult[i3], 3);
    assert_eq!(cl.geometric_mult[i3], 2);
    assert_eq!(cl.alpha(), 2);
}

#[test]
fn scalar_functions_from_example() {
    // f1(s) = (2 + s)/s and f2(s) = s/(s − 2)
    let l1 = Realization::new(
        CMatrix::zeros(1, 1),
        real_matrix(1, 1, &[2.]),
        identity(1),
        identity(1),
    )
    .unwrap();
    let l2 = Realization::new(
        real_matrix(1, 1, &[2.]),
        real_matrix(1, 1, &[2.]),
        identity(1),
        identity(1),
    )
    .unwrap();
    for (r, pole) in [(&l1, 0.0), (&l2, 2.0)] {
        let f = r.eval_transfer(c(1.0, 1.0), &tol()).unwrap()[(0, 0)];
        let s = c(1.0, 1.0);
        let expected = if pole == 0.0 {
            (s + 2.0) / s
        } else {
            s / (s - 2.0)
        };
        assert!((f - expected).norm() < 1e-12);
        assert!(
            completion_disjoint(r.a(), r.b(), r.c(), r.d(), &tol())
                .unwrap()
                .disjoint
        );
        assert!(siso_all_d_check(r, 100, 3, &tol()).unwrap());
    }
}

#[test]
fn example_spectrum_contains_a_for_sampled_feedthrough() {
    for (d2, d3) in [(0.0, 0.0), (1.0, 1.0), (2.0, -1.0), (-1.0, 2.5)] {
        let l = real_matrix(
            4,
            4,
            &[
                0., 0., 2., 0., 0., 2., 0., 2., 1., 0., 1., d2, 0., 1., d3, 1.,
            ],
        );
        let root = Complex64::new(4.0 + d2 * d3, 0.0).sqrt();
        let expected = [c(0., 0.), c(2., 0.), c(1., 0.) + root, c(1., 0.) - root];
        let s = spectrum(&l).unwrap();
        for e in expected {
            assert!(s.distance_to(e) < 1e-8, "({d2}, {d3}): {e} missing");
        }
        let spec_a = spectrum(&real_matrix(2, 2, &[0., 0., 0., 2.])).unwrap();
        assert_eq!(spectra_intersect(&spec_a, &s, &tol()).len(), 2);
    }
}

#[test]
fn random_siso_minimal_systems() {
    for seed in 0..20 {
        let r = companion_minimal(1 + seed as usize % 5, 1, 1, &mut rng_from_seed(seed));
        assert!(is_minimal(&r, &tol()).unwrap().minimal);
        assert!(siso_all_d_check(&r, 20, seed, &tol()).unwrap());
    }
}
