//! Classical minimality tests: the Kalman rank oracle, PBH rank tests at
//! the eigenvalues of `A`, the largest geometric multiplicity `α(A)`, and
//! the bordered-pencil rank formula together with the ways it can fail.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::complex_gaussian;
use crate::numeric::{
    c, cluster_eigenvalues, identity, numeric_rank, one_norm, rank_profile, spectrum, CMatrix,
    Tolerances,
};
use crate::realization::Realization;

/// Result of one PBH rank test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PbhOutcome {
    pub holds: bool,
    /// First eigenvalue at which the rank drops.
    pub witness: Option<Complex64>,
    /// Decades by which the worst `n`-th singular value clears the rank
    /// cutoff; negative when the test fails.
    pub margin: f64,
}

/// Combined controllability/observability verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalityVerdict {
    pub controllable: bool,
    pub observable: bool,
    pub minimal: bool,
    pub uncontrollable_witness: Option<Complex64>,
    pub unobservable_witness: Option<Complex64>,
    pub controllability_margin: f64,
    pub observability_margin: f64,
}

fn check_pair_dims(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "pair needs A n×n and B n×m, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// `rank [B, AB, …, A^{n−1}B] = n`, on `A` rescaled to unit norm.
pub fn kalman_controllable(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> Result<bool> {
    check_pair_dims(a, b)?;
    let n = a.nrows();
    let m = b.ncols();
    let norm = one_norm(a);
    let a = if norm > 0.0 {
        a / Complex64::from(norm)
    } else {
        a.clone()
    };
    let mut krylov = CMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        krylov.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = &a * block;
    }
    Ok(numeric_rank(&krylov, tol) == n)
}

/// PBH controllability test at the cluster representatives of `spect(A)`.
pub fn pbh_controllable(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> Result<PbhOutcome> {
    check_pair_dims(a, b)?;
    let n = a.nrows();
    let m = b.ncols();
    let clusters = cluster_eigenvalues(a, tol)?;
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for &lambda in &clusters.representatives {
        let mut pencil = CMatrix::zeros(n, n + m);
        pencil
            .view_mut((0, 0), (n, n))
            .copy_from(&(identity(n) * lambda - a));
        pencil.view_mut((0, n), (n, m)).copy_from(b);
        let profile = rank_profile(&pencil, tol);
        margin = margin.min(profile.clearance(n));
        if profile.rank < n && witness.is_none() {
            witness = Some(lambda);
        }
    }
    Ok(PbhOutcome {
        holds: witness.is_none(),
        witness,
        margin,
    })
}

/// PBH observability test, by duality with `(A*, C*)`.
pub fn pbh_observable(a: &CMatrix, c: &CMatrix, tol: &Tolerances) -> Result<PbhOutcome> {
    if !a.is_square() || a.ncols() != c.ncols() {
        return Err(Error::Dimension(format!(
            "pair needs A n×n and C p×n, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    let mut outcome = pbh_controllable(&a.adjoint(), &c.adjoint(), tol)?;
    // report the witness as an eigenvalue of A, not of A*
    outcome.witness = outcome.witness.map(|w| w.conj());
    Ok(outcome)
}

pub fn is_minimal(r: &Realization, tol: &Tolerances) -> Result<MinimalityVerdict> {
    let ctrb = pbh_controllable(r.a(), r.b(), tol)?;
    let obsv = pbh_observable(r.a(), r.c(), tol)?;
    Ok(MinimalityVerdict {
        controllable: ctrb.holds,
        observable: obsv.holds,
        minimal: ctrb.holds && obsv.holds,
        uncontrollable_witness: ctrb.witness,
        unobservable_witness: obsv.witness,
        controllability_margin: ctrb.margin,
        observability_margin: obsv.margin,
    })
}

/// Cross-check mode: minimality from the Kalman rank oracle alone.
pub fn is_minimal_kalman(r: &Realization, tol: &Tolerances) -> Result<bool> {
    Ok(kalman_controllable(r.a(), r.b(), tol)?
        && kalman_controllable(&r.a().adjoint(), &r.c().adjoint(), tol)?)
}

/// Largest geometric multiplicity among the eigenvalues of `a`.
pub fn alpha(a: &CMatrix, tol: &Tolerances) -> Result<usize> {
    Ok(cluster_eigenvalues(a, tol)?.alpha())
}

/// Outcome of comparing `min_λ rank [[λI−A, B], [C, D]]` with
/// `n + min(rank B, rank C)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankFormula {
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
    /// A point attaining the minimum.
    pub minimizer: Complex64,
    pub candidates_checked: usize,
}

fn bordered(r: &Realization, lambda: Complex64) -> CMatrix {
    let (n, m, p) = (r.n(), r.m(), r.p());
    let mut x = CMatrix::zeros(n + p, n + m);
    x.view_mut((0, 0), (n, n))
        .copy_from(&(identity(n) * lambda - r.a()));
    x.view_mut((0, n), (n, m)).copy_from(r.b());
    x.view_mut((n, 0), (p, n)).copy_from(r.c());
    x.view_mut((n, n), (p, m)).copy_from(r.d());
    x
}

/// Finite generalized eigenvalues of the pencil `λ·diag(I, 0) − [[A, −B], [−C, −D]]`.
///
/// Rectangular pencils are first compressed to square ones with fixed
/// random weights; compression can only add rank-drop points, never lose
/// one. Shift-and-invert with a few trial shifts turns the pencil into a
/// standard eigenproblem. Returns nothing if the pencil is singular.
fn pencil_eigenvalues(r: &Realization, tol: &Tolerances) -> Result<Vec<Complex64>> {
    let (n, m, p) = (r.n(), r.m(), r.p());
    let k = m.min(p);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f7e_9c11);
    let (b, c_mat, d) = if m > p {
        let w = complex_gaussian(m, k, &mut rng);
        (r.b() * &w, r.c().clone(), r.d() * &w)
    } else if p > m {
        let w = complex_gaussian(k, p, &mut rng);
        (r.b().clone(), &w * r.c(), &w * r.d())
    } else {
        (r.b().clone(), r.c().clone(), r.d().clone())
    };
    let size = n + k;
    let mut pencil_m = CMatrix::zeros(size, size);
    pencil_m.view_mut((0, 0), (n, n)).copy_from(r.a());
    pencil_m.view_mut((0, n), (n, k)).copy_from(&(-b));
    pencil_m.view_mut((n, 0), (k, n)).copy_from(&(-c_mat));
    pencil_m.view_mut((n, n), (k, k)).copy_from(&(-d));
    let mut e = CMatrix::zeros(size, size);
    for i in 0..n {
        e[(i, i)] = c(1.0, 0.0);
    }
    let scale = 1.0 + one_norm(&pencil_m);
    for shift in [c(0.37, 0.61), c(-0.83, 0.29), c(0.11, -0.97), c(1.7, 1.3)] {
        let sigma = shift * scale;
        let shifted = &pencil_m - &e * sigma;
        if numeric_rank(&shifted, tol) < size {
            continue;
        }
        let Some(x) = shifted.lu().solve(&e) else {
            continue;
        };
        let mu = spectrum(&x)?;
        let mu_max = mu.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        return Ok(mu
            .values
            .iter()
            .filter(|z| z.norm() > 1e-10 * mu_max.max(f64::MIN_POSITIVE))
            .map(|z| sigma + z.inv())
            .collect());
    }
    Ok(Vec::new())
}

/// Evaluates the rank formula over a finite candidate set where the rank
/// of the bordered pencil can drop: the eigenvalues of `A`, the spectra
/// of the zero-padded system matrix with and without `D`, and the finite
/// generalized eigenvalues of the pencil. The corner block carries `D`;
/// for strictly proper systems it is zero.
pub fn rank_formula_check(r: &Realization, tol: &Tolerances) -> Result<RankFormula> {
    let mut candidates = cluster_eigenvalues(r.a(), tol)?.representatives;
    candidates.extend(spectrum(&r.associated().naive_square().assemble_l().l)?.values);
    candidates.extend(spectrum(&r.naive_square().assemble_l().l)?.values);
    candidates.extend(pencil_eigenvalues(r, tol)?);

    let mut lhs = usize::MAX;
    let mut minimizer = candidates[0];
    for &lambda in &candidates {
        let rank = numeric_rank(&bordered(r, lambda), tol);
        if rank < lhs {
            lhs = rank;
            minimizer = lambda;
        }
    }
    let rhs = r.n() + numeric_rank(r.b(), tol).min(numeric_rank(r.c(), tol));
    Ok(RankFormula {
        lhs,
        rhs,
        holds: lhs == rhs,
        minimizer,
        candidates_checked: candidates.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::real_matrix;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn jordan2_zero() -> CMatrix {
        real_matrix(2, 2, &[0., 1., 0., 0.])
    }

    #[test]
    fn scalar_integrator_is_controllable() {
        let a = CMatrix::zeros(1, 1);
        let b = identity(1);
        assert!(kalman_controllable(&a, &b, &tol()).unwrap());
        assert!(pbh_controllable(&a, &b, &tol()).unwrap().holds);
    }

    #[test]
    fn two_input_example_with_b_zero_is_uncontrollable() {
        let a = real_matrix(2, 2, &[0., 0., 0., -1.]);
        let b = real_matrix(2, 2, &[1., 0., 0., 0.]);
        assert!(!kalman_controllable(&a, &b, &tol()).unwrap());
        let pbh = pbh_controllable(&a, &b, &tol()).unwrap();
        assert!(!pbh.holds);
        assert!((pbh.witness.unwrap() - c(-1., 0.)).norm() < 1e-12);
        assert!(pbh.margin < 0.0);
    }

    #[test]
    fn companion_pair() {
        let e2 = real_matrix(2, 1, &[0., 1.]);
        let out = pbh_controllable(&jordan2_zero(), &e2, &tol()).unwrap();
        assert!(out.holds && out.margin > 0.0);
    }

    #[test]
    fn jordan_pair_with_first_unit_vector_fails() {
        let e1 = real_matrix(2, 1, &[1., 0.]);
        let out = pbh_controllable(&jordan2_zero(), &e1, &tol()).unwrap();
        assert!(!out.holds);
        assert!(out.witness.unwrap().norm() < 1e-12);
    }

    #[test]
    fn observable_duals() {
        let at = jordan2_zero().transpose();
        let e2t = real_matrix(1, 2, &[0., 1.]);
        assert!(pbh_observable(&at, &e2t, &tol()).unwrap().holds);

        let a = real_matrix(2, 2, &[0., 0., 0., -1.]);
        let c_row = real_matrix(1, 2, &[1., 1.]);
        assert!(pbh_observable(&a, &c_row, &tol()).unwrap().holds);
    }

    #[test]
    fn witness_is_reported_in_spect_a() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1., 2.), c(-1., 0.5)]));
        let c_row = CMatrix::from_row_slice(1, 2, &[c(1., 0.), c(0., 0.)]);
        let out = pbh_observable(&a, &c_row, &tol()).unwrap();
        assert!((out.witness.unwrap() - c(-1., 0.5)).norm() < 1e-12);
    }

    #[test]
    fn example_two_by_two_is_minimal() {
        for (d2, d3) in [(0., 0.), (1., 1.), (-2., 0.5)] {
            let r = Realization::new(
                real_matrix(2, 2, &[0., 0., 0., 2.]),
                real_matrix(2, 2, &[2., 0., 0., 2.]),
                identity(2),
                real_matrix(2, 2, &[1., d2, d3, 1.]),
            )
            .unwrap();
            let v = is_minimal(&r, &tol()).unwrap();
            assert!(v.minimal);
            assert!(is_minimal_kalman(&r, &tol()).unwrap());
        }
    }

    #[test]
    fn duplicated_modes_are_not_minimal() {
        let r = Realization::new(
            real_matrix(2, 2, &[-1., 0., 0., -1.]),
            real_matrix(2, 1, &[1., 1.]),
            real_matrix(1, 2, &[1., 1.]),
            CMatrix::zeros(1, 1),
        )
        .unwrap();
        let v = is_minimal(&r, &tol()).unwrap();
        assert!(!v.controllable && !v.observable && !v.minimal);
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(
            alpha(
                &real_matrix(3, 3, &[5., 1., 0., 0., 5., 1., 0., 0., 5.]),
                &tol()
            )
            .unwrap(),
            1
        );
        assert_eq!(alpha(&identity(4), &tol()).unwrap(), 4);
    }

    #[test]
    fn rank_formula_scalar_integrator() {
        let r = Realization::new(
            CMatrix::zeros(1, 1),
            identity(1),
            identity(1),
            CMatrix::zeros(1, 1),
        )
        .unwrap();
        let f = rank_formula_check(&r, &tol()).unwrap();
        assert_eq!((f.lhs, f.rhs, f.holds), (2, 2, true));
    }

    #[test]
    fn rank_formula_fails_for_minimal_tall_system() {
        let r = Realization::new(
            real_matrix(2, 2, &[1., 0., 0., -1.]),
            real_matrix(2, 1, &[1., 1.]),
            real_matrix(2, 2, &[1., 1., 0., 1.]),
            real_matrix(2, 1, &[0., 1.]),
        )
        .unwrap();
        assert!(is_minimal(&r, &tol()).unwrap().minimal);
        let f = rank_formula_check(&r, &tol()).unwrap();
        assert_eq!((f.lhs, f.rhs, f.holds), (2, 3, false));
        assert!(f.minimizer.norm() < 1e-8);
    }

    #[test]
    fn rank_formula_fails_without_controllability() {
        let r = Realization::new(
            real_matrix(3, 3, &[1., 0., 0., 0., 2., 0., 0., 0., 3.]),
            real_matrix(3, 1, &[1., 1., 0.]),
            real_matrix(1, 3, &[1., 1., 1.]),
            CMatrix::zeros(1, 1),
        )
        .unwrap();
        let f = rank_formula_check(&r, &tol()).unwrap();
        assert!(!f.holds);
        assert!(f.lhs < f.rhs);
    }
}
