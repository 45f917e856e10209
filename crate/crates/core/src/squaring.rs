//! Truncating a minimal realization to `α` inputs and `α` outputs, where
//! `α` is the largest geometric multiplicity of `A`, without touching `A`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{complex_gaussian, derive_seed, rng_from_seed};
use crate::io::matrix_serde;
use crate::minimality::{alpha, is_minimal, pbh_controllable, pbh_observable};
use crate::numeric::{identity, numeric_rank, one_norm, CMatrix, Tolerances};
use crate::realization::Realization;

/// Input and output compressions of a squared realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquaringTransform {
    #[serde(rename = "T_b", with = "matrix_serde")]
    pub t_b: CMatrix,
    #[serde(rename = "T_c", with = "matrix_serde")]
    pub t_c: CMatrix,
    pub alpha: usize,
}

fn tb_is_valid(a: &CMatrix, b: &CMatrix, t: &CMatrix, k: usize, tol: &Tolerances) -> Result<bool> {
    if numeric_rank(t, tol) < k {
        return Ok(false);
    }
    let bt = b * t;
    Ok(numeric_rank(&bt, tol) == k && pbh_controllable(a, &bt, tol)?.holds)
}

/// Full-column-rank `T_b` (`m×α`) keeping `(A, B·T_b)` controllable.
pub fn construct_tb(a: &CMatrix, b: &CMatrix, tol: &Tolerances, seed: u64) -> Result<CMatrix> {
    if !pbh_controllable(a, b, tol)?.holds {
        return Err(Error::Precondition("(A, B) is not controllable".into()));
    }
    let k = alpha(a, tol)?;
    let m = b.ncols();
    if k > m {
        return Err(Error::NumericalBreakdown(format!(
            "controllable pair with {m} inputs but alpha(A) = {k}"
        )));
    }
    if k == m {
        let t = identity(m);
        if tb_is_valid(a, b, &t, k, tol)? {
            return Ok(t);
        }
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..tol.max_retries.max(1) {
        let t = complex_gaussian(m, k, &mut rng);
        if tb_is_valid(a, b, &t, k, tol)? {
            return Ok(t);
        }
    }
    Err(Error::NumericalBreakdown(format!(
        "no valid T_b found in {} draws",
        tol.max_retries
    )))
}

/// Full-row-rank `T_c` (`α×p`) keeping `(A, T_c·C)` observable; the dual of
/// [`construct_tb`] on `(A*, C*)`.
pub fn construct_tc(a: &CMatrix, c: &CMatrix, tol: &Tolerances, seed: u64) -> Result<CMatrix> {
    if !pbh_observable(a, c, tol)?.holds {
        return Err(Error::Precondition("(A, C) is not observable".into()));
    }
    let t = construct_tb(&a.adjoint(), &c.adjoint(), tol, seed)?.adjoint();
    if !pbh_observable(a, &(&t * c), tol)?.holds {
        return Err(Error::NumericalBreakdown(
            "dual construction of T_c failed verification".into(),
        ));
    }
    Ok(t)
}

/// `(A, B·T_b, T_c·C, T_c·D·T_b)` for caller-supplied transforms.
pub fn square_with_transform(r: &Realization, t_b: &CMatrix, t_c: &CMatrix) -> Result<Realization> {
    if t_b.nrows() != r.m() || t_c.ncols() != r.p() || t_b.ncols() != t_c.nrows() {
        return Err(Error::Dimension(format!(
            "T_b must be {}xk and T_c kx{}, got {}x{} and {}x{}",
            r.m(),
            r.p(),
            t_b.nrows(),
            t_b.ncols(),
            t_c.nrows(),
            t_c.ncols()
        )));
    }
    Realization::new(r.a().clone(), r.b() * t_b, t_c * r.c(), t_c * r.d() * t_b)
}

/// Minimal `α×α` realization of `T_c·F·T_b` sharing `A` with `r`.
pub fn square_realization(
    r: &Realization,
    tol: &Tolerances,
    seed: u64,
) -> Result<(Realization, SquaringTransform)> {
    if !is_minimal(r, tol)?.minimal {
        return Err(Error::Precondition(
            "squaring needs a minimal realization; use naive_square otherwise".into(),
        ));
    }
    let t_b = construct_tb(r.a(), r.b(), tol, derive_seed(seed, 0))?;
    let t_c = construct_tc(r.a(), r.c(), tol, derive_seed(seed, 1))?;
    let sq = square_with_transform(r, &t_b, &t_c)?;
    if !is_minimal(&sq, tol)?.minimal {
        return Err(Error::NumericalBreakdown(
            "squared realization failed the minimality check".into(),
        ));
    }
    let alpha = t_b.ncols();
    Ok((sq, SquaringTransform { t_b, t_c, alpha }))
}

/// Square counterpart of any realization with `k = min(rank B, rank C)`
/// inputs and outputs, from random compressions with `rank(B·T_b) =
/// rank(T_c·C) = k`. Minimality is not required and not implied.
pub fn reduced_square(
    r: &Realization,
    tol: &Tolerances,
    seed: u64,
) -> Result<(Realization, SquaringTransform)> {
    let k = numeric_rank(r.b(), tol).min(numeric_rank(r.c(), tol));
    if k == 0 {
        return Err(Error::Precondition("B or C is numerically zero".into()));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..tol.max_retries.max(1) {
        let t_b = complex_gaussian(r.m(), k, &mut rng);
        let t_c = complex_gaussian(k, r.p(), &mut rng);
        if numeric_rank(&(r.b() * &t_b), tol) == k && numeric_rank(&(&t_c * r.c()), tol) == k {
            let sq = square_with_transform(r, &t_b, &t_c)?;
            return Ok((sq, SquaringTransform { t_b, t_c, alpha: k }));
        }
    }
    Err(Error::NumericalBreakdown(
        "no rank-preserving compression found".into(),
    ))
}

/// Points on the circle of radius `2·(1 + ‖A‖₁)`, away from every pole.
pub fn transfer_sample_points(r: &Realization, count: usize) -> Vec<Complex64> {
    let radius = 2.0 * (1.0 + one_norm(r.a()));
    (0..count)
        .map(|k| {
            // irrational offset keeps the points off the real axis
            let theta = std::f64::consts::TAU * (k as f64 + 0.3) / count as f64;
            Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Largest relative deviation of `F_sq(s)` from `T_c·F(s)·T_b` over
/// `count` sample points.
pub fn transfer_identity_error(
    r: &Realization,
    sq: &Realization,
    x: &SquaringTransform,
    count: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in transfer_sample_points(r, count) {
        let expected = &x.t_c * r.eval_transfer(s, tol)? * &x.t_b;
        let actual = sq.eval_transfer(s, tol)?;
        worst = worst.max((actual - &expected).norm() / (1.0 + expected.norm()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::companion_minimal;
    use crate::numeric::{c, real_matrix};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn two_input(b: f64, d: f64) -> Realization {
        Realization::new(
            real_matrix(2, 2, &[0., 0., 0., -1.]),
            real_matrix(2, 2, &[1., 0., 0., b]),
            real_matrix(1, 2, &[1., 1.]),
            real_matrix(1, 2, &[d, 0.]),
        )
        .unwrap()
    }

    #[test]
    fn known_transform_reproduces_square_matrix() {
        let r = two_input(1.0, 0.0);
        let t_b = real_matrix(2, 1, &[1., 1.]);
        assert!(tb_is_valid(r.a(), r.b(), &t_b, 1, &tol()).unwrap());
        let sq = square_with_transform(&r, &t_b, &identity(1)).unwrap();
        let expected = real_matrix(3, 3, &[0., 0., 1., 0., -1., 1., 1., 1., 0.]);
        assert_eq!(sq.assemble_l().l, expected);
    }

    #[test]
    fn uncontrollable_input_is_rejected() {
        let r = two_input(0.0, 0.0);
        assert!(matches!(
            construct_tb(r.a(), r.b(), &tol(), 0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            square_realization(&r, &tol(), 0),
            Err(Error::Precondition(_))
        ));
        let (red, x) = reduced_square(&r, &tol(), 0).unwrap();
        assert_eq!((red.m(), red.p(), x.alpha), (1, 1, 1));
    }

    #[test]
    fn identity_when_already_square() {
        let r = Realization::new(
            real_matrix(2, 2, &[1., 0., 0., 1.]),
            identity(2),
            identity(2),
            CMatrix::zeros(2, 2),
        )
        .unwrap();
        let (sq, x) = square_realization(&r, &tol(), 3).unwrap();
        assert_eq!(x.t_b, identity(2));
        assert_eq!(x.t_c, identity(2));
        assert_eq!(sq, r);
    }

    #[test]
    fn tall_minimal_system() {
        let r = Realization::new(
            real_matrix(2, 2, &[1., 0., 0., -1.]),
            real_matrix(2, 1, &[1., 1.]),
            real_matrix(2, 2, &[1., 1., 0., 1.]),
            real_matrix(2, 1, &[0., 1.]),
        )
        .unwrap();
        let (sq, x) = square_realization(&r, &tol(), 5).unwrap();
        assert_eq!(sq.assemble_l().l.shape(), (3, 3));
        assert!(is_minimal(&sq, &tol()).unwrap().minimal);
        assert!(transfer_identity_error(&r, &sq, &x, 10, &tol()).unwrap() < 1e-9);
    }

    #[test]
    fn random_minimal_systems_square() {
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let r = companion_minimal(1 + (seed as usize % 6), 3, 2, &mut rng);
            let (sq, x) = square_realization(&r, &tol(), seed).unwrap();
            assert_eq!(sq.a(), r.a());
            assert_eq!(sq.m(), x.alpha);
            assert_eq!(x.alpha, alpha(r.a(), &tol()).unwrap());
            assert!(transfer_identity_error(&r, &sq, &x, 10, &tol()).unwrap() < 1e-9);
        }
    }

    #[test]
    fn sample_points_avoid_poles() {
        let r = two_input(1.0, 0.0);
        for s in transfer_sample_points(&r, 10) {
            assert!((s - c(0., 0.)).norm() > 3.0);
        }
    }
}
