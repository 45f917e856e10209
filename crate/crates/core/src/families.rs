//! Families of realizations generated by a square system matrix `L`:
//! polynomials `ψ(L)`, the inverse `L⁻¹`, and shifts of `A`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{derive_seed, gaussian_system, rng_from_seed};
use crate::minimality::is_minimal;
use crate::numeric::{
    cluster_eigenvalues, identity, matrix_polynomial, min_cross_distance, null_space, numeric_rank,
    one_norm, scalar_polynomial, spectra_intersect, spectrum, CMatrix, Tolerances,
};
use crate::realization::{Realization, SystemMatrix};

fn square_system_matrix(r: &Realization) -> Result<SystemMatrix> {
    if !r.is_square() {
        return Err(Error::Precondition(format!(
            "family members need a square L (m = p), got m = {}, p = {}",
            r.m(),
            r.p()
        )));
    }
    Ok(r.assemble_l())
}

/// `ψ(L)` split at the original block boundary into `(Ã, B̃, C̃, D̃)`.
/// `psi[k]` is the coefficient of `s^k`.
pub fn psi_realization(r: &Realization, psi: &[Complex64]) -> Result<Realization> {
    let l = square_system_matrix(r)?;
    let value = matrix_polynomial(psi, &l.l)?;
    SystemMatrix::from_matrix(value, r.n())?.split()
}

/// Minimality facts for `L` and `ψ(L)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub psi_coeffs: Vec<Complex64>,
    pub tilde: Realization,
    /// `spect(Ã)` and `spect(ψ(L))` are disjoint.
    pub crit_i_tilde: bool,
    pub minimal_tilde: bool,
    #[serde(rename = "minimal_L")]
    pub minimal_l: bool,
    pub chain_respected: bool,
}

/// Evaluates `disjoint(Ã, ψ(L)) ⇒ minimal(ψ(L)) ⇒ minimal(L)` on one
/// instance. A violated implication is a tolerance problem and is
/// returned as an invariant failure.
pub fn family_report(r: &Realization, psi: &[Complex64], tol: &Tolerances) -> Result<FamilyReport> {
    let tilde = psi_realization(r, psi)?;
    let psi_l = tilde.assemble_l().l;
    let crit_i_tilde = spectra_intersect(&spectrum(tilde.a())?, &spectrum(&psi_l)?, tol).is_empty();
    let minimal_tilde = is_minimal(&tilde, tol)?.minimal;
    let minimal_l = is_minimal(r, tol)?.minimal;
    let chain_respected = !(crit_i_tilde && !minimal_tilde) && !(minimal_tilde && !minimal_l);
    if !chain_respected {
        return Err(Error::InvariantFailure(format!(
            "implication chain violated: disjoint={crit_i_tilde}, minimal(psi(L))={minimal_tilde}, \
             minimal(L)={minimal_l}"
        )));
    }
    Ok(FamilyReport {
        psi_coeffs: psi.to_vec(),
        tilde,
        crit_i_tilde,
        minimal_tilde,
        minimal_l,
        chain_respected,
    })
}

/// Largest eigenvector transport residual relative to its bound; the
/// containment holds when this is at most 1.
pub fn containment_residual(l: &CMatrix, psi: &[Complex64], tol: &Tolerances) -> Result<f64> {
    let psi_l = matrix_polynomial(psi, l)?;
    let bound = 1e-8 * (1.0 + one_norm(&psi_l));
    let n = l.nrows();
    let mut worst: f64 = 0.0;
    for lambda in cluster_eigenvalues(l, tol)?.representatives {
        let target = scalar_polynomial(psi, lambda);
        let shifted = l - identity(n) * lambda;
        for v in null_space(&shifted, tol).column_iter() {
            let res = (&psi_l * v - v * target).norm();
            worst = worst.max(res / (bound * v.norm()));
        }
        let target = target.conj();
        for w in null_space(&shifted.adjoint(), tol).column_iter() {
            let res = (psi_l.adjoint() * w - w * target).norm();
            worst = worst.max(res / (bound * w.norm()));
        }
    }
    Ok(worst)
}

/// Every right eigenvector `v` of `L` satisfies `ψ(L)v = ψ(λ)v`, and
/// every left eigenvector likewise, within `1e-8·(1 + ‖ψ(L)‖₁)·‖v‖`.
pub fn invariant_subspace_containment(
    l: &CMatrix,
    psi: &[Complex64],
    tol: &Tolerances,
) -> Result<bool> {
    if !l.is_square() {
        return Err(Error::Dimension(format!(
            "containment needs a square L, got {}x{}",
            l.nrows(),
            l.ncols()
        )));
    }
    Ok(containment_residual(l, psi, tol)? <= 1.0)
}

/// `L⁻¹` split at the original block boundary.
pub fn inverse_matrix_family(r: &Realization, tol: &Tolerances) -> Result<Realization> {
    let l = square_system_matrix(r)?;
    if numeric_rank(&l.l, tol) < l.l.nrows() {
        return Err(Error::SingularFamily);
    }
    let inv = l.l.clone().try_inverse().ok_or(Error::SingularFamily)?;
    SystemMatrix::from_matrix(inv, r.n())?.split()
}

/// `(A + c·I, B, C, D)`.
pub fn shift_family(r: &Realization, shift: Complex64) -> Realization {
    Realization::new(
        r.a() + identity(r.n()) * shift,
        r.b().clone(),
        r.c().clone(),
        r.d().clone(),
    )
    .expect("shift preserves dimensions")
}

/// Counts gathered by [`conjecture_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeStats {
    pub trials: usize,
    pub minimal_systems: usize,
    pub skipped_nonminimal: usize,
    /// Minimal systems with a match inside the radius but outside the
    /// margin filter.
    pub borderline: usize,
    pub candidates: usize,
    /// Smallest distance between `spect(A)` and `spect(L)` over minimal trials.
    pub closest_approach: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub counterexample: Option<Realization>,
    /// Trial index of the counterexample.
    pub counterexample_trial: Option<usize>,
    pub stats: ProbeStats,
}

/// Searches random minimal `(A, B, C, 0)` with `m = p` for a system whose
/// `spect(A)` meets `spect(L)`. A match counts only when it is closer than
/// a tenth of the matching radius; the first such system is returned for
/// inspection. Trial `i` uses seed `derive_seed(seed, i)`.
pub fn conjecture_probe(
    n: usize,
    p: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ProbeOutcome> {
    if n == 0 || p == 0 {
        return Err(Error::Precondition("probe needs n >= 1 and p >= 1".into()));
    }
    let mut stats = ProbeStats {
        trials,
        minimal_systems: 0,
        skipped_nonminimal: 0,
        borderline: 0,
        candidates: 0,
        closest_approach: None,
    };
    let mut counterexample = None;
    let mut counterexample_trial = None;
    for i in 0..trials {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        let r = gaussian_system(n, p, p, &mut rng);
        if !is_minimal(&r, tol)?.minimal {
            stats.skipped_nonminimal += 1;
            continue;
        }
        stats.minimal_systems += 1;
        let spec_a = spectrum(r.a())?;
        let spec_l = spectrum(&r.assemble_l().l)?;
        let closest = min_cross_distance(&spec_a, &spec_l);
        stats.closest_approach = Some(
            stats
                .closest_approach
                .map_or(closest, |c: f64| c.min(closest)),
        );
        let radius = tol.eig_radius(spec_a.scale.max(spec_l.scale));
        let matched = spectra_intersect(&spec_a, &spec_l, tol);
        if matched.iter().any(|m| m.distance < radius / 10.0) {
            stats.candidates += 1;
            if counterexample.is_none() {
                counterexample = Some(r);
                counterexample_trial = Some(i);
            }
        } else if !matched.is_empty() {
            stats.borderline += 1;
        }
    }
    Ok(ProbeOutcome {
        counterexample,
        counterexample_trial,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{c, real_matrix};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn example(d2: f64, d3: f64) -> Realization {
        Realization::new(
            real_matrix(2, 2, &[0., 0., 0., 2.]),
            real_matrix(2, 2, &[2., 0., 0., 2.]),
            identity(2),
            real_matrix(2, 2, &[1., d2, d3, 1.]),
        )
        .unwrap()
    }

    fn psi_sq_minus_2s() -> Vec<Complex64> {
        vec![c(0., 0.), c(-2., 0.), c(1., 0.)]
    }

    #[test]
    fn identity_polynomial() {
        let r = example(1.0, 2.0);
        assert_eq!(psi_realization(&r, &[c(0., 0.), c(1., 0.)]).unwrap(), r);
        let one = psi_realization(&r, &[c(1., 0.)]).unwrap();
        assert_eq!(one.a(), &identity(2));
        assert_eq!(one.b(), &CMatrix::zeros(2, 2));
        assert_eq!(one.d(), &identity(2));
    }

    #[test]
    fn quadratic_closed_forms() {
        for (d2, d3) in [(1.0, 1.0), (2.0, -0.5), (0.0, 3.0)] {
            let t = psi_realization(&example(d2, d3), &psi_sq_minus_2s()).unwrap();
            let ct = real_matrix(2, 2, &[-1., d2, d3, 1.]);
            assert!((t.a() - identity(2) * c(2., 0.)).norm() < 1e-12);
            assert!((t.c() - &ct).norm() < 1e-12);
            assert!((t.b() - &ct * c(2., 0.)).norm() < 1e-12);
            assert!((t.d() - identity(2) * c(d2 * d3 + 1.0, 0.)).norm() < 1e-12);
        }
    }

    #[test]
    fn rectangular_family_rejected() {
        let r = Realization::new(
            identity(1),
            real_matrix(1, 2, &[1., 1.]),
            identity(1),
            CMatrix::zeros(1, 2),
        )
        .unwrap();
        assert!(matches!(
            psi_realization(&r, &[c(1., 0.)]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn chain_on_example() {
        let rep = family_report(&example(1.0, 1.0), &psi_sq_minus_2s(), &tol()).unwrap();
        assert!(rep.crit_i_tilde && rep.minimal_tilde && rep.minimal_l);
        let rep = family_report(&example(1.0, -1.0), &psi_sq_minus_2s(), &tol()).unwrap();
        assert!(rep.minimal_l && !rep.minimal_tilde && !rep.crit_i_tilde);
    }

    #[test]
    fn containment_on_example() {
        let l = example(1.0, 1.0).assemble_l().l;
        assert!(invariant_subspace_containment(&l, &psi_sq_minus_2s(), &tol()).unwrap());
        assert!(invariant_subspace_containment(&l, &[c(3., 1.)], &tol()).unwrap());
    }

    #[test]
    fn inverse_family_example() {
        let r = Realization::new(
            real_matrix(2, 2, &[0., 0., 0., -1.]),
            real_matrix(2, 1, &[1., 1.]),
            real_matrix(1, 2, &[1., 1.]),
            CMatrix::zeros(1, 1),
        )
        .unwrap();
        let inv = inverse_matrix_family(&r, &tol()).unwrap();
        let expected = real_matrix(3, 3, &[-1., 1., 1., 1., -1., 0., 1., 0., 0.]);
        assert!((inv.assemble_l().l - expected).norm() < 1e-12);
        let f = inv.eval_transfer(c(1., 0.), &tol()).unwrap();
        assert!((f[(0, 0)] - c(2. / 3., 0.)).norm() < 1e-12);
    }

    #[test]
    fn singular_family() {
        let r = Realization::new(
            CMatrix::zeros(1, 1),
            CMatrix::zeros(1, 1),
            identity(1),
            identity(1),
        )
        .unwrap();
        assert!(matches!(
            inverse_matrix_family(&r, &tol()),
            Err(Error::SingularFamily)
        ));
    }

    #[test]
    fn shift_keeps_minimality() {
        let r = example(1.0, 1.0);
        let s = shift_family(&r, c(0.3, -2.0));
        assert_eq!(
            is_minimal(&s, &tol()).unwrap().minimal,
            is_minimal(&r, &tol()).unwrap().minimal
        );
    }

    #[test]
    fn probe_edges() {
        let out = conjecture_probe(3, 2, 0, 1, &tol()).unwrap();
        assert!(out.counterexample.is_none());
        assert_eq!(out.stats.minimal_systems, 0);
        let siso = conjecture_probe(3, 1, 50, 1, &tol()).unwrap();
        assert!(siso.counterexample.is_none());
        assert_eq!(
            siso.stats.minimal_systems + siso.stats.skipped_nonminimal,
            50
        );
    }
}
