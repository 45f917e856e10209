//! Spectral characterizations of minimality: disjoining static output
//! feedback, per-eigenvalue completions of the `D` block, the feedback to
//! completion bridge, and the combined criteria report.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{complex_gaussian, derive_seed, gaussian_scalar, rng_from_seed};
use crate::io::{matrix_serde, opt_matrix_serde};
use crate::minimality::{alpha, is_minimal, MinimalityVerdict};
use crate::numeric::{
    cluster_eigenvalues, identity, min_cross_distance, numeric_rank, one_norm, spectra_intersect,
    spectrum, CMatrix, MatchedPair, Tolerances,
};
use crate::realization::Realization;
use crate::squaring::{construct_tb, construct_tc, reduced_square, square_realization};

/// Number of random `D` blocks sampled for the completion evidence.
pub const D_SAMPLES: usize = 20;

/// Number of independent `(T_b, T_c)` draws tried before giving up on a gain.
const GAIN_DRAWS: u64 = 4;

/// A gain `K = η·T_b·T_c` whose closed-loop spectrum avoids `spect(A)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisjoiningFeedback {
    #[serde(rename = "K", with = "matrix_serde")]
    pub k: CMatrix,
    pub eta: f64,
    /// Distance from `spect(A)` to the closed-loop spectrum.
    pub separation: f64,
}

fn random_full_rank(rows: usize, cols: usize, tol: &Tolerances, seed: u64) -> Result<CMatrix> {
    let mut rng = rng_from_seed(seed);
    for _ in 0..tol.max_retries.max(1) {
        let t = complex_gaussian(rows, cols, &mut rng);
        if numeric_rank(&t, tol) == rows.min(cols) {
            return Ok(t);
        }
    }
    Err(Error::NumericalBreakdown(
        "random full-rank draw failed".into(),
    ))
}

/// Transforms for the gain: PBH-verified when the pair is minimal, plain
/// full-rank draws of size `min(α, m, p)` otherwise.
fn gain_transforms(
    h: &Realization,
    minimal: bool,
    tol: &Tolerances,
    seed: u64,
) -> Result<(CMatrix, CMatrix)> {
    if minimal {
        let t_b = construct_tb(h.a(), h.b(), tol, derive_seed(seed, 0))?;
        let t_c = construct_tc(h.a(), h.c(), tol, derive_seed(seed, 1))?;
        return Ok((t_b, t_c));
    }
    let k = alpha(h.a(), tol)?.min(h.m()).min(h.p()).max(1);
    Ok((
        random_full_rank(h.m(), k, tol, derive_seed(seed, 0))?,
        random_full_rank(k, h.p(), tol, derive_seed(seed, 1))?,
    ))
}

/// Escalates `η = 1, 2, 4, …, 2^max_retries` in `K = η·T_b·T_c` until
/// `spect(A + BKC)` misses `spect(A)`, on the associated system.
pub fn find_disjoining_feedback(
    r: &Realization,
    tol: &Tolerances,
    seed: u64,
) -> Result<DisjoiningFeedback> {
    let h = r.associated();
    let minimal = is_minimal(&h, tol)?.minimal;
    let spec_a = spectrum(h.a())?;
    let draws = if minimal { GAIN_DRAWS } else { 1 };
    for draw in 0..draws {
        let (t_b, t_c) = gain_transforms(&h, minimal, tol, derive_seed(seed, draw))?;
        let base = &t_b * &t_c;
        for step in 0..=tol.max_retries {
            let eta = 2f64.powi(step as i32);
            let k = &base * Complex64::from(eta);
            let closed = h.closed_loop(&k, tol)?;
            let spec_cl = spectrum(closed.a())?;
            if spectra_intersect(&spec_a, &spec_cl, tol).is_empty() {
                let separation = min_cross_distance(&spec_a, &spec_cl);
                return Ok(DisjoiningFeedback { k, eta, separation });
            }
        }
    }
    Err(Error::NoGainFound {
        max_eta: 2f64.powi(tol.max_retries as i32),
    })
}

/// `K = (λI − D)⁻¹`, the gain whose closed loop shares `λ` with `L(D)`.
pub fn feedback_completion_bridge(
    d: &CMatrix,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let spec = spectrum(d)?;
    if spec.distance_to(lambda) <= tol.eig_radius(spec.scale) {
        return Err(Error::SingularBridge { lambda });
    }
    (identity(d.nrows()) * lambda - d)
        .try_inverse()
        .ok_or(Error::SingularBridge { lambda })
}

/// `spect(A)` against `spect([[A, B], [C, D]])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionCheck {
    pub disjoint: bool,
    pub matched: Vec<MatchedPair>,
}

pub fn completion_disjoint(
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
    d: &CMatrix,
    tol: &Tolerances,
) -> Result<CompletionCheck> {
    let r = Realization::new(a.clone(), b.clone(), c.clone(), d.clone())?;
    if !r.is_square() {
        return Err(Error::Precondition(format!(
            "completion needs m = p, got m = {}, p = {}",
            r.m(),
            r.p()
        )));
    }
    let matched = spectra_intersect(&spectrum(a)?, &spectrum(&r.assemble_l().l)?, tol);
    Ok(CompletionCheck {
        disjoint: matched.is_empty(),
        matched,
    })
}

/// Completion `D_j = (λ_j − ε)·I` for one cluster of `spect(A)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueCompletion {
    pub lambda: Complex64,
    pub epsilon: f64,
    #[serde(rename = "D", with = "matrix_serde")]
    pub d: CMatrix,
    /// Eigenvalues of `[[A, B], [C, D_j]]`.
    pub spectrum: Vec<Complex64>,
    /// Distance from `λ_j` to that spectrum.
    pub distance: f64,
    /// Matching radius the distance was compared against.
    pub radius: f64,
    pub cleared: bool,
}

fn completion_matrix(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let (n, p) = (a.nrows(), c.nrows());
    let mut l = CMatrix::zeros(n + p, n + p);
    l.view_mut((0, 0), (n, n)).copy_from(a);
    l.view_mut((0, n), (n, p)).copy_from(b);
    l.view_mut((n, 0), (p, n)).copy_from(c);
    l.view_mut((n, n), (p, p)).copy_from(d);
    l
}

/// Starting `ε`: an eighth of the smallest gap between distinct
/// eigenvalues of `A` (1 when there is a single eigenvalue).
pub fn initial_epsilon(gap: f64) -> f64 {
    if gap.is_finite() {
        gap / 8.0
    } else {
        1.0
    }
}

/// Per-cluster completions without rank preconditions. `ε` is halved
/// until `λ_j` leaves the spectrum or `max_retries` halvings are spent.
fn clear_eigenvalues(
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
    tol: &Tolerances,
) -> Result<Vec<EigenvalueCompletion>> {
    let clusters = cluster_eigenvalues(a, tol)?;
    let p = c.nrows();
    let eps0 = initial_epsilon(clusters.min_gap());
    let mut out = Vec::with_capacity(clusters.len());
    for &lambda in &clusters.representatives {
        let mut epsilon = eps0;
        let mut attempt = 0;
        loop {
            let d = identity(p) * (lambda - epsilon);
            let spec = spectrum(&completion_matrix(a, b, c, &d))?;
            let distance = spec.distance_to(lambda);
            let radius = tol.eig_radius(spec.scale.max(one_norm(a)));
            let cleared = distance > radius;
            if cleared || attempt >= tol.max_retries {
                out.push(EigenvalueCompletion {
                    lambda,
                    epsilon,
                    d,
                    spectrum: spec.values,
                    distance,
                    radius,
                    cleared,
                });
                break;
            }
            epsilon /= 2.0;
            attempt += 1;
        }
    }
    Ok(out)
}

fn check_square_full_rank(b: &CMatrix, c: &CMatrix, tol: &Tolerances) -> Result<()> {
    let (m, p) = (b.ncols(), c.nrows());
    if m != p {
        return Err(Error::Precondition(format!(
            "needs m = p, got m = {m}, p = {p}; square the realization first"
        )));
    }
    if numeric_rank(b, tol) < m || numeric_rank(c, tol) < p {
        return Err(Error::Precondition(
            "B and C must have full rank; use the squared counterpart".into(),
        ));
    }
    Ok(())
}

/// `D_j = (λ_j − ε)·I_p` for every eigenvalue cluster of `A`.
pub fn per_eigenvalue_completion(
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
    tol: &Tolerances,
) -> Result<Vec<EigenvalueCompletion>> {
    Realization::new(
        a.clone(),
        b.clone(),
        c.clone(),
        CMatrix::zeros(c.nrows(), b.ncols()),
    )?;
    check_square_full_rank(b, c, tol)?;
    clear_eigenvalues(a, b, c, tol)
}

/// Outcome of the per-eigenvalue completion criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionIii {
    /// Every `λ_j` is absent from the spectrum of its own completion.
    pub holds: bool,
    /// Smallest `ε` that was used.
    pub epsilon: f64,
    pub per_lambda: Vec<EigenvalueCompletion>,
    /// Eigenvalues of `A` present in the spectrum of every completion.
    pub literal_intersection: Vec<Complex64>,
    pub literal_holds: bool,
}

fn summarize(
    a: &CMatrix,
    per_lambda: Vec<EigenvalueCompletion>,
    tol: &Tolerances,
) -> Result<CriterionIii> {
    let literal_intersection: Vec<Complex64> = cluster_eigenvalues(a, tol)?
        .representatives
        .into_iter()
        .filter(|&mu| {
            per_lambda.iter().all(|pl| {
                let nearest = pl
                    .spectrum
                    .iter()
                    .map(|z| (z - mu).norm())
                    .fold(f64::INFINITY, f64::min);
                nearest <= pl.radius
            })
        })
        .collect();
    Ok(CriterionIii {
        holds: per_lambda.iter().all(|pl| pl.cleared),
        epsilon: per_lambda
            .iter()
            .map(|pl| pl.epsilon)
            .fold(f64::INFINITY, f64::min),
        literal_holds: literal_intersection.is_empty(),
        literal_intersection,
        per_lambda,
    })
}

/// Per-eigenvalue completion criterion on a square realization with
/// full-rank `B` and `C`; reports the per-`j` verdict and the literal
/// intersection over `j` side by side.
pub fn criterion_iii(r_sq: &Realization, tol: &Tolerances) -> Result<CriterionIii> {
    check_square_full_rank(r_sq.b(), r_sq.c(), tol)?;
    let per = clear_eigenvalues(r_sq.a(), r_sq.b(), r_sq.c(), tol)?;
    summarize(r_sq.a(), per, tol)
}

/// True iff `spect(A)` and `spect(L(D))` are disjoint for `D = 0`,
/// `D = λ_j` for every eigenvalue, and `d_samples` random scalars.
pub fn siso_all_d_check(
    r: &Realization,
    d_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<bool> {
    if r.m() != 1 || r.p() != 1 {
        return Err(Error::Precondition("SISO check needs m = p = 1".into()));
    }
    if !is_minimal(r, tol)?.minimal {
        return Err(Error::Precondition(
            "SISO check needs a minimal realization".into(),
        ));
    }
    let scale = 1.0 + one_norm(r.a());
    let mut ds: Vec<Complex64> = vec![Complex64::new(0.0, 0.0)];
    ds.extend(cluster_eigenvalues(r.a(), tol)?.representatives);
    let mut rng = rng_from_seed(seed);
    ds.extend((0..d_samples).map(|_| gaussian_scalar(&mut rng) * scale));
    for d in ds {
        let dm = CMatrix::from_element(1, 1, d);
        if !completion_disjoint(r.a(), r.b(), r.c(), &dm, tol)?.disjoint {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of the disjoining-feedback criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionIi {
    pub holds: bool,
    #[serde(rename = "K", with = "opt_matrix_serde")]
    pub k: Option<CMatrix>,
    pub eta: Option<f64>,
}

/// Completion criterion: proved by per-eigenvalue completions, with random
/// `D` samples as supporting evidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionIv {
    /// Every per-eigenvalue completion cleared its eigenvalue.
    pub proved_by_completion: bool,
    pub samples: usize,
    /// No eigenvalue of `A` survived every sampled `D`.
    pub holds_on_samples: bool,
    /// Eigenvalue of `A` present in `spect(L(D))` for every sampled `D`.
    pub persistent_lambda: Option<Complex64>,
}

/// The four minimality criteria evaluated side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaReport {
    pub crit_i: MinimalityVerdict,
    pub crit_ii: CriterionIi,
    pub crit_iii: CriterionIii,
    pub crit_iv_sampled: CriterionIv,
    /// Dimension of the square counterpart the last two criteria ran on.
    pub squared_dim: usize,
    pub consistent: bool,
}

/// Square counterpart with full-rank `B` and `C`: the minimal squaring for
/// minimal inputs, the rank-reduced one otherwise, and the zero-padded one
/// when `B` or `C` vanishes.
fn square_counterpart(
    r: &Realization,
    minimal: bool,
    tol: &Tolerances,
    seed: u64,
) -> Result<Realization> {
    if minimal {
        return Ok(square_realization(r, tol, seed)?.0);
    }
    match reduced_square(r, tol, seed) {
        Ok((sq, _)) => Ok(sq),
        Err(Error::Precondition(_)) => Ok(r.naive_square()),
        Err(e) => Err(e),
    }
}

fn sampled_persistence(
    sq: &Realization,
    samples: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<Option<Complex64>> {
    let reps = cluster_eigenvalues(sq.a(), tol)?.representatives;
    let mut alive = vec![true; reps.len()];
    let scale = 1.0 + one_norm(sq.a());
    let mut rng = rng_from_seed(seed);
    for _ in 0..samples {
        let d = complex_gaussian(sq.p(), sq.m(), &mut rng) * Complex64::from(scale);
        let spec = spectrum(&completion_matrix(sq.a(), sq.b(), sq.c(), &d))?;
        let radius = tol.eig_radius(spec.scale);
        for (k, &mu) in reps.iter().enumerate() {
            alive[k] &= spec.distance_to(mu) <= radius;
        }
    }
    Ok(reps.iter().zip(&alive).find(|(_, &a)| a).map(|(&mu, _)| mu))
}

/// Runs all four criteria. Failures are verdicts; only numerical
/// breakdowns surface as errors.
pub fn minimality_equivalence_report(
    r: &Realization,
    tol: &Tolerances,
    seed: u64,
) -> Result<CriteriaReport> {
    let crit_i = is_minimal(r, tol)?;
    let minimal = crit_i.minimal;

    let crit_ii = match find_disjoining_feedback(r, tol, derive_seed(seed, 1)) {
        Ok(f) => CriterionIi {
            holds: true,
            k: Some(f.k),
            eta: Some(f.eta),
        },
        Err(Error::NoGainFound { .. }) => CriterionIi {
            holds: false,
            k: None,
            eta: None,
        },
        Err(e) => return Err(e),
    };

    let sq = square_counterpart(r, minimal, tol, derive_seed(seed, 2))?;
    let per = clear_eigenvalues(sq.a(), sq.b(), sq.c(), tol)?;
    let crit_iii = summarize(sq.a(), per, tol)?;

    let persistent_lambda = sampled_persistence(&sq, D_SAMPLES, tol, derive_seed(seed, 3))?;
    let crit_iv = CriterionIv {
        proved_by_completion: crit_iii.holds,
        samples: D_SAMPLES,
        holds_on_samples: persistent_lambda.is_none(),
        persistent_lambda,
    };

    let consistent = [
        crit_ii.holds,
        crit_iii.holds,
        crit_iv.proved_by_completion,
        crit_iv.holds_on_samples,
    ]
    .iter()
    .all(|&v| v == minimal);
    Ok(CriteriaReport {
        crit_i,
        crit_ii,
        crit_iii,
        crit_iv_sampled: crit_iv,
        squared_dim: sq.m(),
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{c, real_matrix};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn scalar_integrator() -> Realization {
        Realization::new(
            CMatrix::zeros(1, 1),
            identity(1),
            identity(1),
            CMatrix::zeros(1, 1),
        )
        .unwrap()
    }

    fn example_two_by_two(d2: f64, d3: f64) -> Realization {
        Realization::new(
            real_matrix(2, 2, &[0., 0., 0., 2.]),
            real_matrix(2, 2, &[2., 0., 0., 2.]),
            identity(2),
            real_matrix(2, 2, &[1., d2, d3, 1.]),
        )
        .unwrap()
    }

    fn two_input(b: f64) -> Realization {
        Realization::new(
            real_matrix(2, 2, &[0., 0., 0., -1.]),
            real_matrix(2, 2, &[1., 0., 0., b]),
            real_matrix(1, 2, &[1., 1.]),
            CMatrix::zeros(1, 2),
        )
        .unwrap()
    }

    #[test]
    fn scalar_gain() {
        let f = find_disjoining_feedback(&scalar_integrator(), &tol(), 0).unwrap();
        assert!(f.k[(0, 0)].norm() > 0.0);
        assert!(f.separation > 0.0);
    }

    #[test]
    fn gain_for_minimal_example() {
        let r = example_two_by_two(1.0, 1.0);
        let f = find_disjoining_feedback(&r, &tol(), 4).unwrap();
        let cl = r.associated().closed_loop(&f.k, &tol()).unwrap();
        let pairs = spectra_intersect(
            &spectrum(r.a()).unwrap(),
            &spectrum(cl.a()).unwrap(),
            &tol(),
        );
        assert!(pairs.is_empty());
    }

    #[test]
    fn no_gain_without_controllability() {
        let err = find_disjoining_feedback(&two_input(0.0), &tol(), 0).unwrap_err();
        assert!(matches!(err, Error::NoGainFound { .. }));
    }

    #[test]
    fn bridge_examples() {
        assert_eq!(
            feedback_completion_bridge(&CMatrix::zeros(2, 2), c(1., 0.), &tol()).unwrap(),
            identity(2)
        );
        let lambda = c(2.0, 0.0);
        let eps = 0.25;
        let k =
            feedback_completion_bridge(&(identity(3) * (lambda - eps)), lambda, &tol()).unwrap();
        assert!((k - identity(3) * c(1.0 / eps, 0.0)).norm() < 1e-12);
        assert!(matches!(
            feedback_completion_bridge(&identity(2), c(1.0, 0.0), &tol()),
            Err(Error::SingularBridge { .. })
        ));
    }

    #[test]
    fn scalar_completion_clears() {
        let r = scalar_integrator();
        let per = per_eigenvalue_completion(r.a(), r.b(), r.c(), &tol()).unwrap();
        assert_eq!(per.len(), 1);
        assert!(per[0].cleared);
        assert_eq!(per[0].epsilon, 1.0);
    }

    #[test]
    fn criterion_iii_on_minimal_example() {
        let r = example_two_by_two(0.0, 0.0);
        let out = criterion_iii(&r, &tol()).unwrap();
        assert!(out.holds);
        assert_eq!(out.per_lambda.len(), 2);
        assert_eq!(out.per_lambda[0].epsilon, 0.25);
    }

    #[test]
    fn criterion_iii_fails_on_uncontrollable_padding() {
        let r = two_input(0.0).naive_square();
        // the padded C is rank deficient
        assert!(matches!(
            criterion_iii(&r, &tol()),
            Err(Error::Precondition(_))
        ));
        let per = clear_eigenvalues(r.a(), r.b(), r.c(), &tol()).unwrap();
        assert!(per.iter().any(|pl| !pl.cleared));
        for pl in &per {
            assert!(pl.spectrum.iter().any(|z| (z - c(-1., 0.)).norm() < 1e-8));
        }
    }

    #[test]
    fn example_completions_are_never_disjoint() {
        let r = example_two_by_two(1.0, 1.0);
        for d2 in [-2., -1., 0., 1., 2.] {
            for d3 in [-2., -1., 0., 1., 2.] {
                let d = real_matrix(2, 2, &[1., d2, d3, 1.]);
                let out = completion_disjoint(r.a(), r.b(), r.c(), &d, &tol()).unwrap();
                assert!(!out.disjoint);
                assert_eq!(out.matched.len(), 2);
            }
        }
    }

    #[test]
    fn zero_coupling_is_never_disjoint() {
        let a = real_matrix(2, 2, &[1., 0., 0., 3.]);
        let out = completion_disjoint(
            &a,
            &CMatrix::zeros(2, 1),
            &CMatrix::zeros(1, 2),
            &identity(1),
            &tol(),
        )
        .unwrap();
        assert_eq!(out.matched.len(), 2);
    }

    #[test]
    fn scalar_example_completions() {
        let l1 = Realization::new(
            CMatrix::zeros(1, 1),
            real_matrix(1, 1, &[2.]),
            identity(1),
            identity(1),
        )
        .unwrap();
        assert!(
            completion_disjoint(l1.a(), l1.b(), l1.c(), l1.d(), &tol())
                .unwrap()
                .disjoint
        );
        assert!(siso_all_d_check(&l1, 100, 1, &tol()).unwrap());
    }

    #[test]
    fn report_on_examples() {
        let rep = minimality_equivalence_report(&example_two_by_two(1.0, 1.0), &tol(), 7).unwrap();
        assert!(rep.crit_i.minimal && rep.crit_ii.holds && rep.crit_iii.holds);
        assert!(rep.consistent);

        let rep = minimality_equivalence_report(&two_input(0.0), &tol(), 7).unwrap();
        assert!(!rep.crit_i.minimal && !rep.crit_ii.holds && !rep.crit_iii.holds);
        let lam = rep.crit_iv_sampled.persistent_lambda.unwrap();
        assert!((lam - c(-1., 0.)).norm() < 1e-8);
        assert!(rep.consistent);
    }
}
