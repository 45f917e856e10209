//! Seeded generators for random matrices and for systems whose minimality
//! is known by construction.
//!
//! All randomness flows from explicit `u64` seeds through ChaCha8, so every
//! generated object is reproducible.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::echelon::{JordanGroup, JordanSpec};
use crate::numeric::{c, CMatrix};
use crate::realization::Realization;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent per-item seed (SplitMix64 finalizer over `seed ⊕ index`).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Complex standard normal: real and imaginary parts `N(0, 1/2)`.
pub fn gaussian_scalar<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of unit-variance complex Gaussian entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_scalar(rng))
}

/// Haar-distributed unitary matrix (QR of a Gaussian matrix with the
/// diagonal phases of `R` divided out).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = complex_gaussian(n, n, rng).qr();
    let (q, r) = qr.unpack();
    let phases = DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        }
    });
    q * CMatrix::from_diagonal(&phases)
}

/// Random similarity `P = U·diag(σ)·V*` with singular values in
/// `[1, max_cond]`; returns `(P, P⁻¹)`.
pub fn well_conditioned<R: Rng + ?Sized>(
    n: usize,
    max_cond: f64,
    rng: &mut R,
) -> (CMatrix, CMatrix) {
    let u = random_unitary(n, rng);
    let v = random_unitary(n, rng);
    let sigma: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..=max_cond)).collect();
    let s = CMatrix::from_diagonal(&DVector::from_iterator(n, sigma.iter().map(|&x| c(x, 0.0))));
    let s_inv = CMatrix::from_diagonal(&DVector::from_iterator(
        n,
        sigma.iter().map(|&x| c(1.0 / x, 0.0)),
    ));
    let p = &u * s * v.adjoint();
    let p_inv = &v * s_inv * u.adjoint();
    (p, p_inv)
}

/// Applies `A → PAP⁻¹`, `B → PB`, `C → CP⁻¹`.
pub fn apply_similarity(r: &Realization, p: &CMatrix, p_inv: &CMatrix) -> Realization {
    Realization::new(p * r.a() * p_inv, p * r.b(), r.c() * p_inv, r.d().clone())
        .expect("similarity preserves dimensions")
}

/// `k` points in the disk of the given radius with pairwise distance at
/// least `sep`, and at least `sep` away from every point in `avoid`.
///
/// The disk grows to radius `sep·√(k + avoid.len())` when the requested one
/// is too small to hold that many separated points.
fn separated_points<R: Rng + ?Sized>(
    k: usize,
    radius: f64,
    sep: f64,
    avoid: &[Complex64],
    rng: &mut R,
) -> Vec<Complex64> {
    let radius = radius.max(sep * ((k + avoid.len()) as f64).sqrt());
    let mut pts: Vec<Complex64> = Vec::with_capacity(k);
    while pts.len() < k {
        let z = c(
            rng.random_range(-radius..=radius),
            rng.random_range(-radius..=radius),
        );
        if z.norm() > radius {
            continue;
        }
        if pts.iter().chain(avoid).all(|q| (q - z).norm() >= sep) {
            pts.push(z);
        }
    }
    pts
}

/// Coefficients `[a_0, …, a_k]` (ascending) of `∏ (s − r_i)`.
fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![c(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
        for (k, &ck) in coeffs.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * r;
        }
        coeffs = next;
    }
    coeffs
}

/// Minimal realization in controller companion form, then scrambled by a
/// random similarity with condition number at most 5.
///
/// Poles are distinct; the first output row realizes a numerator whose
/// zeros stay at least 0.4 away from every pole, and the first input column
/// is `e_n`. Controllability and observability therefore hold by
/// construction, independent of any rank test.
pub fn companion_minimal<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    p: usize,
    rng: &mut R,
) -> Realization {
    assert!(n >= 1 && m >= 1 && p >= 1);
    let poles = separated_points(n, 1.5, 0.4, &[], rng);
    let zeros = separated_points(n - 1, 1.5, 0.4, &poles, rng);
    let den = poly_from_roots(&poles);
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = c(1.0, 0.0);
    }
    for j in 0..n {
        a[(n - 1, j)] = -den[j];
    }
    let mut b = complex_gaussian(n, m, rng);
    b.column_mut(0).fill(c(0.0, 0.0));
    b[(n - 1, 0)] = c(1.0, 0.0);

    let gain = c(rng.random_range(0.5..2.0), 0.0) * {
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(1.0, phase)
    };
    let num = poly_from_roots(&zeros);
    let mut cm = complex_gaussian(p, n, rng);
    for j in 0..n {
        cm[(0, j)] = num[j] * gain;
    }
    let d = complex_gaussian(p, m, rng);
    let base = Realization::new(a, b, cm, d).expect("consistent dimensions");
    let (pm, pm_inv) = well_conditioned(n, 5.0, rng);
    apply_similarity(&base, &pm, &pm_inv)
}

/// Non-minimal system of state dimension `2·half`: a minimal system run
/// twice in parallel with the same input and summed outputs. The
/// difference of the two copies is neither controllable nor observable.
pub fn duplicated_nonminimal<R: Rng + ?Sized>(
    half: usize,
    m: usize,
    p: usize,
    rng: &mut R,
) -> Realization {
    let base = companion_minimal(half, m, p, rng);
    let n = 2 * half;
    let mut a = CMatrix::zeros(n, n);
    a.view_mut((0, 0), (half, half)).copy_from(base.a());
    a.view_mut((half, half), (half, half)).copy_from(base.a());
    let mut b = CMatrix::zeros(n, m);
    b.view_mut((0, 0), (half, m)).copy_from(base.b());
    b.view_mut((half, 0), (half, m)).copy_from(base.b());
    let mut cm = CMatrix::zeros(p, n);
    cm.view_mut((0, 0), (p, half)).copy_from(base.c());
    cm.view_mut((0, half), (p, half)).copy_from(base.c());
    let doubled = Realization::new(a, b, cm, base.d().clone()).expect("consistent dimensions");
    let (pm, pm_inv) = well_conditioned(n, 5.0, rng);
    apply_similarity(&doubled, &pm, &pm_inv)
}

/// Unstructured Gaussian system with `D = 0`.
pub fn gaussian_system<R: Rng + ?Sized>(n: usize, m: usize, p: usize, rng: &mut R) -> Realization {
    Realization::new(
        complex_gaussian(n, n, rng),
        complex_gaussian(n, m, rng),
        complex_gaussian(p, n, rng),
        CMatrix::zeros(p, m),
    )
    .expect("consistent dimensions")
}

/// Random Jordan structure with at most `max_n` states, 1–3 distinct
/// eigenvalues and 1–3 blocks of size 1–3 per eigenvalue.
pub fn random_jordan_spec<R: Rng + ?Sized>(max_n: usize, rng: &mut R) -> JordanSpec {
    assert!(max_n >= 1);
    loop {
        let q = rng.random_range(1..=3usize);
        let eigs = separated_points(q, 3.0, 0.5, &[], rng);
        let groups: Vec<JordanGroup> = eigs
            .into_iter()
            .map(|eig| {
                let count = rng.random_range(1..=3usize);
                JordanGroup {
                    eig,
                    blocks: (0..count).map(|_| rng.random_range(1..=3usize)).collect(),
                }
            })
            .collect();
        let n: usize = groups.iter().map(|g| g.blocks.iter().sum::<usize>()).sum();
        if n <= max_n {
            return JordanSpec::new(groups).expect("generated spec is valid");
        }
    }
}
