//! Dense complex-matrix primitives: spectra, tolerance-based rank, null
//! spaces, matrix polynomials and eigenvalue clustering.
//!
//! Every rank or spectrum decision in the crate goes through this module so
//! that tolerances are applied uniformly.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix, row/column counts carried by the storage.
pub type CMatrix = DMatrix<Complex64>;

/// Shorthand for a complex scalar.
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols, "row-major data length");
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Maximum absolute column sum.
pub fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖U*U − I‖_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (u.adjoint() * u - identity(u.ncols())).norm()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Numerical thresholds shared by all verdict-producing operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff used for numeric rank.
    pub rank_rel: f64,
    /// Eigenvalue matching distance, scaled by `1 + ‖·‖₁` of the sources.
    pub eig_match: f64,
    /// Bound on randomized retries and escalation steps.
    pub max_retries: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_rel: 1e-9,
            eig_match: 1e-6,
            max_retries: 32,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.rank_rel > 0.0 && self.rank_rel.is_finite()) {
            return Err(Error::Precondition(format!(
                "rank_rel must be positive, got {}",
                self.rank_rel
            )));
        }
        if !(self.eig_match > 0.0 && self.eig_match.is_finite()) {
            return Err(Error::Precondition(format!(
                "eig_match must be positive, got {}",
                self.eig_match
            )));
        }
        Ok(())
    }

    /// Matching radius for eigenvalues of matrices with the given 1-norm.
    pub fn eig_radius(&self, scale: f64) -> f64 {
        self.eig_match * (1.0 + scale)
    }
}

/// Eigenvalues of a square matrix, with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
    pub source_dim: usize,
    /// 1-norm of the source matrix; sets the matching scale.
    pub scale: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distance from `z` to the nearest eigenvalue (`inf` when empty).
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.values
            .iter()
            .map(|v| (v - z).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

fn lexicographic(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn householder_scramble(n: usize) -> CMatrix {
    // fixed unit vector, so retries stay deterministic
    let v = CMatrix::from_fn(n, 1, |i, _| {
        c(1.0 + i as f64, 0.5 * (i as f64 + 1.0).sqrt())
    });
    let v = &v / Complex64::from(v.norm());
    identity(n) - (&v * v.adjoint()) * c(2.0, 0.0)
}

/// All eigenvalues of `m`, sorted lexicographically by (re, im).
pub fn spectrum(m: &CMatrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "spectrum needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::NonFinite("spectrum input"));
    }
    let n = m.nrows();
    let scale = one_norm(m);
    if n == 0 {
        return Ok(Spectrum {
            values: Vec::new(),
            source_dim: 0,
            scale,
        });
    }
    let mut values = None;
    for attempt in 0..4 {
        let work = if attempt == 0 {
            m.clone()
        } else {
            let h = householder_scramble(n);
            // h is Hermitian and unitary, so h·m·h is similar to m
            let mut w = m.clone();
            for _ in 0..attempt {
                w = &h * w * &h;
            }
            w
        };
        if let Some(ev) =
            Schur::try_new(work, f64::EPSILON, 200 * n.max(10)).and_then(|s| s.eigenvalues())
        {
            values = Some(ev.iter().copied().collect::<Vec<_>>());
            break;
        }
    }
    let mut values = values
        .ok_or_else(|| Error::NumericalBreakdown("Schur iteration did not converge".into()))?;
    values.sort_by(lexicographic);
    Ok(Spectrum {
        values,
        source_dim: n,
        scale,
    })
}

/// Singular values (descending) together with the rank decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankProfile {
    pub rank: usize,
    pub cutoff: f64,
    pub singular_values: Vec<f64>,
}

impl RankProfile {
    /// Decades by which the `k`-th singular value (1-based) sits above the
    /// cutoff; negative when it falls below. `+inf` for `k = 0`.
    pub fn clearance(&self, k: usize) -> f64 {
        if k == 0 {
            return f64::INFINITY;
        }
        let sigma = self.singular_values.get(k - 1).copied().unwrap_or(0.0);
        decades(sigma, self.cutoff)
    }

    /// Signed distance, in decades, of the rank decision from flipping.
    pub fn margin(&self) -> f64 {
        let above = self.clearance(self.rank);
        let below = match self.singular_values.get(self.rank) {
            Some(&s) => decades(self.cutoff, s),
            None => f64::INFINITY,
        };
        above.min(below)
    }
}

fn decades(num: f64, den: f64) -> f64 {
    let tiny = f64::MIN_POSITIVE;
    (num.max(tiny) / den.max(tiny)).log10()
}

/// Singular values in descending order and the matching right singular
/// vectors as columns of a `cols × cols` unitary matrix.
fn svd_full_right(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (rows, cols) = m.shape();
    let work = if rows >= cols {
        m.clone()
    } else {
        // zero rows leave the singular values unchanged and give a square V
        let mut padded = CMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded
    };
    let svd = work.svd(false, true);
    let v = svd.v_t.expect("right singular vectors requested").adjoint();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v_sorted = CMatrix::from_fn(cols, cols, |r, k| v[(r, order[k])]);
    // only the first `min(rows, cols)` values can be nonzero
    let kept = values.into_iter().take(rows.min(cols)).collect();
    (kept, v_sorted)
}

fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn cutoff_for(sigma: &[f64], rows: usize, cols: usize, tol: &Tolerances) -> f64 {
    let smax = sigma.first().copied().unwrap_or(0.0);
    tol.rank_rel * smax * rows.max(cols) as f64
}

pub fn rank_profile(m: &CMatrix, tol: &Tolerances) -> RankProfile {
    let sigma = singular_values(m);
    let cutoff = cutoff_for(&sigma, m.nrows(), m.ncols(), tol);
    let rank = sigma.iter().filter(|&&s| s > cutoff).count();
    RankProfile {
        rank,
        cutoff,
        singular_values: sigma,
    }
}

/// Number of singular values above `rank_rel · σ_max · max(rows, cols)`.
pub fn numeric_rank(m: &CMatrix, tol: &Tolerances) -> usize {
    rank_profile(m, tol).rank
}

/// Orthonormal basis of the numerical null space, one vector per column.
pub fn null_space(m: &CMatrix, tol: &Tolerances) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return identity(cols);
    }
    let (sigma, v) = svd_full_right(m);
    let cutoff = cutoff_for(&sigma, m.nrows(), m.ncols(), tol);
    let rank = sigma.iter().filter(|&&s| s > cutoff).count();
    v.columns(rank, cols - rank).into_owned()
}

/// Eigenvalues grouped into clusters of numerically equal values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenClusters {
    pub representatives: Vec<Complex64>,
    pub algebraic_mult: Vec<usize>,
    pub geometric_mult: Vec<usize>,
    /// Single-linkage radius that was used.
    pub radius: f64,
    /// Largest intra-cluster diameter.
    pub max_diameter: f64,
    pub warning: Option<String>,
}

impl EigenClusters {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Largest geometric multiplicity.
    pub fn alpha(&self) -> usize {
        self.geometric_mult.iter().copied().max().unwrap_or(0)
    }

    /// Smallest distance between distinct representatives (`inf` if `q = 1`).
    pub fn min_gap(&self) -> f64 {
        let reps = &self.representatives;
        let mut gap = f64::INFINITY;
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                gap = gap.min((reps[i] - reps[j]).norm());
            }
        }
        gap
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Single-linkage clustering of `spect(a)` at radius
/// `eig_match · (1 + ‖a‖₁)`; geometric multiplicities from the rank of
/// `a − λI` at each cluster mean.
pub fn cluster_eigenvalues(a: &CMatrix, tol: &Tolerances) -> Result<EigenClusters> {
    let spec = spectrum(a)?;
    let n = spec.len();
    let radius = tol.eig_radius(spec.scale);
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (spec.values[i] - spec.values[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut members: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match members.iter_mut().find(|(r, _)| *r == root) {
            Some((_, group)) => group.push(spec.values[i]),
            None => members.push((root, vec![spec.values[i]])),
        }
    }

    let mut representatives = Vec::with_capacity(members.len());
    let mut algebraic_mult = Vec::with_capacity(members.len());
    let mut geometric_mult = Vec::with_capacity(members.len());
    let mut max_diameter: f64 = 0.0;
    for (_, group) in &members {
        let mean = group.iter().sum::<Complex64>() / group.len() as f64;
        for x in group {
            for y in group {
                max_diameter = max_diameter.max((x - y).norm());
            }
        }
        let shifted = a - identity(n) * mean;
        let geo = n - numeric_rank(&shifted, tol);
        representatives.push(mean);
        algebraic_mult.push(group.len());
        geometric_mult.push(geo.clamp(1, group.len()));
    }
    let warning = (max_diameter > 10.0 * radius).then(|| {
        format!(
            "cluster diameter {max_diameter:.3e} exceeds 10x the matching radius {radius:.3e}; \
             eigenvalues are ill-conditioned"
        )
    });
    Ok(EigenClusters {
        representatives,
        algebraic_mult,
        geometric_mult,
        radius,
        max_diameter,
        warning,
    })
}

/// Evaluates `Σ coeffs[k] · M^k` by Horner's rule.
pub fn matrix_polynomial(coeffs: &[Complex64], m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "matrix polynomial needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let (last, rest) = coeffs
        .split_last()
        .ok_or_else(|| Error::Precondition("polynomial has no coefficients".into()))?;
    let n = m.nrows();
    let mut acc = identity(n) * *last;
    for &ck in rest.iter().rev() {
        acc = &acc * m;
        for i in 0..n {
            acc[(i, i)] += ck;
        }
    }
    Ok(acc)
}

/// Evaluates the scalar polynomial at `z`.
pub fn scalar_polynomial(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

/// One eigenvalue of each spectrum paired by [`spectra_intersect`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub left: Complex64,
    pub right: Complex64,
    pub distance: f64,
}

/// Matching radius used when intersecting two spectra.
pub fn intersection_radius(s1: &Spectrum, s2: &Spectrum, tol: &Tolerances) -> f64 {
    tol.eig_radius(s1.scale.max(s2.scale))
}

/// Greedy minimum-distance matching between two spectra. An empty result
/// certifies disjointness at the tolerance.
pub fn spectra_intersect(s1: &Spectrum, s2: &Spectrum, tol: &Tolerances) -> Vec<MatchedPair> {
    let radius = intersection_radius(s1, s2, tol);
    let mut candidates = Vec::new();
    for (i, x) in s1.values.iter().enumerate() {
        for (j, y) in s2.values.iter().enumerate() {
            let d = (x - y).norm();
            if d <= radius {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_left = vec![false; s1.len()];
    let mut used_right = vec![false; s2.len()];
    let mut pairs = Vec::new();
    for (d, i, j) in candidates {
        if used_left[i] || used_right[j] {
            continue;
        }
        used_left[i] = true;
        used_right[j] = true;
        pairs.push(MatchedPair {
            left: s1.values[i],
            right: s2.values[j],
            distance: d,
        });
    }
    pairs.sort_by(|a, b| lexicographic(&a.left, &b.left));
    pairs
}

/// Smallest distance between any eigenvalue of `s1` and any of `s2`.
pub fn min_cross_distance(s1: &Spectrum, s2: &Spectrum) -> f64 {
    s1.values
        .iter()
        .map(|x| s2.distance_to(*x))
        .fold(f64::INFINITY, f64::min)
}
