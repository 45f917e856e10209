//! Row-independence specifications and block unitary echelon reduction.
//!
//! For `A` in Jordan form, `(A, B)` is controllable exactly when, for each
//! eigenvalue, the rows of `B` sitting at the last row of each Jordan block
//! are linearly independent. [`RowSpec`] records such prescribed row sets
//! per diagonal block; [`block_echelon_reduce`] brings the prescribed rows
//! of every block into upper echelon form with a block-diagonal unitary;
//! [`build_selector_t`] compresses `B` to `ρ` columns while keeping every
//! prescribed row set independent.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{complex_gaussian, rng_from_seed};
use crate::io::matrix_serde;
use crate::numeric::{c, identity, numeric_rank, CMatrix, Tolerances};

/// One eigenvalue and the sizes of its Jordan blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JordanGroup {
    pub eig: Complex64,
    pub blocks: Vec<usize>,
}

/// Symbolic Jordan structure: distinct eigenvalues with block sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct JordanSpec {
    groups: Vec<JordanGroup>,
}

impl JordanSpec {
    pub fn new(groups: Vec<JordanGroup>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Precondition("Jordan spec has no eigenvalues".into()));
        }
        for (i, g) in groups.iter().enumerate() {
            if g.blocks.is_empty() || g.blocks.contains(&0) {
                return Err(Error::Precondition(format!(
                    "eigenvalue {} needs at least one block, all of size >= 1",
                    g.eig
                )));
            }
            if !(g.eig.re.is_finite() && g.eig.im.is_finite()) {
                return Err(Error::NonFinite("Jordan eigenvalue"));
            }
            if groups[..i].iter().any(|h| h.eig == g.eig) {
                return Err(Error::Precondition(format!(
                    "eigenvalue {} listed twice; merge its blocks into one group",
                    g.eig
                )));
            }
        }
        Ok(JordanSpec { groups })
    }

    pub fn groups(&self) -> &[JordanGroup] {
        &self.groups
    }

    /// Total state dimension.
    pub fn n(&self) -> usize {
        self.groups
            .iter()
            .map(|g| g.blocks.iter().sum::<usize>())
            .sum()
    }

    /// Largest geometric multiplicity: the most blocks any eigenvalue has.
    pub fn alpha(&self) -> usize {
        self.groups
            .iter()
            .map(|g| g.blocks.len())
            .max()
            .unwrap_or(0)
    }

    /// Upper Jordan matrix (ones on the superdiagonal inside each block).
    pub fn assemble(&self) -> CMatrix {
        let n = self.n();
        let mut a = CMatrix::zeros(n, n);
        let mut offset = 0;
        for g in &self.groups {
            for &k in &g.blocks {
                for i in 0..k {
                    a[(offset + i, offset + i)] = g.eig;
                    if i + 1 < k {
                        a[(offset + i, offset + i + 1)] = c(1.0, 0.0);
                    }
                }
                offset += k;
            }
        }
        a
    }
}

/// Prescribed independent rows within one diagonal block (0-based indices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowBlock {
    pub height: usize,
    pub rows: Vec<usize>,
}

impl RowBlock {
    /// Builds a block from 1-based row numbers.
    pub fn one_based(height: usize, rows: &[usize]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|&r| {
                r.checked_sub(1)
                    .ok_or(Error::IndexOutOfRange { index: r, height })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RowBlock { height, rows })
    }
}

/// Per-block sets of rows required to be linearly independent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct RowSpec {
    blocks: Vec<RowBlock>,
}

impl RowSpec {
    pub fn new(mut blocks: Vec<RowBlock>) -> Result<Self> {
        for b in &mut blocks {
            b.rows.sort_unstable();
            b.rows.dedup();
            if let Some(&bad) = b.rows.iter().find(|&&r| r >= b.height) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    height: b.height,
                });
            }
        }
        Ok(RowSpec { blocks })
    }

    pub fn blocks(&self) -> &[RowBlock] {
        &self.blocks
    }

    pub fn total_height(&self) -> usize {
        self.blocks.iter().map(|b| b.height).sum()
    }

    /// Largest number of prescribed rows in any block.
    pub fn rho(&self) -> usize {
        self.blocks.iter().map(|b| b.rows.len()).max().unwrap_or(0)
    }

    /// Global row indices per block.
    fn global_rows(&self) -> Vec<(usize, &RowBlock)> {
        let mut offset = 0;
        self.blocks
            .iter()
            .map(|b| {
                let o = offset;
                offset += b.height;
                (o, b)
            })
            .collect()
    }
}

/// Rows of `B` that must be independent for `(A(spec), B)` to be
/// controllable: the last row of every Jordan block, grouped per eigenvalue.
pub fn jordan_row_spec(spec: &JordanSpec) -> RowSpec {
    let blocks = spec
        .groups()
        .iter()
        .map(|g| {
            let mut rows = Vec::with_capacity(g.blocks.len());
            let mut end = 0;
            for &k in &g.blocks {
                end += k;
                rows.push(end - 1);
            }
            RowBlock { height: end, rows }
        })
        .collect();
    RowSpec { blocks }
}

/// Columns of `C` that must be independent for `(A(spec), C)` to be
/// observable: the first column of every Jordan block. Check it against
/// `Cᵀ` with [`check_row_spec`].
pub fn jordan_column_spec(spec: &JordanSpec) -> RowSpec {
    let blocks = spec
        .groups()
        .iter()
        .map(|g| {
            let mut rows = Vec::with_capacity(g.blocks.len());
            let mut start = 0;
            for &k in &g.blocks {
                rows.push(start);
                start += k;
            }
            RowBlock {
                height: start,
                rows,
            }
        })
        .collect();
    RowSpec { blocks }
}

fn check_height(b: &CMatrix, spec: &RowSpec) -> Result<()> {
    if b.nrows() != spec.total_height() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but the row spec covers {}",
            b.nrows(),
            spec.total_height()
        )));
    }
    Ok(())
}

fn select_rows(b: &CMatrix, rows: impl Iterator<Item = usize>) -> CMatrix {
    let rows: Vec<usize> = rows.collect();
    CMatrix::from_fn(rows.len(), b.ncols(), |i, j| b[(rows[i], j)])
}

/// True iff every prescribed row subset has full numeric rank.
pub fn check_row_spec(b: &CMatrix, spec: &RowSpec, tol: &Tolerances) -> Result<bool> {
    check_height(b, spec)?;
    for (offset, block) in spec.global_rows() {
        if block.rows.is_empty() {
            continue;
        }
        let sub = select_rows(b, block.rows.iter().map(|r| offset + r));
        if numeric_rank(&sub, tol) < block.rows.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `B = U·B̃` with `U` block-diagonal unitary and the prescribed rows of
/// every block of `B̃` in upper echelon form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EchelonForm {
    #[serde(with = "matrix_serde")]
    pub u: CMatrix,
    #[serde(with = "matrix_serde")]
    pub reduced: CMatrix,
    /// Pivot column of each prescribed row, per block.
    pub pivots: Vec<Vec<usize>>,
}

fn pivot_threshold(rows: &CMatrix, tol: &Tolerances) -> f64 {
    tol.rank_rel * rows.nrows().max(rows.ncols()) as f64 * rows.norm()
}

/// Householder reduction of a full-row-rank `k×m` matrix to upper echelon
/// form, sweeping columns left to right and skipping columns that are
/// already eliminated. Returns `(Q, R, pivots)` with `X = Q·R`.
fn echelon_qr(x: &CMatrix, tol: &Tolerances) -> Result<(CMatrix, CMatrix, Vec<usize>)> {
    let (k, m) = x.shape();
    let thr = pivot_threshold(x, tol);
    let mut r = x.clone();
    let mut q = identity(k);
    let mut pivots = Vec::with_capacity(k);
    let mut row = 0;
    for col in 0..m {
        if row == k {
            break;
        }
        let head = r.view((row, col), (k - row, 1)).into_owned();
        let alpha = head.norm();
        if alpha <= thr {
            continue;
        }
        let x0 = head[(0, 0)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            c(1.0, 0.0)
        };
        let mut v = head;
        v[(0, 0)] += phase * alpha;
        let vnorm2 = v.norm_squared();
        if vnorm2 > 0.0 {
            let two = Complex64::from(2.0 / vnorm2);
            // R ← H·R on rows row..k, with H = I − 2vv*/(v*v)
            let mut block = r.view_mut((row, 0), (k - row, m));
            let proj = v.adjoint() * &block;
            block -= &v * proj * two;
            // Q ← Q·H on columns row..k (H is Hermitian)
            let mut qcols = q.view_mut((0, row), (k, k - row));
            let qv = &qcols * &v;
            qcols -= qv * v.adjoint() * two;
        }
        pivots.push(col);
        row += 1;
    }
    if row < k {
        return Err(Error::NumericalBreakdown(format!(
            "echelon reduction found {row} pivots for {k} prescribed rows"
        )));
    }
    Ok((q, r, pivots))
}

/// Block unitary echelon reduction of `B` for the given row spec.
///
/// Inside each block, the prescribed rows are reduced by a unitary acting
/// on those rows only (the permutation that brings them to the top,
/// followed by a Householder echelon sweep); the other rows are untouched.
pub fn block_echelon_reduce(b: &CMatrix, spec: &RowSpec, tol: &Tolerances) -> Result<EchelonForm> {
    if !check_row_spec(b, spec, tol)? {
        return Err(Error::Precondition(
            "prescribed rows are not linearly independent".into(),
        ));
    }
    let n = b.nrows();
    let mut u = identity(n);
    let mut reduced = b.clone();
    let mut pivots = Vec::with_capacity(spec.blocks().len());
    for (offset, block) in spec.global_rows() {
        if block.rows.is_empty() {
            pivots.push(Vec::new());
            continue;
        }
        let global: Vec<usize> = block.rows.iter().map(|r| offset + r).collect();
        let sub = select_rows(b, global.iter().copied());
        let (q, r, piv) = echelon_qr(&sub, tol)?;
        for (i, &gi) in global.iter().enumerate() {
            for (j, &gj) in global.iter().enumerate() {
                u[(gi, gj)] = q[(i, j)];
            }
            reduced.row_mut(gi).copy_from(&r.row(i));
        }
        pivots.push(piv);
    }
    Ok(EchelonForm { u, reduced, pivots })
}

/// Pivot columns of the prescribed rows of each block, or `None` when some
/// block is not in upper echelon form (a prescribed row without a nonzero
/// entry, or pivots not strictly increasing).
pub fn echelon_pivots(
    b: &CMatrix,
    spec: &RowSpec,
    tol: &Tolerances,
) -> Result<Option<Vec<Vec<usize>>>> {
    check_height(b, spec)?;
    let mut all = Vec::with_capacity(spec.blocks().len());
    for (offset, block) in spec.global_rows() {
        let sub = select_rows(b, block.rows.iter().map(|r| offset + r));
        let thr = pivot_threshold(&sub, tol);
        let mut pivots = Vec::with_capacity(block.rows.len());
        for i in 0..sub.nrows() {
            let Some(p) = (0..sub.ncols()).find(|&j| sub[(i, j)].norm() > thr) else {
                return Ok(None);
            };
            if pivots.last().is_some_and(|&prev| p <= prev) {
                return Ok(None);
            }
            pivots.push(p);
        }
        all.push(pivots);
    }
    Ok(Some(all))
}

pub fn is_block_echelon(b: &CMatrix, spec: &RowSpec, tol: &Tolerances) -> Result<bool> {
    Ok(echelon_pivots(b, spec, tol)?.is_some())
}

/// Full-rank `m×ρ` matrix `T` such that `B·T` still satisfies the row spec.
///
/// `T = I` is tried first when `m = ρ`; otherwise Gaussian draws are
/// verified with [`check_row_spec`] until one passes.
pub fn build_selector_t(
    b: &CMatrix,
    spec: &RowSpec,
    tol: &Tolerances,
    seed: u64,
) -> Result<CMatrix> {
    if !check_row_spec(b, spec, tol)? {
        return Err(Error::Precondition(
            "prescribed rows are not linearly independent".into(),
        ));
    }
    let m = b.ncols();
    let rho = spec.rho();
    if rho == 0 {
        return Err(Error::Precondition("row spec prescribes no rows".into()));
    }
    if m == rho {
        return Ok(identity(m));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..tol.max_retries.max(1) {
        let t = complex_gaussian(m, rho, &mut rng);
        if numeric_rank(&t, tol) == rho && check_row_spec(&(b * &t), spec, tol)? {
            return Ok(t);
        }
    }
    Err(Error::NumericalBreakdown(format!(
        "no valid selector found in {} draws",
        tol.max_retries
    )))
}

/// Random `B` with `(A(spec), B)` controllable, drawn from unit-variance
/// complex Gaussians and resampled until the row spec holds.
pub fn sample_controllable_b(
    spec: &JordanSpec,
    m: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let rows = jordan_row_spec(spec);
    if m < rows.rho() {
        return Err(Error::Precondition(format!(
            "controllability needs m >= {} inputs, got {m}",
            rows.rho()
        )));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..tol.max_retries.max(1) {
        let b = complex_gaussian(spec.n(), m, &mut rng);
        if check_row_spec(&b, &rows, tol)? {
            return Ok(b);
        }
    }
    Err(Error::NumericalBreakdown(
        "controllable B sampling exhausted its retries".into(),
    ))
}

/// Random `cols`-column matrix satisfying the row spec with numeric rank
/// exactly `rank`, for any `rank` in `[ρ, min(rows, cols)]`.
pub fn sample_row_spec_matrix(
    spec: &RowSpec,
    cols: usize,
    rank: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CMatrix> {
    let n = spec.total_height();
    if rank < spec.rho() || rank > n.min(cols) {
        return Err(Error::Precondition(format!(
            "rank {rank} outside [{}, {}]",
            spec.rho(),
            n.min(cols)
        )));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..tol.max_retries.max(1) {
        let b = complex_gaussian(n, rank, &mut rng) * complex_gaussian(rank, cols, &mut rng);
        if numeric_rank(&b, tol) == rank && check_row_spec(&b, spec, tol)? {
            return Ok(b);
        }
    }
    Err(Error::NumericalBreakdown(
        "row-spec matrix sampling exhausted its retries".into(),
    ))
}
