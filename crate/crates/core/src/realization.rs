//! The `(A, B, C, D)` data model and the elementary constructions built on
//! it: the system matrix `L`, the associated strictly proper system,
//! zero-padding to a square system, transfer evaluation, static output
//! feedback and the realization of the inverse function.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{identity, is_finite, one_norm, spectrum, CMatrix, Tolerances};

/// State-space realization of `F(s) = C (sI − A)⁻¹ B + D`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
}

impl Realization {
    /// Validates dimensions (`A` is `n×n`, `B` is `n×m`, `C` is `p×n`, `D` is
    /// `p×m`, all of `n, m, p ≥ 1`) and finiteness.
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::Dimension(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let m = b.ncols();
        let p = c.nrows();
        if b.nrows() != n || m == 0 {
            return Err(Error::Dimension(format!(
                "B must be {n}xm with m >= 1, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if c.ncols() != n || p == 0 {
            return Err(Error::Dimension(format!(
                "C must be px{n} with p >= 1, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if d.shape() != (p, m) {
            return Err(Error::Dimension(format!(
                "D must be {p}x{m}, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        for (name, mat) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if !is_finite(mat) {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(Realization { a, b, c, d })
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Number of outputs.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_square(&self) -> bool {
        self.m() == self.p()
    }

    pub fn into_parts(self) -> (CMatrix, CMatrix, CMatrix, CMatrix) {
        (self.a, self.b, self.c, self.d)
    }

    /// The block matrix `[[A, B], [C, D]]`.
    pub fn assemble_l(&self) -> SystemMatrix {
        let (n, m, p) = (self.n(), self.m(), self.p());
        let mut l = CMatrix::zeros(n + p, n + m);
        l.view_mut((0, 0), (n, n)).copy_from(&self.a);
        l.view_mut((0, n), (n, m)).copy_from(&self.b);
        l.view_mut((n, 0), (p, n)).copy_from(&self.c);
        l.view_mut((n, n), (p, m)).copy_from(&self.d);
        SystemMatrix { l, n, m, p }
    }

    /// The strictly proper part: same `A, B, C` with `D = 0`.
    pub fn associated(&self) -> Realization {
        Realization {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: CMatrix::zeros(self.p(), self.m()),
        }
    }

    /// Pads `B` with zero columns or `C` with zero rows (and `D` to match)
    /// until `m = p = max(m, p)`.
    pub fn naive_square(&self) -> Realization {
        let (n, m, p) = (self.n(), self.m(), self.p());
        let k = m.max(p);
        let mut b = CMatrix::zeros(n, k);
        b.view_mut((0, 0), (n, m)).copy_from(&self.b);
        let mut c = CMatrix::zeros(k, n);
        c.view_mut((0, 0), (p, n)).copy_from(&self.c);
        let mut d = CMatrix::zeros(k, k);
        d.view_mut((0, 0), (p, m)).copy_from(&self.d);
        Realization {
            a: self.a.clone(),
            b,
            c,
            d,
        }
    }

    /// `C (sI − A)⁻¹ B + D`, by a linear solve. Refuses points within the
    /// eigenvalue matching radius of `spect(A)`.
    pub fn eval_transfer(&self, s: Complex64, tol: &Tolerances) -> Result<CMatrix> {
        let spec = spectrum(&self.a)?;
        let distance = spec.distance_to(s);
        if distance <= tol.eig_radius(spec.scale) {
            return Err(Error::PoleEvaluation { s, distance });
        }
        let resolvent = identity(self.n()) * s - &self.a;
        let x = resolvent
            .lu()
            .solve(&self.b)
            .ok_or(Error::PoleEvaluation { s, distance })?;
        Ok(&self.c * x + &self.d)
    }

    /// Static output feedback `u = K y + u'` on a strictly proper system:
    /// returns `(A + B K C, B, C, 0)`.
    pub fn closed_loop(&self, k: &CMatrix, tol: &Tolerances) -> Result<Realization> {
        if k.shape() != (self.m(), self.p()) {
            return Err(Error::Dimension(format!(
                "K must be {}x{}, got {}x{}",
                self.m(),
                self.p(),
                k.nrows(),
                k.ncols()
            )));
        }
        if !is_finite(k) {
            return Err(Error::NonFinite("K"));
        }
        if self.d.iter().any(|z| z.norm() > tol.eig_match) {
            return Err(Error::Precondition(
                "closed loop is defined on the associated system; D must be zero".into(),
            ));
        }
        let a_cl = &self.a + &self.b * k * &self.c;
        Ok(Realization {
            a: a_cl,
            b: self.b.clone(),
            c: self.c.clone(),
            d: CMatrix::zeros(self.p(), self.m()),
        })
    }

    /// Realization `(A − BC, B, −C, I)` of `F(s)⁻¹` for a system with `D = I`.
    pub fn inverse_realization(&self, tol: &Tolerances) -> Result<Realization> {
        if !self.is_square() {
            return Err(Error::Precondition(format!(
                "inverse realization needs m = p, got m = {}, p = {}",
                self.m(),
                self.p()
            )));
        }
        let defect = (&self.d - identity(self.m())).camax();
        if defect > tol.eig_match {
            return Err(Error::Precondition(format!(
                "inverse realization needs D = I (max deviation {defect:.3e})"
            )));
        }
        Ok(Realization {
            a: &self.a - &self.b * &self.c,
            b: self.b.clone(),
            c: -self.c.clone(),
            d: identity(self.m()),
        })
    }

    /// 1-norm of the assembled system matrix.
    pub fn scale(&self) -> f64 {
        one_norm(&self.assemble_l().l)
    }
}

/// `L = [[A, B], [C, D]]` together with its block boundaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemMatrix {
    #[serde(with = "crate::io::matrix_serde")]
    pub l: CMatrix,
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

impl SystemMatrix {
    /// Cuts a `(n+p)×(n+m)` matrix at the given state dimension.
    pub fn from_matrix(l: CMatrix, n: usize) -> Result<Self> {
        if n == 0 || l.nrows() <= n || l.ncols() <= n {
            return Err(Error::Dimension(format!(
                "cannot split a {}x{} matrix at state dimension {n}",
                l.nrows(),
                l.ncols()
            )));
        }
        let (p, m) = (l.nrows() - n, l.ncols() - n);
        Ok(SystemMatrix { l, n, m, p })
    }

    pub fn is_square(&self) -> bool {
        self.m == self.p
    }

    /// Splits back into `(A, B, C, D)`.
    pub fn split(&self) -> Result<Realization> {
        let (n, m, p) = (self.n, self.m, self.p);
        Realization::new(
            self.l.view((0, 0), (n, n)).into_owned(),
            self.l.view((0, n), (n, m)).into_owned(),
            self.l.view((n, 0), (p, n)).into_owned(),
            self.l.view((n, n), (p, m)).into_owned(),
        )
    }
}
