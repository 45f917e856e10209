//! JSON wire format. Complex scalars are `[re, im]` (a bare number is
//! accepted on input as a real value); matrices are arrays of rows.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::echelon::{JordanGroup, JordanSpec};
use crate::numeric::{c, CMatrix};
use crate::realization::Realization;

/// A complex scalar as written in input files.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ScalarRepr> for Complex64 {
    fn from(s: ScalarRepr) -> Self {
        match s {
            ScalarRepr::Real(x) => c(x, 0.0),
            ScalarRepr::Pair([re, im]) => c(re, im),
        }
    }
}

/// Complex scalar accepting either `x` or `[re, im]` on input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar(pub Complex64);

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Scalar(ScalarRepr::deserialize(d)?.into()))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

/// Serializes a matrix as `[[[re, im], …], …]`.
pub struct MatrixRef<'a>(pub &'a CMatrix);

impl Serialize for MatrixRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .0
            .row_iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

/// Builds a matrix from rows, rejecting ragged input.
pub fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> Result<CMatrix, String> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(format!("row {i} has {} entries, expected {ncols}", r.len()));
    }
    Ok(CMatrix::from_row_iterator(
        nrows,
        ncols,
        rows.into_iter().flatten(),
    ))
}

/// `#[serde(with = "matrix_serde")]` for `CMatrix` fields.
pub mod matrix_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixRef(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows: Vec<Vec<Scalar>> = Vec::deserialize(d)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|z| z.0).collect())
            .collect();
        matrix_from_rows(rows).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "opt_matrix_serde")]` for `Option<CMatrix>` fields.
pub mod opt_matrix_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<CMatrix>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(MatrixRef).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMatrix>, D::Error> {
        #[derive(Deserialize)]
        struct Wrapped(#[serde(with = "matrix_serde")] CMatrix);
        Ok(Option::<Wrapped>::deserialize(d)?.map(|w| w.0))
    }
}

impl Serialize for Realization {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Realization", 4)?;
        st.serialize_field("A", &MatrixRef(self.a()))?;
        st.serialize_field("B", &MatrixRef(self.b()))?;
        st.serialize_field("C", &MatrixRef(self.c()))?;
        st.serialize_field("D", &MatrixRef(self.d()))?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RealizationDoc {
    #[serde(rename = "A", with = "matrix_serde")]
    a: CMatrix,
    #[serde(rename = "B", with = "matrix_serde")]
    b: CMatrix,
    #[serde(rename = "C", with = "matrix_serde")]
    c: CMatrix,
    #[serde(rename = "D", default, with = "opt_matrix_serde")]
    d: Option<CMatrix>,
}

/// `D` may be omitted, in which case it is zero.
impl<'de> Deserialize<'de> for Realization {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = RealizationDoc::deserialize(d)?;
        let dm = doc
            .d
            .unwrap_or_else(|| CMatrix::zeros(doc.c.nrows(), doc.b.ncols()));
        Realization::new(doc.a, doc.b, doc.c, dm).map_err(D::Error::custom)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupDoc {
    eig: Scalar,
    blocks: Vec<usize>,
}

impl<'de> Deserialize<'de> for JordanSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let groups: Vec<GroupDoc> = Vec::deserialize(d)?;
        let groups = groups
            .into_iter()
            .map(|g| JordanGroup {
                eig: g.eig.0,
                blocks: g.blocks,
            })
            .collect();
        JordanSpec::new(groups).map_err(D::Error::custom)
    }
}
