//! Cosine-law matrices.
//!
//! For a symmetric proximity `h` over points `v_1..v_S` and a reference
//! `v_a`, the cosine-law matrix has entries
//!
//! ```text
//! m[l][s] = (h(l, a)² + h(a, s)² − h(l, s)²) / 2
//! ```
//!
//! If the points really sit in a Euclidean space with `h` their distances,
//! `m[l][s]` is the dot product `(p_l − p_a)·(p_s − p_a)`, so the matrix is a
//! Gram matrix. Conversely a positive semi-definite cosine-law matrix means
//! the proximities are realizable as Euclidean distances, whatever the
//! reference.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::instance::SYMMETRY_TOLERANCE;

#[derive(Debug, Clone, PartialEq)]
pub struct CosineLawMatrix {
    reference: usize,
    entries: DMatrix<f64>,
}

impl CosineLawMatrix {
    /// 0-based index of the reference point.
    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }
}

/// Builds the cosine-law matrix of `h` with respect to point `reference`
/// (0-based).
///
/// `h` must be square, finite, nonnegative, symmetric (relative tolerance
/// [`SYMMETRY_TOLERANCE`]) and have a zero diagonal. Only the upper triangle
/// of `h` is read, so the result is exactly symmetric.
pub fn build_cosine_law(h: &DMatrix<f64>, reference: usize) -> Result<CosineLawMatrix> {
    let size = h.nrows();
    if h.ncols() != size || size == 0 {
        return Err(Error::DimensionMismatch {
            what: "proximity matrix",
            expected: "a non-empty square matrix".into(),
            found: format!("{}x{}", h.nrows(), h.ncols()),
        });
    }
    if reference >= size {
        return Err(Error::InvalidReference { index: reference, len: size });
    }
    let what = "proximity matrix";
    for i in 0..size {
        if h[(i, i)] != 0.0 {
            return Err(Error::NonzeroDiagonal { what, index: i, value: h[(i, i)] });
        }
        for j in 0..size {
            let v = h[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite { what, row: i, col: j });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry { what, row: i, col: j, value: v });
            }
            if j > i && (v - h[(j, i)]).abs() > SYMMETRY_TOLERANCE * v.max(h[(j, i)]) {
                return Err(Error::Asymmetric { what, row: i, col: j, a: v, b: h[(j, i)] });
            }
        }
    }

    let sq = |i: usize, j: usize| {
        let v = if i <= j { h[(i, j)] } else { h[(j, i)] };
        v * v
    };
    let a = reference;
    let mut entries = DMatrix::zeros(size, size);
    for l in 0..size {
        for s in l..size {
            let v = 0.5 * (sq(l, a) + sq(a, s) - sq(l, s));
            entries[(l, s)] = v;
            entries[(s, l)] = v;
        }
    }
    Ok(CosineLawMatrix { reference, entries })
}
