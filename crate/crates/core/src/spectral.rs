//! Symmetric eigendecomposition, positive semi-definiteness checks,
//! Geršgorin discs and square-root factorization.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default relative tolerance for PSD verdicts.
pub const DEFAULT_PSD_TOLERANCE: f64 = 1e-9;

/// Relative asymmetry accepted by [`eigendecompose`].
pub const EIGEN_SYMMETRY_TOLERANCE: f64 = 1e-9;

const JACOBI_THRESHOLD: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralSummary {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Lower cut below which an eigenvalue counts as negative.
    pub fn negativity_threshold(&self, tol: f64) -> f64 {
        -tol * self.max_eigenvalue().abs().max(1.0)
    }

    /// Number of eigenvalues above `tol · max(1, |λ_max|)`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        let cut = tol * self.max_eigenvalue().abs().max(1.0);
        self.eigenvalues.iter().filter(|&&l| l > cut).count()
    }
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    let what = "matrix";
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            what,
            expected: "a square matrix".into(),
            found: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(Error::NonFinite { what, row: i, col: j });
            }
        }
    }
    let scale = a.amax();
    for i in 0..a.nrows() {
        for j in i + 1..a.ncols() {
            if (a[(i, j)] - a[(j, i)]).abs() > EIGEN_SYMMETRY_TOLERANCE * scale {
                return Err(Error::Asymmetric { what, row: i, col: j, a: a[(i, j)], b: a[(j, i)] });
            }
        }
    }
    Ok(())
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi sweeps in row order until `off(A) ≤ 1e-12 · ‖A‖_F`.
///
/// Returns the unsorted diagonal and the accumulated rotations.
fn jacobi(mut a: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut v = DMatrix::identity(n, n);
    let target = JACOBI_THRESHOLD * a.norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if off_diagonal_norm(&a) <= target {
        return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
    }
    Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS })
}

/// Eigendecomposition `A = U · diag(λ) · Uᵀ` of a real symmetric matrix.
///
/// Eigenvalues come out in descending order. Each eigenvector is signed so
/// that its first clearly nonzero component is positive, which makes the
/// output reproducible.
pub fn eigendecompose(a: &DMatrix<f64>) -> Result<SpectralSummary> {
    check_symmetric(a)?;
    let sym = (a + a.transpose()) * 0.5;
    let n = sym.nrows();
    let (values, vectors) = jacobi(sym)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));

    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).into_owned();
        if let Some(&lead) = col.iter().find(|x| x.abs() > 1e-12) {
            if lead < 0.0 {
                col.neg_mut();
            }
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(SpectralSummary { eigenvalues, eigenvectors })
}

/// Outcome of a PSD test.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub summary: SpectralSummary,
}

/// `A` is PSD when `λ_min ≥ −tol · max(1, |λ_max|)`.
pub fn is_psd(a: &DMatrix<f64>, tol: f64) -> Result<PsdCheck> {
    let summary = eigendecompose(a)?;
    let is_psd = summary.min_eigenvalue() >= summary.negativity_threshold(tol);
    Ok(PsdCheck { is_psd, summary })
}

/// Closed Geršgorin interval of one row of a real symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GershgorinDisc {
    /// 0-based row.
    pub row: usize,
    pub center: f64,
    pub radius: f64,
}

impl GershgorinDisc {
    pub fn lower(&self) -> f64 {
        self.center - self.radius
    }

    pub fn upper(&self) -> f64 {
        self.center + self.radius
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower() - slack && x <= self.upper() + slack
    }
}

pub fn gershgorin_discs(a: &DMatrix<f64>) -> Vec<GershgorinDisc> {
    (0..a.nrows())
        .map(|i| GershgorinDisc {
            row: i,
            center: a[(i, i)],
            radius: (0..a.ncols()).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum(),
        })
        .collect()
}

/// Disc reaching furthest into the negative half-line.
pub fn worst_disc(discs: &[GershgorinDisc]) -> Option<GershgorinDisc> {
    discs.iter().copied().min_by(|a, b| a.lower().total_cmp(&b.lower()))
}

/// Factorization `A = E · Eᵀ` with `E = U · diag(λ)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFactorization {
    pub factor: DMatrix<f64>,
    /// Eigenvalues before clamping, descending.
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
}

impl PsdFactorization {
    /// The factor restricted to its leading `rank` columns.
    pub fn truncated(&self) -> DMatrix<f64> {
        self.factor.columns(0, self.rank).into_owned()
    }
}

/// Square-root factor of a PSD matrix.
///
/// Eigenvalues inside `[−tol · max(1, |λ_max|), 0)` are clamped to zero.
/// Anything more negative is reported as [`Error::NotPsd`] together with
/// the Geršgorin discs that cross into negative values.
pub fn psd_factorize(a: &DMatrix<f64>, tol: f64) -> Result<PsdFactorization> {
    let check = is_psd(a, tol)?;
    if !check.is_psd {
        let offending = gershgorin_discs(a).into_iter().filter(|d| d.lower() < 0.0).collect();
        return Err(Error::NotPsd {
            min_eigenvalue: check.summary.min_eigenvalue(),
            offending_discs: offending,
        });
    }
    let summary = check.summary;
    let rank = summary.numerical_rank(tol);
    let mut factor = summary.eigenvectors.clone();
    for (j, &l) in summary.eigenvalues.iter().enumerate() {
        let scale = l.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(scale);
    }
    Ok(PsdFactorization { factor, eigenvalues: summary.eigenvalues, rank })
}

pub fn psd_sqrt_factor(a: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    psd_factorize(a, tol).map(|f| f.factor)
}
