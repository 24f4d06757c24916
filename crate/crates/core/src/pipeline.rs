//! The joint embedding construction.
//!
//! Given two sets where at least one (relabeled to be `X`) is Euclidean,
//! the shifted proximity `f^α = √(raw² + α)` over `W = X ∪ {o} ∪ Y` is
//! extended by a connecting point `z` whose proximities `g̃` are tied to
//! the reference point `x1`. The cosine-law matrix of the augmented set
//! with reference `z` splits into four structured summands; the search
//! grows the constants `c1, c2, c3` until the shift `ε = c3 · ζ_f` makes
//! the augmented set embeddable.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::constants::EmbeddingConstants;
use crate::cosine_law::{build_cosine_law, CosineLawMatrix};
use crate::error::{Error, Result};
use crate::indexing::{AugmentedIndexing, Role};
use crate::instance::ProblemInstance;
use crate::spectral::{gershgorin_discs, is_psd, worst_disc, GershgorinDisc, DEFAULT_PSD_TOLERANCE};

/// `ζ_f` at or below this value is treated as zero.
pub const ZETA_FLOOR: f64 = 1e-12;

pub const DEFAULT_MAX_DOUBLINGS: usize = 64;

/// Deterministic starting point of the constant search.
pub const DEFAULT_SEED: (f64, f64, f64) = (1.0, 2.0, 5.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetLabel {
    X,
    Y,
}

impl fmt::Display for SetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetLabel::X => "X",
            SetLabel::Y => "Y",
        })
    }
}

/// Which input set plays the role of the Euclidean set `X`, and how the
/// instance was relabeled to put its reference point first.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub embeddable: SetLabel,
    /// 0-based index of the reference point within the embeddable set, in
    /// the caller's numbering.
    pub reference: usize,
    /// Internal `X` position `i` holds caller point `order[i]` of the
    /// embeddable set.
    pub order: Vec<usize>,
    /// The relabeled instance: embeddable set first, reference point first.
    pub instance: ProblemInstance,
    pub x_psd: bool,
    pub x_min_eigenvalue: f64,
    pub y_psd: bool,
    pub y_min_eigenvalue: f64,
}

impl Selection {
    pub fn swapped(&self) -> bool {
        self.embeddable == SetLabel::Y
    }

    /// Maps a role of the relabeled instance back to the caller's labels.
    pub fn original_role(&self, internal: Role) -> Role {
        match internal {
            Role::X(i) if self.swapped() => Role::Y(self.order[i]),
            Role::X(i) => Role::X(self.order[i]),
            Role::Y(j) if self.swapped() => Role::X(j),
            other => other,
        }
    }
}

/// Picks the set whose cosine-law matrix (reference: its first point) is
/// PSD, preferring `X`. The chosen set becomes the internal `X`, reordered
/// so that `reference` (0-based, default 0) comes first.
pub fn select_embeddable_set(
    inst: &ProblemInstance,
    reference: Option<usize>,
    tol: f64,
) -> Result<Selection> {
    let x_check = is_psd(build_cosine_law(inst.dx(), 0)?.entries(), tol)?;
    let y_check = is_psd(build_cosine_law(inst.dy(), 0)?.entries(), tol)?;

    let (embeddable, relabeled) = if x_check.is_psd {
        (SetLabel::X, inst.clone())
    } else if y_check.is_psd {
        (SetLabel::Y, inst.swapped())
    } else {
        return Err(Error::NeitherSetEuclidean {
            x_min: x_check.summary.min_eigenvalue(),
            y_min: y_check.summary.min_eigenvalue(),
        });
    };

    let len = relabeled.m();
    let reference = reference.unwrap_or(0);
    if reference >= len {
        return Err(Error::InvalidReference { index: reference, len });
    }
    let order: Vec<usize> = std::iter::once(reference).chain((0..len).filter(|&i| i != reference)).collect();
    let instance = if reference == 0 { relabeled } else { relabeled.with_x_order(&order) };

    Ok(Selection {
        embeddable,
        reference,
        order,
        instance,
        x_psd: x_check.is_psd,
        x_min_eigenvalue: x_check.summary.min_eigenvalue(),
        y_psd: y_check.is_psd,
        y_min_eigenvalue: y_check.summary.min_eigenvalue(),
    })
}

/// The shifted proximity `f^α` over `W`.
///
/// Off-diagonal entries are `√(raw² + α)` where `raw` is the intra-set
/// distance, the origin proximity or the cross proximity, depending on the
/// pair. The diagonal is zero.
pub fn build_f_alpha(inst: &ProblemInstance, idx: &AugmentedIndexing, alpha: f64) -> DMatrix<f64> {
    assert!(alpha >= 0.0, "alpha must be nonnegative");
    let s = idx.s();
    let raw = |a: Role, b: Role| -> f64 {
        match (a, b) {
            (Role::X(i), Role::X(j)) => inst.dx()[(i, j)],
            (Role::Y(i), Role::Y(j)) => inst.dy()[(i, j)],
            (Role::X(i), Role::Y(j)) | (Role::Y(j), Role::X(i)) => inst.f()[(i, j)],
            (Role::X(i), Role::Origin) | (Role::Origin, Role::X(i)) => {
                inst.ux().expect("origin requires uX")[i]
            }
            (Role::Y(j), Role::Origin) | (Role::Origin, Role::Y(j)) => {
                inst.uy().expect("origin requires uY")[j]
            }
            _ => unreachable!("z is not part of W"),
        }
    };
    let mut out = DMatrix::zeros(s, s);
    for a in 0..s {
        for b in a + 1..s {
            let r = raw(idx.role_of_w(a), idx.role_of_w(b));
            let v = (r * r + alpha).sqrt();
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    out
}

/// Everything the construction needs that does not depend on the
/// constants.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseCosineContext {
    pub selection: Selection,
    pub indexing: AugmentedIndexing,
    /// Cosine-law matrix of the unshifted proximity `f^0` over `W`, with
    /// reference `x1`.
    pub base: CosineLawMatrix,
    pub zeta_f: f64,
}

impl BaseCosineContext {
    /// Relabeled instance.
    pub fn instance(&self) -> &ProblemInstance {
        &self.selection.instance
    }

    /// Selection followed by [`compute_zeta_f`].
    pub fn prepare(inst: &ProblemInstance, reference: Option<usize>, tol: f64) -> Result<Self> {
        compute_zeta_f(select_embeddable_set(inst, reference, tol)?)
    }
}

/// Maximum over rows of `W` of the absolute row sum restricted to the
/// cross (`X × Y` and `Y × X`) blocks of the base cosine-law matrix.
pub fn zeta_from_base(base: &DMatrix<f64>, idx: &AugmentedIndexing) -> f64 {
    let xs = idx.x_range_w();
    let ys = idx.y_range_w();
    let row_sum = |l: usize, cols: std::ops::Range<usize>| -> f64 { cols.map(|s| base[(l, s)].abs()).sum() };
    let from_x = xs.clone().map(|l| row_sum(l, ys.clone()));
    let from_y = ys.clone().map(|l| row_sum(l, xs.clone()));
    from_x.chain(from_y).fold(0.0, f64::max)
}

pub fn compute_zeta_f(selection: Selection) -> Result<BaseCosineContext> {
    let idx = selection.instance.indexing();
    let f0 = build_f_alpha(&selection.instance, &idx, 0.0);
    let base = build_cosine_law(&f0, 0)?;
    let zeta_f = zeta_from_base(base.entries(), &idx);
    if zeta_f.is_nan() || zeta_f <= ZETA_FLOOR {
        return Err(Error::ZetaNonpositive(zeta_f));
    }
    Ok(BaseCosineContext { selection, indexing: idx, base, zeta_f })
}

/// Proximities `g̃(w, z)` of every point of `W` to the connecting point.
pub fn build_g_tilde(ctx: &BaseCosineContext, c1: f64, c2: f64) -> DVector<f64> {
    let inst = ctx.instance();
    let idx = &ctx.indexing;
    let (psi, phi) = (c1 * ctx.zeta_f, c2 * ctx.zeta_f);
    DVector::from_fn(idx.s(), |s, _| match idx.role_of_w(s) {
        Role::X(0) => psi.sqrt(),
        Role::Origin => phi.sqrt(),
        Role::X(i) => {
            let d = inst.dx()[(i, 0)];
            (d * d + phi).sqrt()
        }
        Role::Y(j) => {
            let f = inst.f()[(0, j)];
            (f * f + phi).sqrt()
        }
        Role::Z => unreachable!(),
    })
}

/// Proximity `h̃^α` over `V^z`: `g̃` on the `z` row and column, `f^α`
/// elsewhere.
pub fn build_h_tilde(ctx: &BaseCosineContext, alpha: f64, c1: f64, c2: f64) -> DMatrix<f64> {
    let f_alpha = build_f_alpha(ctx.instance(), &ctx.indexing, alpha);
    let g = build_g_tilde(ctx, c1, c2);
    let q = ctx.indexing.q();
    let mut h = DMatrix::zeros(q, q);
    h.view_mut((1, 1), (q - 1, q - 1)).copy_from(&f_alpha);
    for s in 0..q - 1 {
        h[(0, s + 1)] = g[s];
        h[(s + 1, 0)] = g[s];
    }
    h
}

/// Cosine-law matrix of `h̃^α` with reference `z`.
pub fn joint_cosine_law(ctx: &BaseCosineContext, alpha: f64, c1: f64, c2: f64) -> Result<CosineLawMatrix> {
    build_cosine_law(&build_h_tilde(ctx, alpha, c1, c2), 0)
}

/// The four summands of the joint cosine-law matrix, each `Q × Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDecomposition {
    /// Cosine-law matrix of `(X, d_X)` placed on the `X` block.
    pub mx: DMatrix<f64>,
    /// `c2 ζ_f / 2` on the `X` and `Y` diagonals, the coupling block `B`
    /// between them.
    pub g: DMatrix<f64>,
    /// `A_X − c2 ζ_f / 2 · I` plus the origin row tied to `X`.
    pub cx: DMatrix<f64>,
    /// `A_Y − c2 ζ_f / 2 · I` plus the origin row tied to `Y`.
    pub cy: DMatrix<f64>,
}

impl SplitDecomposition {
    pub fn sum(&self) -> DMatrix<f64> {
        &self.mx + &self.g + &self.cx + &self.cy
    }

    pub fn summands(&self) -> [(&'static str, &DMatrix<f64>); 4] {
        [("M_X", &self.mx), ("G_XY", &self.g), ("C_X", &self.cx), ("C_Y", &self.cy)]
    }
}

pub fn build_split(ctx: &BaseCosineContext, alpha: f64, c1: f64, c2: f64) -> Result<SplitDecomposition> {
    let inst = ctx.instance();
    let idx = &ctx.indexing;
    let (m, n, q) = (idx.m(), idx.n(), idx.q());
    let (psi, phi) = (c1 * ctx.zeta_f, c2 * ctx.zeta_f);
    let vx = |i: usize| 1 + i;
    let vy = |j: usize| idx.v_index(Role::Y(j)).unwrap();
    let base = ctx.base.entries();
    let wx = |i: usize| i;
    let wy = |j: usize| idx.w_index(Role::Y(j)).unwrap();
    let dx1 = |i: usize| inst.dx()[(i, 0)];
    let f1 = |j: usize| inst.f()[(0, j)];

    let mut mx = DMatrix::zeros(q, q);
    let cos_x = build_cosine_law(inst.dx(), 0)?;
    mx.view_mut((1, 1), (m, m)).copy_from(cos_x.entries());

    let mut g = DMatrix::zeros(q, q);
    for i in 0..m {
        g[(vx(i), vx(i))] = phi / 2.0;
    }
    for j in 0..n {
        g[(vy(j), vy(j))] = phi / 2.0;
    }
    for i in 0..m {
        for j in 0..n {
            let b = if i == 0 {
                (psi + phi - alpha) / 2.0
            } else {
                (2.0 * phi - alpha) / 2.0 + base[(wx(i), wy(j))]
            };
            g[(vx(i), vy(j))] = b;
            g[(vy(j), vx(i))] = b;
        }
    }

    let mut cx = DMatrix::zeros(q, q);
    for i in 0..m {
        for k in 0..m {
            let a = match (i, k) {
                (0, 0) => psi,
                (0, _) | (_, 0) => (psi + phi - alpha) / 2.0,
                _ if i == k => phi,
                _ => (2.0 * phi - alpha) / 2.0,
            };
            cx[(vx(i), vx(k))] = if i == k { a - phi / 2.0 } else { a };
        }
    }

    let mut cy = DMatrix::zeros(q, q);
    for j in 0..n {
        cy[(vy(j), vy(j))] = phi / 2.0 + f1(j) * f1(j);
        for l in j + 1..n {
            let d = inst.dy()[(j, l)];
            let c = (2.0 * phi - alpha + f1(j) * f1(j) + f1(l) * f1(l) - d * d) / 2.0;
            cy[(vy(j), vy(l))] = c;
            cy[(vy(l), vy(j))] = c;
        }
    }

    if let Some(vo) = idx.v_index(Role::Origin) {
        let ux = inst.ux().expect("origin requires uX");
        let uy = inst.uy().expect("origin requires uY");
        cx[(vo, vo)] = phi / 2.0;
        for i in 0..m {
            let c = if i == 0 {
                (psi + phi - alpha - ux[0] * ux[0]) / 2.0
            } else {
                (2.0 * phi - alpha + dx1(i) * dx1(i) - ux[i] * ux[i]) / 2.0
            };
            cx[(vo, vx(i))] = c;
            cx[(vx(i), vo)] = c;
        }
        cy[(vo, vo)] = phi / 2.0;
        for j in 0..n {
            let c = (2.0 * phi - alpha + f1(j) * f1(j) - uy[j] * uy[j]) / 2.0;
            cy[(vo, vy(j))] = c;
            cy[(vy(j), vo)] = c;
        }
    }

    Ok(SplitDecomposition { mx, g, cx, cy })
}

/// PSD diagnostics for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixDiagnostics {
    pub name: &'static str,
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub worst_disc: Option<GershgorinDisc>,
}

fn diagnose(name: &'static str, a: &DMatrix<f64>, tol: f64) -> Result<MatrixDiagnostics> {
    let check = is_psd(a, tol)?;
    Ok(MatrixDiagnostics {
        name,
        is_psd: check.is_psd,
        min_eigenvalue: check.summary.min_eigenvalue(),
        worst_disc: worst_disc(&gershgorin_discs(a)),
    })
}

/// Verdict on the four summands. All four PSD is sufficient for the joint
/// matrix to be PSD, since a sum of PSD matrices is PSD.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitCheck {
    pub verdict: bool,
    pub summands: Vec<MatrixDiagnostics>,
}

pub fn check_sufficient_condition(split: &SplitDecomposition, tol: f64) -> Result<SplitCheck> {
    let summands =
        split.summands().into_iter().map(|(name, a)| diagnose(name, a, tol)).collect::<Result<Vec<_>>>()?;
    Ok(SplitCheck { verdict: summands.iter().all(|d| d.is_psd), summands })
}

/// What the constant search has to certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum SearchCriterion {
    /// The joint cosine-law matrix itself is PSD.
    #[default]
    JointCosineLaw,
    /// Each of the four split summands is PSD.
    SplitSummands,
}

/// Everything known about one candidate triple of constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsAssessment {
    pub constants: EmbeddingConstants,
    pub joint: MatrixDiagnostics,
    pub split: SplitCheck,
    pub accepted: bool,
}

pub fn assess_constants(
    ctx: &BaseCosineContext,
    c1: f64,
    c2: f64,
    c3: f64,
    tol: f64,
    criterion: SearchCriterion,
) -> Result<ConstantsAssessment> {
    let constants = EmbeddingConstants::new(c1, c2, c3, ctx.zeta_f)?;
    let alpha = constants.epsilon;
    let joint = diagnose("M_z", joint_cosine_law(ctx, alpha, c1, c2)?.entries(), tol)?;
    let split = check_sufficient_condition(&build_split(ctx, alpha, c1, c2)?, tol)?;
    let accepted = match criterion {
        SearchCriterion::JointCosineLaw => joint.is_psd,
        SearchCriterion::SplitSummands => split.verdict,
    };
    Ok(ConstantsAssessment { constants, joint, split, accepted })
}

/// One update of the doubling loop. The updates are sequential: the new
/// `c2` doubles the new `c1`, and `c3` uses both new values.
pub fn doubling_step(_c1: f64, c2: f64, _c3: f64) -> (f64, f64, f64) {
    let c1 = c2;
    let c2 = 2.0 * c1;
    let c3 = 2.0 + c1 + c2;
    (c1, c2, c3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub tol: f64,
    pub max_doublings: usize,
    pub seed: (f64, f64, f64),
    pub criterion: SearchCriterion,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_PSD_TOLERANCE,
            max_doublings: DEFAULT_MAX_DOUBLINGS,
            seed: DEFAULT_SEED,
            criterion: SearchCriterion::default(),
        }
    }
}

/// Result of [`find_constants`] or [`validate_constants`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSearch {
    pub constants: EmbeddingConstants,
    /// Number of doubling updates applied.
    pub iterations: usize,
    /// Every triple that was evaluated, in order.
    pub trace: Vec<(f64, f64, f64)>,
    pub last: ConstantsAssessment,
}

/// Doubling search for admissible constants.
///
/// Starts from `opts.seed` and applies [`doubling_step`] until the
/// criterion holds, at most `opts.max_doublings` times.
pub fn find_constants(ctx: &BaseCosineContext, opts: &SearchOptions) -> Result<ConstantSearch> {
    let (mut c1, mut c2, mut c3) = opts.seed;
    let mut trace = Vec::new();
    for iteration in 0..=opts.max_doublings {
        trace.push((c1, c2, c3));
        let last = assess_constants(ctx, c1, c2, c3, opts.tol, opts.criterion)?;
        if last.accepted {
            return Ok(ConstantSearch { constants: last.constants, iterations: iteration, trace, last });
        }
        if iteration == opts.max_doublings {
            let min_eigenvalue = match opts.criterion {
                SearchCriterion::JointCosineLaw => last.joint.min_eigenvalue,
                SearchCriterion::SplitSummands => {
                    last.split.summands.iter().map(|d| d.min_eigenvalue).fold(f64::INFINITY, f64::min)
                }
            };
            return Err(Error::SearchExhausted { iterations: iteration, c1, c2, c3, min_eigenvalue });
        }
        (c1, c2, c3) = doubling_step(c1, c2, c3);
    }
    unreachable!()
}

/// Checks a caller-supplied triple without searching.
pub fn validate_constants(
    ctx: &BaseCosineContext,
    (c1, c2, c3): (f64, f64, f64),
    tol: f64,
    criterion: SearchCriterion,
) -> Result<ConstantSearch> {
    let last = assess_constants(ctx, c1, c2, c3, tol, criterion)?;
    if !last.accepted {
        let reason = match criterion {
            SearchCriterion::JointCosineLaw => {
                format!("joint cosine law matrix has min eigenvalue {:e}", last.joint.min_eigenvalue)
            }
            SearchCriterion::SplitSummands => {
                let failing: Vec<String> = last
                    .split
                    .summands
                    .iter()
                    .filter(|d| !d.is_psd)
                    .map(|d| format!("{} (min eigenvalue {:e})", d.name, d.min_eigenvalue))
                    .collect();
                format!("summands not PSD: {}", failing.join(", "))
            }
        };
        return Err(Error::ConstantsRejected { c1, c2, c3, reason });
    }
    Ok(ConstantSearch { constants: last.constants, iterations: 0, trace: vec![(c1, c2, c3)], last })
}

/// The constants that were used with some success on small examples:
/// `c1 = 1`, `c2 = 1/2`, `c3 = (2 c1 + c2 − b) / a` with
/// `a = 1 − 1/(M+N)` and `b = 2 c2 / (M+N)`.
pub fn reference_triplet(m: usize, n: usize) -> (f64, f64, f64) {
    let total = (m + n) as f64;
    let (c1, c2) = (1.0, 0.5);
    let a = 1.0 - 1.0 / total;
    let b = 2.0 * c2 / total;
    (c1, c2, (2.0 * c1 + c2 - b) / a)
}
