//! Coordinates from the certified joint cosine-law matrix, and their
//! verification against the target proximities.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::constants::EmbeddingConstants;
use crate::cosine_law::build_cosine_law;
use crate::error::Result;
use crate::indexing::{AugmentedIndexing, Role};
use crate::pipeline::{build_h_tilde, BaseCosineContext};
use crate::spectral::psd_factorize;

/// Largest relative distance error an embedding may show and still pass.
pub const VERIFY_REL_TOLERANCE: f64 = 1e-6;

/// Embedded points of `V^z`.
///
/// Rows follow the caller's labeling: `z, x1..xM, o, y1..yN`, whichever
/// set the construction used internally as its Euclidean set.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub labels: Vec<Role>,
    pub coords: DMatrix<f64>,
    /// `h̃^ε`, the proximities the coordinates must reproduce.
    pub target: DMatrix<f64>,
    /// Joint cosine-law matrix in the same row order; `coords · coordsᵀ`
    /// reconstructs it.
    pub cosine_law: DMatrix<f64>,
    pub constants: EmbeddingConstants,
    /// Spectrum of the joint cosine-law matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Number of eigenvalues above the PSD tolerance.
    pub rank: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
}

impl Embedding {
    pub fn epsilon(&self) -> f64 {
        self.constants.epsilon
    }

    pub fn row_of(&self, role: Role) -> Option<usize> {
        self.labels.iter().position(|&r| r == role)
    }
}

/// For each row of the caller frame, the internal `V^z` index it comes
/// from.
pub fn caller_order(ctx: &BaseCosineContext) -> (Vec<Role>, Vec<usize>) {
    let idx = &ctx.indexing;
    let sel = &ctx.selection;
    let (m, n) = if sel.swapped() { (idx.n(), idx.m()) } else { (idx.m(), idx.n()) };
    let caller = AugmentedIndexing::new(m, n, idx.include_origin());
    let mut perm = vec![0; idx.q()];
    for q in 0..idx.q() {
        let role = sel.original_role(idx.role_of(q));
        perm[caller.v_index(role).expect("caller layout covers every role")] = q;
    }
    (caller.roles(), perm)
}

fn permute(a: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    let k = perm.len();
    DMatrix::from_fn(k, k, |i, j| a[(perm[i], perm[j])])
}

/// `h̃^ε` in the caller's row order.
pub fn joint_target(ctx: &BaseCosineContext, constants: &EmbeddingConstants) -> (Vec<Role>, DMatrix<f64>) {
    let h = build_h_tilde(ctx, constants.epsilon, constants.c1, constants.c2);
    let (labels, perm) = caller_order(ctx);
    (labels, permute(&h, &perm))
}

/// Embeds `V^z` for the given constants.
///
/// With `truncate_rank` only the leading `rank` coordinate columns are
/// kept; otherwise the full `Q`-dimensional frame is returned.
pub fn embed_joint(
    ctx: &BaseCosineContext,
    constants: &EmbeddingConstants,
    tol: f64,
    truncate_rank: bool,
) -> Result<Embedding> {
    let h = build_h_tilde(ctx, constants.epsilon, constants.c1, constants.c2);
    let cosine = build_cosine_law(&h, 0)?.into_entries();
    let fact = psd_factorize(&cosine, tol)?;
    let internal = if truncate_rank { fact.truncated() } else { fact.factor.clone() };

    let (labels, perm) = caller_order(ctx);
    let coords = DMatrix::from_fn(perm.len(), internal.ncols(), |i, j| internal[(perm[i], j)]);
    let target = permute(&h, &perm);
    let report = verify_distances(&labels, &coords, &target);

    Ok(Embedding {
        labels,
        coords,
        target,
        cosine_law: permute(&cosine, &perm),
        constants: *constants,
        eigenvalues: fact.eigenvalues,
        rank: fact.rank,
        max_abs_error: report.max_abs_error,
        max_rel_error: report.max_rel_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Block {
    #[serde(rename = "X-X")]
    XX,
    #[serde(rename = "Y-Y")]
    YY,
    #[serde(rename = "X-Y")]
    XY,
    #[serde(rename = "origin")]
    Origin,
    #[serde(rename = "z")]
    Z,
}

impl Block {
    pub fn of(a: Role, b: Role) -> Block {
        match (a, b) {
            (Role::Z, _) | (_, Role::Z) => Block::Z,
            (Role::Origin, _) | (_, Role::Origin) => Block::Origin,
            (Role::X(_), Role::X(_)) => Block::XX,
            (Role::Y(_), Role::Y(_)) => Block::YY,
            _ => Block::XY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockResidual {
    pub block: Block,
    pub pairs: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
}

/// Pair whose distance deviates most from its target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstPair {
    pub a: String,
    pub b: String,
    pub distance: f64,
    pub target: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub pairs_checked: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub worst_pair: Option<WorstPair>,
    pub blocks: Vec<BlockResidual>,
    /// Within-set pairs whose embedded distance exceeds that of a pair
    /// with a strictly larger target (beyond the verification tolerance).
    pub rank_violations_x: usize,
    pub rank_violations_y: usize,
}

pub fn verify_embedding(emb: &Embedding) -> VerificationReport {
    verify_distances(&emb.labels, &emb.coords, &emb.target)
}

/// Compares all pairwise row distances of `coords` with `target`.
///
/// Target entries that are NaN mark pairs that are not checked.
pub fn verify_distances(labels: &[Role], coords: &DMatrix<f64>, target: &DMatrix<f64>) -> VerificationReport {
    let k = labels.len();
    assert_eq!(coords.nrows(), k);
    assert_eq!(target.shape(), (k, k));

    let mut blocks: Vec<BlockResidual> = Vec::new();
    let mut worst: Option<WorstPair> = None;
    let (mut max_abs, mut max_rel, mut checked) = (0.0f64, 0.0f64, 0usize);
    let mut within_x = Vec::new();
    let mut within_y = Vec::new();

    for a in 0..k {
        for b in a + 1..k {
            let t = target[(a, b)];
            if t.is_nan() {
                continue;
            }
            let d = (coords.row(a) - coords.row(b)).norm();
            let abs = (d - t).abs();
            let rel = if t > 0.0 { abs / t } else { abs };
            checked += 1;
            max_abs = max_abs.max(abs);
            if worst.as_ref().is_none_or(|w| rel > w.rel_error) {
                worst = Some(WorstPair {
                    a: labels[a].to_string(),
                    b: labels[b].to_string(),
                    distance: d,
                    target: t,
                    rel_error: rel,
                });
            }
            max_rel = max_rel.max(rel);

            let block = Block::of(labels[a], labels[b]);
            match blocks.iter_mut().find(|r| r.block == block) {
                Some(r) => {
                    r.pairs += 1;
                    r.max_abs_error = r.max_abs_error.max(abs);
                    r.max_rel_error = r.max_rel_error.max(rel);
                }
                None => {
                    blocks.push(BlockResidual { block, pairs: 1, max_abs_error: abs, max_rel_error: rel })
                }
            }
            match block {
                Block::XX => within_x.push((t, d)),
                Block::YY => within_y.push((t, d)),
                _ => {}
            }
        }
    }
    blocks.sort_by_key(|r| r.block);

    VerificationReport {
        passed: max_rel <= VERIFY_REL_TOLERANCE,
        pairs_checked: checked,
        max_abs_error: max_abs,
        max_rel_error: max_rel,
        worst_pair: worst,
        blocks,
        rank_violations_x: rank_violations(within_x),
        rank_violations_y: rank_violations(within_y),
    }
}

/// Counts pairs whose embedded distance exceeds, beyond tolerance, the
/// embedded distance of some pair with a strictly larger target.
fn rank_violations(mut pairs: Vec<(f64, f64)>) -> usize {
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut violations = 0;
    let mut max_below = f64::NEG_INFINITY;
    let mut i = 0;
    while i < pairs.len() {
        let t = pairs[i].0;
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == t {
            j += 1;
        }
        for &(t, d) in &pairs[i..j] {
            if max_below > d + VERIFY_REL_TOLERANCE * t {
                violations += 1;
            }
        }
        for &(_, d) in &pairs[i..j] {
            max_below = max_below.max(d);
        }
        i = j;
    }
    violations
}
