//! JSON run report.

use qembed::embed::VerificationReport;
use qembed::pipeline::{ConstantsAssessment, MatrixDiagnostics, SearchCriterion};
use qembed::{BaseCosineContext, ConstantSearch, Embedding};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub instance: InstanceSummary,
    pub selection: SelectionSummary,
    pub zeta_f: f64,
    pub constants: ConstantsSummary,
    pub search: SearchSummary,
    pub diagnostics: Diagnostics,
    pub embedding: EmbeddingSummary,
    pub verification: VerificationReport,
    /// Only filled in with `--timing`, so reports stay reproducible.
    pub wall_clock_seconds: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct InstanceSummary {
    pub m: usize,
    pub n: usize,
    pub include_origin: bool,
    pub points: usize,
}

#[derive(Debug, Serialize)]
pub struct SelectionSummary {
    pub embeddable: String,
    pub relabeled: bool,
    /// Caller label of the reference point, e.g. `x1`.
    pub reference: String,
    /// 1-based index of the reference point within the embeddable set.
    pub reference_index: usize,
    pub x_euclidean: bool,
    pub x_min_eigenvalue: f64,
    pub y_euclidean: bool,
    pub y_min_eigenvalue: f64,
}

#[derive(Debug, Serialize)]
pub struct ConstantsSummary {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub epsilon: f64,
}

#[derive(Debug, Serialize)]
pub struct SearchSummary {
    /// `doubling` or `validated` (all three constants supplied).
    pub mode: &'static str,
    pub criterion: &'static str,
    pub iterations: usize,
    pub trace: Vec<[f64; 3]>,
}

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub joint: MatrixReport,
    pub split_verdict: bool,
    pub summands: Vec<MatrixReport>,
}

#[derive(Debug, Serialize)]
pub struct MatrixReport {
    pub name: &'static str,
    pub psd: bool,
    pub min_eigenvalue: f64,
    pub worst_disc: Option<DiscReport>,
}

#[derive(Debug, Serialize)]
pub struct DiscReport {
    pub point: String,
    pub center: f64,
    pub radius: f64,
}

#[derive(Debug, Serialize)]
pub struct EmbeddingSummary {
    pub rank: usize,
    pub dimensions: usize,
    pub eigenvalues: Vec<f64>,
}

pub fn criterion_name(c: SearchCriterion) -> &'static str {
    match c {
        SearchCriterion::JointCosineLaw => "joint",
        SearchCriterion::SplitSummands => "split",
    }
}

fn matrix_report(ctx: &BaseCosineContext, d: &MatrixDiagnostics) -> MatrixReport {
    MatrixReport {
        name: d.name,
        psd: d.is_psd,
        min_eigenvalue: d.min_eigenvalue,
        worst_disc: d.worst_disc.map(|disc| DiscReport {
            point: ctx.selection.original_role(ctx.indexing.role_of(disc.row)).to_string(),
            center: disc.center,
            radius: disc.radius,
        }),
    }
}

pub fn diagnostics(ctx: &BaseCosineContext, last: &ConstantsAssessment) -> Diagnostics {
    Diagnostics {
        joint: matrix_report(ctx, &last.joint),
        split_verdict: last.split.verdict,
        summands: last.split.summands.iter().map(|d| matrix_report(ctx, d)).collect(),
    }
}

pub struct ReportInputs<'a> {
    pub ctx: &'a BaseCosineContext,
    pub search: &'a ConstantSearch,
    pub validated: bool,
    pub criterion: SearchCriterion,
    pub embedding: &'a Embedding,
    pub verification: VerificationReport,
    pub wall_clock_seconds: Option<f64>,
}

pub fn build(r: ReportInputs<'_>) -> RunReport {
    let ctx = r.ctx;
    let sel = &ctx.selection;
    let idx = &ctx.indexing;
    let (m, n) = if sel.swapped() { (idx.n(), idx.m()) } else { (idx.m(), idx.n()) };
    let c = &r.search.constants;
    RunReport {
        schema_version: SCHEMA_VERSION,
        instance: InstanceSummary { m, n, include_origin: idx.include_origin(), points: idx.q() },
        selection: SelectionSummary {
            embeddable: sel.embeddable.to_string(),
            relabeled: sel.swapped(),
            reference: sel.original_role(qembed::Role::X(0)).to_string(),
            reference_index: sel.reference + 1,
            x_euclidean: sel.x_psd,
            x_min_eigenvalue: sel.x_min_eigenvalue,
            y_euclidean: sel.y_psd,
            y_min_eigenvalue: sel.y_min_eigenvalue,
        },
        zeta_f: ctx.zeta_f,
        constants: ConstantsSummary { c1: c.c1, c2: c.c2, c3: c.c3, epsilon: c.epsilon },
        search: SearchSummary {
            mode: if r.validated { "validated" } else { "doubling" },
            criterion: criterion_name(r.criterion),
            iterations: r.search.iterations,
            trace: r.search.trace.iter().map(|&(a, b, c)| [a, b, c]).collect(),
        },
        diagnostics: diagnostics(ctx, &r.search.last),
        embedding: EmbeddingSummary {
            rank: r.embedding.rank,
            dimensions: r.embedding.coords.ncols(),
            eigenvalues: r.embedding.eigenvalues.clone(),
        },
        verification: r.verification,
        wall_clock_seconds: r.wall_clock_seconds,
    }
}
