//! Joint Euclidean embedding of two point sets known only through
//! proximities.
//!
//! One set `X` comes with within-set distances `dX`, another set `Y` with
//! `dY`, and the two are tied together by a cross proximity `F` (and
//! optionally by proximities `uX`, `uY` to an extra origin point `o`). At
//! least one of `dX`, `dY` must itself be Euclidean. The crate shifts the
//! proximities by a computed `ε`, adds an auxiliary point `z`, and returns
//! coordinates for `z, X, o, Y` whose pairwise distances equal the shifted
//! proximities.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use qembed::{embed_instance, ProblemInstance, SearchOptions};
//!
//! let dx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
//! let dy = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]);
//! let f = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 0.5]);
//! let u = DVector::from_vec(vec![1.0, 1.0]);
//! let inst = ProblemInstance::new(dx, dy, f, Some(u.clone()), Some(u), true)?;
//!
//! let run = embed_instance(&inst, None, &SearchOptions::default())?;
//! assert!(run.embedding.max_rel_error < 1e-6);
//! # Ok::<(), qembed::Error>(())
//! ```

pub mod constants;
pub mod cosine_law;
pub mod embed;
pub mod error;
pub mod indexing;
pub mod instance;
pub mod pipeline;
pub mod spectral;

pub use constants::EmbeddingConstants;
pub use cosine_law::{build_cosine_law, CosineLawMatrix};
pub use embed::{embed_joint, verify_distances, verify_embedding, Embedding, VerificationReport};
pub use error::{Error, Result};
pub use indexing::{AugmentedIndexing, Role};
pub use instance::{load_instance, InstancePaths, ProblemInstance, RunConfig};
pub use pipeline::{
    find_constants, select_embeddable_set, validate_constants, BaseCosineContext, ConstantSearch,
    SearchCriterion, SearchOptions, SetLabel,
};
pub use spectral::{
    eigendecompose, gershgorin_discs, is_psd, psd_factorize, GershgorinDisc, DEFAULT_PSD_TOLERANCE,
};

/// Everything one end-to-end run produces.
#[derive(Debug, Clone)]
pub struct Run {
    pub context: BaseCosineContext,
    pub search: ConstantSearch,
    pub embedding: Embedding,
}

/// Selects the Euclidean set, searches constants by doubling and embeds.
///
/// `reference` is a 0-based index into the embeddable set.
pub fn embed_instance(inst: &ProblemInstance, reference: Option<usize>, opts: &SearchOptions) -> Result<Run> {
    let context = BaseCosineContext::prepare(inst, reference, opts.tol)?;
    let search = find_constants(&context, opts)?;
    let embedding = embed_joint(&context, &search.constants, opts.tol, false)?;
    Ok(Run { context, search, embedding })
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/cosine-law.md")]
    mod cosine_law {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/joint.md")]
    mod joint {}
    #[doc = include_str!("../../../book/src/constants.md")]
    mod constants {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
