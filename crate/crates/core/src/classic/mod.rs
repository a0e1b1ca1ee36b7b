//! Background relevance-feedback schemes: Rocchio query rewriting, MARS
//! variance weighting, the MindReader optimal affine metric and the
//! two-level Rui & Huang scheme. Also the shared ranking routine.

mod mars;
mod mindreader;
mod rank;
mod rocchio;
mod rui_huang;

pub use mars::{mars_fit, mars_fit_rows, mars_score, MarsModel};
pub use mindreader::{
    fit_affine_metric, mindreader_fit, mindreader_score, pseudo_inverse, quadratic_form,
    MindReaderModel,
};
pub use rank::{rank, rank_subset, RankedItem, Scorer};
pub use rocchio::{rocchio_update, RocchioCoefficients};
pub use rui_huang::{
    rui_huang_components, rui_huang_fit, rui_huang_score, rui_huang_weights, RuiHuangModel,
};

/// Relative floor applied wherever a variance or eigenvalue is inverted.
pub const VARIANCE_FLOOR_REL: f64 = 1e-9;

/// Singular values below `RANK_TOL * σ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Floor for a variance-like quantity, relative to the total `trace`.
/// Falls back to the bare relative constant when the trace is zero.
pub fn variance_floor(trace: f64) -> f64 {
    if trace > 0.0 {
        VARIANCE_FLOOR_REL * trace
    } else {
        VARIANCE_FLOOR_REL
    }
}
