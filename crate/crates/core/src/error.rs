use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("integration step too coarse: {quantity} = {value:.4e} exceeds {limit}")]
    StepTooCoarse {
        quantity: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("post-selection is orthogonal to the pre-selected state (|overlap| = {overlap:.3e})")]
    OrthogonalPostSelection { overlap: f64 },

    #[error("likelihood normalization degenerated; record is inconsistent with the prior")]
    DegenerateLikelihood,

    #[error("record and cavity trajectory disagree: {0}")]
    GridMismatch(String),

    #[error("post-selection weight vanished (total weight {total_weight:.3e})")]
    EmptyPostSelection { total_weight: f64 },

    #[error("readout phases do not determine both weak-value components (det = {det:.3e})")]
    SingularPhaseSet { det: f64 },

    #[error("weak-value iteration did not converge after {iterations} iterations (last = {re:.6} + {im:.6}i, residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        re: f64,
        im: f64,
        residual: f64,
    },

    #[error("state reconstruction is singular: {0}")]
    SingularReconstruction(&'static str),

    #[error("record dump: {0}")]
    RecordFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
