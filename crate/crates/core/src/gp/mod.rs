//! Per-node Gaussian-process models.

mod info;
mod kernel;
mod posterior;

pub use info::{info_gain, info_gain_curve, info_increment};
pub use kernel::{kernel_eval, Kernel};
pub use posterior::{
    fit, negative_variance_events, GpDataset, GpPosterior, InputJacobians, Prediction,
    MAX_JITTER, MIN_JITTER, STD_GRAD_FLOOR,
};
