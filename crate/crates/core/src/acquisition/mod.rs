//! The optimistic acquisition: `eta` functions, rollouts through the
//! plausible model, exact gradients and constrained maximization.

mod eta;
mod model;
mod optimize;

pub use eta::{eta_eval, EtaNet, EtaParam, InputScaling};
pub use model::{
    acq_grad, acq_value, constant_etas, prior_posteriors, reparam_rollout, AcqGradient, CausalStructure,
    PlausibleModel,
};
pub use optimize::{
    enumerate_supports, multistart_ascent, optimize_acq, optimize_block, optimize_ucb, AcqConfig, AcqObjective,
    AcqResult, AscentConfig, Block, EtaKind, Objective, UcbObjective,
};
