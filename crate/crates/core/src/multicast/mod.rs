//! Max-min fair multi-group multicast beamforming.
//!
//! The SINR of every user is a ratio of quadratic forms in the stacked
//! beamformer, so the fairness problem becomes `max_w min_k wᴴA_k w / wᴴB_k w`
//! over the unit sphere. It is split into a `t` block (solved exactly) and a
//! `w` block (a minimum-eigenvector step on a quadratic majorizer).

mod instance;
mod metrics;
mod solver;
mod subproblem;

pub use instance::{MulticastInstance, MulticastInstanceFile};
pub use metrics::{kkt_residual, min_rate, ratio_gradients};
pub use solver::{
    bsum_inner_step, constraint_h, default_config, initial_iterate, penalty_gradient, solve, solve_with_observer,
    MulticastIterate, MulticastProblem, MulticastResult, MulticastSolution, T_BLOCK, W_BLOCK,
};
pub use subproblem::{build_surrogate, root_forms, solve_t_subproblem, vartheta, Surrogate, DEGENERATE_NORM};
