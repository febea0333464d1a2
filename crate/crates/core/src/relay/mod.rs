//! Sum-rate maximisation for a two-hop amplify-and-forward relay broadcast
//! channel, solved by PDD with WMMSE majorisation of the rate.

pub(crate) mod blocks;
mod instance;
mod solver;

pub use blocks::{
    al_gradient, constraint_h, mse, residuals, surrogate_value, update_bars, update_f, update_v, update_x,
    weighted_matrices, wmmse_weights, RelayDuals, RelayGradient, RelayIterate,
};
pub use instance::{RelayInstance, RelayInstanceFile};
pub use solver::{
    default_config, initial_iterate, solve, solve_with_observer, RelayProblem, RelayResult, RelaySolution, BAR_BLOCK,
    F_BLOCK, V_BLOCK, X_BLOCK,
};
