//! Minimum-volume simplex fitting: find `K` vertices `X` and simplex
//! coefficients `S` with `A ≈ XS` while minimising the smoothed log-volume
//! `Σ log g_ε(σ_i(X)²)`.

mod instance;
mod metrics;
mod solver;
mod updates;

pub use instance::{decode_binary, encode_binary, gen_data, GroundTruth, VolMinInstance, DEFAULT_EPS};
pub use metrics::{mse_db, MSE_FLOOR_DB};
pub use solver::{
    default_config, initial_iterate, prescale_factor, restart_seed, solve, solve_with_observer, RestartSummary, VolMinProblem,
    VolMinResult, VolMinSolution, S_BLOCK, X_BLOCK, Y_BLOCK,
};
pub use updates::{
    default_beta, f_eps, f_eps_gradient, g_eps, g_eps_derivative, sigma_objective, solve_sigma, update_s, update_x,
    update_y, VolMinDuals, VolMinIterate,
};
