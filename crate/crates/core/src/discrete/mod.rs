//! Discrete-time model: recursion, generating functions, roots, seasonal relation, DP oracle.

pub mod dp;
pub mod pgf;
pub mod recursion;
pub mod roots;
pub mod seasonal;
pub mod series;
pub mod sweep;

pub use dp::{dp_finite_horizon, dp_survival_block, DpTrajectory};
pub use pgf::{pgf_solution, survival_pgf_coefficients, PgfSolution};
pub use recursion::{alpha_coefficients, survival_recursion};
pub use roots::{find_unit_disk_roots, solve_numerator, RootSet};
pub use seasonal::{
    default_probe_points, initial_block, m_vector, period_weights, relation_residuals, seasonal_pgf_verify,
    seasonal_recurrence_step, seasonal_survival, weak_to_strict, BlockSource, InitialBlock, PgfCheck,
};
pub use series::{poly_mul, series_divide};
pub use sweep::{epsilon_sweep_discrete, epsilon_sweep_seasonal, DiscreteSweep, DiscreteSweepRow};
