//! Numerical toolkit for step-function graphons: cut norm and cut metric,
//! Bernoulli relative-entropy rate functionals, block approximants,
//! inhomogeneous Erdos-Renyi sampling, and a constrained variational solver
//! for the rate function of the largest eigenvalue.
//!
//! Everything operates on uniform-grid step functions, where the continuum
//! definitions become exact finite sums. All operations are pure functions
//! of their inputs; randomized routines (sampling, heuristic restarts,
//! solver initializations) are deterministic per seed via counter-based
//! stream splitting.

pub mod cutnorm;
pub mod eigen;
pub mod error;
pub mod families;
pub mod graphon;
pub mod io;
pub mod permsearch;
pub mod rate;
pub mod sampler;
pub mod solver;
pub mod spectral;
mod sum;

pub use cutnorm::{
    cut_distance, cut_metric_estimate, cut_norm_exact, cut_norm_heuristic, CutNormResult,
    CUT_EXACT_MAX_RESOLUTION, CUT_HEURISTIC_DEFAULT_RESTARTS,
};
pub use eigen::{
    block_approximation_errors, optimal_perturbation, scaling_constants, second_order_cost,
    ScalingConstants,
};
pub use error::{GraphonLdpError, Result};
pub use families::{constant, rank_one, ReferenceSpec};
pub use graphon::{
    apply_permutation, common_refinement, empirical_graphon, level_approximant, Field, Graph,
    Graphon, GridPermutation,
};
pub use io::{read_graph, read_graphon, write_graph, write_graphon};
pub use permsearch::{PermSearchOptions, PERM_EXHAUSTIVE_MAX_RESOLUTION};
pub use rate::{
    bernoulli_relative_entropy, log_likelihood_budget, log_likelihood_ratio,
    reference_check, relabeled_entropy_rate, relative_entropy_rate, uniform_rate_bound,
    RateResult, ReferenceCheck,
};
pub use sampler::{lambda_over_n, run_ensemble, sample, EnsembleStats, SampleSpec, LAMBDA_TOL};
pub use solver::{
    norm_gradient_upper, rate_gradient_upper, scaling_experiment, solve_eigenvalue_rate,
    upper_pairs, ScalingReport, SolverOptions, SolverResult, TraceRow, SOLVER_ACCEPT_RESIDUAL,
    SOLVER_CLAMP,
};
pub use spectral::{operator_norm, KernelNorm, OPERATOR_NORM_TOL};
