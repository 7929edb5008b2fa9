//! Robust (maximin) treatment allocation for binary-action network games
//! with strategic complementarities.
//!
//! The crate computes the least and greatest Bayesian Nash equilibria of a
//! supermodular network game by monotone iteration, bounds counterfactual
//! welfare over every equilibrium selection mechanism, estimates the utility
//! parameters from one observed network by two-step quasi-maximum likelihood,
//! and allocates a capacity-constrained treatment greedily against the
//! worst-case (least) equilibrium.

pub mod allocation;
pub mod complete_info;
pub mod equilibrium;
pub mod error;
pub mod estimation;
pub mod game;
pub mod io;
pub mod network;
pub mod rng;
pub mod shock;
pub mod sim;
pub mod welfare;

pub use allocation::{
    exhaustive_allocate, greedy_allocate, marginal_gain, random_allocate, AllocConfig,
    AllocationResult, Method, SetFunction, WorstCaseWelfare,
};
pub use equilibrium::{
    ccp_map, residual, solve_from, solve_greatest, solve_least, CcpProfile, FixedPointReport,
    SolverConfig, StartPoint,
};
pub use error::{Error, Result};
pub use estimation::{fit_mle, gof_chisq, FirstStageMethod, FitReport, GofTable, ObservedPanel};
pub use game::{similarity, Allocation, Covariates, Game, Payoffs, Theta};
pub use network::Network;
pub use shock::ShockDistribution;
pub use sim::{
    estimate_submodularity_curvature, evaluate_regret, generate_game, simulate_play, DgpSpec,
    DiagnosticReport, RegretSummary, Selection,
};
pub use welfare::{
    engagement_bounds, engagement_welfare, utilitarian_bounds, utilitarian_welfare, Objective,
    WelfareBounds,
};
