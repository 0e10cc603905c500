//! Error exponents and decision rules for distributed detection when the
//! hypotheses are only available through finite training sequences observed,
//! like the test samples, through fixed noisy channels.
//!
//! The crate is organized bottom-up:
//!
//! - [`prob`]: distributions, channels, divergences.
//! - [`empirical`]: sample-to-sensor assignment and per-group types.
//! - [`solver`]: the convex kernel every exponent reduces to, with plain and
//!   pinned-marginal variants.
//! - [`engine`]: binary and m-ary exponent computations.
//! - [`rules`]: the fusion-center tests driven by observed types.
//! - [`sim`]: Monte Carlo trials over the full pipeline, with an exact
//!   enumerator for small instances.
//! - [`sweep`]: grid search over the sensor proportions and training ratio,
//!   with the closed-form single-channel limits.
//! - [`oracle`]: independent brute-force evaluators used to validate the
//!   solver-based routes.

pub mod empirical;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod prob;
pub mod rules;
pub mod sim;
pub mod solver;
pub mod sweep;

pub use engine::binary::{
    alpha0, chernoff_star, f_alpha, f_alpha_vi, f_infinity, g_alpha, gutman_exponent, kappa, ld,
    min_ld, np_limit, Alpha0, ChernoffStar, KappaResult, LdContext, MinLdResult,
};
pub use engine::mary::{
    f_infinity_j, ld_j_m, rejection_exponent, tilde_ld_j, MaryTypes, TildeLd,
};
pub use engine::{BinaryInstance, DistributionTriple, ExponentResult, MaryInstance, Minimizers};
pub use error::{Error, Result};
pub use prob::{gjs, kl, pushforward, Channel, ChannelBank, Distribution, Proportions};
pub use rules::{
    binary_test, gjs_statistics, gutman_binary, gutman_mary, mary_statistics, threshold,
    unnikrishnan_test, vi_test, MaryStatistics, TestOutcome, ThresholdMode,
};
pub use sim::{
    empirical_exponent_curve, exact_outcome_probs, generate_dataset, run_trials, CurvePoint,
    EmpiricalRates, ExactRates, ExponentEstimate, OutcomeRate, SimInstance, TrialConfig,
    TruthSelector, TypeTest,
};
pub use solver::SolverConfig;
pub use sweep::{
    corner_report_mary, is_in_vi, np_bayes_report, sweep_ab, sweep_alpha, AlphaCurve, AlphaPoint,
    FixedPoint, NpBayesReport, SweepEntry, SweepGrid, SweepObjective, SweepResult,
};
