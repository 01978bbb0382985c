//! Statistical admission tests for automatic passenger counting (APC) devices.
//!
//! A validation sample pairs manual and automatic boarding counts per stop-door
//! event. Its relative differences feed one of four criteria:
//!
//! - the plain t-test,
//! - the revised t-test, which adapts the significance level post hoc so the
//!   user risk stays at `β_t`,
//! - the equivalence test (two one-sided tests with a symmetric margin),
//! - the t-test-induced equivalence test, i.e. the equivalence test with
//!   `(α_e, β_e, Δ) = (β_t, α_t, d_r)`, which is algebraically the revised
//!   t-test but needs no varying quantile.
//!
//! [`power`] simulates pass probabilities for these criteria and locates the
//! variance ratio at which the revised test's quantile overflows to `+inf`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod criteria;
pub mod error;
pub mod normal;
pub mod power;
pub mod sample;

pub use criteria::{
    equivalence_pass, evaluate, induce_params, min_n_bound, normalized_threshold_e,
    normalized_threshold_t, plan_n_e, plan_n_t, revised_alpha, revised_ttest_pass, run_validation,
    ttest_pass, Decision, Diagnostics, EquivParams, Mode, Regime, RevisedAlpha, TTestParams,
    Verdict,
};
pub use error::{Error, Result};
pub use normal::{cdf, quantile, tail, ExtendedReal, Probability};
pub use power::{
    figure_curves, pass_probability_closed, pass_probability_mc, stability_scan, Figure,
    PowerCurve, SimDesign,
};
pub use sample::{
    proof_of_concept_sample, relative_differences, summarize, CountSample, Direction,
    SampleSummary, StopDoorEvent,
};
