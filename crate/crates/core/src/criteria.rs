//! The four admission tests and their sample-size planners.
//!
//! All criteria are threshold comparisons `|D̄| <= c` with equality passing.
//! The revised t-test derives `c` from a post-hoc significance level and is
//! evaluated the naive way: the revised level is held as a double and
//! `z(1 - α̂/2)` is taken from `1 - α̂/2` after rounding. Once the revised level
//! drops below half an ulp of one, `1 - α̂/2` rounds to `1`, the quantile is
//! `+inf` and every system passes. The t-test-induced equivalence test computes
//! the same threshold with elementary arithmetic and has no such breakdown.

use core::fmt;
use core::str::FromStr;

use alloc::string::String;

use crate::error::{Error, Result};
use crate::normal::{quantile, tail_f64, upper_quantile, ExtendedReal, Probability};
use crate::sample::{summarize, CountSample, SampleSummary};

fn open_unit(name: &'static str, value: f64) -> Result<Probability> {
    if value > 0.0 && value < 1.0 {
        Probability::new(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie strictly between 0 and 1",
        })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

/// Parameters of the (revised) t-test.
///
/// `alpha_t` is the manufacturer risk (falsely rejecting a bias-free device),
/// `beta_t` the user risk (accepting a device whose bias is `d_r`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TTestParams {
    pub alpha_t: Probability,
    pub beta_t: Probability,
    /// Maximal allowed systematic error, e.g. `0.01`.
    pub d_r: f64,
    /// A-priori standard deviation of the relative differences.
    pub v: f64,
}

impl TTestParams {
    pub fn new(alpha_t: f64, beta_t: f64, d_r: f64, v: f64) -> Result<Self> {
        Ok(TTestParams {
            alpha_t: open_unit("alpha", alpha_t)?,
            beta_t: open_unit("beta", beta_t)?,
            d_r: positive("d_r", d_r)?,
            v: positive("v", v)?,
        })
    }
}

/// Parameters of the equivalence test. The roles of the two risks are swapped
/// relative to [`TTestParams`]: `alpha_e` is half the user risk, `beta_e` the
/// manufacturer risk.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivParams {
    pub alpha_e: Probability,
    pub beta_e: Probability,
    /// Equivalence margin Δ.
    pub delta: f64,
    pub v: f64,
}

impl EquivParams {
    pub fn new(alpha_e: f64, beta_e: f64, delta: f64, v: f64) -> Result<Self> {
        Ok(EquivParams {
            alpha_e: open_unit("alpha_e", alpha_e)?,
            beta_e: open_unit("beta_e", beta_e)?,
            delta: positive("delta", delta)?,
            v: positive("v", v)?,
        })
    }

    /// Inverse of [`induce_params`].
    pub fn to_ttest(self) -> TTestParams {
        TTestParams {
            alpha_t: self.beta_e,
            beta_t: self.alpha_e,
            d_r: self.delta,
            v: self.v,
        }
    }
}

/// `β_e := α_t`, `α_e := β_t`, `Δ := d_r`.
pub fn induce_params(p: &TTestParams) -> EquivParams {
    EquivParams {
        alpha_e: p.beta_t,
        beta_e: p.alpha_t,
        delta: p.d_r,
        v: p.v,
    }
}

/// Which admission criterion to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    /// Plain t-test.
    #[cfg_attr(feature = "serde", serde(rename = "ttest"))]
    TTest,
    /// t-test with post-hoc revised significance.
    #[cfg_attr(feature = "serde", serde(rename = "revised"))]
    RevisedTTest,
    /// Equivalence test (TOST, symmetric margin). Reads `alpha` as `α_e` and
    /// `d_r` as Δ.
    #[cfg_attr(feature = "serde", serde(rename = "equivalence"))]
    Equivalence,
    /// Equivalence test with parameters induced from t-test parameters.
    #[cfg_attr(feature = "serde", serde(rename = "induced"))]
    InducedEquivalence,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::TTest,
        Regime::RevisedTTest,
        Regime::Equivalence,
        Regime::InducedEquivalence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::TTest => "ttest",
            Regime::RevisedTTest => "revised",
            Regime::Equivalence => "equivalence",
            Regime::InducedEquivalence => "induced",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "ttest" | "t-test" => Ok(Regime::TTest),
            "revised" | "revised-ttest" => Ok(Regime::RevisedTTest),
            "equivalence" | "tost" => Ok(Regime::Equivalence),
            "induced" | "induced-equivalence" => Ok(Regime::InducedEquivalence),
            other => Err(alloc::format!(
                "unknown regime `{other}` (expected ttest, revised, equivalence or induced)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Decision {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Mode {
    Regular,
    /// The acceptance region is empty (negative threshold).
    AlwaysFail,
    /// The threshold is `+inf`.
    AlwaysPass,
}

/// Post-hoc significance level of the revised t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RevisedAlpha {
    /// `2 (1 - Φ(argument))`, in `[0, 2]`.
    pub value: f64,
    /// `√n d_r / v̂ - z(1 - β_t)`.
    pub argument: ExtendedReal,
    /// Set when `1 - value / 2` rounds to `1` in double precision.
    pub underflowed: bool,
}

impl RevisedAlpha {
    fn from_argument(argument: f64) -> Self {
        let value = 2.0 * tail_f64(argument);
        RevisedAlpha {
            value,
            argument: ExtendedReal::from_f64(argument).unwrap_or(ExtendedReal::PosInfinity),
            underflowed: 1.0 - value / 2.0 == 1.0,
        }
    }

    /// `z(1 - α̂/2)` evaluated naively from the rounded `1 - α̂/2`.
    pub fn naive_quantile(&self) -> ExtendedReal {
        let p = (1.0 - self.value / 2.0).clamp(0.0, 1.0);
        quantile(Probability::new(p).unwrap_or(Probability::ONE))
    }
}

/// Intermediate values recorded alongside a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub n: u64,
    pub d_bar: f64,
    pub v_hat: f64,
    /// Quantile multiplying `v̂/√n` in the applied criterion.
    pub critical_value: Option<ExtendedReal>,
    pub revised_alpha: Option<RevisedAlpha>,
    /// `z²(1 - β_t) v̂² / d_r²`, the smallest sample size with a defined revised threshold.
    pub min_n_bound: Option<f64>,
    /// `v / v̂` when an a-priori `v` is known.
    pub v_ratio: Option<f64>,
    pub induced: Option<EquivParams>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verdict {
    pub regime: Regime,
    pub decision: Decision,
    pub mode: Mode,
    /// Right-hand side of the applied criterion.
    pub threshold: ExtendedReal,
    /// `|D̄|`.
    pub observed: f64,
    pub diagnostics: Diagnostics,
}

impl Verdict {
    fn from_threshold(regime: Regime, s: &SampleSummary, threshold: ExtendedReal) -> Self {
        let observed = s.observed();
        let mode = if threshold == ExtendedReal::PosInfinity {
            Mode::AlwaysPass
        } else if threshold < ExtendedReal::ZERO {
            Mode::AlwaysFail
        } else {
            Mode::Regular
        };
        Verdict {
            regime,
            decision: if threshold.ge_f64(observed) {
                Decision::Pass
            } else {
                Decision::Fail
            },
            mode,
            threshold,
            observed,
            diagnostics: Diagnostics {
                n: s.n,
                d_bar: s.d_bar,
                v_hat: s.v_hat,
                ..Diagnostics::default()
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.decision == Decision::Pass
    }
}

/// `z * v̂/√n` with sentinels kept as they are.
fn scaled(z: ExtendedReal, s: &SampleSummary) -> ExtendedReal {
    match z {
        ExtendedReal::Finite(z) => ExtendedReal::Finite(z * s.standard_error()),
        sentinel => sentinel,
    }
}

/// Real-valued t-test sample size before rounding.
pub fn plan_n_t_real(p: &TTestParams) -> f64 {
    let z = upper_quantile(p.beta_t.value()) + upper_quantile(p.alpha_t.value() / 2.0);
    z * z * p.v * p.v / (p.d_r * p.d_r)
}

/// `ceil((z(1-β_t) + z(1-α_t/2))² v² / d_r²)`, at least 2.
pub fn plan_n_t(p: &TTestParams) -> u64 {
    ceil_at_least_two(plan_n_t_real(p))
}

/// Real-valued equivalence-test sample size before rounding.
pub fn plan_n_e_real(p: &EquivParams) -> f64 {
    let z = upper_quantile(p.beta_e.value() / 2.0) + upper_quantile(p.alpha_e.value());
    z * z * p.v * p.v / (p.delta * p.delta)
}

/// `ceil((z(1-β_e/2) + z(1-α_e))² v² / Δ²)`, at least 2.
pub fn plan_n_e(p: &EquivParams) -> u64 {
    ceil_at_least_two(plan_n_e_real(p))
}

fn ceil_at_least_two(n: f64) -> u64 {
    if n.is_nan() || n <= 2.0 {
        2
    } else if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        libm::ceil(n) as u64
    }
}

/// Plain t-test: pass iff `|D̄| <= z(1-α_t/2) v̂/√n`.
pub fn ttest_pass(s: &SampleSummary, alpha_t: Probability) -> Verdict {
    let z = -quantile(Probability::new(alpha_t.value() / 2.0).unwrap_or(Probability::ZERO));
    let mut verdict = Verdict::from_threshold(Regime::TTest, s, scaled(z, s));
    verdict.diagnostics.critical_value = Some(z);
    verdict
}

/// Revised significance for the actual sample size:
/// `α̂ = 2 (1 - Φ(√n d_r/v̂ - z(1-β_t)))`.
///
/// With `n` equal to the real-valued planned size this is the closed form in
/// terms of `v / v̂`; see [`revised_alpha_planned`].
pub fn revised_alpha(n: u64, v_hat: f64, d_r: f64, beta_t: Probability) -> RevisedAlpha {
    revised_alpha_real(n as f64, v_hat, d_r, beta_t)
}

pub(crate) fn revised_alpha_real(
    n: f64,
    v_hat: f64,
    d_r: f64,
    beta_t: Probability,
) -> RevisedAlpha {
    let reach = if v_hat > 0.0 {
        libm::sqrt(n) * d_r / v_hat
    } else {
        f64::INFINITY
    };
    RevisedAlpha::from_argument(reach - upper_quantile(beta_t.value()))
}

/// Revised significance when the sample size was planned from `v`:
/// the argument is `(z(1-β_t) + z(1-α_t/2)) · v/v̂ - z(1-β_t)`.
pub fn revised_alpha_planned(
    v_ratio: f64,
    alpha_t: Probability,
    beta_t: Probability,
) -> RevisedAlpha {
    let z_beta = upper_quantile(beta_t.value());
    let z_alpha = upper_quantile(alpha_t.value() / 2.0);
    RevisedAlpha::from_argument((z_beta + z_alpha) * v_ratio - z_beta)
}

/// `z²(1-β_t) v̂² / d_r²`.
pub fn min_n_bound(v_hat: f64, d_r: f64, beta_t: Probability) -> f64 {
    let z = upper_quantile(beta_t.value());
    z * z * v_hat * v_hat / (d_r * d_r)
}

/// Revised t-test: pass iff `|D̄| <= z(1-α̂/2) v̂/√n`.
///
/// Below the sample-size bound the revised level exceeds one, the threshold is
/// negative and the verdict is `AlwaysFail`. When the revised level underflows
/// the threshold is `+inf` and the verdict is `AlwaysPass`.
pub fn revised_ttest_pass(s: &SampleSummary, d_r: f64, beta_t: Probability) -> Verdict {
    let alpha = revised_alpha(s.n, s.v_hat, d_r, beta_t);
    let z = alpha.naive_quantile();
    let mut verdict = Verdict::from_threshold(Regime::RevisedTTest, s, scaled(z, s));
    verdict.diagnostics.critical_value = Some(z);
    verdict.diagnostics.revised_alpha = Some(alpha);
    verdict.diagnostics.min_n_bound = Some(min_n_bound(s.v_hat, d_r, beta_t));
    verdict
}

/// Equivalence test: pass iff `|D̄| <= Δ - z(1-α_e) v̂/√n`.
pub fn equivalence_pass(s: &SampleSummary, delta: f64, alpha_e: Probability) -> Verdict {
    let z = upper_quantile(alpha_e.value());
    let threshold =
        ExtendedReal::from_f64(delta - z * s.standard_error()).unwrap_or(ExtendedReal::NegInfinity);
    let mut verdict = Verdict::from_threshold(Regime::Equivalence, s, threshold);
    verdict.diagnostics.critical_value = ExtendedReal::from_f64(z).ok();
    verdict
}

/// Revised t-test threshold written in terms of `v̂ / v`:
/// `(1 - (v̂/v) / (1 + z(1-α_t/2) / z(1-β_t))) d_r`.
pub fn normalized_threshold_t(
    v_ratio: f64,
    alpha_t: Probability,
    beta_t: Probability,
    d_r: f64,
) -> Result<f64> {
    normalized(
        v_ratio,
        upper_quantile(alpha_t.value() / 2.0),
        upper_quantile(beta_t.value()),
        d_r,
    )
}

/// Equivalence threshold written in terms of `v̂ / v`:
/// `(1 - (v̂/v) / (1 + z(1-β_e/2) / z(1-α_e))) Δ`.
pub fn normalized_threshold_e(
    v_ratio: f64,
    alpha_e: Probability,
    beta_e: Probability,
    delta: f64,
) -> Result<f64> {
    normalized(
        v_ratio,
        upper_quantile(beta_e.value() / 2.0),
        upper_quantile(alpha_e.value()),
        delta,
    )
}

fn normalized(v_ratio: f64, z_num: f64, z_den: f64, scale: f64) -> Result<f64> {
    if !(v_ratio.is_finite() && v_ratio >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "v_ratio",
            value: v_ratio,
            reason: "must be finite and non-negative",
        });
    }
    if z_den == 0.0 {
        return Err(Error::ZeroPowerQuantile);
    }
    Ok((1.0 - v_ratio / (1.0 + z_num / z_den)) * scale)
}

/// Applies `regime` to an already summarized sample.
///
/// For [`Regime::Equivalence`] the t-test parameters are read directly as
/// `α_e = alpha_t` and `Δ = d_r`.
pub fn evaluate(s: &SampleSummary, params: &TTestParams, regime: Regime) -> Verdict {
    let mut verdict = match regime {
        Regime::TTest => ttest_pass(s, params.alpha_t),
        Regime::RevisedTTest => revised_ttest_pass(s, params.d_r, params.beta_t),
        Regime::Equivalence => equivalence_pass(s, params.d_r, params.alpha_t),
        Regime::InducedEquivalence => {
            let induced = induce_params(params);
            let mut v = equivalence_pass(s, induced.delta, induced.alpha_e);
            v.diagnostics.induced = Some(induced);
            v.diagnostics.min_n_bound = Some(min_n_bound(s.v_hat, params.d_r, params.beta_t));
            v
        }
    };
    verdict.regime = regime;
    if s.v_hat > 0.0 {
        verdict.diagnostics.v_ratio = Some(params.v / s.v_hat);
    }
    verdict
}

/// Summarizes `sample` and applies `regime`.
pub fn run_validation(
    sample: &CountSample,
    params: &TTestParams,
    regime: Regime,
) -> Result<Verdict> {
    Ok(evaluate(&summarize(sample)?, params, regime))
}
