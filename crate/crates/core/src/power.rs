//! Pass-probability curves and the underflow scanner.
//!
//! Monte Carlo replicates are keyed by `(seed, μ index, replicate index)`:
//! each one owns a ChaCha8 stream whose key is built from that triple, so the
//! result does not depend on the order in which replicates run. The sequential
//! driver here and the parallel driver in the companion crate produce the same
//! bits.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::criteria::{evaluate, plan_n_t, revised_alpha_planned, Regime, TTestParams};
use crate::error::{Error, Result};
use crate::normal::{tail_f64, ExtendedReal, Probability};
use crate::sample::SampleSummary;

/// How `v̂` is obtained inside a replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum VarianceMode {
    /// Re-estimated from each simulated sample.
    #[default]
    Estimated,
    /// Fixed at `sigma_true`; matches the closed form exactly in distribution.
    Known,
}

/// How a simulated sample is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Sampling {
    /// Draws `D̄ ~ N(μ, σ²/n)` and `(n-1) v̂²/σ² ~ χ²(n-1)` independently,
    /// the exact joint law of the statistics of `n` i.i.d. normal differences.
    #[default]
    SufficientStatistics,
    /// Draws all `n` relative differences and summarizes them.
    RawDraws,
}

/// Which engine produces a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    #[default]
    MonteCarlo,
    /// Fixed-`v̂` closed form; `std_err` is reported as zero.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimDesign {
    pub regime: Regime,
    /// For [`Regime::Equivalence`], `alpha_t` and `d_r` are read as `α_e`, Δ.
    pub params: TTestParams,
    pub n: u64,
    /// True systematic errors μ.
    pub mu_grid: Vec<f64>,
    /// True standard deviation of the relative differences.
    pub sigma_true: f64,
    pub replicates: u64,
    pub seed: u64,
    pub variance: VarianceMode,
    pub sampling: Sampling,
    pub method: Method,
    /// Free-form curve name, empty unless set by a figure preset.
    pub label: String,
}

impl SimDesign {
    pub fn new(
        regime: Regime,
        params: TTestParams,
        n: u64,
        mu_grid: Vec<f64>,
        sigma_true: f64,
        replicates: u64,
        seed: u64,
    ) -> Result<Self> {
        let design = SimDesign {
            regime,
            params,
            n,
            mu_grid,
            sigma_true,
            replicates,
            seed,
            variance: VarianceMode::Estimated,
            sampling: Sampling::SufficientStatistics,
            method: Method::MonteCarlo,
            label: String::new(),
        };
        design.validate()?;
        Ok(design)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidDesign("replicates must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidDesign("n must be at least 2".into()));
        }
        if self.mu_grid.is_empty() {
            return Err(Error::InvalidDesign("mu grid is empty".into()));
        }
        if self.mu_grid.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidDesign(
                "mu grid contains a non-finite value".into(),
            ));
        }
        if !(self.sigma_true.is_finite() && self.sigma_true > 0.0) {
            return Err(Error::InvalidDesign(
                "sigma_true must be finite and positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvePoint {
    pub mu: f64,
    pub pass_prob: f64,
    /// `√(p (1 - p) / replicates)`; zero for closed-form curves.
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerCurve {
    pub points: Vec<CurvePoint>,
    pub design: SimDesign,
}

impl PowerCurve {
    /// Builds a Monte Carlo curve from per-μ pass counts.
    pub fn from_counts(design: SimDesign, counts: &[u64]) -> Self {
        let reps = design.replicates as f64;
        let points = design
            .mu_grid
            .iter()
            .zip(counts)
            .map(|(&mu, &c)| {
                let p = c as f64 / reps;
                CurvePoint {
                    mu,
                    pass_prob: p,
                    std_err: libm::sqrt(p * (1.0 - p) / reps),
                }
            })
            .collect();
        PowerCurve { points, design }
    }
}

/// The RNG stream owned by one replicate.
pub fn replicate_rng(seed: u64, mu_index: u64, replicate: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&mu_index.to_le_bytes());
    key[16..24].copy_from_slice(&replicate.to_le_bytes());
    key[24..].copy_from_slice(b"apcvalmc");
    ChaCha8Rng::from_seed(key)
}

/// Simulates one replicate at `mu_grid[mu_index]` and reports whether it passes.
pub fn replicate_passes(design: &SimDesign, mu_index: usize, replicate: u64) -> bool {
    let mu = design.mu_grid[mu_index];
    let sigma = design.sigma_true;
    let n = design.n;
    let mut rng = replicate_rng(design.seed, mu_index as u64, replicate);

    let (d_bar, v_hat) = match design.sampling {
        Sampling::SufficientStatistics => {
            let z: f64 = StandardNormal.sample(&mut rng);
            let d_bar = mu + sigma / libm::sqrt(n as f64) * z;
            let v_hat = match design.variance {
                VarianceMode::Known => sigma,
                VarianceMode::Estimated => {
                    let dof = (n - 1) as f64;
                    // dof >= 1 is guaranteed by validate()
                    let chi2 = ChiSquared::new(dof).expect("positive degrees of freedom");
                    let x: f64 = chi2.sample(&mut rng);
                    sigma * libm::sqrt(x / dof)
                }
            };
            (d_bar, v_hat)
        }
        Sampling::RawDraws => {
            let draws: Vec<f64> = (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    mu + sigma * z
                })
                .collect();
            let s = SampleSummary::from_differences(&draws, 1.0).expect("n >= 2 and finite draws");
            match design.variance {
                VarianceMode::Known => (s.d_bar, sigma),
                VarianceMode::Estimated => (s.d_bar, s.v_hat),
            }
        }
    };
    let summary = SampleSummary {
        n,
        m_bar: 1.0,
        d_bar,
        v_hat,
    };
    evaluate(&summary, &design.params, design.regime).passed()
}

/// Number of passing replicates at `mu_grid[mu_index]`.
pub fn count_passes(design: &SimDesign, mu_index: usize) -> u64 {
    (0..design.replicates)
        .filter(|&r| replicate_passes(design, mu_index, r))
        .count() as u64
}

/// Monte Carlo pass fraction for every μ of the design (single-threaded).
pub fn pass_probability_mc(design: &SimDesign) -> Result<PowerCurve> {
    design.validate()?;
    let counts: Vec<u64> = (0..design.mu_grid.len())
        .map(|i| count_passes(design, i))
        .collect();
    Ok(PowerCurve::from_counts(design.clone(), &counts))
}

/// Pass probability with `v̂` fixed at `sigma_true` and
/// `D̄ ~ N(μ, σ²/n)`: `Φ((c-μ)√n/σ) - Φ((-c-μ)√n/σ)`.
pub fn pass_probability_closed(
    regime: Regime,
    params: &TTestParams,
    n: u64,
    mu: f64,
    sigma_true: f64,
) -> Result<Probability> {
    if n < 2 {
        return Err(Error::InvalidDesign("n must be at least 2".into()));
    }
    if !(sigma_true.is_finite() && sigma_true > 0.0) {
        return Err(Error::InvalidDesign(
            "sigma_true must be finite and positive".into(),
        ));
    }
    if !mu.is_finite() {
        return Err(Error::NonFinite(mu));
    }
    let summary = SampleSummary {
        n,
        m_bar: 1.0,
        d_bar: 0.0,
        v_hat: sigma_true,
    };
    let threshold = evaluate(&summary, params, regime).threshold;
    let c = match threshold {
        ExtendedReal::PosInfinity => return Ok(Probability::ONE),
        ExtendedReal::NegInfinity => return Ok(Probability::ZERO),
        ExtendedReal::Finite(c) if c < 0.0 => return Ok(Probability::ZERO),
        ExtendedReal::Finite(c) => c,
    };
    let k = libm::sqrt(n as f64) / sigma_true;
    let p = tail_f64((-c - mu) * k) - tail_f64((c - mu) * k);
    Probability::new(p.clamp(0.0, 1.0))
}

/// Closed-form curve over the design's μ grid.
pub fn pass_probability_closed_curve(design: &SimDesign) -> Result<PowerCurve> {
    design.validate()?;
    let points = design
        .mu_grid
        .iter()
        .map(|&mu| {
            pass_probability_closed(
                design.regime,
                &design.params,
                design.n,
                mu,
                design.sigma_true,
            )
            .map(|p| CurvePoint {
                mu,
                pass_prob: p.value(),
                std_err: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCurve {
        points,
        design: design.clone(),
    })
}

/// Smallest `v/v̂` on the grid `lo, lo + step, …, <= hi` at which the revised
/// significance of a design planned from `v` underflows, or `+inf` if none does.
pub fn stability_scan(
    alpha_t: Probability,
    beta_t: Probability,
    ratio_lo: f64,
    ratio_hi: f64,
    step: f64,
) -> Result<ExtendedReal> {
    if !(ratio_lo > 0.0 && ratio_lo < ratio_hi && ratio_hi.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "ratio_lo",
            value: ratio_lo,
            reason: "need 0 < ratio_lo < ratio_hi < inf",
        });
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "must be finite and positive",
        });
    }
    let steps = libm::floor((ratio_hi - ratio_lo) / step + 1e-9) as u64;
    for k in 0..=steps {
        let ratio = ratio_lo + k as f64 * step;
        if revised_alpha_planned(ratio, alpha_t, beta_t).underflowed {
            return Ok(ExtendedReal::Finite(ratio));
        }
    }
    Ok(ExtendedReal::PosInfinity)
}

/// Preset curve families: revised vs induced across the saturation onset, and the t-test and induced equivalence test across planned sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Figure {
    /// Revised t-test (naive) against the induced equivalence test while the
    /// planning `v` sweeps past the underflow onset.
    Fig1,
    /// Plain t-test for several planned sample sizes.
    Fig2a,
    /// Induced equivalence test for the same sample sizes.
    Fig2b,
}

impl core::str::FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2a" => Ok(Figure::Fig2a),
            "fig2b" => Ok(Figure::Fig2b),
            other => Err(alloc::format!(
                "unknown preset `{other}` (expected fig1, fig2a or fig2b)"
            )),
        }
    }
}

/// Figure settings shared by all presets.
pub mod preset {
    pub const SIGMA_TRUE: f64 = 0.15;
    pub const D_R: f64 = 0.01;
    pub const ALPHA: f64 = 0.05;
    pub const BETA: f64 = 0.025;
    pub const SEED: u64 = 2019;
    pub const REPLICATES: u64 = 10_000;
    /// Planned `v` for the sample-size families of the second figure:
    /// too small (n = 385), too small, correct, too large.
    pub const FIG2_V: [f64; 4] = [0.05, 0.10, 0.15, 0.30];
    /// Planned `v` for the first figure; 0.393 and 0.45 lie past the onset.
    pub const FIG1_V: [f64; 7] = [0.05, 0.10, 0.15, 0.25, 0.31, 0.393, 0.45];
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FigureOverrides {
    pub replicates: Option<u64>,
    pub seed: Option<u64>,
    pub mu_grid: Option<Vec<f64>>,
    pub sigma_true: Option<f64>,
    pub method: Option<Method>,
    pub variance: Option<VarianceMode>,
}

/// `-0.03, -0.0295, …, 0.03`.
pub fn default_mu_grid() -> Vec<f64> {
    (-60..=60).map(|k| k as f64 * 0.0005).collect()
}

/// The designs behind a figure, without running them.
pub fn figure_designs(figure: Figure, overrides: &FigureOverrides) -> Result<Vec<SimDesign>> {
    let sigma = overrides.sigma_true.unwrap_or(preset::SIGMA_TRUE);
    let mu_grid = overrides.mu_grid.clone().unwrap_or_else(default_mu_grid);
    let make = |regime: Regime, params: TTestParams, label: String| -> Result<SimDesign> {
        let mut d = SimDesign::new(
            regime,
            params,
            plan_n_t(&params),
            mu_grid.clone(),
            sigma,
            overrides.replicates.unwrap_or(preset::REPLICATES),
            overrides.seed.unwrap_or(preset::SEED),
        )?;
        d.method = overrides.method.unwrap_or_default();
        d.variance = overrides.variance.unwrap_or_default();
        d.label = label;
        Ok(d)
    };
    let params = |v: f64, beta: f64| TTestParams::new(preset::ALPHA, beta, preset::D_R, v);

    let mut designs = Vec::new();
    match figure {
        Figure::Fig1 => {
            for v in preset::FIG1_V {
                for regime in [Regime::RevisedTTest, Regime::InducedEquivalence] {
                    designs.push(make(
                        regime,
                        params(v, preset::BETA)?,
                        alloc::format!("v={v}"),
                    )?);
                }
            }
        }
        Figure::Fig2a => {
            for v in preset::FIG2_V {
                designs.push(make(
                    Regime::TTest,
                    params(v, preset::BETA)?,
                    alloc::format!("v={v}"),
                )?);
            }
            designs.push(make(
                Regime::TTest,
                params(preset::SIGMA_TRUE, 0.5)?,
                "implicit 50% power".to_string(),
            )?);
        }
        Figure::Fig2b => {
            for v in preset::FIG2_V {
                designs.push(make(
                    Regime::InducedEquivalence,
                    params(v, preset::BETA)?,
                    alloc::format!("v={v}"),
                )?);
            }
        }
    }
    Ok(designs)
}

/// Runs a design with its configured method.
pub fn run_design(design: &SimDesign) -> Result<PowerCurve> {
    match design.method {
        Method::MonteCarlo => pass_probability_mc(design),
        Method::ClosedForm => pass_probability_closed_curve(design),
    }
}

/// All curves of a figure (single-threaded).
pub fn figure_curves(figure: Figure, overrides: &FigureOverrides) -> Result<Vec<PowerCurve>> {
    figure_designs(figure, overrides)?
        .iter()
        .map(run_design)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn prob(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }

    fn params() -> TTestParams {
        TTestParams::new(0.05, 0.025, 0.01, 0.05).unwrap()
    }

    #[test]
    fn design_validation() {
        let p = params();
        assert!(SimDesign::new(Regime::TTest, p, 385, vec![0.0], 0.05, 0, 1).is_err());
        assert!(SimDesign::new(Regime::TTest, p, 385, vec![], 0.05, 10, 1).is_err());
        assert!(SimDesign::new(Regime::TTest, p, 385, vec![0.0], 0.0, 10, 1).is_err());
        assert!(SimDesign::new(Regime::TTest, p, 1, vec![0.0], 0.05, 10, 1).is_err());
        assert!(SimDesign::new(Regime::TTest, p, 385, vec![f64::NAN], 0.05, 10, 1).is_err());
    }

    #[test]
    fn closed_form_ttest_at_zero_is_one_minus_alpha() {
        let p = pass_probability_closed(Regime::TTest, &params(), 385, 0.0, 0.05).unwrap();
        assert!((p.value() - 0.95).abs() < 1e-12);
    }

    #[test]
    fn closed_form_degenerate_thresholds() {
        // negative threshold: empty acceptance region
        let e = TTestParams::new(0.025, 0.05, 0.01, 0.05).unwrap();
        for mu in [-0.02, 0.0, 0.005, 0.02] {
            let p = pass_probability_closed(Regime::Equivalence, &e, 385, mu, 0.15).unwrap();
            assert_eq!(p, Probability::ZERO);
        }
        // +inf threshold: always accepted
        let v = TTestParams::new(0.05, 0.025, 0.01, 0.45).unwrap();
        let p = pass_probability_closed(Regime::RevisedTTest, &v, plan_n_t(&v), 0.2, 0.15).unwrap();
        assert_eq!(p, Probability::ONE);
    }

    #[test]
    fn scan_finds_onset() {
        let r = stability_scan(prob(0.05), prob(0.025), 2.0, 3.0, 0.001).unwrap();
        let r = r.finite().unwrap();
        assert!((r - 2.62).abs() <= 0.02, "{r}");
        let r = stability_scan(prob(0.05), prob(0.05), 2.0, 3.2, 0.001).unwrap();
        assert!((r.finite().unwrap() - 2.76).abs() <= 0.03);
        assert_eq!(
            stability_scan(prob(0.05), prob(0.025), 0.5, 1.5, 0.01).unwrap(),
            ExtendedReal::PosInfinity
        );
        assert!(stability_scan(prob(0.05), prob(0.025), 3.0, 2.0, 0.01).is_err());
        assert!(stability_scan(prob(0.05), prob(0.025), 2.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn replicate_streams_are_reproducible() {
        let d = SimDesign::new(Regime::TTest, params(), 50, vec![0.0, 0.01], 0.05, 64, 7).unwrap();
        let a: Vec<bool> = (0..64).map(|r| replicate_passes(&d, 1, r)).collect();
        let b: Vec<bool> = (0..64)
            .rev()
            .map(|r| replicate_passes(&d, 1, r))
            .rev()
            .collect();
        assert_eq!(a, b);
        assert_eq!(
            pass_probability_mc(&d).unwrap(),
            pass_probability_mc(&d).unwrap()
        );
    }

    #[test]
    fn std_err_matches_binomial() {
        let d = SimDesign::new(Regime::TTest, params(), 385, vec![0.003], 0.05, 400, 3).unwrap();
        let c = pass_probability_mc(&d).unwrap();
        let pt = c.points[0];
        assert!(
            (pt.std_err - libm::sqrt(pt.pass_prob * (1.0 - pt.pass_prob) / 400.0)).abs() < 1e-15
        );
    }

    #[test]
    fn figure_presets() {
        let o = FigureOverrides {
            method: Some(Method::ClosedForm),
            ..FigureOverrides::default()
        };
        let fig2b = figure_curves(Figure::Fig2b, &o).unwrap();
        let small = fig2b.iter().find(|c| c.design.n == 385).unwrap();
        assert!(small.points.iter().all(|p| p.pass_prob == 0.0));

        let fig2a = figure_designs(Figure::Fig2a, &FigureOverrides::default()).unwrap();
        assert!(fig2a
            .iter()
            .any(|d| d.n == 865 && d.params.beta_t.value() == 0.5));
        assert!(fig2a.iter().any(|d| d.n == 3458));

        let fig1 = figure_curves(Figure::Fig1, &o).unwrap();
        for c in fig1
            .iter()
            .filter(|c| c.design.regime == Regime::RevisedTTest && c.design.params.v >= 0.393)
        {
            assert!(c.points.iter().all(|p| p.pass_prob == 1.0));
        }
        assert_eq!("fig2a".parse::<Figure>(), Ok(Figure::Fig2a));
    }
}
