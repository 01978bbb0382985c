//! Command-line front end.
//!
//! Exit codes: `0` success (or PASS), `1` FAIL, `2` any error. Errors still
//! print a report on stdout.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use apcval_core::power::{
    default_mu_grid, FigureOverrides, Method, Sampling, SimDesign, VarianceMode,
};
use apcval_core::{
    evaluate, induce_params, min_n_bound, plan_n_e, plan_n_t, revised_alpha, stability_scan,
    summarize, CountSample, Decision, Direction, EquivParams, ExtendedReal, Figure, Probability,
    Regime, TTestParams,
};

use crate::error::Error;
use crate::report::{
    Body, ErrorInfo, ErrorKind, PlanInputs, PlanResult, Report, ReviseInputs, ReviseResult,
    ScanInputs, ScanResult, SimulateInputs, SimulateResult, ValidateInputs, ValidateResult,
};
use crate::{curves_csv, events_csv, parallel};

pub const SEED_ENV: &str = "APCVAL_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "apcval",
    version,
    about = "Admission tests for automatic passenger counting"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct Risks {
    /// Type I error (α_t; read as α_e for the equivalence regime).
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Type II error (β_t; read as β_e for the equivalence regime).
    #[arg(long, default_value_t = 0.025)]
    pub beta: f64,
    /// Maximal allowed systematic error d_r (equivalence margin Δ).
    #[arg(long, default_value_t = 0.01)]
    pub dr: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample size for a regime.
    Plan {
        #[arg(long, value_parser = parse_regime, default_value = "ttest")]
        regime: Regime,
        #[command(flatten)]
        risks: Risks,
        /// A-priori standard deviation of the relative differences.
        #[arg(long, allow_hyphen_values = true)]
        v: f64,
    },
    /// Run an admission test on a stop-door event CSV.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_regime, default_value = "induced")]
        regime: Regime,
        #[arg(long, value_parser = parse_direction, default_value = "boarding")]
        direction: Direction,
        #[command(flatten)]
        risks: Risks,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
    },
    /// Revised significance for an observed standard deviation.
    ReviseAlpha {
        #[arg(long, allow_hyphen_values = true)]
        v_hat: f64,
        /// Actual sample size; planned from --v when omitted.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
        #[command(flatten)]
        risks: Risks,
    },
    /// Pass-probability curves.
    Simulate {
        #[arg(long, value_parser = parse_figure)]
        preset: Option<Figure>,
        #[arg(long, value_parser = parse_regime, default_value = "ttest")]
        regime: Regime,
        #[command(flatten)]
        risks: Risks,
        /// Planning standard deviation (defaults to --sigma).
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
        /// Sample size; planned from --v when omitted.
        #[arg(long)]
        n: Option<u64>,
        /// True standard deviation of the relative differences.
        #[arg(long, default_value_t = 0.15, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        mu_max: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        mu_step: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        replicates: u64,
        #[arg(long, env = SEED_ENV, default_value_t = 2019)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Mc)]
        method: MethodArg,
        /// Fix v̂ at --sigma instead of re-estimating it.
        #[arg(long)]
        known_variance: bool,
        /// Simulate every relative difference instead of the sufficient statistics.
        #[arg(long)]
        raw_draws: bool,
        /// Also write the curve CSV to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Smallest v/v̂ at which the naive revised significance underflows.
    StabilityScan {
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.025)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        lo: f64,
        #[arg(long, default_value_t = 3.5)]
        hi: f64,
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        /// Also report the planning v at the onset for this v̂.
        #[arg(long)]
        v_hat: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mc,
    Closed,
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse()
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse()
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse()
}

/// What the process prints and returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                return Outcome {
                    stdout: e.to_string(),
                    code: 0,
                };
            }
            return error_outcome(Format::Json, ErrorKind::Usage, e.to_string());
        }
    };
    let format = cli.format;
    match execute(cli) {
        Ok((report, code, csv)) => Outcome {
            stdout: match (format, csv) {
                (Format::Csv, Some(csv)) => csv,
                (Format::Text, _) => report.to_text(),
                _ => report.to_json(),
            },
            code,
        },
        Err(e) => {
            let kind = match e {
                Error::Usage(_) => ErrorKind::Usage,
                Error::Io { .. } | Error::Malformed { .. } => ErrorKind::Input,
                Error::Core(_) => ErrorKind::Domain,
            };
            error_outcome(format, kind, e.to_string())
        }
    }
}

fn error_outcome(format: Format, kind: ErrorKind, message: String) -> Outcome {
    let report = Report::new(Body::Error {
        error: ErrorInfo {
            kind,
            message: message.trim_end().to_string(),
        },
    });
    Outcome {
        stdout: if format == Format::Text {
            report.to_text()
        } else {
            report.to_json()
        },
        code: 2,
    }
}

type Executed = (Report, i32, Option<String>);

fn execute(cli: Cli) -> Result<Executed, Error> {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Simulate { .. }) {
        return Err(Error::Usage(
            "csv output is only available for simulate".into(),
        ));
    }
    match cli.command {
        Command::Plan { regime, risks, v } => plan(regime, risks, v),
        Command::Validate {
            input,
            regime,
            direction,
            risks,
            v,
        } => validate(input, regime, direction, risks, v),
        Command::ReviseAlpha { v_hat, n, v, risks } => revise(v_hat, n, v, risks),
        Command::Simulate {
            preset,
            regime,
            risks,
            v,
            n,
            sigma,
            mu_min,
            mu_max,
            mu_step,
            replicates,
            seed,
            method,
            known_variance,
            raw_draws,
            output,
        } => {
            let inputs = SimulateInputs {
                preset,
                regime,
                alpha: risks.alpha,
                beta: risks.beta,
                dr: risks.dr,
                v,
                n,
                sigma,
                mu_min,
                mu_max,
                mu_step,
                replicates,
                seed,
                method: match method {
                    MethodArg::Mc => Method::MonteCarlo,
                    MethodArg::Closed => Method::ClosedForm,
                },
                variance: if known_variance {
                    VarianceMode::Known
                } else {
                    VarianceMode::Estimated
                },
                sampling: if raw_draws {
                    Sampling::RawDraws
                } else {
                    Sampling::SufficientStatistics
                },
            };
            simulate(inputs, output)
        }
        Command::StabilityScan {
            alpha,
            beta,
            lo,
            hi,
            step,
            v_hat,
        } => scan(ScanInputs {
            alpha,
            beta,
            lo,
            hi,
            step,
            v_hat,
        }),
    }
}

fn ttest_params(risks: &Risks, v: f64) -> Result<TTestParams, Error> {
    Ok(TTestParams::new(risks.alpha, risks.beta, risks.dr, v)?)
}

/// Planned size for a regime; the equivalence regime reads the risks as `α_e`, `β_e`.
fn planned_n(regime: Regime, p: &TTestParams) -> (u64, f64, Option<EquivParams>) {
    use apcval_core::criteria::{plan_n_e_real, plan_n_t_real};
    match regime {
        Regime::TTest | Regime::RevisedTTest => (plan_n_t(p), plan_n_t_real(p), None),
        Regime::Equivalence => {
            let e = EquivParams {
                alpha_e: p.alpha_t,
                beta_e: p.beta_t,
                delta: p.d_r,
                v: p.v,
            };
            (plan_n_e(&e), plan_n_e_real(&e), None)
        }
        Regime::InducedEquivalence => {
            let e = induce_params(p);
            (plan_n_e(&e), plan_n_e_real(&e), Some(e))
        }
    }
}

fn plan(regime: Regime, risks: Risks, v: f64) -> Result<Executed, Error> {
    let p = ttest_params(&risks, v)?;
    let (n, n_real, induced) = planned_n(regime, &p);
    let report = Report::new(Body::Plan {
        inputs: PlanInputs {
            regime,
            alpha: risks.alpha,
            beta: risks.beta,
            dr: risks.dr,
            v,
        },
        result: PlanResult { n, n_real, induced },
    });
    Ok((report, 0, None))
}

fn validate(
    input: PathBuf,
    regime: Regime,
    direction: Direction,
    risks: Risks,
    v: Option<f64>,
) -> Result<Executed, Error> {
    if let Some(v) = v {
        ttest_params(&risks, v)?;
    }
    let events = events_csv::read_events_path(&input)?;
    let sample = CountSample::select(events, direction);
    let summary = summarize(&sample)?;
    // Without an a-priori v the ratio v / v̂ is reported as 1.
    let planning_v = v.unwrap_or(if summary.v_hat > 0.0 {
        summary.v_hat
    } else {
        1.0
    });
    let p = ttest_params(&risks, planning_v)?;
    let mut verdict = evaluate(&summary, &p, regime);
    if v.is_none() {
        verdict.diagnostics.v_ratio = None;
    }
    let code = if verdict.decision == Decision::Pass {
        0
    } else {
        1
    };
    let report = Report::new(Body::Validate {
        inputs: ValidateInputs {
            input: input.display().to_string(),
            direction,
            regime,
            alpha: risks.alpha,
            beta: risks.beta,
            dr: risks.dr,
            v,
        },
        result: ValidateResult { summary, verdict },
    });
    Ok((report, code, None))
}

fn revise(v_hat: f64, n: Option<u64>, v: Option<f64>, risks: Risks) -> Result<Executed, Error> {
    if !(v_hat.is_finite() && v_hat > 0.0) {
        return Err(apcval_core::Error::InvalidParameter {
            name: "v_hat",
            value: v_hat,
            reason: "must be finite and positive",
        }
        .into());
    }
    let p = ttest_params(&risks, v.unwrap_or(v_hat))?;
    let n = match (n, v) {
        (Some(n), _) if n >= 2 => n,
        (Some(n), _) => {
            return Err(apcval_core::Error::InsufficientSample {
                needed: 2,
                got: n as usize,
            }
            .into())
        }
        (None, Some(_)) => plan_n_t(&p),
        (None, None) => return Err(Error::Usage("revise-alpha needs --n or --v".into())),
    };
    let summary = apcval_core::SampleSummary::new(n, 1.0, 0.0, v_hat)?;
    let revised = evaluate(&summary, &p, Regime::RevisedTTest);
    let induced = evaluate(&summary, &p, Regime::InducedEquivalence);
    let report = Report::new(Body::ReviseAlpha {
        inputs: ReviseInputs {
            v_hat,
            n,
            alpha: risks.alpha,
            beta: risks.beta,
            dr: risks.dr,
            v,
        },
        result: ReviseResult {
            revised_alpha: revised_alpha(n, v_hat, p.d_r, p.beta_t),
            critical_value: revised
                .diagnostics
                .critical_value
                .unwrap_or(ExtendedReal::PosInfinity),
            threshold: revised.threshold,
            min_n_bound: min_n_bound(v_hat, p.d_r, p.beta_t),
            induced_threshold: induced.threshold.to_f64(),
        },
    });
    Ok((report, 0, None))
}

fn mu_grid(inputs: &SimulateInputs) -> Result<Vec<f64>, Error> {
    if inputs.mu_min.is_none() && inputs.mu_max.is_none() && inputs.mu_step.is_none() {
        return Ok(default_mu_grid());
    }
    let lo = inputs.mu_min.unwrap_or(-0.03);
    let hi = inputs.mu_max.unwrap_or(0.03);
    let step = inputs.mu_step.unwrap_or(0.0005);
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && step.is_finite() && step > 0.0) {
        return Err(Error::Usage(
            "mu grid needs finite mu-min <= mu-max and mu-step > 0".into(),
        ));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as u64;
    if count > 1_000_000 {
        return Err(Error::Usage(
            "mu grid has more than a million points".into(),
        ));
    }
    // trims representation noise such as -0.019999999999999997
    Ok((0..=count)
        .map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn simulate(inputs: SimulateInputs, output: Option<PathBuf>) -> Result<Executed, Error> {
    let grid = mu_grid(&inputs)?;
    let designs = match inputs.preset {
        Some(figure) => {
            let overrides = FigureOverrides {
                replicates: Some(inputs.replicates),
                seed: Some(inputs.seed),
                mu_grid: Some(grid),
                sigma_true: Some(inputs.sigma),
                method: Some(inputs.method),
                variance: Some(inputs.variance),
            };
            let mut designs = apcval_core::power::figure_designs(figure, &overrides)?;
            for d in &mut designs {
                d.sampling = inputs.sampling;
            }
            designs
        }
        None => {
            let risks = Risks {
                alpha: inputs.alpha,
                beta: inputs.beta,
                dr: inputs.dr,
            };
            let p = ttest_params(&risks, inputs.v.unwrap_or(inputs.sigma))?;
            let n = inputs.n.unwrap_or_else(|| planned_n(inputs.regime, &p).0);
            let mut d = SimDesign::new(
                inputs.regime,
                p,
                n,
                grid,
                inputs.sigma,
                inputs.replicates,
                inputs.seed,
            )?;
            d.method = inputs.method;
            d.variance = inputs.variance;
            d.sampling = inputs.sampling;
            vec![d]
        }
    };
    for d in &designs {
        d.validate()?;
    }
    let curves = designs
        .iter()
        .map(parallel::run)
        .collect::<apcval_core::Result<Vec<_>>>()?;

    let mut csv = Vec::new();
    curves_csv::write_curves(&mut csv, &curves)?;
    let csv = String::from_utf8(csv).expect("csv writer emits utf-8");
    if let Some(path) = output {
        std::fs::write(&path, &csv).map_err(|source| Error::Io { path, source })?;
    }
    let report = Report::new(Body::Simulate {
        inputs,
        result: SimulateResult { curves },
    });
    Ok((report, 0, Some(csv)))
}

fn scan(inputs: ScanInputs) -> Result<Executed, Error> {
    let alpha = open_probability("alpha", inputs.alpha)?;
    let beta = open_probability("beta", inputs.beta)?;
    if let Some(v_hat) = inputs.v_hat {
        if !(v_hat.is_finite() && v_hat > 0.0) {
            return Err(Error::Usage("--v-hat must be finite and positive".into()));
        }
    }
    let ratio = stability_scan(alpha, beta, inputs.lo, inputs.hi, inputs.step)?;
    let planned_v_onset = match (ratio, inputs.v_hat) {
        (ExtendedReal::Finite(r), Some(v_hat)) => Some(r * v_hat),
        _ => None,
    };
    let report = Report::new(Body::StabilityScan {
        inputs,
        result: ScanResult {
            critical_ratio: ratio,
            planned_v_onset,
        },
    });
    Ok((report, 0, None))
}

fn open_probability(name: &'static str, value: f64) -> Result<Probability, Error> {
    if value > 0.0 && value < 1.0 {
        Ok(Probability::new(value)?)
    } else {
        Err(apcval_core::Error::InvalidParameter {
            name,
            value,
            reason: "must lie strictly between 0 and 1",
        }
        .into())
    }
}
