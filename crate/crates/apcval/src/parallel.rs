//! Rayon driver for the Monte Carlo curves.
//!
//! Replicates are independent streams keyed by `(seed, μ index, replicate)`
//! and only integer pass counts are combined, so the result is bit-identical
//! to [`apcval_core::pass_probability_mc`] for any thread count.

use rayon::prelude::*;

use apcval_core::power::{count_passes, replicate_passes, run_design, Method};
use apcval_core::{Figure, PowerCurve, Result, SimDesign};

/// Replicates handed to one task.
const CHUNK: u64 = 2048;

pub fn pass_probability_mc(design: &SimDesign) -> Result<PowerCurve> {
    design.validate()?;
    let counts: Vec<u64> = (0..design.mu_grid.len())
        .into_par_iter()
        .map(|i| {
            if design.replicates <= CHUNK {
                return count_passes(design, i);
            }
            let chunks = design.replicates.div_ceil(CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let end = ((c + 1) * CHUNK).min(design.replicates);
                    (c * CHUNK..end)
                        .filter(|&r| replicate_passes(design, i, r))
                        .count() as u64
                })
                .sum()
        })
        .collect();
    Ok(PowerCurve::from_counts(design.clone(), &counts))
}

pub fn run(design: &SimDesign) -> Result<PowerCurve> {
    match design.method {
        Method::MonteCarlo => pass_probability_mc(design),
        Method::ClosedForm => run_design(design),
    }
}

pub fn figure_curves(
    figure: Figure,
    overrides: &apcval_core::power::FigureOverrides,
) -> Result<Vec<PowerCurve>> {
    apcval_core::power::figure_designs(figure, overrides)?
        .iter()
        .map(run)
        .collect()
}
