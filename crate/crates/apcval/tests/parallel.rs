//! The rayon driver returns the same bits as the sequential core loop.

use apcval::parallel;
use apcval_core::power::{figure_designs, pass_probability_mc, FigureOverrides, Sampling};
use apcval_core::{Figure, Regime, SimDesign, TTestParams};

#[test]
fn parallel_matches_sequential_bit_for_bit() {
    let p = TTestParams::new(0.05, 0.025, 0.01, 0.15).unwrap();
    let grid: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.005).collect();
    for regime in Regime::ALL {
        // more replicates than one chunk, and not a multiple of it
        let d = SimDesign::new(regime, p, 1540, grid.clone(), 0.15, 5000, 99).unwrap();
        assert_eq!(
            parallel::pass_probability_mc(&d).unwrap(),
            pass_probability_mc(&d).unwrap()
        );
    }
    let mut d = SimDesign::new(Regime::RevisedTTest, p, 80, grid, 0.15, 700, 3).unwrap();
    d.sampling = Sampling::RawDraws;
    assert_eq!(
        parallel::pass_probability_mc(&d).unwrap(),
        pass_probability_mc(&d).unwrap()
    );
}

#[test]
fn thread_count_does_not_change_results() {
    let overrides = FigureOverrides {
        replicates: Some(3000),
        mu_grid: Some(vec![-0.01, 0.0, 0.004, 0.01]),
        ..FigureOverrides::default()
    };
    let designs = figure_designs(Figure::Fig2a, &overrides).unwrap();
    let on = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                designs
                    .iter()
                    .map(|d| parallel::run(d).unwrap())
                    .collect::<Vec<_>>()
            })
    };
    assert_eq!(on(1), on(4));
}
