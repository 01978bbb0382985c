//! Curve export: one row per (curve, μ).

use std::io::Write;

use apcval_core::PowerCurve;

use crate::error::{Error, Result};

pub const HEADER: [&str; 8] = [
    "mu",
    "pass_prob",
    "std_err",
    "regime",
    "n",
    "v_planned",
    "sigma_true",
    "seed",
];

pub fn write_curves<W: Write>(writer: W, curves: &[PowerCurve]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::Malformed {
        line: 0,
        message: e.to_string(),
    };
    wtr.write_record(HEADER).map_err(err)?;
    for curve in curves {
        let d = &curve.design;
        for p in &curve.points {
            wtr.write_record([
                p.mu.to_string(),
                p.pass_prob.to_string(),
                p.std_err.to_string(),
                d.regime.to_string(),
                d.n.to_string(),
                d.params.v.to_string(),
                d.sigma_true.to_string(),
                d.seed.to_string(),
            ])
            .map_err(err)?;
        }
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<writer>".into(),
        source,
    })
}
