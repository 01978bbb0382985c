//! Stop-door events, relative differences and the sufficient statistics
//! every admission test consumes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Passenger stream of a stop-door event. Each stream is validated on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    Boarding,
    Alighting,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Boarding => "boarding",
            Direction::Alighting => "alighting",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "boarding" => Ok(Direction::Boarding),
            "alighting" => Ok(Direction::Alighting),
            other => Err(alloc::format!(
                "unknown direction `{other}` (expected boarding or alighting)"
            )),
        }
    }
}

/// One paired manual / automatic count at a door during a stop.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StopDoorEvent {
    pub stop_id: String,
    pub door_id: String,
    pub direction: Direction,
    /// Manual (ground truth) count.
    pub manual: u64,
    /// Count reported by the APC device.
    pub automatic: u64,
}

impl StopDoorEvent {
    pub fn new(
        stop_id: impl Into<String>,
        door_id: impl Into<String>,
        direction: Direction,
        manual: u64,
        automatic: u64,
    ) -> Self {
        StopDoorEvent {
            stop_id: stop_id.into(),
            door_id: door_id.into(),
            direction,
            manual,
            automatic,
        }
    }
}

/// Ordered events of a single direction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountSample {
    events: Vec<StopDoorEvent>,
}

impl CountSample {
    /// Rejects samples that mix boarding and alighting events.
    pub fn new(events: Vec<StopDoorEvent>) -> Result<Self> {
        if let Some(first) = events.first() {
            if events.iter().any(|e| e.direction != first.direction) {
                return Err(Error::MixedDirections);
            }
        }
        Ok(CountSample { events })
    }

    /// Keeps only the events of `direction`, preserving order.
    pub fn select(events: impl IntoIterator<Item = StopDoorEvent>, direction: Direction) -> Self {
        CountSample {
            events: events
                .into_iter()
                .filter(|e| e.direction == direction)
                .collect(),
        }
    }

    pub fn events(&self) -> &[StopDoorEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn direction(&self) -> Option<Direction> {
        self.events.first().map(|e| e.direction)
    }

    /// Mean manual count `M̄`.
    pub fn mean_manual(&self) -> Result<f64> {
        if self.events.is_empty() {
            return Err(Error::EmptySample);
        }
        let total: f64 = self.events.iter().map(|e| e.manual as f64).sum();
        Ok(total / self.events.len() as f64)
    }
}

/// `n`, `M̄`, `D̄` and `v̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleSummary {
    pub n: u64,
    pub m_bar: f64,
    pub d_bar: f64,
    pub v_hat: f64,
}

impl SampleSummary {
    pub fn new(n: u64, m_bar: f64, d_bar: f64, v_hat: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InsufficientSample {
                needed: 2,
                got: n as usize,
            });
        }
        if !(m_bar.is_finite() && m_bar >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "m_bar",
                value: m_bar,
                reason: "must be finite and non-negative",
            });
        }
        if !d_bar.is_finite() {
            return Err(Error::NonFinite(d_bar));
        }
        if !(v_hat.is_finite() && v_hat >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "v_hat",
                value: v_hat,
                reason: "must be finite and non-negative",
            });
        }
        Ok(SampleSummary {
            n,
            m_bar,
            d_bar,
            v_hat,
        })
    }

    /// Mean and `n - 1` standard deviation of `differences` (Welford).
    pub fn from_differences(differences: &[f64], m_bar: f64) -> Result<Self> {
        if differences.len() < 2 {
            return Err(Error::InsufficientSample {
                needed: 2,
                got: differences.len(),
            });
        }
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (k, &d) in differences.iter().enumerate() {
            let delta = d - mean;
            mean += delta / (k + 1) as f64;
            m2 += delta * (d - mean);
        }
        let variance = m2 / (differences.len() - 1) as f64;
        SampleSummary::new(
            differences.len() as u64,
            m_bar,
            mean,
            libm::sqrt(variance.max(0.0)),
        )
    }

    /// `|D̄|`.
    pub fn observed(&self) -> f64 {
        self.d_bar.abs()
    }

    /// `v̂ / √n`.
    pub fn standard_error(&self) -> f64 {
        self.v_hat / libm::sqrt(self.n as f64)
    }
}

/// `D_i = (K_i - M_i) / M̄`, in input order.
pub fn relative_differences(sample: &CountSample) -> Result<Vec<f64>> {
    let m_bar = sample.mean_manual()?;
    if m_bar == 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(sample
        .events
        .iter()
        .map(|e| (e.automatic as f64 - e.manual as f64) / m_bar)
        .collect())
}

pub fn summarize(sample: &CountSample) -> Result<SampleSummary> {
    if sample.len() < 2 {
        return Err(if sample.is_empty() {
            Error::EmptySample
        } else {
            Error::InsufficientSample {
                needed: 2,
                got: sample.len(),
            }
        });
    }
    let differences = relative_differences(sample)?;
    SampleSummary::from_differences(&differences, sample.mean_manual()?)
}

/// The motivating dataset: `n` boarding events of `m_per_event` passengers,
/// three of them miscounted by one, two and two passengers.
pub fn proof_of_concept_sample(n: usize, m_per_event: u64) -> Result<CountSample> {
    if n < 3 {
        return Err(Error::InsufficientSample { needed: 3, got: n });
    }
    if m_per_event == 0 {
        return Err(Error::InvalidParameter {
            name: "m_per_event",
            value: 0.0,
            reason: "must be positive",
        });
    }
    let errors = [1, 2, 2];
    let events = (0..n)
        .map(|i| {
            let extra = errors.get(i).copied().unwrap_or(0);
            StopDoorEvent::new(
                (i + 1).to_string(),
                "1",
                Direction::Boarding,
                m_per_event,
                m_per_event + extra,
            )
        })
        .collect();
    Ok(CountSample { events })
}
