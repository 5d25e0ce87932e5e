//! Least-squares fits of `log(mech_energy)` against time.

use super::DiagnosticsRecord;
use crate::error::{Error, Result};

pub const MIN_RECORDS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub window_rates: Vec<f64>,
    /// One-sided sign-test confidence that the rate is negative.
    pub confidence: f64,
}

impl DecayFit {
    pub fn from_records(records: &[DiagnosticsRecord], windows: usize) -> Result<Self> {
        let rate = decay_rate(records)?;
        let window_rates = windowed_decay_rates(records, windows)?;
        let negative = window_rates.iter().filter(|r| **r < 0.0).count();
        Ok(DecayFit {
            rate,
            confidence: sign_test_confidence(negative, window_rates.len()),
            window_rates,
        })
    }
}

fn slope(records: &[DiagnosticsRecord]) -> Result<f64> {
    let mut pts = Vec::with_capacity(records.len());
    for r in records {
        if !(r.mech_energy > 0.0) {
            return Err(Error::Domain(format!(
                "mechanical energy {} at t = {} is not positive",
                r.mech_energy, r.t
            )));
        }
        pts.push((r.t, r.mech_energy.ln()));
    }
    let m = pts.len() as f64;
    let tbar = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ybar = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - tbar) * (y - ybar)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - tbar) * (t - tbar)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("records span no time".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of `log(mech_energy)` over the last half of the records.
pub fn decay_rate(records: &[DiagnosticsRecord]) -> Result<f64> {
    if records.len() < MIN_RECORDS {
        return Err(Error::Precondition(format!(
            "decay fit needs at least {MIN_RECORDS} records, got {}",
            records.len()
        )));
    }
    slope(&records[records.len() / 2..])
}

/// Slopes over `windows` consecutive, equally sized chunks of the whole record.
pub fn windowed_decay_rates(records: &[DiagnosticsRecord], windows: usize) -> Result<Vec<f64>> {
    if windows == 0 || records.len() < 2 * windows || records.len() < MIN_RECORDS {
        return Err(Error::Precondition(format!(
            "{} records cannot be split into {windows} windows",
            records.len()
        )));
    }
    let size = records.len() / windows;
    (0..windows)
        .map(|w| slope(&records[w * size..(w + 1) * size]))
        .collect()
}

/// `1 - P(X ≥ negative)` for `X ~ Binomial(total, 1/2)`.
pub fn sign_test_confidence(negative: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let mut tail = 0.0;
    let mut binom = 1.0f64;
    for j in 0..=total {
        if j > 0 {
            binom = binom * (total - j + 1) as f64 / j as f64;
        }
        if j >= negative {
            tail += binom;
        }
    }
    1.0 - tail / 2f64.powi(total as i32)
}
