use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `limit` is the last value; no extrapolation is claimed.
    Converged { limit: f64, achieved_tol: f64 },
    Diverging,
    Undetermined,
}

/// A monotone sequence of window values and what can be said about its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub values: Vec<f64>,
    pub direction: Direction,
    pub verdict: Verdict,
    /// Window radii the values were computed on, when known.
    pub windows: Vec<usize>,
}

impl LimitReport {
    pub fn with_windows(mut self, radii: &[usize]) -> Self {
        self.windows = radii.to_vec();
        self
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("reports are never empty")
    }

    pub fn converged(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Converged { limit, .. } => Some(limit),
            _ => None,
        }
    }

    pub fn is_diverging(&self) -> bool {
        self.verdict == Verdict::Diverging
    }

    /// Spread `max - min` of the trailing `k` values.
    pub fn tail_spread(&self, k: usize) -> f64 {
        let tail = &self.values[self.values.len().saturating_sub(k)..];
        let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// See [`monotone_limit_with_slack`]; the monotonicity slack is `1e-12`
/// relative to the magnitude of the values.
pub fn monotone_limit(values: &[f64], direction: Direction, tol: f64, threshold: f64) -> Result<LimitReport> {
    monotone_limit_with_slack(values, direction, tol, threshold, 1e-12)
}

/// Classifies a monotone sequence.
///
/// * `Converged` needs the last change below `tol` and a Cauchy check on the
///   trailing three values: either their spread is below `tol`, or the
///   increments contract and the geometric tail estimate is below `tol`.
/// * `Diverging` (increasing) needs the last value above `threshold` with the
///   last increment at least half the previous one. For a decreasing sequence
///   it means falling below `threshold` with the relative decrease sustained
///   in the same sense.
/// * Anything else is `Undetermined`.
pub fn monotone_limit_with_slack(
    values: &[f64],
    direction: Direction,
    tol: f64,
    threshold: f64,
    slack: f64,
) -> Result<LimitReport> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("limit of an empty sequence".into()));
    }
    for (i, w) in values.windows(2).enumerate() {
        let allowance = slack * w[0].abs().max(w[1].abs()).max(1.0);
        let bad = match direction {
            Direction::Increasing => w[1] < w[0] - allowance,
            Direction::Decreasing => w[1] > w[0] + allowance,
        };
        if bad {
            return Err(Error::NotMonotone { index: i + 1 });
        }
    }
    let verdict = classify(values, direction, tol, threshold);
    Ok(LimitReport { values: values.to_vec(), direction, verdict, windows: Vec::new() })
}

fn classify(v: &[f64], direction: Direction, tol: f64, threshold: f64) -> Verdict {
    let n = v.len();
    if n >= 3 {
        let d1 = (v[n - 2] - v[n - 3]).abs();
        let d2 = (v[n - 1] - v[n - 2]).abs();
        let spread = {
            let t = &v[n - 3..];
            t.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - t.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let tail = if d2 == 0.0 {
            0.0
        } else if d2 < d1 {
            let rho = d2 / d1;
            d2 * rho / (1.0 - rho)
        } else {
            f64::INFINITY
        };
        let cauchy = tail.min(spread);
        if d2 < tol && cauchy <= tol {
            return Verdict::Converged { limit: v[n - 1], achieved_tol: d2.max(cauchy) };
        }
    }
    if n >= 2 {
        let last = v[n - 1];
        let grows = match direction {
            Direction::Increasing => {
                let d2 = v[n - 1] - v[n - 2];
                let d1 = if n >= 3 { v[n - 2] - v[n - 3] } else { 0.0 };
                last > threshold && d2 > 0.0 && d2 >= 0.5 * d1
            }
            Direction::Decreasing => {
                let rel = |a: f64, b: f64| if a > 0.0 { (a - b) / a } else { 0.0 };
                let r2 = rel(v[n - 2], v[n - 1]);
                let r1 = if n >= 3 { rel(v[n - 3], v[n - 2]) } else { 0.0 };
                last < threshold && r2 > 0.0 && r2 >= 0.5 * r1
            }
        };
        if grows {
            return Verdict::Diverging;
        }
    }
    Verdict::Undetermined
}
