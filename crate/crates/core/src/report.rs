//! Inequality verdicts and the time-series checks built on them.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One measured inequality `lhs ≤ rhs` (or an informational ratio).
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub context: Vec<(String, String)>,
}

/// `lhs / rhs`, with `0/0 = 0` and `x/0 = ∞` for `x > 0`.
pub fn safe_ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs <= 0.0 && rhs == 0.0 {
        0.0
    } else if rhs < 0.0 && lhs <= 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    }
}

impl EstimateReport {
    /// Passes iff `lhs ≤ rhs · (1 + tolerance)`.
    pub fn inequality(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        constant: f64,
        tolerance: f64,
    ) -> Self {
        let ok = lhs.is_finite() && rhs.is_finite() && lhs <= rhs + tolerance * rhs.abs();
        Self {
            name: name.into(),
            lhs,
            rhs,
            constant,
            ratio: safe_ratio(lhs, rhs),
            tolerance,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            context: Vec::new(),
        }
    }

    /// Records a ratio without a verdict.
    pub fn informational(name: impl Into<String>, lhs: f64, rhs: f64, constant: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            constant,
            ratio: safe_ratio(lhs, rhs),
            tolerance: 0.0,
            verdict: Verdict::Info,
            context: Vec::new(),
        }
    }

    pub fn with_context(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.context.push((key.into(), value.to_string()));
        self
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    /// `check=<name> lhs=<v> rhs=<v> constant=<v> ratio=<v> verdict=<v>`.
    pub fn machine_line(&self) -> String {
        format!(
            "check={} lhs={} rhs={} constant={} ratio={} verdict={}",
            self.name,
            format_value(self.lhs),
            format_value(self.rhs),
            format_value(self.constant),
            format_value(self.ratio),
            self.verdict
        )
    }
}

impl fmt::Display for EstimateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.machine_line())?;
        for (k, v) in &self.context {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Composite trapezoid rule over a sampled time series.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

fn check_lengths(times: &[f64], series: &[&[f64]]) -> Result<()> {
    if series.iter().any(|s| s.len() != times.len()) {
        return Err(Error::InvalidArgument(
            "time series lengths do not match".into(),
        ));
    }
    Ok(())
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Monotonicity of `m`: `lhs = max(0, -min_k (m_{k+1} - m_k)/Δt_k)` against
/// `rhs = rel_tol · max|m|`.
pub fn monotonicity_report(
    name: &str,
    times: &[f64],
    m: &[f64],
    rel_tol: f64,
) -> Result<EstimateReport> {
    check_lengths(times, &[m])?;
    let worst = times
        .windows(2)
        .zip(m.windows(2))
        .map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0]))
        .fold(f64::INFINITY, f64::min);
    let lhs = if worst.is_finite() { (-worst).max(0.0) } else { 0.0 };
    let rhs = rel_tol * max_abs(m);
    Ok(EstimateReport::inequality(name, lhs, rhs, rel_tol, 0.0)
        .with_context("min_rate", format_value(if worst.is_finite() { worst } else { 0.0 })))
}

/// Pointwise lower bound `dm/dt ≥ constant · integral` using centered
/// differences at interior samples. The reported pair is the sample with the
/// largest `constant · integral / (dm/dt)`.
pub fn pointwise_report(
    name: &str,
    times: &[f64],
    m: &[f64],
    integral: &[f64],
    constant: f64,
    rel_tol: f64,
) -> Result<EstimateReport> {
    check_lengths(times, &[m, integral])?;
    let mut worst: Option<(f64, f64, f64, usize)> = None;
    for k in 1..times.len().saturating_sub(1) {
        let rate = (m[k + 1] - m[k - 1]) / (times[k + 1] - times[k - 1]);
        let bound = constant * integral[k];
        let r = if rate > 0.0 {
            bound / rate
        } else if rate == 0.0 && bound == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if worst.is_none_or(|w| r > w.2) {
            worst = Some((bound, rate, r, k));
        }
    }
    let (lhs, rhs, _, k) = worst.unwrap_or((0.0, 0.0, 0.0, 0));
    Ok(EstimateReport::inequality(name, lhs, rhs, constant, rel_tol)
        .with_context("t", format_value(times.get(k).copied().unwrap_or(0.0))))
}

/// Time-integrated bound `constant · ∫ integral dt ≤ m(T) - m(0) + rel_tol · max|m|`.
pub fn ftc_report(
    name: &str,
    times: &[f64],
    m: &[f64],
    integral: &[f64],
    constant: f64,
    rel_tol: f64,
) -> Result<EstimateReport> {
    check_lengths(times, &[m, integral])?;
    let lhs = constant * trapezoid(times, integral);
    let increase = match (m.first(), m.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let rhs = increase + rel_tol * max_abs(m);
    Ok(EstimateReport::inequality(name, lhs, rhs, constant, 0.0)
        .with_context("increase", format_value(increase))
        .with_context("gap", format_value(increase - lhs)))
}
