//! One run per value of a numeric parameter, with observed orders.

use std::fmt::Write as _;
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::harness::config::Config;
use crate::harness::run::{run_scenario, RunOutcome};
use crate::harness::scenario::{EpsilonPolicy, Scenario, SWEEPABLE_KEYS};
use crate::report::{format_value, EstimateReport};

#[derive(Debug)]
pub struct SweepPoint {
    pub value: String,
    /// Numeric abscissa (`2h` sweeps by its multiplier).
    pub abscissa: f64,
    pub outcome: std::result::Result<RunOutcome, String>,
}

#[derive(Debug)]
pub struct SweepResult {
    pub axis: String,
    pub points: Vec<SweepPoint>,
}

/// `ln(q_prev / q) / ln(x_prev / x)`: the exponent `a` in `q ∝ x^a`.
pub fn observed_order(x_prev: f64, q_prev: f64, x: f64, q: f64) -> Option<f64> {
    if x_prev > 0.0 && x > 0.0 && x_prev != x && q_prev > 0.0 && q > 0.0 {
        Some((q_prev / q).ln() / (x_prev / x).ln())
    } else {
        None
    }
}

fn abscissa(axis: &str, value: &str) -> Result<f64> {
    let parsed = if axis == "weight.epsilon" {
        value.parse::<EpsilonPolicy>().map(EpsilonPolicy::magnitude)
    } else {
        value
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("`{value}` is not numeric"))
    };
    parsed.map_err(|message| Error::Config {
        key: axis.to_string(),
        message,
    })
}

/// Runs the base configuration once per value of `axis`. Per-run failures are
/// recorded, not propagated.
pub fn sweep(base: &Config, axis: &str, values: &[String]) -> Result<SweepResult> {
    if !SWEEPABLE_KEYS.contains(&axis) {
        return Err(Error::Config {
            key: axis.to_string(),
            message: format!("not sweepable (sweepable: {})", SWEEPABLE_KEYS.join(", ")),
        });
    }
    if values.is_empty() {
        return Err(Error::Config {
            key: axis.to_string(),
            message: "no sweep values".into(),
        });
    }
    let abscissae = values
        .iter()
        .map(|v| abscissa(axis, v))
        .collect::<Result<Vec<f64>>>()?;
    let points = values
        .iter()
        .zip(abscissae)
        .map(|(value, x)| {
            let outcome = (|| {
                let mut config = base.clone();
                config.set(axis, value)?;
                run_scenario(&Scenario::from_config(&config)?)
            })()
            .map_err(|e| e.to_string());
            SweepPoint {
                value: value.clone(),
                abscissa: x,
                outcome,
            }
        })
        .collect();
    Ok(SweepResult {
        axis: axis.to_string(),
        points,
    })
}

impl SweepResult {
    /// Failed checks across all runs plus errored runs.
    pub fn failures(&self) -> usize {
        self.points
            .iter()
            .map(|p| match &p.outcome {
                Ok(o) => o.failures(),
                Err(_) => 1,
            })
            .sum()
    }

    /// Report `name` from every successful run, in sweep order.
    pub fn series(&self, name: &str) -> Vec<(f64, &EstimateReport)> {
        self.points
            .iter()
            .filter_map(|p| {
                let o = p.outcome.as_ref().ok()?;
                Some((p.abscissa, o.report(name)?))
            })
            .collect()
    }

    /// Observed orders of `lhs` of report `name` between successive runs.
    pub fn orders(&self, name: &str) -> Vec<Option<f64>> {
        self.series(name)
            .windows(2)
            .map(|w| observed_order(w[0].0, w[0].1.lhs, w[1].0, w[1].1.lhs))
            .collect()
    }

    /// One line per (check, value) with the observed order of `lhs` against
    /// the previous value.
    pub fn table(&self) -> String {
        let mut by_check: IndexMap<&str, Vec<(&SweepPoint, &EstimateReport)>> = IndexMap::new();
        let mut out = String::new();
        for p in &self.points {
            match &p.outcome {
                Ok(o) => {
                    for r in &o.reports {
                        by_check.entry(r.name.as_str()).or_default().push((p, r));
                    }
                    if let Some(reason) = &o.aborted {
                        let _ = writeln!(out, "axis={} value={} aborted={reason}", self.axis, p.value);
                    }
                }
                Err(e) => {
                    let _ = writeln!(out, "axis={} value={} error={e}", self.axis, p.value);
                }
            }
        }
        for (name, rows) in by_check {
            let mut prev: Option<(f64, f64)> = None;
            for (p, r) in rows {
                let order = prev
                    .and_then(|(x0, q0)| observed_order(x0, q0, p.abscissa, r.lhs))
                    .map(format_value)
                    .unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "check={name} axis={} value={} lhs={} rhs={} ratio={} verdict={} order={order}",
                    self.axis,
                    p.value,
                    format_value(r.lhs),
                    format_value(r.rhs),
                    format_value(r.ratio),
                    r.verdict
                );
                prev = Some((p.abscissa, r.lhs));
            }
        }
        out
    }

    /// Writes each run under `dir/<axis>=<value>/` and the table to `dir/sweep.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for p in &self.points {
            if let Ok(o) = &p.outcome {
                o.write(&dir.join(format!("{}={}", self.axis, p.value)))?;
            }
        }
        std::fs::write(dir.join("sweep.txt"), self.table())?;
        Ok(())
    }
}
