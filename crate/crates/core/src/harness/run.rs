//! Scenario execution and artifact emission.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolve::{evolve, DiagnosticTrace, Observer};
use crate::fields::{radial_weight_at, VectorFieldSpec};
use crate::grid::{ComplexField, SpectralGrid};
use crate::harness::scenario::{Check, Scenario};
use crate::interaction::{
    angular_average_weighted_l4, interaction_action_1d, LineAction2d,
    monotonicity_and_ftc_check, tensor_residual_check_4d, InteractionKind, PairConvolution3d,
    CH_H1, CH_HHALF_SQ, CH_L4, CH_L8, CH_LINE_L4, CH_MASS, CH_M_DIAG, CH_M_LINE, CH_M_PAIR,
    CH_WEIGHTED_L4, MONOTONICITY_TOL,
};
use crate::laws::{conservation_residuals_with, conserved_integrals_with};
use crate::report::{format_value, max_abs, monotonicity_report, EstimateReport, Verdict};
use crate::single::{
    center_density, lin_strauss_check, morawetz_action, virial_rhs_terms_with, weighted_integral,
    CH_CENTER_DENSITY, CH_WEIGHTED_P1,
};

pub const CH_ENERGY: &str = "energy";
pub const CH_M_RADIAL: &str = "M_radial";
pub const CH_VIRIAL_BILAPLACIAN: &str = "virial_bilaplacian";
pub const CH_VIRIAL_NONLINEAR: &str = "virial_nonlinear";
pub const CH_VIRIAL_SIGMA: &str = "virial_sigma";
const MOMENTUM_CHANNELS: [&str; 3] = ["px", "py", "pz"];

/// Relative mass drift allowed by the conservation check.
pub const MASS_DRIFT_TOL: f64 = 1e-10;
/// Momentum drift allowed per unit of `1 + |p(0)|`.
pub const MOMENTUM_DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Channel {
    Mass,
    Energy,
    Momentum(usize),
    HhalfSq,
    H1,
    MRadial,
    VirialBilaplacian,
    VirialNonlinear,
    VirialSigma,
    CenterDensity,
    WeightedLp1,
    MPair,
    L4,
    MLine,
    LineL4,
    WeightedL4,
    MDiag,
    L8,
}

impl Channel {
    fn name(self) -> &'static str {
        match self {
            Channel::Mass => CH_MASS,
            Channel::Energy => CH_ENERGY,
            Channel::Momentum(a) => MOMENTUM_CHANNELS[a],
            Channel::HhalfSq => CH_HHALF_SQ,
            Channel::H1 => CH_H1,
            Channel::MRadial => CH_M_RADIAL,
            Channel::VirialBilaplacian => CH_VIRIAL_BILAPLACIAN,
            Channel::VirialNonlinear => CH_VIRIAL_NONLINEAR,
            Channel::VirialSigma => CH_VIRIAL_SIGMA,
            Channel::CenterDensity => CH_CENTER_DENSITY,
            Channel::WeightedLp1 => CH_WEIGHTED_P1,
            Channel::MPair => CH_M_PAIR,
            Channel::L4 => CH_L4,
            Channel::MLine => CH_M_LINE,
            Channel::LineL4 => CH_LINE_L4,
            Channel::WeightedL4 => CH_WEIGHTED_L4,
            Channel::MDiag => CH_M_DIAG,
            Channel::L8 => CH_L8,
        }
    }
}

fn channels_for(scenario: &Scenario) -> Vec<Channel> {
    let mut out = vec![Channel::Mass, Channel::Energy];
    out.extend((0..scenario.dim).map(Channel::Momentum));
    for check in &scenario.checks {
        let extra: &[Channel] = match check {
            Check::Conservation | Check::LocalLaws | Check::TensorResidual => &[],
            Check::Morawetz => &[
                Channel::HhalfSq,
                Channel::MRadial,
                Channel::VirialBilaplacian,
                Channel::VirialNonlinear,
                Channel::VirialSigma,
            ],
            Check::LinStrauss => &[Channel::HhalfSq, Channel::CenterDensity, Channel::WeightedLp1],
            Check::Pair => &[Channel::HhalfSq, Channel::MPair, Channel::L4],
            Check::Line => &[
                Channel::HhalfSq,
                Channel::MLine,
                Channel::LineL4,
                Channel::WeightedL4,
            ],
            Check::Diag => &[Channel::HhalfSq, Channel::H1, Channel::MDiag, Channel::L8],
        };
        for c in extra {
            if !out.contains(c) {
                out.push(*c);
            }
        }
    }
    out
}

/// Computes every channel of a scenario from one snapshot.
struct ScenarioObserver<'a> {
    scenario: &'a Scenario,
    channels: Vec<Channel>,
    epsilon: f64,
    radial: Option<VectorFieldSpec>,
    pair: Option<PairConvolution3d>,
    line: Option<LineAction2d>,
}

impl<'a> ScenarioObserver<'a> {
    fn new(scenario: &'a Scenario, grid: &SpectralGrid) -> Result<Self> {
        let channels = channels_for(scenario);
        let epsilon = scenario.epsilon_value();
        let needs_radial = channels.iter().any(|c| {
            matches!(
                c,
                Channel::MRadial
                    | Channel::VirialBilaplacian
                    | Channel::VirialNonlinear
                    | Channel::VirialSigma
                    | Channel::CenterDensity
            )
        });
        let radial = if needs_radial {
            Some(radial_weight_at(&scenario.weight_center, epsilon)?)
        } else {
            None
        };
        let pair = if channels.contains(&Channel::MPair) {
            Some(PairConvolution3d::new(grid, epsilon)?)
        } else {
            None
        };
        let line = if channels.contains(&Channel::MLine) {
            Some(LineAction2d::new(grid, &scenario.line, epsilon)?)
        } else {
            None
        };
        Ok(ScenarioObserver {
            scenario,
            channels,
            epsilon,
            radial,
            pair,
            line,
        })
    }

    fn compute(&self, field: &ComplexField) -> Result<Vec<f64>> {
        let s = self.scenario;
        let eps = self.epsilon;
        let conserved = conserved_integrals_with(field, s.p, s.nonlinearity);
        let virial = match &self.radial {
            Some(spec) if self.channels.contains(&Channel::VirialBilaplacian) => {
                Some(virial_rhs_terms_with(field, spec, s.p, s.nonlinearity)?)
            }
            _ => None,
        };
        let power = |q: i32| -> f64 {
            field.grid().cell_volume()
                * field.values().iter().map(|u| u.norm_sqr().powi(q)).sum::<f64>()
        };
        let center2 = || [s.weight_center[0], s.weight_center[1]];
        self.channels
            .iter()
            .map(|c| -> Result<f64> {
                Ok(match c {
                    Channel::Mass => conserved.mass,
                    Channel::Energy => conserved.energy,
                    Channel::Momentum(a) => conserved.momentum[*a],
                    Channel::HhalfSq => field.sobolev_seminorm(0.5)?.powi(2),
                    Channel::H1 => field.sobolev_seminorm(1.0)?,
                    Channel::MRadial => morawetz_action(field, self.radial.as_ref().unwrap())?,
                    Channel::VirialBilaplacian => virial.as_ref().unwrap().bilaplacian_term,
                    Channel::VirialNonlinear => virial.as_ref().unwrap().nonlinear_term,
                    Channel::VirialSigma => virial.as_ref().unwrap().sigma_term,
                    Channel::CenterDensity => center_density(field, self.radial.as_ref().unwrap())?,
                    Channel::WeightedLp1 => {
                        weighted_integral(field, &s.weight_center, s.p + 1.0, eps)
                    }
                    Channel::MPair => self.pair.as_ref().unwrap().action(field)?,
                    Channel::L4 => power(2),
                    Channel::MLine => self.line.as_ref().unwrap().action(field)?,
                    Channel::LineL4 => crate::interaction::line_l4(field, &s.line)?,
                    Channel::WeightedL4 => {
                        angular_average_weighted_l4(field, center2(), s.n_theta, eps)?
                    }
                    Channel::MDiag => interaction_action_1d(field, eps)?,
                    Channel::L8 => power(4),
                })
            })
            .collect()
    }
}

impl Observer for ScenarioObserver<'_> {
    fn channels(&self) -> Vec<String> {
        self.channels.iter().map(|c| c.name().to_string()).collect()
    }

    /// Channels that cannot be evaluated are recorded as NaN, which fails
    /// every check that reads them.
    fn observe(&self, _t: f64, field: &ComplexField) -> Vec<f64> {
        self.compute(field)
            .unwrap_or_else(|_| vec![f64::NAN; self.channels.len()])
    }
}

/// Artifacts of one scenario run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub scenario: Scenario,
    pub epsilon: f64,
    pub trace: DiagnosticTrace,
    pub reports: Vec<EstimateReport>,
    /// Set when the evolution stopped early or a check could not be evaluated.
    pub aborted: Option<String>,
    pub steps: usize,
    /// `(initial, final)` fraction of mass in the outer shell of the box.
    pub boundary_mass: (f64, f64),
    /// `(initial, final)` spectral energy fraction in the top third of the band.
    pub spectral_tail: (f64, f64),
}

impl RunOutcome {
    pub fn count(&self, verdict: Verdict) -> usize {
        self.reports.iter().filter(|r| r.verdict == verdict).count()
    }

    /// Failed reports plus one for an aborted run.
    pub fn failures(&self) -> usize {
        self.count(Verdict::Fail) + usize::from(self.aborted.is_some())
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn report(&self, name: &str) -> Option<&EstimateReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    /// Header `t,<channels>` then one row per recorded time.
    pub fn csv(&self) -> String {
        trace_csv(&self.trace)
    }

    pub fn report_lines(&self) -> String {
        self.reports
            .iter()
            .map(|r| r.machine_line() + "\n")
            .collect()
    }

    pub fn summary(&self) -> String {
        let s = &self.scenario;
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}", s.name);
        let _ = writeln!(
            out,
            "dim={} n_points={} box_length={} dt={} t_final={} stride={} p={} nonlinearity={:?} epsilon={}",
            s.dim,
            s.n_points,
            s.box_length,
            s.dt,
            s.t_final,
            s.observer_stride,
            s.p,
            s.nonlinearity,
            format_value(self.epsilon)
        );
        let checks: Vec<&str> = s.checks.iter().map(|c| c.name()).collect();
        let _ = writeln!(out, "checks: {}", checks.join(", "));
        let _ = writeln!(out, "steps={} samples={}", self.steps, self.trace.len());
        let _ = writeln!(
            out,
            "boundary_mass_fraction initial={} final={}",
            format_value(self.boundary_mass.0),
            format_value(self.boundary_mass.1)
        );
        let _ = writeln!(
            out,
            "spectral_tail_fraction initial={} final={}",
            format_value(self.spectral_tail.0),
            format_value(self.spectral_tail.1)
        );
        for r in &self.reports {
            let _ = writeln!(out, "  {r}");
        }
        if let Some(reason) = &self.aborted {
            let _ = writeln!(out, "aborted: {reason}");
        }
        let _ = writeln!(
            out,
            "passed={} failed={} info={}",
            self.count(Verdict::Pass),
            self.failures(),
            self.count(Verdict::Info)
        );
        out
    }

    /// Writes `trace.csv`, `reports.txt` and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trace.csv"), self.csv())?;
        std::fs::write(dir.join("reports.txt"), self.report_lines())?;
        std::fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }
}

/// CSV with 17 significant digits.
pub fn trace_csv(trace: &DiagnosticTrace) -> String {
    let mut out = String::from("t");
    for name in trace.channels.keys() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, t) in trace.times.iter().enumerate() {
        out.push_str(&format_value(*t));
        for col in trace.channels.values() {
            out.push(',');
            out.push_str(&format_value(col[i]));
        }
        out.push('\n');
    }
    out
}

fn relative_drift(series: &[f64]) -> f64 {
    let Some(&first) = series.first() else {
        return 0.0;
    };
    let worst = series.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
    if first == 0.0 {
        worst
    } else {
        worst / first.abs()
    }
}

fn conservation_reports(scenario: &Scenario, trace: &DiagnosticTrace) -> Result<Vec<EstimateReport>> {
    let mass = trace.channel(CH_MASS)?;
    let energy = trace.channel(CH_ENERGY)?;
    let mut p0 = 0.0f64;
    let mut drift = 0.0f64;
    let components: Vec<&[f64]> = (0..scenario.dim)
        .map(|a| trace.channel(MOMENTUM_CHANNELS[a]))
        .collect::<Result<_>>()?;
    for k in 0..trace.len() {
        let d2: f64 = components.iter().map(|c| (c[k] - c[0]).powi(2)).sum();
        drift = drift.max(d2.sqrt());
    }
    for c in &components {
        p0 += c[0] * c[0];
    }
    let p0 = p0.sqrt();
    let e0 = energy.first().copied().unwrap_or(0.0);
    let energy_drift = energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    Ok(vec![
        EstimateReport::inequality("mass-drift", relative_drift(mass), MASS_DRIFT_TOL, 1.0, 0.0),
        EstimateReport::inequality(
            "momentum-drift",
            drift,
            MOMENTUM_DRIFT_TOL * (1.0 + p0),
            MOMENTUM_DRIFT_TOL,
            0.0,
        ),
        EstimateReport::informational("energy-drift", energy_drift, e0.abs(), 1.0),
    ])
}

fn midpoint_snapshots(trace: &DiagnosticTrace) -> Result<[&ComplexField; 3]> {
    match trace.snapshots.as_slice() {
        [a, b, c, ..] => Ok([&a.1, &b.1, &c.1]),
        _ => Err(Error::InvalidArgument("three midpoint snapshots were not recorded".into())),
    }
}

fn morawetz_reports(trace: &DiagnosticTrace) -> Result<Vec<EstimateReport>> {
    let t = &trace.times;
    let m = trace.channel(CH_M_RADIAL)?;
    let terms: Vec<&[f64]> = [CH_VIRIAL_BILAPLACIAN, CH_VIRIAL_NONLINEAR, CH_VIRIAL_SIGMA]
        .iter()
        .map(|c| trace.channel(c))
        .collect::<Result<_>>()?;
    let most_negative = terms
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |acc, v| acc.max(-v));
    let scale = terms.iter().map(|c| max_abs(c)).fold(0.0, f64::max);
    let total: Vec<f64> = (0..t.len())
        .map(|k| terms.iter().map(|c| c[k]).sum())
        .collect();
    let mut rate_gap = 0.0f64;
    for k in 1..t.len().saturating_sub(1) {
        let rate = (m[k + 1] - m[k - 1]) / (t[k + 1] - t[k - 1]);
        rate_gap = rate_gap.max((rate - total[k]).abs());
    }
    let hhalf = trace.channel(CH_HHALF_SQ)?;
    Ok(vec![
        monotonicity_report("monotonicity-radial", t, m, MONOTONICITY_TOL)?,
        EstimateReport::inequality("virial-terms-nonnegative", most_negative, 1e-10 * scale, 1.0, 0.0),
        EstimateReport::informational("virial-rate", rate_gap, max_abs(&total), 1.0),
        EstimateReport::informational(
            "hardy-ratio",
            max_abs(m),
            hhalf.iter().cloned().fold(0.0, f64::max),
            1.0,
        ),
    ])
}

fn check_reports(
    scenario: &Scenario,
    check: Check,
    trace: &DiagnosticTrace,
    epsilon: f64,
) -> Result<Vec<EstimateReport>> {
    match check {
        Check::Conservation => conservation_reports(scenario, trace),
        Check::LocalLaws => {
            let snaps = midpoint_snapshots(trace)?;
            let r = conservation_residuals_with(snaps, scenario.dt, scenario.p, scenario.nonlinearity)?;
            Ok(vec![
                EstimateReport::informational("mass-law-residual", r.mass_residual, r.mass_scale, 1.0),
                EstimateReport::informational(
                    "momentum-law-residual",
                    r.momentum_residual,
                    r.momentum_scale,
                    1.0,
                ),
            ])
        }
        Check::Morawetz => morawetz_reports(trace),
        Check::LinStrauss => Ok(vec![lin_strauss_check(trace, scenario.p)?]),
        Check::Pair => monotonicity_and_ftc_check(trace, InteractionKind::Pair3d),
        Check::Line => monotonicity_and_ftc_check(trace, InteractionKind::Line2d),
        Check::Diag => monotonicity_and_ftc_check(trace, InteractionKind::Diag1d),
        Check::TensorResidual => {
            let s = midpoint_snapshots(trace)?;
            let r = tensor_residual_check_4d(s, s, scenario.dt, scenario.p, &scenario.line, epsilon)?;
            Ok(vec![EstimateReport::informational("tensor-residual", r.residual, r.scale, 1.0)])
        }
    }
}

/// Runs a validated scenario. Configuration problems are errors; a blown-up
/// evolution or an unevaluable check is recorded in the outcome instead.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutcome> {
    scenario.validate()?;
    let grid = scenario.grid()?;
    let initial = scenario.initial.build(&grid)?;
    let epsilon = scenario.epsilon_value();
    let observer = ScenarioObserver::new(scenario, &grid)?;
    let config = scenario.solver_config();
    let (trace, final_state, steps, mut aborted) = match evolve(&initial, &config, &[&observer]) {
        Ok(run) => (run.trace, Some(run.final_state), run.steps, None),
        Err(e) => {
            let steps = (e.partial.len().saturating_sub(1)) * scenario.observer_stride;
            (*e.partial, None, steps, Some(e.cause.to_string()))
        }
    };
    let mut reports = Vec::new();
    if aborted.is_none() {
        for &check in &scenario.checks {
            match check_reports(scenario, check, &trace, epsilon) {
                Ok(r) => reports.extend(r),
                Err(e) => {
                    aborted = Some(format!("check `{}` failed to evaluate: {e}", check.name()));
                    break;
                }
            }
        }
    }
    let last = final_state.as_ref().unwrap_or(&initial);
    Ok(RunOutcome {
        scenario: scenario.clone(),
        epsilon,
        trace,
        reports,
        aborted,
        steps,
        boundary_mass: (initial.boundary_mass_fraction(), last.boundary_mass_fraction()),
        spectral_tail: (initial.spectral_tail_fraction(), last.spectral_tail_fraction()),
    })
}
