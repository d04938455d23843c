//! Strang-split time integration of `i u_t - Δu + s|u|^{p-1}u = 0`.
//!
//! `s = +1` is the defocusing equation. Each step is
//! `N(dt/2) ∘ L(dt) ∘ N(dt/2)` where the nonlinear sub-flow
//! `u_t = i s |u|^{p-1} u` is the exact pointwise rotation
//! `u ← e^{i s |u|^{p-1} τ} u` and the linear sub-flow `u_t = -iΔu` is exact in
//! Fourier space, `c_k ← e^{i|k|² dt} c_k`.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Direction, SpectralGrid};

/// Sign of the power nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Nonlinearity {
    #[default]
    Defocusing,
    /// Negative control only.
    Focusing,
    /// Linear dynamics (the nonlinear coefficient is zero).
    Off,
}

impl Nonlinearity {
    pub fn coefficient(self) -> f64 {
        match self {
            Nonlinearity::Defocusing => 1.0,
            Nonlinearity::Focusing => -1.0,
            Nonlinearity::Off => 0.0,
        }
    }
}

impl std::str::FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "defocusing" => Ok(Nonlinearity::Defocusing),
            "focusing" => Ok(Nonlinearity::Focusing),
            "off" | "linear" => Ok(Nonlinearity::Off),
            other => Err(Error::InvalidArgument(format!("unknown nonlinearity `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Exponent of `|u|^{p-1}u`, `p ≥ 1`.
    pub p: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Steps between observer invocations.
    pub observer_stride: usize,
    pub nonlinearity: Nonlinearity,
    /// Step indices at which full snapshots are stored in the trace.
    pub snapshot_steps: BTreeSet<usize>,
}

impl SolverConfig {
    pub fn new(p: f64, dt: f64, t_final: f64, observer_stride: usize) -> Self {
        SolverConfig {
            p,
            dt,
            t_final,
            observer_stride,
            nonlinearity: Nonlinearity::Defocusing,
            snapshot_steps: BTreeSet::new(),
        }
    }

    pub fn with_nonlinearity(mut self, nonlinearity: Nonlinearity) -> Self {
        self.nonlinearity = nonlinearity;
        self
    }

    pub fn with_snapshots(mut self, steps: impl IntoIterator<Item = usize>) -> Self {
        self.snapshot_steps.extend(steps);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidArgument(format!("p must be >= 1, got {}", self.p)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.dt > self.t_final {
            return Err(Error::InvalidArgument("dt must not exceed t_final".into()));
        }
        if self.observer_stride == 0 {
            return Err(Error::InvalidArgument("observer_stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the run ends at `n_steps · dt`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round().max(1.0) as usize
    }
}

/// Exact nonlinear sub-flow for time `tau`: `u ← e^{i s |u|^{p-1} τ} u`.
pub fn nonlinear_substep(values: &mut [Complex64], tau: f64, p: f64, nonlinearity: Nonlinearity) {
    let coef = nonlinearity.coefficient() * tau;
    if coef == 0.0 {
        return;
    }
    let exponent = 0.5 * (p - 1.0);
    values.par_iter_mut().with_min_len(4096).for_each(|u| {
        let amp = u.norm_sqr().powf(exponent);
        *u *= Complex64::from_polar(1.0, coef * amp);
    });
}

/// Cached linear propagator `e^{i|k|² dt}` for repeated steps of one size.
#[derive(Clone, Debug)]
pub struct Stepper {
    grid: SpectralGrid,
    dt: f64,
    p: f64,
    nonlinearity: Nonlinearity,
    propagator: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: &SpectralGrid, dt: f64, p: f64, nonlinearity: Nonlinearity) -> Self {
        let propagator = (0..grid.len())
            .into_par_iter()
            .with_min_len(4096)
            .map(|i| Complex64::from_polar(1.0, grid.k_squared(i) * dt))
            .collect();
        Stepper {
            grid: grid.clone(),
            dt,
            p,
            nonlinearity,
            propagator,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One Strang step in place. Returns `false` if the state became non-finite.
    pub fn step(&self, values: &mut [Complex64]) -> bool {
        nonlinear_substep(values, 0.5 * self.dt, self.p, self.nonlinearity);
        self.grid.transform_in_place(values, Direction::Forward);
        values
            .par_iter_mut()
            .with_min_len(4096)
            .zip(self.propagator.par_iter())
            .for_each(|(c, e)| *c *= e);
        self.grid.transform_in_place(values, Direction::Inverse);
        nonlinear_substep(values, 0.5 * self.dt, self.p, self.nonlinearity);
        values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// A single Strang step. Negative `dt` steps backward (each sub-flow is exactly invertible).
pub fn strang_step(
    state: &ComplexField,
    dt: f64,
    p: f64,
    nonlinearity: Nonlinearity,
) -> Result<ComplexField> {
    if !(dt != 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be finite and nonzero, got {dt}")));
    }
    let stepper = Stepper::new(state.grid(), dt, p, nonlinearity);
    let mut values = state.values().to_vec();
    if !stepper.step(&mut values) {
        return Err(Error::NonFinite { step: 1, time: dt });
    }
    Ok(ComplexField::from_trusted(state.grid(), values))
}

/// A named set of scalar diagnostics evaluated on read-only snapshots.
pub trait Observer: Sync {
    fn channels(&self) -> Vec<String>;
    fn observe(&self, t: f64, field: &ComplexField) -> Vec<f64>;
}

/// Adapter turning a closure into a single-channel observer.
pub struct FnObserver<F> {
    name: String,
    f: F,
}

impl<F> FnObserver<F>
where
    F: Fn(&ComplexField) -> f64 + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnObserver { name: name.into(), f }
    }
}

impl<F> Observer for FnObserver<F>
where
    F: Fn(&ComplexField) -> f64 + Sync,
{
    fn channels(&self) -> Vec<String> {
        vec![self.name.clone()]
    }

    fn observe(&self, _t: f64, field: &ComplexField) -> Vec<f64> {
        vec![(self.f)(field)]
    }
}

/// Time series of named scalar channels plus optional stored snapshots.
#[derive(Clone, Debug, Default)]
pub struct DiagnosticTrace {
    pub times: Vec<f64>,
    pub channels: IndexMap<String, Vec<f64>>,
    pub snapshots: Vec<(f64, ComplexField)>,
    /// Spacing between consecutive recorded times.
    pub sample_dt: f64,
}

impl DiagnosticTrace {
    pub fn new(channel_names: impl IntoIterator<Item = String>, sample_dt: f64) -> Self {
        DiagnosticTrace {
            times: Vec::new(),
            channels: channel_names.into_iter().map(|n| (n, Vec::new())).collect(),
            snapshots: Vec::new(),
            sample_dt,
        }
    }

    pub fn channel(&self, name: &str) -> Result<&[f64]> {
        self.channels
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingChannel(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Appends a row; `values` follows the channel declaration order.
    pub fn push(&mut self, t: f64, values: &[f64]) -> Result<()> {
        if values.len() != self.channels.len() {
            return Err(Error::InvalidArgument(format!(
                "row has {} values for {} channels",
                values.len(),
                self.channels.len()
            )));
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidArgument("trace times must increase".into()));
            }
        }
        self.times.push(t);
        for (col, v) in self.channels.values_mut().zip(values) {
            col.push(*v);
        }
        Ok(())
    }

    /// True when every channel has one entry per time and times increase.
    pub fn is_consistent(&self) -> bool {
        self.channels.values().all(|c| c.len() == self.times.len())
            && self.times.windows(2).all(|w| w[1] > w[0])
    }
}

/// Output of a completed run.
#[derive(Debug)]
pub struct Run {
    pub trace: DiagnosticTrace,
    pub final_state: ComplexField,
    pub steps: usize,
}

/// A run that hit a non-finite state; carries everything recorded before the abort.
#[derive(Debug, thiserror::Error)]
#[error("evolution aborted: {cause}")]
pub struct EvolveError {
    pub partial: Box<DiagnosticTrace>,
    pub cause: Error,
}

/// Steps `initial` to `t_final`, calling every observer at `t = 0` and every
/// `observer_stride` steps.
pub fn evolve(
    initial: &ComplexField,
    config: &SolverConfig,
    observers: &[&dyn Observer],
) -> std::result::Result<Run, EvolveError> {
    let names: Vec<String> = observers.iter().flat_map(|o| o.channels()).collect();
    let sample_dt = config.dt * config.observer_stride as f64;
    let mut trace = DiagnosticTrace::new(names, sample_dt);
    let fail = |trace: DiagnosticTrace, cause: Error| EvolveError {
        partial: Box::new(trace),
        cause,
    };
    if let Err(e) = config.validate() {
        return Err(fail(trace, e));
    }
    if !initial.is_finite() {
        return Err(fail(trace, Error::NonFinite { step: 0, time: 0.0 }));
    }
    let grid = initial.grid().clone();
    let stepper = Stepper::new(&grid, config.dt, config.p, config.nonlinearity);
    let n_steps = config.n_steps();

    let record = |trace: &mut DiagnosticTrace, step: usize, field: &ComplexField| -> Result<()> {
        let t = step as f64 * config.dt;
        if step.is_multiple_of(config.observer_stride) {
            let rows: Vec<Vec<f64>> = observers.par_iter().map(|o| o.observe(t, field)).collect();
            let row: Vec<f64> = rows.into_iter().flatten().collect();
            trace.push(t, &row)?;
        }
        if config.snapshot_steps.contains(&step) {
            trace.snapshots.push((t, field.clone()));
        }
        Ok(())
    };

    let mut state = initial.values().to_vec();
    if let Err(e) = record(&mut trace, 0, initial) {
        return Err(fail(trace, e));
    }
    for step in 1..=n_steps {
        if !stepper.step(&mut state) {
            let time = step as f64 * config.dt;
            return Err(fail(trace, Error::NonFinite { step, time }));
        }
        let needs_field =
            step % config.observer_stride == 0 || config.snapshot_steps.contains(&step);
        if needs_field {
            let field = ComplexField::from_trusted(&grid, state.clone());
            if let Err(e) = record(&mut trace, step, &field) {
                return Err(fail(trace, e));
            }
        }
    }
    Ok(Run {
        trace,
        final_state: ComplexField::from_trusted(&grid, state),
        steps: n_steps,
    })
}

/// Closed-form free evolution of `e^{-|x|²/(2w²)}` under `u_t = -iΔu`:
/// `u(x,t) = (w²/a)^{d/2} e^{-|x|²/(2a)}` with `a = w² - 2it`.
pub fn free_gaussian_reference(grid: &SpectralGrid, t: f64, width: f64) -> Result<ComplexField> {
    if !(width > 0.0) {
        return Err(Error::InvalidArgument(format!("width must be positive, got {width}")));
    }
    let w2 = width * width;
    let a = Complex64::new(w2, -2.0 * t);
    let prefactor = (Complex64::new(w2, 0.0) / a).powf(0.5 * grid.dim() as f64);
    ComplexField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        prefactor * (-r2 / (2.0 * a)).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn gaussian(grid: &SpectralGrid, amp: f64, width: f64) -> ComplexField {
        ComplexField::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            Complex64::new(amp * (-r2 / (2.0 * width * width)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn plane_wave_advances_by_exact_phase() {
        let g = make_grid(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let (kx, ky) = (2.0, -3.0);
        let u = ComplexField::from_fn(&g, |x| Complex64::from_polar(1.0, kx * x[0] + ky * x[1]))
            .unwrap();
        let dt = 0.013;
        let v = strang_step(&u, dt, 3.0, Nonlinearity::Off).unwrap();
        let phase = Complex64::from_polar(1.0, (kx * kx + ky * ky) * dt);
        for (a, b) in v.values().iter().zip(u.values()) {
            assert!((a - phase * b).norm() <= 1e-12);
        }
    }

    #[test]
    fn nonlinear_substep_preserves_modulus() {
        let g = make_grid(2, 16, 8.0).unwrap();
        let u = gaussian(&g, 1.7, 1.0);
        let mut v = u.values().to_vec();
        nonlinear_substep(&mut v, 0.05, 3.0, Nonlinearity::Defocusing);
        for (a, b) in v.iter().zip(u.values()) {
            assert!((a.norm() - b.norm()).abs() <= 1e-14);
        }
    }

    #[test]
    fn single_step_conserves_mass() {
        let g = make_grid(2, 32, 12.0).unwrap();
        let u = gaussian(&g, 1.3, 1.0);
        let v = strang_step(&u, 0.01, 3.0, Nonlinearity::Defocusing).unwrap();
        assert!(((v.mass() - u.mass()) / u.mass()).abs() <= 1e-12);
    }

    #[test]
    fn backward_step_inverts_forward_step() {
        let g = make_grid(2, 32, 12.0).unwrap();
        let u = gaussian(&g, 1.3, 1.0);
        let v = strang_step(&u, 0.02, 3.0, Nonlinearity::Defocusing).unwrap();
        let w = strang_step(&v, -0.02, 3.0, Nonlinearity::Defocusing).unwrap();
        let err = w
            .linear_combination(Complex64::new(1.0, 0.0), &u, Complex64::new(-1.0, 0.0))
            .unwrap()
            .l2_norm();
        assert!(err <= 1e-10 * u.l2_norm());
    }

    #[test]
    fn zero_data_gives_zero_channels() {
        let g = make_grid(2, 16, 8.0).unwrap();
        let u = ComplexField::zeros(&g);
        let mass = FnObserver::new("mass", |f: &ComplexField| f.mass());
        let cfg = SolverConfig::new(3.0, 0.01, 0.1, 2);
        let run = evolve(&u, &cfg, &[&mass]).unwrap();
        assert_eq!(run.trace.len(), 6);
        assert!(run.trace.channel("mass").unwrap().iter().all(|&m| m == 0.0));
        assert!(run.trace.is_consistent());
    }

    #[test]
    fn free_reference_is_initial_gaussian_at_zero_and_unitary() {
        let g = make_grid(2, 64, 24.0).unwrap();
        let u0 = free_gaussian_reference(&g, 0.0, 1.3).unwrap();
        let direct = gaussian(&g, 1.0, 1.3);
        for (a, b) in u0.values().iter().zip(direct.values()) {
            assert!((a - b).norm() < 1e-15);
        }
        let m0 = u0.mass();
        // unitarity holds in the continuum; the box must contain the spread packet
        let g_big = make_grid(2, 128, 60.0).unwrap();
        let m_big0 = free_gaussian_reference(&g_big, 0.0, 1.3).unwrap().mass();
        let m_big = free_gaussian_reference(&g_big, 1.5, 1.3).unwrap().mass();
        assert!(((m_big - m_big0) / m_big0).abs() <= 1e-12);
        assert!((m0 - m_big0).abs() / m0 < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.5, 0.1, 1.0, 1).validate().is_err());
        assert!(SolverConfig::new(3.0, 0.0, 1.0, 1).validate().is_err());
        assert!(SolverConfig::new(3.0, 2.0, 1.0, 1).validate().is_err());
        assert!(SolverConfig::new(3.0, 0.1, 1.0, 0).validate().is_err());
        assert!(SolverConfig::new(1.0, 0.1, 1.0, 1).validate().is_ok());
    }

    #[test]
    fn blow_up_is_reported_with_partial_trace() {
        let g = make_grid(1, 16, 8.0).unwrap();
        let u = gaussian(&g, 1.0, 1.0);
        let mass = FnObserver::new("mass", |f: &ComplexField| f.mass());
        // p huge: |u|^{p-1} overflows once amplitude exceeds 1 anywhere
        let big = u.scaled(Complex64::new(4.0, 0.0));
        let cfg = SolverConfig::new(800.0, 0.01, 0.1, 1);
        let err = evolve(&big, &cfg, &[&mass]).unwrap_err();
        assert!(matches!(err.cause, Error::NonFinite { step: 1, .. }));
        assert_eq!(err.partial.len(), 1);
    }
}
