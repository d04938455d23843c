//! Interaction Morawetz actions of tensor-product solutions.
//!
//! For `U = u(x₁) ⋯ u(x_m)` the tensor density is `ρ_U = ½ Π |u(x_a)|²` and
//! the momentum in slot `a` is `Π_{b≠a} |u(x_b)|² · p(x_a)`. Contracting with
//! the gradient of a distance-to-diagonal weight gives the actions below,
//! each written in terms of single-field densities only.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::par::DeterministicSum;
use crate::error::{Error, Result};
use crate::evolve::DiagnosticTrace;
use crate::fields::{line_diagonal_weight_2d, Line2D};
use crate::grid::{ComplexField, Direction, FftNd, SpectralGrid, MAX_GRID_POINTS};
use crate::laws::{densities, pressure};
use crate::quadrature::{gauss_legendre_panels, Curve2D};
use crate::report::{
    ftc_report, max_abs, monotonicity_report, pointwise_report, trapezoid, EstimateReport,
};

/// Largest `N` for the `N⁴` pairwise sums in one and two dimensions.
pub const MAX_PAIRWISE_N: usize = 64;
/// Largest `N` for the explicit four-dimensional tensor field.
pub const MAX_TENSOR_N: usize = 24;
/// Largest `N` for the zero-padded `(2N)³` pair convolution.
pub const MAX_CONVOLUTION_N: usize = 128;

fn require_dim(field: &ComplexField, dim: usize) -> Result<()> {
    if field.grid().dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "expected a {dim}-dimensional field, got {}",
            field.grid().dim()
        )));
    }
    Ok(())
}

fn require_budget(grid: &SpectralGrid, max_n: usize, what: &str) -> Result<()> {
    if grid.n_points() > max_n {
        return Err(Error::Budget {
            what: format!("{what} with N = {}", grid.n_points()),
            max_n,
        });
    }
    Ok(())
}

/// Spectra of the odd kernel `K(w) = w/√(|w|² + ε²)`, `K(0) = 0`, tabulated on
/// the difference grid of a 3D grid and zero-padded for linear convolution.
pub struct PairConvolution3d {
    grid: SpectralGrid,
    epsilon: f64,
    fft: FftNd,
    /// `F[K_x] + i F[K_y]`.
    kernel_xy: Vec<Complex64>,
    kernel_z: Vec<Complex64>,
}

impl PairConvolution3d {
    pub fn new(grid: &SpectralGrid, epsilon: f64) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(Error::InvalidArgument("pair convolution needs a 3D grid".into()));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
        }
        let n = grid.n_points();
        let m = 2 * n;
        if n > MAX_CONVOLUTION_N || m * m * m > MAX_GRID_POINTS {
            return Err(Error::Budget {
                what: format!("padded 3D convolution with N = {n}"),
                max_n: MAX_CONVOLUTION_N,
            });
        }
        let h = grid.spacing();
        let signed = |i: usize| -> Option<f64> {
            match i {
                _ if i < n => Some(i as f64),
                _ if i == n => None,
                _ => Some(i as f64 - m as f64),
            }
        };
        let mut kx = vec![Complex64::new(0.0, 0.0); m * m * m];
        let mut kz = vec![Complex64::new(0.0, 0.0); m * m * m];
        kx.par_iter_mut()
            .zip(kz.par_iter_mut())
            .enumerate()
            .for_each(|(flat, (cxy, cz))| {
                let (a, b, c) = (flat / (m * m), (flat / m) % m, flat % m);
                if let (Some(i), Some(j), Some(k)) = (signed(a), signed(b), signed(c)) {
                    let w = [i * h, j * h, k * h];
                    let r2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
                    if r2 > 0.0 {
                        let inv = 1.0 / (r2 + epsilon * epsilon).sqrt();
                        *cxy = Complex64::new(w[0] * inv, w[1] * inv);
                        *cz = Complex64::new(w[2] * inv, 0.0);
                    }
                }
            });
        let fft = FftNd::new(m, 3);
        fft.process(&mut kx, Direction::Forward);
        fft.process(&mut kz, Direction::Forward);
        Ok(Self {
            grid: grid.clone(),
            epsilon,
            fft,
            kernel_xy: kx,
            kernel_z: kz,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `M = -4 ∫ p(y) · (ρ * K)(y) dy`.
    pub fn action(&self, field: &ComplexField) -> Result<f64> {
        if !field.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch("field and kernel grids differ".into()));
        }
        let n = self.grid.n_points();
        let m = 2 * n;
        let d = densities(field);
        let mut rho_hat = vec![Complex64::new(0.0, 0.0); m * m * m];
        for (flat, &r) in d.rho.iter().enumerate() {
            let (a, b, c) = (flat / (n * n), (flat / n) % n, flat % n);
            rho_hat[(a * m + b) * m + c] = Complex64::new(r, 0.0);
        }
        self.fft.process(&mut rho_hat, Direction::Forward);
        let mut conv_xy: Vec<Complex64> = rho_hat
            .par_iter()
            .zip(&self.kernel_xy)
            .map(|(a, b)| a * b)
            .collect();
        let mut conv_z: Vec<Complex64> = rho_hat
            .par_iter()
            .zip(&self.kernel_z)
            .map(|(a, b)| a * b)
            .collect();
        self.fft.process(&mut conv_xy, Direction::Inverse);
        self.fft.process(&mut conv_z, Direction::Inverse);
        let sum: f64 = (0..self.grid.len())
            .into_par_iter()
            .map(|flat| {
                let (a, b, c) = (flat / (n * n), (flat / n) % n, flat % n);
                let pad = (a * m + b) * m + c;
                d.momentum[0][flat] * conv_xy[pad].re
                    + d.momentum[1][flat] * conv_xy[pad].im
                    + d.momentum[2][flat] * conv_z[pad].re
            })
            .det_sum();
        let h3 = self.grid.cell_volume();
        Ok(-4.0 * h3 * h3 * sum)
    }
}

/// Interaction action of `u(y)u(z)` on `R⁶` with the pair weight.
pub fn interaction_action_3d(field: &ComplexField, epsilon: f64) -> Result<f64> {
    require_dim(field, 3)?;
    PairConvolution3d::new(field.grid(), epsilon)?.action(field)
}

/// Precomputed single-field quantities in the frame of a line.
struct LineFrameData {
    y: Vec<[f64; 2]>,
    p: Vec<[f64; 2]>,
    rho: Vec<f64>,
}

fn line_frame_data(field: &ComplexField, line: &Line2D) -> LineFrameData {
    let grid = field.grid();
    let d = densities(field);
    let y = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            line.to_line_frame([x[0], x[1]])
        })
        .collect();
    let p = (0..grid.len())
        .map(|i| line.rotate_vector([d.momentum[0][i], d.momentum[1][i]]))
        .collect();
    LineFrameData { y, p, rho: d.rho }
}

/// Interaction action of `u(x₁)u(x₂)` on `R⁴` with the line-diagonal weight,
/// by direct summation over grid-point pairs.
pub fn interaction_action_2d(field: &ComplexField, line: &Line2D, epsilon: f64) -> Result<f64> {
    require_dim(field, 2)?;
    require_budget(field.grid(), MAX_PAIRWISE_N, "2D pairwise interaction sum")?;
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
    }
    let data = line_frame_data(field, line);
    let e2 = epsilon * epsilon;
    let active: Vec<usize> = (0..data.rho.len()).filter(|&j| data.rho[j] != 0.0).collect();
    // The two slots contribute equally because the weight is symmetric under
    // exchanging x₁ and x₂.
    let sum: f64 = (0..data.rho.len())
        .into_par_iter()
        .map(|i| {
            let [y1, y2] = data.y[i];
            let [p1, p2] = data.p[i];
            let mut acc = 0.0;
            if p1 == 0.0 && p2 == 0.0 {
                return acc;
            }
            for &j in &active {
                let [y3, y4] = data.y[j];
                let s = y1 - y3;
                let r2 = 0.5 * s * s + y2 * y2 + y4 * y4 + e2;
                if r2 == 0.0 {
                    continue;
                }
                let inv = 1.0 / r2.sqrt();
                acc += data.rho[j] * inv * (0.5 * p1 * s + p2 * y2);
            }
            acc
        })
        .det_sum();
    let h2 = field.grid().cell_volume();
    Ok(-4.0 * h2 * h2 * sum)
}

/// Line-diagonal action for repeated evaluation on one grid.
///
/// For a line parallel to the first axis the weight depends on `x₁ - x₃`
/// only through a difference, so each pair of transverse rows contributes a
/// 1D linear convolution evaluated with zero-padded FFTs. Other lines use
/// [`interaction_action_2d`].
pub struct LineAction2d {
    grid: SpectralGrid,
    line: Line2D,
    epsilon: f64,
    /// Per `(i₂, j₂)`: `F[s/(2R)] + i F[1/R]` on the padded difference grid.
    kernels: Option<Vec<Complex64>>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl LineAction2d {
    pub fn new(grid: &SpectralGrid, line: &Line2D, epsilon: f64) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::InvalidArgument("line action needs a 2D grid".into()));
        }
        require_budget(grid, MAX_PAIRWISE_N, "2D pairwise interaction sum")?;
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
        }
        let n = grid.n_points();
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(m);
        let fft_inverse = planner.plan_fft_inverse(m);
        let kernels = if line.angle == 0.0 {
            let h = grid.spacing();
            let e2 = epsilon * epsilon;
            let y: Vec<f64> = (0..n).map(|i| grid.origin() + i as f64 * h - line.point[1]).collect();
            let mut out = vec![Complex64::new(0.0, 0.0); n * n * m];
            out.par_chunks_mut(m).enumerate().for_each(|(pair, buf)| {
                let (y2, y4) = (y[pair / n], y[pair % n]);
                for (idx, c) in buf.iter_mut().enumerate() {
                    let d = if idx < n { idx as i64 } else { idx as i64 - m as i64 };
                    if d.unsigned_abs() as usize >= n {
                        continue;
                    }
                    let s = d as f64 * h;
                    let r2 = 0.5 * s * s + y2 * y2 + y4 * y4 + e2;
                    if r2 == 0.0 {
                        continue;
                    }
                    let inv = 1.0 / r2.sqrt();
                    *c = Complex64::new(0.5 * s * inv, inv);
                }
                // Both parts are real sequences, so F[a] + iF[b] = F[a + ib].
                fft_forward.process(buf);
            });
            Some(out)
        } else {
            None
        };
        Ok(LineAction2d {
            grid: grid.clone(),
            line: *line,
            epsilon,
            kernels,
            fft_forward,
            fft_inverse,
        })
    }

    /// True when the convolution path is used.
    pub fn is_fast(&self) -> bool {
        self.kernels.is_some()
    }

    pub fn action(&self, field: &ComplexField) -> Result<f64> {
        require_dim(field, 2)?;
        if !field.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch("line action built for another grid".into()));
        }
        let Some(kernels) = &self.kernels else {
            return interaction_action_2d(field, &self.line, self.epsilon);
        };
        let n = self.grid.n_points();
        let m = 2 * n;
        let d = densities(field);
        let h = self.grid.spacing();
        let y: Vec<f64> = (0..n)
            .map(|i| self.grid.origin() + i as f64 * h - self.line.point[1])
            .collect();
        // Row j₂ of ρ along the first axis, padded and transformed.
        let rho_hat: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|j2| {
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for (j1, b) in buf.iter_mut().take(n).enumerate() {
                    *b = Complex64::new(d.rho[self.grid.flat_index(&[j1, j2])], 0.0);
                }
                self.fft_forward.process(&mut buf);
                buf
            })
            .collect();
        let per_row: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i2| {
                let mut acc = 0.0;
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for (j2, rh) in rho_hat.iter().enumerate() {
                    let kernel = &kernels[(i2 * n + j2) * m..(i2 * n + j2 + 1) * m];
                    for ((b, r), k) in buf.iter_mut().zip(rh).zip(kernel) {
                        *b = r * k;
                    }
                    self.fft_inverse.process(&mut buf);
                    for (i1, c) in buf.iter().take(n).enumerate() {
                        let i = self.grid.flat_index(&[i1, i2]);
                        acc += d.momentum[0][i] * c.re + d.momentum[1][i] * y[i2] * c.im;
                    }
                }
                acc / m as f64
            })
            .collect();
        let sum: f64 = per_row.iter().sum();
        let h2 = self.grid.cell_volume();
        Ok(-4.0 * h2 * h2 * sum)
    }
}

/// Interaction action of `u₁(x₁)u₂(x₂)u₃(x₃)u₄(x₄)` on `R⁴` with the 1D
/// diagonal weight, by direct four-fold summation.
pub fn interaction_action_1d_fields(fields: [&ComplexField; 4], epsilon: f64) -> Result<f64> {
    for f in fields {
        require_dim(f, 1)?;
        fields[0].check_grid(f)?;
    }
    let grid = fields[0].grid();
    require_budget(grid, MAX_PAIRWISE_N, "1D four-fold interaction sum")?;
    let n = grid.len();
    let dens: Vec<_> = fields.iter().map(|f| densities(f)).collect();
    let two_rho: Vec<Vec<f64>> = dens
        .iter()
        .map(|d| d.rho.iter().map(|r| 2.0 * r).collect())
        .collect();
    let p: Vec<&[f64]> = dens.iter().map(|d| d.momentum[0].as_slice()).collect();
    let x: Vec<f64> = (0..n).map(|i| grid.point(i)[0]).collect();
    let e2 = epsilon * epsilon;
    let sum: f64 = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut acc = 0.0;
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        let idx = [i0, i1, i2, i3];
                        let xs = [x[i0], x[i1], x[i2], x[i3]];
                        let mean = 0.25 * (xs[0] + xs[1] + xs[2] + xs[3]);
                        let r2: f64 =
                            xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() + e2;
                        if r2 == 0.0 {
                            continue;
                        }
                        let inv = 1.0 / r2.sqrt();
                        for a in 0..4 {
                            let mut weight = p[a][idx[a]] * (xs[a] - mean) * inv;
                            if weight == 0.0 {
                                continue;
                            }
                            for b in 0..4 {
                                if b != a {
                                    weight *= two_rho[b][idx[b]];
                                }
                            }
                            acc += weight;
                        }
                    }
                }
            }
            acc
        })
        .det_sum();
    let h = grid.spacing();
    Ok(-h.powi(4) * sum)
}

/// [`interaction_action_1d_fields`] with the same field in every slot.
pub fn interaction_action_1d(field: &ComplexField, epsilon: f64) -> Result<f64> {
    interaction_action_1d_fields([field, field, field, field], epsilon)
}

/// `Σ_i |u(x(l_i))|⁴ w_i`.
pub fn line_restricted_l4(field: &ComplexField, curve: &Curve2D) -> Result<f64> {
    require_dim(field, 2)?;
    let values = field.interpolate(curve.samples());
    Ok(values
        .iter()
        .zip(curve.weights())
        .map(|(u, w)| u.norm_sqr().powi(2) * w)
        .sum())
}

/// `∫_L |u|⁴ dl` over the chord of `line` inside the box.
pub fn line_l4(field: &ComplexField, line: &Line2D) -> Result<f64> {
    let curve = Curve2D::line_in_box(*line, field.grid().box_length(), field.grid().spacing())?;
    line_restricted_l4(field, &curve)
}

/// Average over `n_theta` rays from `center` of `∫ |u|⁴ r/√(r² + ε²) dr`,
/// weighted by `2π/n_theta`; converges to `∫ |u|⁴/√(|x - center|² + ε²) dx`.
pub fn angular_average_weighted_l4(
    field: &ComplexField,
    center: [f64; 2],
    n_theta: usize,
    epsilon: f64,
) -> Result<f64> {
    require_dim(field, 2)?;
    if n_theta < 4 {
        return Err(Error::InvalidArgument("n_theta must be at least 4".into()));
    }
    let grid = field.grid();
    let r_max = 0.5 * grid.box_length();
    let panels = (r_max / grid.spacing()).ceil() as usize;
    let radial = gauss_legendre_panels(0.0, r_max, panels, RADIAL_ORDER);
    let e2 = epsilon * epsilon;
    let total: f64 = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n_theta as f64;
            let (c, s) = (theta.cos(), theta.sin());
            let points: Vec<[f64; 2]> = radial
                .iter()
                .map(|&(r, _)| [center[0] + r * c, center[1] + r * s])
                .collect();
            let values = field.interpolate(&points);
            radial
                .iter()
                .zip(values)
                .map(|(&(r, w), u)| w * u.norm_sqr().powi(2) * r / (r * r + e2).sqrt())
                .sum::<f64>()
        })
        .det_sum();
    Ok(total * 2.0 * std::f64::consts::PI / n_theta as f64)
}

/// Gauss–Legendre order per grid-spacing panel along each ray.
const RADIAL_ORDER: usize = 8;

/// Which interaction action a trace carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteractionKind {
    Pair3d,
    Line2d,
    Diag1d,
}

pub const CH_MASS: &str = "mass";
pub const CH_HHALF_SQ: &str = "hhalf_sq";
pub const CH_H1: &str = "h1_norm";
pub const CH_M_PAIR: &str = "M_pair";
pub const CH_M_LINE: &str = "M_line";
pub const CH_M_DIAG: &str = "M_diag";
pub const CH_L4: &str = "l4";
pub const CH_LINE_L4: &str = "line_l4";
pub const CH_L8: &str = "l8";
pub const CH_WEIGHTED_L4: &str = "weighted_l4";

/// Relative slack of the pointwise and FTC checks.
pub const DEFAULT_REL_TOL: f64 = 0.02;
/// Relative slack of the monotonicity check.
pub const MONOTONICITY_TOL: f64 = 1e-6;

impl InteractionKind {
    pub fn action_channel(self) -> &'static str {
        match self {
            InteractionKind::Pair3d => CH_M_PAIR,
            InteractionKind::Line2d => CH_M_LINE,
            InteractionKind::Diag1d => CH_M_DIAG,
        }
    }

    pub fn integral_channel(self) -> &'static str {
        match self {
            InteractionKind::Pair3d => CH_L4,
            InteractionKind::Line2d => CH_LINE_L4,
            InteractionKind::Diag1d => CH_L8,
        }
    }

    /// Constant in `dM/dt ≥ c · I`.
    pub fn constant(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            InteractionKind::Pair3d => 16.0 * PI,
            InteractionKind::Line2d => 2.0 * PI,
            InteractionKind::Diag1d => 8.0 * PI,
        }
    }

    /// Limit constant of the regularized lower bound; differs from
    /// [`constant`](Self::constant) only for the line weight, where the
    /// diagonal is parametrized by `√2` times arclength.
    pub fn sharp_constant(self) -> f64 {
        match self {
            InteractionKind::Line2d => 4.0 * 2f64.sqrt() * std::f64::consts::PI,
            k => k.constant(),
        }
    }

    pub fn pointwise_name(self) -> &'static str {
        match self {
            InteractionKind::Pair3d => "pointwise-16pi",
            InteractionKind::Line2d => "pointwise-2pi",
            InteractionKind::Diag1d => "pointwise-8pi",
        }
    }
}

/// Monotonicity, pointwise, FTC and momentum-bound reports for an
/// interaction action channel, plus the kind-specific ratio when its channels
/// are present.
pub fn monotonicity_and_ftc_check(
    trace: &DiagnosticTrace,
    kind: InteractionKind,
) -> Result<Vec<EstimateReport>> {
    monotonicity_and_ftc_check_with(trace, kind, DEFAULT_REL_TOL)
}

pub fn monotonicity_and_ftc_check_with(
    trace: &DiagnosticTrace,
    kind: InteractionKind,
    rel_tol: f64,
) -> Result<Vec<EstimateReport>> {
    let t = &trace.times;
    let m = trace.channel(kind.action_channel())?;
    let integral = trace.channel(kind.integral_channel())?;
    let mut out = vec![
        monotonicity_report("monotonicity", t, m, MONOTONICITY_TOL)?,
        pointwise_report(kind.pointwise_name(), t, m, integral, kind.constant(), rel_tol)?
            .with_context("sharp_constant", kind.sharp_constant()),
        ftc_report("ftc", t, m, integral, kind.constant(), rel_tol)?,
    ];
    let mass = trace.channel(CH_MASS)?;
    let hhalf = trace.channel(CH_HHALF_SQ)?;
    // three density factors and one momentum factor in 1D
    let mass_power = if kind == InteractionKind::Diag1d { 3 } else { 1 };
    let scale = mass
        .iter()
        .zip(hhalf)
        .map(|(a, b)| a.powi(mass_power) * b)
        .fold(0.0, f64::max);
    out.push(EstimateReport::informational("momentum-bound", max_abs(m), scale, 1.0));
    match kind {
        InteractionKind::Line2d => {
            if let Ok(w) = trace.channel(CH_WEIGHTED_L4) {
                out.push(EstimateReport::informational(
                    "weighted-l4-ratio",
                    trapezoid(t, w),
                    scale,
                    1.0,
                ));
            }
        }
        InteractionKind::Diag1d => {
            if let Ok(h1) = trace.channel(CH_H1) {
                let rhs = mass
                    .iter()
                    .zip(h1)
                    .map(|(m2, h)| m2.sqrt().powi(7) * h)
                    .fold(0.0, f64::max);
                out.push(EstimateReport::informational(
                    "l8-ratio",
                    trapezoid(t, integral),
                    rhs,
                    1.0,
                ));
            }
        }
        InteractionKind::Pair3d => {}
    }
    Ok(out)
}

/// Residual of the contracted momentum law of `u₁(x₁)u₂(x₂)` on `R⁴`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorResidual {
    /// `‖∂_t(X·p) - [∂_j(X^k T_jk) - ∂_jX^k T_jk]‖_{L²(R⁴)}`.
    pub residual: f64,
    /// `‖∂_t(X·p)‖_{L²(R⁴)}`.
    pub scale: f64,
}

/// Builds the explicit four-dimensional tensor field from two 2D fields and
/// checks `∂_t(X^k p_k) = ∂_j(X^k T_jk) - (∂_j X^k) T_jk` with
/// `T_jk = δ_jk(Π_k - Δρ) + σ_jk`, where `Π_k` is the pressure acting on the
/// slot containing coordinate `k`. `field1` and `field2` hold three snapshots
/// spaced by `dt`.
pub fn tensor_residual_check_4d(
    field1: [&ComplexField; 3],
    field2: [&ComplexField; 3],
    dt: f64,
    p: f64,
    line: &Line2D,
    epsilon: f64,
) -> Result<TensorResidual> {
    let grid = field1[1].grid().clone();
    for f in field1.iter().chain(field2.iter()) {
        require_dim(f, 2)?;
        field1[1].check_grid(f)?;
    }
    require_budget(&grid, MAX_TENSOR_N, "explicit 4D tensor field")?;
    if dt == 0.0 {
        return Err(Error::InvalidArgument("dt must be nonzero".into()));
    }
    let n = grid.n_points();
    let m2 = n * n;
    let total = m2 * m2;
    let fft = FftNd::new(n, 4);
    let wave = grid.wavenumbers().to_vec();
    let spec = line_diagonal_weight_2d(*line, epsilon)?;

    let tensor = |a: &ComplexField, b: &ComplexField| -> Vec<Complex64> {
        let (ua, ub) = (a.values(), b.values());
        (0..total).map(|i| ua[i / m2] * ub[i % m2]).collect()
    };
    let derivative = |values: &[Complex64], axis: usize| -> Vec<Complex64> {
        let mut buf = values.to_vec();
        fft.process(&mut buf, Direction::Forward);
        let stride = n.pow((3 - axis) as u32);
        buf.par_iter_mut().enumerate().for_each(|(i, c)| {
            *c *= Complex64::new(0.0, wave[(i / stride) % n]);
        });
        fft.process(&mut buf, Direction::Inverse);
        buf
    };
    let derivative_real = |values: &[f64], axis: usize| -> Vec<f64> {
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        derivative(&c, axis).into_iter().map(|c| c.re).collect()
    };
    let momentum = |u: &[Complex64]| -> Vec<Vec<f64>> {
        (0..4)
            .map(|k| {
                let d = derivative(u, k);
                u.iter().zip(&d).map(|(a, b)| (a.conj() * b).im).collect()
            })
            .collect()
    };

    let points: Vec<[f64; 4]> = (0..total)
        .map(|i| {
            let (a, b) = (grid.point(i / m2), grid.point(i % m2));
            [a[0], a[1], b[0], b[1]]
        })
        .collect();
    let samples = points
        .par_iter()
        .map(|x| spec.evaluate(x))
        .collect::<Result<Vec<_>>>()?;

    let u_prev = tensor(field1[0], field2[0]);
    let u_mid = tensor(field1[1], field2[1]);
    let u_next = tensor(field1[2], field2[2]);
    let x_dot_p = |mom: &[Vec<f64>]| -> Vec<f64> {
        (0..total)
            .map(|i| (0..4).map(|k| samples[i].gradient[k] * mom[k][i]).sum())
            .collect()
    };
    let lhs_prev = x_dot_p(&momentum(&u_prev));
    let lhs_next = x_dot_p(&momentum(&u_next));
    let lhs: Vec<f64> = lhs_prev
        .iter()
        .zip(&lhs_next)
        .map(|(a, b)| (b - a) / (2.0 * dt))
        .collect();

    let grads: Vec<Vec<Complex64>> = (0..4).map(|k| derivative(&u_mid, k)).collect();
    let rho: Vec<f64> = u_mid.iter().map(|v| 0.5 * v.norm_sqr()).collect();
    let mut lap_rho = vec![0.0; total];
    for k in 0..4 {
        let d = derivative_real(&derivative_real(&rho, k), k);
        lap_rho.iter_mut().zip(d).for_each(|(a, b)| *a += b);
    }
    let (rho1, rho2) = (densities(field1[1]).rho, densities(field2[1]).rho);
    let slot_pressure: Vec<[f64; 2]> = (0..total)
        .map(|i| {
            let (r1, r2) = (rho1[i / m2], rho2[i % m2]);
            [2.0 * r2 * pressure(r1, p), 2.0 * r1 * pressure(r2, p)]
        })
        .collect();
    let stress = |i: usize, j: usize, k: usize| -> f64 {
        let sigma = 2.0 * (grads[j][i] * grads[k][i].conj()).re;
        if j == k {
            sigma + slot_pressure[i][k / 2] - lap_rho[i]
        } else {
            sigma
        }
    };
    let mut rhs = vec![0.0; total];
    for j in 0..4 {
        let flux: Vec<f64> = (0..total)
            .map(|i| (0..4).map(|k| samples[i].gradient[k] * stress(i, j, k)).sum())
            .collect();
        let d = derivative_real(&flux, j);
        rhs.iter_mut().zip(d).for_each(|(a, b)| *a += b);
    }
    for (i, r) in rhs.iter_mut().enumerate() {
        let jac = &samples[i].jacobian;
        let mut contraction = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                contraction += jac[j * 4 + k] * stress(i, j, k);
            }
        }
        *r -= contraction;
    }
    let vol = grid.cell_volume().powi(2);
    let norm = |v: &mut dyn Iterator<Item = f64>| (vol * v.map(|x| x * x).sum::<f64>()).sqrt();
    Ok(TensorResidual {
        residual: norm(&mut lhs.iter().zip(&rhs).map(|(a, b)| a - b)),
        scale: norm(&mut lhs.iter().copied()),
    })
}
