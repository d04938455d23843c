//! Regularized distance weights and their derivatives.
//!
//! Every weight here has the form `a_ε(x) = √(|w|² + ε²)` with `w = A x - b`
//! an affine map onto a reduced space of dimension `r`, where `A Aᵀ = c I_r`.
//! Writing `R = a_ε`:
//!
//! ```text
//! X      = Aᵀ w / R
//! ∇X     = Aᵀ (I/R - w wᵀ/R³) A
//! div X  = c ((r-1)/R + ε²/R³)
//! -Δ div X = -c² Δ_w ((r-1)/R + ε²/R³)
//! ```
//!
//! All quantities are exact derivatives of `a_ε`, so symmetry and the
//! trace identity hold at every `ε`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// `|w|` below which an unregularized weight is treated as singular.
pub const SINGULAR_RADIUS: f64 = 1e-10;

/// Straight line in the plane through `point` with direction `(cos θ, sin θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line2D {
    pub point: [f64; 2],
    pub angle: f64,
}

impl Line2D {
    pub fn new(point: [f64; 2], angle: f64) -> Self {
        Self { point, angle }
    }

    /// The first coordinate axis.
    pub fn axis() -> Self {
        Self::new([0.0, 0.0], 0.0)
    }

    pub fn direction(&self) -> [f64; 2] {
        [self.angle.cos(), self.angle.sin()]
    }

    pub fn point_at(&self, l: f64) -> [f64; 2] {
        let [c, s] = self.direction();
        [self.point[0] + l * c, self.point[1] + l * s]
    }

    /// Coordinates in the frame where the line is the first axis:
    /// `Rot(-θ)(x - x₀)`.
    pub fn to_line_frame(&self, x: [f64; 2]) -> [f64; 2] {
        let [c, s] = self.direction();
        let (dx, dy) = (x[0] - self.point[0], x[1] - self.point[1]);
        [c * dx + s * dy, -s * dx + c * dy]
    }

    /// Rotates a vector (not a point) into the line frame.
    pub fn rotate_vector(&self, v: [f64; 2]) -> [f64; 2] {
        let [c, s] = self.direction();
        [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightKind {
    /// `|x|` on `Rⁿ`.
    Radial(usize),
    /// `|y - z|` on `R³ × R³`.
    Pair3d,
    /// Distance in `R² × R²` to the lifted diagonal `{x₁ = x₂ ∈ line}`.
    LineDiag2d(Line2D),
    /// Distance in `R⁴` to the span of `(1, 1, 1, 1)`.
    Diag1d,
}

impl WeightKind {
    pub fn label(&self) -> &'static str {
        match self {
            WeightKind::Radial(_) => "radial",
            WeightKind::Pair3d => "pair3d",
            WeightKind::LineDiag2d(_) => "line_diag_2d",
            WeightKind::Diag1d => "diag_1d",
        }
    }
}

/// Closed-form ε-regularized weight with all derivatives needed by the
/// virial identity.
#[derive(Clone, Debug)]
pub struct VectorFieldSpec {
    kind: WeightKind,
    epsilon: f64,
    ambient: usize,
    reduced: usize,
    /// `reduced × ambient`, row-major.
    map: Vec<f64>,
    offset: Vec<f64>,
    scale: f64,
}

/// Every evaluator at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub weight: f64,
    pub gradient: Vec<f64>,
    /// `jacobian[j * n + k] = ∂_j X^k`.
    pub jacobian: Vec<f64>,
    pub div_x: f64,
    pub neg_lap_div_x: f64,
}

impl VectorFieldSpec {
    fn build(
        kind: WeightKind,
        epsilon: f64,
        ambient: usize,
        map: Vec<f64>,
        offset: Vec<f64>,
    ) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        let reduced = offset.len();
        debug_assert_eq!(map.len(), reduced * ambient);
        let scale = (0..ambient).map(|i| map[i] * map[i]).sum::<f64>();
        Ok(Self {
            kind,
            epsilon,
            ambient,
            reduced,
            map,
            offset,
            scale,
        })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Dimension `r` of the space the weight measures distance in.
    pub fn reduced_dim(&self) -> usize {
        self.reduced
    }

    /// The constant `c` in `A Aᵀ = c I`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same geometry with a different regularization length.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::build(
            self.kind,
            epsilon,
            self.ambient,
            self.map.clone(),
            self.offset.clone(),
        )
    }

    /// Mass of the distributional limit of `-Δ div X` in the reduced
    /// variable, when that variable is three-dimensional: `8π c²`.
    pub fn delta_constant(&self) -> Option<f64> {
        (self.reduced == 3).then_some(8.0 * PI * self.scale * self.scale)
    }

    /// `sup |X| = √c` in the limit of large `|w|/ε`.
    pub fn gradient_bound(&self) -> f64 {
        self.scale.sqrt()
    }

    /// The offset `b`; the center of a radial weight.
    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// The reduced variable `w = A x - b`.
    pub fn reduced_point(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ambient, "point dimension mismatch");
        (0..self.reduced)
            .map(|a| {
                let row = &self.map[a * self.ambient..(a + 1) * self.ambient];
                row.iter().zip(x).map(|(m, v)| m * v).sum::<f64>() - self.offset[a]
            })
            .collect()
    }

    fn regularized(&self, w: &[f64]) -> Result<(f64, f64)> {
        let rho2: f64 = w.iter().map(|v| v * v).sum();
        if self.epsilon == 0.0 && rho2.sqrt() <= SINGULAR_RADIUS {
            return Err(Error::Singular(format!(
                "{} weight with epsilon = 0 evaluated on its singular set (|w| = {:e})",
                self.kind.label(),
                rho2.sqrt()
            )));
        }
        Ok((rho2, (rho2 + self.epsilon * self.epsilon).sqrt()))
    }

    pub fn weight(&self, x: &[f64]) -> f64 {
        let w = self.reduced_point(x);
        (w.iter().map(|v| v * v).sum::<f64>() + self.epsilon * self.epsilon).sqrt()
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let w = self.reduced_point(x);
        let (_, r) = self.regularized(&w)?;
        Ok(self.pull_back(&w, 1.0 / r))
    }

    fn pull_back(&self, w: &[f64], factor: f64) -> Vec<f64> {
        (0..self.ambient)
            .map(|i| {
                factor
                    * (0..self.reduced)
                        .map(|a| self.map[a * self.ambient + i] * w[a])
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let w = self.reduced_point(x);
        let (_, r) = self.regularized(&w)?;
        let n = self.ambient;
        let aw = self.pull_back(&w, 1.0);
        let inv_r = 1.0 / r;
        let inv_r3 = inv_r * inv_r * inv_r;
        let mut jac = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let ata: f64 = (0..self.reduced)
                    .map(|a| self.map[a * n + j] * self.map[a * n + k])
                    .sum();
                jac[j * n + k] = ata * inv_r - aw[j] * aw[k] * inv_r3;
            }
        }
        Ok(jac)
    }

    pub fn div_x(&self, x: &[f64]) -> Result<f64> {
        let w = self.reduced_point(x);
        let (_, r) = self.regularized(&w)?;
        Ok(self.div_from_radius(r))
    }

    fn div_from_radius(&self, r: f64) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        self.scale * ((self.reduced as f64 - 1.0) / r + e2 / (r * r * r))
    }

    /// `-Δ div X` (the regularized `-ΔΔa`).
    pub fn neg_lap_div_x(&self, x: &[f64]) -> Result<f64> {
        let w = self.reduced_point(x);
        let (rho2, r) = self.regularized(&w)?;
        Ok(self.neg_lap_div_from(rho2, r))
    }

    /// `-Δ div X` as a function of `|w|²` and `R`.
    pub fn neg_lap_div_from(&self, rho2: f64, r: f64) -> f64 {
        let dim = self.reduced as f64;
        let e2 = self.epsilon * self.epsilon;
        // Δ_w R^{-m} = m R^{-m-4} ((m + 2 - r)|w|² - r ε²)
        let lap = |m: f64| m * r.powf(-m - 4.0) * ((m + 2.0 - dim) * rho2 - dim * e2);
        -self.scale * self.scale * ((dim - 1.0) * lap(1.0) + e2 * lap(3.0))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<FieldSample> {
        let w = self.reduced_point(x);
        let (rho2, r) = self.regularized(&w)?;
        Ok(FieldSample {
            weight: r,
            gradient: self.pull_back(&w, 1.0 / r),
            jacobian: self.jacobian(x)?,
            div_x: self.div_from_radius(r),
            neg_lap_div_x: self.neg_lap_div_from(rho2, r),
        })
    }

    /// Axis-aligned box that sampling routines draw from.
    fn sample_point<R: Rng>(&self, rng: &mut R, half_width: f64) -> Vec<f64> {
        (0..self.ambient)
            .map(|_| rng.random_range(-half_width..half_width))
            .collect()
    }
}

/// `a_ε(x) = √(|x|² + ε²)` on `Rⁿ`.
pub fn radial_weight(n: usize, epsilon: f64) -> Result<VectorFieldSpec> {
    if n == 0 {
        return Err(Error::InvalidArgument("radial weight needs n ≥ 1".into()));
    }
    let mut map = vec![0.0; n * n];
    for i in 0..n {
        map[i * n + i] = 1.0;
    }
    VectorFieldSpec::build(WeightKind::Radial(n), epsilon, n, map, vec![0.0; n])
}

/// `a_ε(x) = √(|x - center|² + ε²)`.
pub fn radial_weight_at(center: &[f64], epsilon: f64) -> Result<VectorFieldSpec> {
    let n = center.len();
    let base = radial_weight(n, epsilon)?;
    VectorFieldSpec::build(base.kind, epsilon, n, base.map, center.to_vec())
}

/// `a_ε(y, z) = √(|y - z|² + ε²)` on `R⁶`.
pub fn pair_weight_3d(epsilon: f64) -> Result<VectorFieldSpec> {
    let mut map = vec![0.0; 18];
    for i in 0..3 {
        map[i * 6 + i] = 1.0;
        map[i * 6 + 3 + i] = -1.0;
    }
    VectorFieldSpec::build(WeightKind::Pair3d, epsilon, 6, map, vec![0.0; 3])
}

/// Regularized distance in `R⁴ = R² × R²` to `{(x, x) : x ∈ line}`.
///
/// In line-frame coordinates `y = (y₁, y₂, y₃, y₄)` the reduced variable is
/// `((y₁ - y₃)/√2, y₂, y₄)`.
pub fn line_diagonal_weight_2d(line: Line2D, epsilon: f64) -> Result<VectorFieldSpec> {
    let [c, s] = line.direction();
    // frame map G: y = blockdiag(Rot(-θ), Rot(-θ)) x - g
    let rot = [[c, s], [-s, c]];
    let mut g_mat = [[0.0; 4]; 4];
    for blk in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                g_mat[2 * blk + i][2 * blk + j] = rot[i][j];
            }
        }
    }
    let r0 = [
        c * line.point[0] + s * line.point[1],
        -s * line.point[0] + c * line.point[1],
    ];
    let g_off = [r0[0], r0[1], r0[0], r0[1]];
    let a_line = [
        [FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let mut map = vec![0.0; 12];
    let mut offset = vec![0.0; 3];
    for a in 0..3 {
        for k in 0..4 {
            map[a * 4 + k] = (0..4).map(|i| a_line[a][i] * g_mat[i][k]).sum();
        }
        offset[a] = (0..4).map(|i| a_line[a][i] * g_off[i]).sum();
    }
    VectorFieldSpec::build(WeightKind::LineDiag2d(line), epsilon, 4, map, offset)
}

/// Regularized distance in `R⁴` to the diagonal `span{(1, 1, 1, 1)}`.
pub fn diag_1d_weight(epsilon: f64) -> Result<VectorFieldSpec> {
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    let s12 = 12f64.sqrt();
    let map = vec![
        1.0 / s2, -1.0 / s2, 0.0, 0.0, //
        1.0 / s6, 1.0 / s6, -2.0 / s6, 0.0, //
        1.0 / s12, 1.0 / s12, 1.0 / s12, -3.0 / s12,
    ];
    VectorFieldSpec::build(WeightKind::Diag1d, epsilon, 4, map, vec![0.0; 3])
}

/// Maximum residuals found by [`verify_field_identities`].
#[derive(Clone, Debug, PartialEq)]
pub struct FieldIdentityReport {
    pub kind: &'static str,
    pub epsilon: f64,
    pub points_checked: usize,
    pub points_skipped: usize,
    pub symmetry: f64,
    pub trace_vs_div: f64,
    pub gradient_fd: f64,
    pub jacobian_fd: f64,
    pub min_eigenvalue: f64,
    pub max_norm_x: f64,
    /// `1 + 3ε`.
    pub norm_bound: f64,
    /// Max relative error of `-Δ div X` against a fourth-order difference stencil.
    pub bilaplacian_fd: f64,
}

/// Tolerances applied by [`FieldIdentityReport::failures`].
#[derive(Clone, Copy, Debug)]
pub struct IdentityTolerances {
    pub symmetry: f64,
    pub trace_vs_div: f64,
    pub finite_difference: f64,
    pub min_eigenvalue: f64,
    pub bilaplacian: f64,
    /// Relative rounding slack on `|X| ≤ norm_bound`.
    pub norm_rounding: f64,
}

impl Default for IdentityTolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-12,
            trace_vs_div: 1e-12,
            finite_difference: 1e-6,
            min_eigenvalue: -1e-12,
            bilaplacian: 1e-4,
            norm_rounding: 1e-12,
        }
    }
}

impl FieldIdentityReport {
    /// Names of the identities that exceed `tol`.
    pub fn failures(&self, tol: &IdentityTolerances) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.symmetry > tol.symmetry {
            out.push("symmetry");
        }
        if self.trace_vs_div > tol.trace_vs_div {
            out.push("trace_vs_div");
        }
        if self.gradient_fd > tol.finite_difference {
            out.push("gradient_fd");
        }
        if self.jacobian_fd > tol.finite_difference {
            out.push("jacobian_fd");
        }
        if self.min_eigenvalue < tol.min_eigenvalue {
            out.push("psd");
        }
        if self.max_norm_x > self.norm_bound * (1.0 + tol.norm_rounding) {
            out.push("norm_x");
        }
        if self.bilaplacian_fd > tol.bilaplacian {
            out.push("bilaplacian_fd");
        }
        out
    }
}

/// Step of the central differences used for gradient and Jacobian checks.
pub const FD_STEP: f64 = 1e-5;
/// Step of the difference stencil for `-Δ div X`.
pub const FD_STEP_LAPLACIAN: f64 = 1e-3;

/// Checks symmetry, trace, finite-difference agreement, positive
/// semi-definiteness and the `|X|` bound at each sample point.
///
/// Points on the singular set of an unregularized weight are counted as skipped.
pub fn verify_field_identities<P: AsRef<[f64]> + Sync>(
    spec: &VectorFieldSpec,
    sample_points: &[P],
) -> FieldIdentityReport {
    let n = spec.ambient_dim();
    #[derive(Default, Clone, Copy)]
    struct Acc {
        checked: usize,
        skipped: usize,
        symmetry: f64,
        trace: f64,
        grad: f64,
        jac: f64,
        min_eig: f64,
        norm: f64,
        bilap: f64,
    }
    let merge = |a: Acc, b: Acc| Acc {
        checked: a.checked + b.checked,
        skipped: a.skipped + b.skipped,
        symmetry: a.symmetry.max(b.symmetry),
        trace: a.trace.max(b.trace),
        grad: a.grad.max(b.grad),
        jac: a.jac.max(b.jac),
        min_eig: a.min_eig.min(b.min_eig),
        norm: a.norm.max(b.norm),
        bilap: a.bilap.max(b.bilap),
    };
    let empty = Acc {
        min_eig: f64::INFINITY,
        ..Acc::default()
    };
    let acc = sample_points
        .par_iter()
        .map(|p| {
            let x = p.as_ref();
            let Ok(sample) = spec.evaluate(x) else {
                return Acc {
                    skipped: 1,
                    ..empty
                };
            };
            let jac = &sample.jacobian;
            let mut symmetry = 0.0f64;
            for j in 0..n {
                for k in 0..n {
                    symmetry = symmetry.max((jac[j * n + k] - jac[k * n + j]).abs());
                }
            }
            let trace: f64 = (0..n).map(|j| jac[j * n + j]).sum();
            let shifted = |i: usize, h: f64| {
                let mut y = x.to_vec();
                y[i] += h;
                y
            };
            let mut grad = 0.0f64;
            let mut jac_fd = 0.0f64;
            let mut bilap_stencil = 0.0;
            let div0 = sample.div_x;
            for i in 0..n {
                let (xp, xm) = (shifted(i, FD_STEP), shifted(i, -FD_STEP));
                let d = (spec.weight(&xp) - spec.weight(&xm)) / (2.0 * FD_STEP);
                grad = grad.max((d - sample.gradient[i]).abs());
                if let (Ok(gp), Ok(gm)) = (spec.gradient(&xp), spec.gradient(&xm)) {
                    for k in 0..n {
                        let d = (gp[k] - gm[k]) / (2.0 * FD_STEP);
                        jac_fd = jac_fd.max((d - jac[i * n + k]).abs());
                    }
                }
                let (yp, ym) = (
                    shifted(i, FD_STEP_LAPLACIAN),
                    shifted(i, -FD_STEP_LAPLACIAN),
                );
                let (zp, zm) = (
                    shifted(i, 2.0 * FD_STEP_LAPLACIAN),
                    shifted(i, -2.0 * FD_STEP_LAPLACIAN),
                );
                if let (Ok(dp), Ok(dm), Ok(ep), Ok(em)) = (
                    spec.div_x(&yp),
                    spec.div_x(&ym),
                    spec.div_x(&zp),
                    spec.div_x(&zm),
                ) {
                    bilap_stencil += (-ep + 16.0 * dp - 30.0 * div0 + 16.0 * dm - em)
                        / (12.0 * FD_STEP_LAPLACIAN.powi(2));
                }
            }
            let bilap = (-bilap_stencil - sample.neg_lap_div_x).abs()
                / sample.neg_lap_div_x.abs().max(1.0);
            let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, jac));
            let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            let norm = sample.gradient.iter().map(|v| v * v).sum::<f64>().sqrt();
            Acc {
                checked: 1,
                skipped: 0,
                symmetry,
                trace: (trace - sample.div_x).abs(),
                grad,
                jac: jac_fd,
                min_eig,
                norm,
                bilap,
            }
        })
        .reduce(|| empty, merge);
    FieldIdentityReport {
        kind: spec.kind().label(),
        epsilon: spec.epsilon(),
        points_checked: acc.checked,
        points_skipped: acc.skipped,
        symmetry: acc.symmetry,
        trace_vs_div: acc.trace,
        gradient_fd: acc.grad,
        jacobian_fd: acc.jac,
        min_eigenvalue: if acc.checked == 0 { 0.0 } else { acc.min_eig },
        max_norm_x: acc.norm,
        norm_bound: 1.0 + 3.0 * spec.epsilon(),
        bilaplacian_fd: acc.bilap,
    }
}

/// `count` points drawn uniformly from `[-half_width, half_width)^n`.
pub fn random_sample_points(
    spec: &VectorFieldSpec,
    count: usize,
    half_width: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| spec.sample_point(&mut rng, half_width))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaLimitRow {
    pub epsilon: f64,
    pub value: f64,
    pub target: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaLimitTable {
    pub kind: &'static str,
    pub rows: Vec<DeltaLimitRow>,
    /// False when the error grows between consecutive rows beyond quadrature noise.
    pub monotone: bool,
}

const GL_ORDER: usize = 24;

/// `∫ (-Δ div X)_ε φ dw` over the three-dimensional reduced variable with
/// `φ(w) = exp(-|w|²/width²)`, against the limit `8π c² φ(0)`.
pub fn delta_limit_check(
    spec: &VectorFieldSpec,
    test_gaussian_width: f64,
    epsilons: &[f64],
) -> Result<DeltaLimitTable> {
    let target = spec.delta_constant().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "delta limit needs a three-dimensional reduced variable, {} has {}",
            spec.kind().label(),
            spec.reduced_dim()
        ))
    })?;
    if test_gaussian_width <= 0.0 {
        return Err(Error::InvalidArgument("test width must be positive".into()));
    }
    if epsilons.is_empty()
        || epsilons.iter().any(|&e| e <= 0.0)
        || epsilons.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "epsilons must be positive and strictly decreasing".into(),
        ));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(GL_ORDER).unwrap());
    let nodes = rule.as_node_weight_pairs();
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let s = spec.with_epsilon(eps)?;
        // w = ε t: dw = 4π ε³ t² dt over the radial variable
        let integrand = |t: f64| {
            let rho = eps * t;
            let r = (rho * rho + eps * eps).sqrt();
            4.0 * PI
                * eps.powi(3)
                * t
                * t
                * s.neg_lap_div_from(rho * rho, r)
                * (-(rho / test_gaussian_width).powi(2)).exp()
        };
        let t_max = 12.0 * test_gaussian_width / eps;
        let mut edges = vec![0.0, 0.25];
        while *edges.last().unwrap() < t_max {
            let next = edges.last().unwrap() * 1.5;
            edges.push(next.min(t_max));
        }
        let value: f64 = edges
            .windows(2)
            .map(|p| {
                let (a, b) = (p[0], p[1]);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                nodes
                    .iter()
                    .map(|&(x, w)| w * integrand(mid + half * x))
                    .sum::<f64>()
                    * half
            })
            .sum();
        rows.push(DeltaLimitRow {
            epsilon: eps,
            value,
            target,
            relative_error: (value - target).abs() / target,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].relative_error <= w[0].relative_error + 1e-12);
    Ok(DeltaLimitTable {
        kind: spec.kind().label(),
        rows,
        monotone,
    })
}
