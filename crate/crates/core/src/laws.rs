//! Pointwise densities, conserved integrals and local conservation-law residuals.
//!
//! With `ρ = ½|u|²`, `p_k = Im(ū ∂_k u)` and `σ_jk = 2 Re(∂_j u ∂_k ū)`, solutions
//! of the defocusing equation satisfy
//!
//! ```text
//! ∂_t ρ   = ∂_j p_j
//! ∂_t p_k = ∂_j ( δ_jk (P(ρ) - Δρ) + σ_jk )
//! ```
//!
//! where `P` is [`nonlinear_pressure`] (`2ρ²` for the cubic equation).

use rayon::prelude::*;

use crate::par::DeterministicSum;
use crate::error::Result;
use crate::evolve::Nonlinearity;
use crate::grid::{ComplexField, SpectralGrid};

/// Snapshot of `ρ`, `p` and `σ` on the grid.
#[derive(Clone, Debug)]
pub struct FieldDensities {
    pub grid: SpectralGrid,
    pub rho: Vec<f64>,
    /// `momentum[k][i] = p_k(x_i)`.
    pub momentum: Vec<Vec<f64>>,
    /// `sigma[j * dim + k][i] = σ_jk(x_i)`.
    pub sigma: Vec<Vec<f64>>,
}

impl FieldDensities {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn sigma_at(&self, j: usize, k: usize) -> &[f64] {
        &self.sigma[j * self.dim() + k]
    }

    /// Largest relative deviation from `σ_jk = (p_j p_k + ∂_jρ ∂_kρ)/ρ` over points
    /// with `ρ > floor_fraction · max ρ`, normalized by `max |σ|`.
    pub fn madelung_residual(&self, floor_fraction: f64) -> f64 {
        let dim = self.dim();
        let rho_max = self.rho.iter().cloned().fold(0.0, f64::max);
        if rho_max == 0.0 {
            return 0.0;
        }
        let floor = floor_fraction * rho_max;
        let grad_rho: Vec<Vec<f64>> = (0..dim)
            .map(|a| self.grid.derivative_real(&self.rho, a, 1))
            .collect();
        let sigma_max = self
            .sigma
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = (0..self.rho.len())
            .into_par_iter()
            .filter(|&i| self.rho[i] > floor)
            .map(|i| {
                let mut w = 0.0f64;
                for j in 0..dim {
                    for k in 0..dim {
                        let rhs = (self.momentum[j][i] * self.momentum[k][i]
                            + grad_rho[j][i] * grad_rho[k][i])
                            / self.rho[i];
                        w = w.max((self.sigma[j * dim + k][i] - rhs).abs());
                    }
                }
                w
            })
            .reduce(|| 0.0, f64::max);
        if sigma_max == 0.0 {
            worst
        } else {
            worst / sigma_max
        }
    }
}

/// Computes `ρ`, `p` and `σ` with spectral gradients.
pub fn densities(field: &ComplexField) -> FieldDensities {
    let grid = field.grid().clone();
    let dim = grid.dim();
    let grad = field.gradient();
    let u = field.values();
    let rho = u.iter().map(|v| 0.5 * v.norm_sqr()).collect();
    let momentum = grad
        .iter()
        .map(|g| {
            u.iter()
                .zip(g.values())
                .map(|(a, b)| (a.conj() * b).im)
                .collect()
        })
        .collect();
    let mut sigma = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        for k in 0..dim {
            let s: Vec<f64> = grad[j]
                .values()
                .iter()
                .zip(grad[k].values())
                .map(|(a, b)| 2.0 * (a * b.conj()).re)
                .collect();
            sigma.push(s);
        }
    }
    FieldDensities {
        grid,
        rho,
        momentum,
        sigma,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservedIntegrals {
    pub mass: f64,
    pub energy: f64,
    pub momentum: Vec<f64>,
}

/// Mass `∫|u|²`, defocusing energy `½∫|∇u|² + 1/(p+1) ∫|u|^{p+1}` and momentum `Im∫ū∇u`.
pub fn conserved_integrals(field: &ComplexField, p: f64) -> ConservedIntegrals {
    conserved_integrals_with(field, p, Nonlinearity::Defocusing)
}

/// As [`conserved_integrals`], with the potential term scaled by the nonlinearity sign.
pub fn conserved_integrals_with(
    field: &ComplexField,
    p: f64,
    nonlinearity: Nonlinearity,
) -> ConservedIntegrals {
    let grid = field.grid();
    let mass = field.mass();
    let grad_sq = field.sobolev_seminorm(1.0).expect("s = 1 is valid").powi(2);
    let potential: f64 = field
        .values()
        .par_iter()
        .map(|v| v.norm().powf(p + 1.0))
        .det_sum()
        * grid.cell_volume();
    let energy = 0.5 * grad_sq + nonlinearity.coefficient() * potential / (p + 1.0);
    let momentum = field
        .gradient()
        .iter()
        .map(|g| {
            grid.cell_volume()
                * field
                    .values()
                    .iter()
                    .zip(g.values())
                    .map(|(a, b)| (a.conj() * b).im)
                    .sum::<f64>()
        })
        .collect();
    ConservedIntegrals {
        mass,
        energy,
        momentum,
    }
}

/// `2^{(p+1)/2} (p-1)/(p+1) ρ^{(p+1)/2}` for a single density value.
#[inline]
pub fn pressure(rho: f64, p: f64) -> f64 {
    2f64.powf(0.5 * (p + 1.0)) * (p - 1.0) / (p + 1.0) * rho.powf(0.5 * (p + 1.0))
}

/// Pointwise nonlinear pressure of a density field.
pub fn nonlinear_pressure(rho: &[f64], p: f64) -> Vec<f64> {
    rho.iter().map(|&r| pressure(r, p)).collect()
}

/// Sum of the two slot pressures of a cubic tensor product,
/// `4ρ₁ρ₂(ρ₁ + ρ₂)`.
pub fn tensor_pressure_isotropic(rho1: f64, rho2: f64) -> f64 {
    4.0 * rho1 * rho2 * (rho1 + rho2)
}

/// Pressures acting on the first and second factor of `u₁(x₁)u₂(x₂)`:
/// `(2ρ₂ P(ρ₁), 2ρ₁ P(ρ₂))`.
pub fn tensor_pressure_slots(rho1: f64, rho2: f64, p: f64) -> (f64, f64) {
    (2.0 * rho2 * pressure(rho1, p), 2.0 * rho1 * pressure(rho2, p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservationResiduals {
    /// `‖(ρ₊ - ρ₋)/(2dt) - ∂_j p_j‖_{L²}`.
    pub mass_residual: f64,
    /// `‖(p₊ - p₋)/(2dt) - ∂_j(δ_jk(P - Δρ) + σ_jk)‖_{L²}` summed over `k`.
    pub momentum_residual: f64,
    /// `‖∂_j p_j‖_{L²}`, for normalization.
    pub mass_scale: f64,
    /// `‖∂_j(δ_jk(P - Δρ) + σ_jk)‖_{L²}`, for normalization.
    pub momentum_scale: f64,
}

/// Residuals of the local mass and momentum laws at the middle of three
/// snapshots spaced by `dt` (defocusing pressure).
pub fn conservation_residuals(
    snapshots: [&ComplexField; 3],
    dt: f64,
    p: f64,
) -> Result<ConservationResiduals> {
    conservation_residuals_with(snapshots, dt, p, Nonlinearity::Defocusing)
}

pub fn conservation_residuals_with(
    snapshots: [&ComplexField; 3],
    dt: f64,
    p: f64,
    nonlinearity: Nonlinearity,
) -> Result<ConservationResiduals> {
    let [prev, mid, next] = snapshots;
    prev.check_grid(mid)?;
    next.check_grid(mid)?;
    let grid = mid.grid();
    let dim = grid.dim();
    let d_prev = densities(prev);
    let d_mid = densities(mid);
    let d_next = densities(next);
    let vol = grid.cell_volume();
    let l2 = |v: &[f64]| (vol * v.iter().map(|x| x * x).sum::<f64>()).sqrt();

    let mut div_p = vec![0.0; grid.len()];
    for k in 0..dim {
        let d = grid.derivative_real(&d_mid.momentum[k], k, 1);
        div_p.iter_mut().zip(d).for_each(|(a, b)| *a += b);
    }
    let mass_res: Vec<f64> = (0..grid.len())
        .map(|i| (d_next.rho[i] - d_prev.rho[i]) / (2.0 * dt) - div_p[i])
        .collect();

    let coef = nonlinearity.coefficient();
    let lap_rho = grid.laplacian_real(&d_mid.rho);
    let iso: Vec<f64> = d_mid
        .rho
        .iter()
        .zip(&lap_rho)
        .map(|(&r, &l)| coef * pressure(r, p) - l)
        .collect();
    let mut mom_sq = 0.0;
    let mut mom_scale_sq = 0.0;
    for k in 0..dim {
        let mut flux_div = grid.derivative_real(&iso, k, 1);
        for j in 0..dim {
            let d = grid.derivative_real(d_mid.sigma_at(j, k), j, 1);
            flux_div.iter_mut().zip(d).for_each(|(a, b)| *a += b);
        }
        let res: Vec<f64> = (0..grid.len())
            .map(|i| (d_next.momentum[k][i] - d_prev.momentum[k][i]) / (2.0 * dt) - flux_div[i])
            .collect();
        mom_sq += l2(&res).powi(2);
        mom_scale_sq += l2(&flux_div).powi(2);
    }
    Ok(ConservationResiduals {
        mass_residual: l2(&mass_res),
        momentum_residual: mom_sq.sqrt(),
        mass_scale: l2(&div_p),
        momentum_scale: mom_scale_sq.sqrt(),
    })
}
