//! Morawetz action and virial terms of a single solution.
//!
//! For a weight `a` with `X = ∇a`, the action `M = -∫ X·p` obeys
//!
//! ```text
//! ∂_t M = ∫ (-Δ div X) ρ + ∫ div X · P(ρ) + ∫ ∇_j X^k σ_jk
//! ```
//!
//! and each term is non-negative for convex `a` and defocusing `P`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::par::DeterministicSum;
use crate::error::{Error, Result};
use crate::evolve::{DiagnosticTrace, Nonlinearity};
use crate::fields::{FieldSample, VectorFieldSpec, WeightKind};
use crate::grid::{ComplexField, SpectralGrid};
use crate::laws::{densities, pressure};
use crate::report::{trapezoid, EstimateReport};

/// Regularized `|u(t, center)|²` channel.
pub const CH_CENTER_DENSITY: &str = "center_density";
/// `∫|u|^{p+1}/|x - center|` channel.
pub const CH_WEIGHTED_P1: &str = "weighted_lp1";
/// `‖u‖²_{Ḣ^{1/2}}` channel.
pub const CH_HHALF_SQ: &str = "hhalf_sq";

fn check_dims(grid: &SpectralGrid, spec: &VectorFieldSpec) -> Result<()> {
    if spec.ambient_dim() != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "{}-dimensional weight on a {}-dimensional grid",
            spec.ambient_dim(),
            grid.dim()
        )));
    }
    Ok(())
}

/// Evaluates the weight at every grid point.
pub fn sample_on_grid(spec: &VectorFieldSpec, grid: &SpectralGrid) -> Result<Vec<FieldSample>> {
    check_dims(grid, spec)?;
    let dim = grid.dim();
    (0..grid.len())
        .into_par_iter()
        .map(|i| spec.evaluate(&grid.point(i)[..dim]))
        .collect()
}

/// `M = -∫ X·p`.
pub fn morawetz_action(field: &ComplexField, spec: &VectorFieldSpec) -> Result<f64> {
    let grid = field.grid();
    check_dims(grid, spec)?;
    let dim = grid.dim();
    let d = densities(field);
    let sum = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = spec.gradient(&grid.point(i)[..dim])?;
            Ok((0..dim).map(|k| x[k] * d.momentum[k][i]).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum::<f64>();
    Ok(-grid.cell_volume() * sum)
}

/// The three terms of `∂_t M`.
#[derive(Clone, Debug, PartialEq)]
pub struct VirialTerms {
    /// `∫ (-Δ div X) ρ`.
    pub bilaplacian_term: f64,
    /// `∫ div X · P(ρ)`, signed by the nonlinearity.
    pub nonlinear_term: f64,
    /// `∫ ∇_j X^k σ_jk` by tensor contraction.
    pub sigma_term: f64,
    /// `∫ (2/R)(|∇u|² - |w·∇u|²/R²)`, the same term in closed form.
    pub sigma_term_closed_form: f64,
    /// Largest pointwise difference between the two evaluations.
    pub sigma_discrepancy: f64,
}

impl VirialTerms {
    pub fn total(&self) -> f64 {
        self.bilaplacian_term + self.nonlinear_term + self.sigma_term
    }
}

/// Virial terms for a radial weight with defocusing pressure.
pub fn virial_rhs_terms(field: &ComplexField, spec: &VectorFieldSpec, p: f64) -> Result<VirialTerms> {
    virial_rhs_terms_with(field, spec, p, Nonlinearity::Defocusing)
}

pub fn virial_rhs_terms_with(
    field: &ComplexField,
    spec: &VectorFieldSpec,
    p: f64,
    nonlinearity: Nonlinearity,
) -> Result<VirialTerms> {
    let grid = field.grid();
    check_dims(grid, spec)?;
    if !matches!(spec.kind(), WeightKind::Radial(_)) {
        return Err(Error::InvalidArgument(
            "virial terms are defined for radial weights".into(),
        ));
    }
    let dim = grid.dim();
    let d = densities(field);
    let grad = field.gradient();
    let center = spec.offset().to_vec();
    let eps2 = spec.epsilon().powi(2);
    let coef = nonlinearity.coefficient();
    let per_point = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = &grid.point(i)[..dim];
            let s = spec.evaluate(x)?;
            let mut contraction = 0.0;
            for j in 0..dim {
                for k in 0..dim {
                    contraction += s.jacobian[j * dim + k] * d.sigma_at(j, k)[i];
                }
            }
            let mut grad_sq = 0.0;
            let mut radial = Complex64::new(0.0, 0.0);
            let mut w2 = 0.0;
            for a in 0..dim {
                let g = grad[a].values()[i];
                let w = x[a] - center[a];
                grad_sq += g.norm_sqr();
                radial += g * w;
                w2 += w * w;
            }
            let r2 = w2 + eps2;
            let r = r2.sqrt();
            let closed = 2.0 / r * (grad_sq - radial.norm_sqr() / r2);
            Ok([
                s.neg_lap_div_x * d.rho[i],
                coef * s.div_x * pressure(d.rho[i], p),
                contraction,
                closed,
                (contraction - closed).abs(),
            ])
        })
        .collect::<Result<Vec<[f64; 5]>>>()?;
    let vol = grid.cell_volume();
    let mut sums = [0.0; 4];
    let mut worst = 0.0f64;
    for v in &per_point {
        for a in 0..4 {
            sums[a] += v[a];
        }
        worst = worst.max(v[4]);
    }
    Ok(VirialTerms {
        bilaplacian_term: vol * sums[0],
        nonlinear_term: vol * sums[1],
        sigma_term: vol * sums[2],
        sigma_term_closed_form: vol * sums[3],
        sigma_discrepancy: worst,
    })
}

/// `∫ |u|^exponent / √(|x - center|² + ε²)`.
pub fn weighted_integral(field: &ComplexField, center: &[f64], exponent: f64, epsilon: f64) -> f64 {
    let grid = field.grid();
    let dim = grid.dim();
    let e2 = epsilon * epsilon;
    let sum: f64 = field
        .values()
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let x = grid.point(i);
            let r2: f64 = (0..dim).map(|a| (x[a] - center[a]).powi(2)).sum::<f64>() + e2;
            u.norm().powf(exponent) / r2.sqrt()
        })
        .det_sum();
    grid.cell_volume() * sum
}

/// Time trapezoid of [`weighted_integral`] over stored snapshots.
pub fn weighted_spacetime_norm(
    snapshots: &[(f64, ComplexField)],
    center: &[f64],
    exponent: f64,
    epsilon: f64,
) -> f64 {
    let times: Vec<f64> = snapshots.iter().map(|s| s.0).collect();
    let values: Vec<f64> = snapshots
        .iter()
        .map(|(_, u)| weighted_integral(u, center, exponent, epsilon))
        .collect();
    trapezoid(&times, &values)
}

/// `|u(center)|²` smoothed by the normalized kernel `(-Δ div X)_ε / (8π c²)`.
pub fn center_density(field: &ComplexField, spec: &VectorFieldSpec) -> Result<f64> {
    let grid = field.grid();
    check_dims(grid, spec)?;
    let norm = spec.delta_constant().ok_or_else(|| {
        Error::InvalidArgument("center density needs a three-dimensional weight".into())
    })?;
    if spec.epsilon() <= 0.0 {
        return Err(Error::InvalidArgument(
            "center density needs epsilon > 0".into(),
        ));
    }
    let dim = grid.dim();
    let sum = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let k = spec.neg_lap_div_x(&grid.point(i)[..dim])?;
            Ok(k * field.values()[i].norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum::<f64>();
    Ok(grid.cell_volume() * sum / norm)
}

/// `∫|u(t,0)|² dt + ∫∫|u|^{p+1}/|x|` against `sup_t ‖u‖²_{Ḣ^{1/2}}`,
/// reported as a ratio.
pub fn lin_strauss_check(trace: &DiagnosticTrace, p: f64) -> Result<EstimateReport> {
    let center = trace.channel(CH_CENTER_DENSITY)?;
    let weighted = trace.channel(CH_WEIGHTED_P1)?;
    let hhalf = trace.channel(CH_HHALF_SQ)?;
    let lhs = trapezoid(&trace.times, center) + trapezoid(&trace.times, weighted);
    let rhs = hhalf.iter().cloned().fold(0.0, f64::max);
    Ok(EstimateReport::informational("lin-strauss", lhs, rhs, 1.0).with_context("p", p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::radial_weight;
    use crate::grid::make_grid;

    fn gaussian(grid: &SpectralGrid, c: [f64; 3], k: f64) -> ComplexField {
        let dim = grid.dim();
        ComplexField::from_fn(grid, |x| {
            let r2: f64 = (0..dim).map(|a| (x[a] - c[a]).powi(2)).sum();
            Complex64::from_polar((-r2 / 2.0).exp(), k * x[0])
        })
        .unwrap()
    }

    #[test]
    fn real_field_has_zero_action() {
        let g = make_grid(2, 64, 20.0).unwrap();
        let u = gaussian(&g, [0.5, 0.3, 0.0], 0.0);
        let s = radial_weight(2, 0.1).unwrap();
        assert!(morawetz_action(&u, &s).unwrap().abs() <= 1e-14);
    }

    #[test]
    fn centered_boost_has_zero_action() {
        let g = make_grid(2, 64, 16.0).unwrap();
        let u = gaussian(&g, [0.0; 3], 1.0);
        let s = radial_weight(2, 0.1).unwrap();
        assert!(morawetz_action(&u, &s).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn offset_boost_sign() {
        let g = make_grid(2, 64, 16.0).unwrap();
        let u = gaussian(&g, [2.0, 0.0, 0.0], 1.0);
        let s = radial_weight(2, 0.1).unwrap();
        assert!(morawetz_action(&u, &s).unwrap() < 0.0);
    }

    #[test]
    fn radial_field_sigma_term_is_purely_regularization() {
        let g = make_grid(3, 24, 12.0).unwrap();
        let u = gaussian(&g, [0.0; 3], 0.0);
        let eps = 0.2;
        let s = radial_weight(3, eps).unwrap();
        let t = virial_rhs_terms(&u, &s, 3.0).unwrap();
        assert!(t.sigma_discrepancy <= 1e-10);
        // radial profile: |∇u|² - |x̂·∇u|² = 0, leaving 2ε²|∇u|²/R³
        let grad = u.gradient();
        let residue: f64 = (0..g.len())
            .map(|i| {
                let x = g.point(i);
                let r2 = x.iter().map(|v| v * v).sum::<f64>() + eps * eps;
                let g2: f64 = grad.iter().map(|d| d.values()[i].norm_sqr()).sum();
                2.0 * eps * eps * g2 / r2.powf(1.5)
            })
            .sum::<f64>()
            * g.cell_volume();
        assert!((t.sigma_term - residue).abs() <= 1e-10 * residue, "{t:?}");
        assert!(t.bilaplacian_term > 0.0 && t.nonlinear_term > 0.0);
    }

    #[test]
    fn modulated_gaussian_contraction_matches_closed_form() {
        let g = make_grid(3, 24, 12.0).unwrap();
        let u = gaussian(&g, [0.4, -0.2, 0.1], 0.8);
        let s = crate::fields::radial_weight_at(&[0.3, 0.1, -0.2], 0.2).unwrap();
        let t = virial_rhs_terms(&u, &s, 3.0).unwrap();
        assert!(t.sigma_discrepancy <= 1e-10, "{t:?}");
        assert!(t.sigma_term > 0.0);
    }

    #[test]
    fn weighted_norm_degenerate_cases() {
        let g = make_grid(2, 16, 8.0).unwrap();
        let z = ComplexField::zeros(&g);
        assert_eq!(weighted_integral(&z, &[0.0, 0.0], 4.0, 0.1), 0.0);
        let u = gaussian(&g, [0.0; 3], 0.0);
        let once = weighted_integral(&u, &[0.0, 0.0], 4.0, 0.1);
        let snaps = vec![(0.0, u.clone()), (2.5, u)];
        let st = weighted_spacetime_norm(&snaps, &[0.0, 0.0], 4.0, 0.1);
        assert!((st - 2.5 * once).abs() < 1e-13 * st);
    }

    #[test]
    fn center_density_approaches_point_value() {
        let g = make_grid(3, 64, 10.0).unwrap();
        let u = gaussian(&g, [0.0; 3], 0.0);
        let s = radial_weight(3, 0.5).unwrap();
        let coarse = center_density(&u, &s).unwrap();
        let s_fine = radial_weight(3, 0.25).unwrap();
        let fine = center_density(&u, &s_fine).unwrap();
        assert!((fine - 1.0).abs() < (coarse - 1.0).abs());
        assert!(fine < 1.0 && fine > 0.5);
    }

    #[test]
    fn lin_strauss_needs_channels() {
        let trace = DiagnosticTrace::new(vec!["mass".to_string()], 0.1);
        assert!(matches!(
            lin_strauss_check(&trace, 3.0),
            Err(Error::MissingChannel(_))
        ));
    }
}
