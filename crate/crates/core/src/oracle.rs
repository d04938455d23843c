//! Brute-force reference implementations of the interaction actions.
//!
//! These evaluate the full tensor momentum against the weight gradient from
//! [`VectorFieldSpec`] with no symmetry reduction. They are slow and meant for
//! small grids.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{diag_1d_weight, line_diagonal_weight_2d, pair_weight_3d, Line2D};
use crate::grid::ComplexField;
use crate::laws::densities;

fn gradient_or_zero(
    spec: &crate::fields::VectorFieldSpec,
    x: &[f64],
) -> Result<Option<Vec<f64>>> {
    match spec.gradient(x) {
        Ok(g) => Ok(Some(g)),
        Err(Error::Singular(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `-Σ_{i,j} [2ρ_j p_i · X_y + 2ρ_i p_j · X_z] h⁶` over all grid-point pairs.
pub fn pair3d_pairwise(field: &ComplexField, epsilon: f64) -> Result<f64> {
    let grid = field.grid();
    if grid.dim() != 3 {
        return Err(Error::InvalidArgument("pair oracle needs a 3D field".into()));
    }
    let spec = pair_weight_3d(epsilon)?;
    let d = densities(field);
    let n = grid.len();
    let sum: f64 = (0..n)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let xi = grid.point(i);
            let mut acc = 0.0;
            for j in 0..n {
                let xj = grid.point(j);
                let x = [xi[0], xi[1], xi[2], xj[0], xj[1], xj[2]];
                let Some(g) = gradient_or_zero(&spec, &x)? else {
                    continue;
                };
                for k in 0..3 {
                    acc += 2.0 * d.rho[j] * d.momentum[k][i] * g[k]
                        + 2.0 * d.rho[i] * d.momentum[k][j] * g[k + 3];
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    Ok(-grid.cell_volume().powi(2) * sum)
}

/// Quadruple loop over `(i₁, i₂, j₁, j₂)` with both tensor slots.
pub fn line2d_quadruple_loop(field: &ComplexField, line: &Line2D, epsilon: f64) -> Result<f64> {
    let grid = field.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument("line oracle needs a 2D field".into()));
    }
    let spec = line_diagonal_weight_2d(*line, epsilon)?;
    let d = densities(field);
    let n = grid.n_points();
    let h = grid.spacing();
    let coord = |i: usize| grid.origin() + i as f64 * h;
    let mut sum = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            let i = grid.flat_index(&[i1, i2]);
            for j1 in 0..n {
                for j2 in 0..n {
                    let j = grid.flat_index(&[j1, j2]);
                    let x = [coord(i1), coord(i2), coord(j1), coord(j2)];
                    let Some(g) = gradient_or_zero(&spec, &x)? else {
                        continue;
                    };
                    for k in 0..2 {
                        sum += 2.0 * d.rho[j] * d.momentum[k][i] * g[k];
                        sum += 2.0 * d.rho[i] * d.momentum[k][j] * g[k + 2];
                    }
                }
            }
        }
    }
    Ok(-h.powi(4) * sum)
}

/// Four nested loops with the tensor momentum of four copies of `field`.
pub fn diag1d_naive(field: &ComplexField, epsilon: f64) -> Result<f64> {
    let grid = field.grid();
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("diagonal oracle needs a 1D field".into()));
    }
    let spec = diag_1d_weight(epsilon)?;
    let d = densities(field);
    let n = grid.len();
    let x = |i: usize| grid.point(i)[0];
    let mut sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for e in 0..n {
                    let idx = [a, b, c, e];
                    let point = [x(a), x(b), x(c), x(e)];
                    let Some(g) = gradient_or_zero(&spec, &point)? else {
                        continue;
                    };
                    for slot in 0..4 {
                        let mut term = d.momentum[0][idx[slot]] * g[slot];
                        for other in 0..4 {
                            if other != slot {
                                term *= 2.0 * d.rho[idx[other]];
                            }
                        }
                        sum += term;
                    }
                }
            }
        }
    }
    Ok(-grid.spacing().powi(4) * sum)
}
