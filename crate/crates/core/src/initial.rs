//! Initial data families.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, SpectralGrid};

fn check_vec(name: &str, v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "{name} has {} components, grid has dimension {dim}",
            v.len()
        )));
    }
    Ok(())
}

/// `A exp(-|x - c|²/(2w²)) exp(i k·(x - c))`.
pub fn gaussian(
    grid: &SpectralGrid,
    amplitude: f64,
    width: f64,
    center: &[f64],
    wavevector: &[f64],
) -> Result<ComplexField> {
    let dim = grid.dim();
    check_vec("center", center, dim)?;
    check_vec("wavevector", wavevector, dim)?;
    if !(width > 0.0) {
        return Err(Error::InvalidArgument("gaussian width must be positive".into()));
    }
    ComplexField::from_fn(grid, |x| {
        let mut r2 = 0.0;
        let mut phase = 0.0;
        for a in 0..dim {
            let dx = x[a] - center[a];
            r2 += dx * dx;
            phase += wavevector[a] * dx;
        }
        Complex64::from_polar(amplitude * (-r2 / (2.0 * width * width)).exp(), phase)
    })
}

/// Gaussian envelope times `1 + depth · exp(i k·x)`.
pub fn plane_modulated_gaussian(
    grid: &SpectralGrid,
    amplitude: f64,
    width: f64,
    center: &[f64],
    wavevector: &[f64],
    depth: f64,
) -> Result<ComplexField> {
    let envelope = gaussian(grid, amplitude, width, center, &vec![0.0; grid.dim()])?;
    let dim = grid.dim();
    check_vec("wavevector", wavevector, dim)?;
    let values = envelope
        .values()
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let x = grid.point(i);
            let phase: f64 = (0..dim).map(|a| wavevector[a] * x[a]).sum();
            u * (Complex64::new(1.0, 0.0) + Complex64::from_polar(depth, phase))
        })
        .collect();
    ComplexField::new(grid, values)
}

/// Random Fourier coefficients on wavevectors with `|k| ≤ band`, scaled so
/// that `max |u| = amplitude`. Deterministic in `seed`.
pub fn random_band_limited(
    grid: &SpectralGrid,
    seed: u64,
    band: f64,
    amplitude: f64,
) -> Result<ComplexField> {
    if !(band >= 0.0) {
        return Err(Error::InvalidArgument("band must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectrum: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            if grid.k_squared(i) <= band * band {
                Complex64::new(re, im)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let field = ComplexField::from_spectrum(grid, spectrum)?;
    let peak = field.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(field);
    }
    Ok(field.scaled(Complex64::new(amplitude / peak, 0.0)))
}
