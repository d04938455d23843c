//! Periodic box discretization and spectral calculus.
//!
//! The box is `[-L/2, L/2)^dim` sampled at `N` points per axis with spacing
//! `h = L/N`. Arrays are stored row-major with axis 0 slowest.
//!
//! DFT normalization (used everywhere in the crate): the forward transform is
//! unnormalized, `c_k = Σ_j u_j e^{-i k·(x_j - x_start)}`, and the inverse
//! carries the factor `1/N^dim`. Continuous integrals are grid sums times the
//! cell volume `h^dim`, so
//!
//! ```text
//! ∫ |u|² dx  ≈  h^dim Σ_j |u_j|²  =  (h^dim / N^dim) Σ_k |c_k|²
//! ```
//!
//! and every Fourier-multiplier norm carries the same `h^dim / N^dim` factor.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::par::DeterministicSum;
use crate::error::{Error, Result};

/// Largest total number of grid points `n_points^dim` accepted by [`make_grid`].
pub const MAX_GRID_POINTS: usize = 1 << 24;

const PAR_MIN_LEN: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Multi-dimensional FFT on a cube of side `n`, applied axis by axis.
pub struct FftNd {
    n: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("n", &self.n).field("dim", &self.dim).finish()
    }
}

impl FftNd {
    pub fn new(n: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftNd {
            n,
            dim,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// In-place transform. Forward is unnormalized; inverse divides by `n^dim`.
    pub fn process(&self, data: &mut [Complex64], direction: Direction) {
        assert_eq!(data.len(), self.len(), "FftNd: buffer length mismatch");
        let plan = match direction {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let n = self.n;
        let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                run_lines(plan.as_ref(), data, n);
                continue;
            }
            // gather strided lines into contiguous rows, transform, scatter back
            {
                let src: &[Complex64] = data;
                tmp.par_chunks_mut(n).enumerate().for_each(|(line, row)| {
                    let outer = line / stride;
                    let inner = line % stride;
                    let base = outer * n * stride + inner;
                    for (k, v) in row.iter_mut().enumerate() {
                        *v = src[base + k * stride];
                    }
                });
            }
            run_lines(plan.as_ref(), &mut tmp, n);
            let rows: &[Complex64] = &tmp;
            data.par_iter_mut()
                .with_min_len(PAR_MIN_LEN)
                .enumerate()
                .for_each(|(idx, v)| {
                    let outer = idx / (n * stride);
                    let rem = idx % (n * stride);
                    let k = rem / stride;
                    let inner = rem % stride;
                    *v = rows[(outer * stride + inner) * n + k];
                });
        }
        if direction == Direction::Inverse {
            let scale = 1.0 / self.len() as f64;
            data.par_iter_mut()
                .with_min_len(PAR_MIN_LEN)
                .for_each(|v| *v *= scale);
        }
    }
}

fn run_lines(plan: &dyn Fft<f64>, data: &mut [Complex64], n: usize) {
    let lines_per_chunk = (PAR_MIN_LEN / n).max(1);
    data.par_chunks_mut(n * lines_per_chunk).for_each(|chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(chunk, &mut scratch);
    });
}

/// Uniform periodic grid on `[-L/2, L/2)^dim`.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    dim: usize,
    n_points: usize,
    box_length: f64,
    spacing: f64,
    /// Angular wavenumbers `2πk/L` in FFT storage order (0, 1, …, N/2-1, -N/2, …, -1).
    wavenumbers: Arc<[f64]>,
    fft: Arc<FftNd>,
}

/// Builds a grid, validating `dim ∈ {1,2,3}`, even `n_points ≥ 8` and `box_length > 0`.
pub fn make_grid(dim: usize, n_points: usize, box_length: f64) -> Result<SpectralGrid> {
    SpectralGrid::new(dim, n_points, box_length)
}

impl SpectralGrid {
    pub fn new(dim: usize, n_points: usize, box_length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim {dim} out of range 1..=3")));
        }
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and >= 8, got {n_points}"
            )));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "box_length must be positive, got {box_length}"
            )));
        }
        let total = n_points
            .checked_pow(dim as u32)
            .filter(|&t| t <= MAX_GRID_POINTS)
            .ok_or_else(|| {
                Error::InvalidGrid(format!(
                    "{n_points}^{dim} points exceeds the budget of {MAX_GRID_POINTS}"
                ))
            })?;
        debug_assert!(total > 0);
        let k0 = 2.0 * PI / box_length;
        let wavenumbers: Arc<[f64]> = (0..n_points)
            .map(|m| k0 * wave_index(m, n_points) as f64)
            .collect();
        Ok(SpectralGrid {
            dim,
            n_points,
            box_length,
            spacing: box_length / n_points as f64,
            wavenumbers,
            fft: Arc::new(FftNd::new(n_points, dim)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of grid points, `n_points^dim`.
    pub fn len(&self) -> usize {
        self.n_points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^dim`, the quadrature weight of a single grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn box_volume(&self) -> f64 {
        self.box_length.powi(self.dim as i32)
    }

    /// Per-axis angular wavenumbers in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Lower corner coordinate `-L/2` of every axis.
    pub fn origin(&self) -> f64 {
        -0.5 * self.box_length
    }

    pub fn same_as(&self, other: &SpectralGrid) -> bool {
        self.dim == other.dim
            && self.n_points == other.n_points
            && self.box_length == other.box_length
    }

    /// Per-axis indices of a flat index (unused trailing axes are 0).
    #[inline]
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.n_points;
        let mut out = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % n;
            rem /= n;
        }
        out
    }

    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .take(self.dim)
            .fold(0, |acc, &i| acc * self.n_points + i)
    }

    /// Physical coordinates of a flat index (unused trailing axes are 0).
    #[inline]
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.origin() + idx[axis] as f64 * self.spacing;
        }
        x
    }

    /// Wavevector of a flat spectral index.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0.0; 3];
        for axis in 0..self.dim {
            k[axis] = self.wavenumbers[idx[axis]];
        }
        k
    }

    #[inline]
    pub fn k_squared(&self, flat: usize) -> f64 {
        self.wavevector(flat).iter().map(|k| k * k).sum()
    }

    /// `|k̃|²` where `k̃` drops the Nyquist component of each axis, matching
    /// the symbol of the first-derivative operators.
    #[inline]
    pub fn k_squared_derivative(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        (0..self.dim)
            .filter(|&a| idx[a] != self.n_points / 2)
            .map(|a| self.wavenumbers[idx[a]].powi(2))
            .sum()
    }

    /// Largest integer wave index `|m|` over all axes (used by the spectral-tail monitor).
    #[inline]
    pub fn max_wave_index(&self, flat: usize) -> usize {
        let idx = self.multi_index(flat);
        (0..self.dim)
            .map(|a| wave_index(idx[a], self.n_points).unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Forward (unnormalized) or inverse (`1/N^dim`) DFT of raw values.
    pub fn transform(&self, values: &[Complex64], direction: Direction) -> Vec<Complex64> {
        let mut out = values.to_vec();
        self.fft.process(&mut out, direction);
        out
    }

    pub fn transform_in_place(&self, values: &mut [Complex64], direction: Direction) {
        self.fft.process(values, direction);
    }

    /// Spectral derivative of a real array.
    pub fn derivative_real(&self, values: &[f64], axis: usize, order: u32) -> Vec<f64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf, Direction::Forward);
        self.apply_derivative(&mut buf, axis, order);
        self.fft.process(&mut buf, Direction::Inverse);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn laplacian_real(&self, values: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf, Direction::Forward);
        buf.par_iter_mut()
            .with_min_len(PAR_MIN_LEN)
            .enumerate()
            .for_each(|(i, c)| *c *= -self.k_squared(i));
        self.fft.process(&mut buf, Direction::Inverse);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn apply_derivative(&self, spectrum: &mut [Complex64], axis: usize, order: u32) {
        let n = self.n_points;
        let stride = n.pow((self.dim - 1 - axis) as u32);
        let i = Complex64::new(0.0, 1.0);
        spectrum
            .par_iter_mut()
            .with_min_len(PAR_MIN_LEN)
            .enumerate()
            .for_each(|(flat, c)| {
                let m = (flat / stride) % n;
                if order % 2 == 1 && m == n / 2 {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    *c *= (i * self.wavenumbers[m]).powu(order);
                }
            });
    }

    /// Grid quadrature `h^dim Σ f_j` of a real array.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.cell_volume() * values.par_iter().copied().det_sum()
    }
}

/// Signed integer wave index for FFT storage slot `m`.
#[inline]
pub fn wave_index(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Complex state on a [`SpectralGrid`], immutable once built; the forward
/// spectrum is computed lazily and cached.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: SpectralGrid,
    values: Vec<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl ComplexField {
    pub fn new(grid: &SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-finite value at index {pos}")));
        }
        Ok(ComplexField {
            grid: grid.clone(),
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub(crate) fn from_trusted(grid: &SpectralGrid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ComplexField {
            grid: grid.clone(),
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self::from_trusted(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    /// Samples `f(x)` at every grid point; `x` has `dim` components.
    pub fn from_fn<F>(grid: &SpectralGrid, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let dim = grid.dim();
        let values = (0..grid.len())
            .into_par_iter()
            .with_min_len(PAR_MIN_LEN)
            .map(|i| f(&grid.point(i)[..dim]))
            .collect();
        Self::new(grid, values)
    }

    /// Builds a field from its (unnormalized) spectrum.
    pub fn from_spectrum(grid: &SpectralGrid, spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::GridMismatch("spectrum length".into()));
        }
        let values = grid.transform(&spectrum, Direction::Inverse);
        let field = Self::new(grid, values)?;
        let _ = field.spectrum.set(spectrum);
        Ok(field)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Forward DFT of the values (cached).
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| self.grid.transform(&self.values, Direction::Forward))
    }

    pub fn transform(&self, direction: Direction) -> Vec<Complex64> {
        match direction {
            Direction::Forward => self.spectrum().to_vec(),
            Direction::Inverse => self.grid.transform(&self.values, Direction::Inverse),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `∫|u|² dx` by grid quadrature.
    pub fn mass(&self) -> f64 {
        self.grid.cell_volume()
            * self
                .values
                .par_iter()
                .map(|v| v.norm_sqr())
                .det_sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `αu + βv` on the same grid.
    pub fn linear_combination(
        &self,
        alpha: Complex64,
        other: &ComplexField,
        beta: Complex64,
    ) -> Result<ComplexField> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        ComplexField::new(&self.grid, values)
    }

    pub fn scaled(&self, alpha: Complex64) -> ComplexField {
        ComplexField::from_trusted(&self.grid, self.values.iter().map(|v| alpha * v).collect())
    }

    pub(crate) fn check_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids".into()))
        }
    }

    /// Multiplies the spectrum by `(i k_axis)^order`, `order ∈ {1, 2}`.
    ///
    /// Odd orders zero the Nyquist coefficient along `axis`: the interpolant
    /// treats that mode as a cosine, whose derivative vanishes at the nodes.
    /// Derivatives of real fields therefore stay real.
    pub fn spectral_derivative(&self, axis: usize, order: u32) -> Result<ComplexField> {
        if axis >= self.grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for dim {}",
                self.grid.dim()
            )));
        }
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidArgument(format!("derivative order {order} not in {{1,2}}")));
        }
        let mut spec = self.spectrum().to_vec();
        self.grid.apply_derivative(&mut spec, axis, order);
        let values = self.grid.transform(&spec, Direction::Inverse);
        let out = ComplexField::from_trusted(&self.grid, values);
        let _ = out.spectrum.set(spec);
        Ok(out)
    }

    /// All first derivatives `∂_a u`, `a = 0..dim`.
    pub fn gradient(&self) -> Vec<ComplexField> {
        (0..self.grid.dim())
            .map(|a| self.spectral_derivative(a, 1).expect("axis in range"))
            .collect()
    }

    pub fn laplacian(&self) -> ComplexField {
        let spec: Vec<Complex64> = self
            .spectrum()
            .par_iter()
            .with_min_len(PAR_MIN_LEN)
            .enumerate()
            .map(|(i, c)| c * -self.grid.k_squared(i))
            .collect();
        let values = self.grid.transform(&spec, Direction::Inverse);
        let out = ComplexField::from_trusted(&self.grid, values);
        let _ = out.spectrum.set(spec);
        out
    }

    /// Homogeneous Sobolev seminorm `‖u‖_{Ḣ^s} = (h^d/N^d Σ_k |k̃|^{2s} |c_k|²)^{1/2}`,
    /// with `k̃` as in [`SpectralGrid::k_squared_derivative`] so that `s = 1`
    /// equals the norm of the spectral gradient.
    pub fn sobolev_seminorm(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::InvalidArgument(format!("Sobolev index must be >= 0, got {s}")));
        }
        let total: f64 = self
            .spectrum()
            .par_iter()
            .with_min_len(PAR_MIN_LEN)
            .enumerate()
            .map(|(i, c)| {
                let k2 = self.grid.k_squared_derivative(i);
                let mult = if s == 0.0 { 1.0 } else { k2.powf(s) };
                mult * c.norm_sqr()
            })
            .det_sum();
        let norm = self.grid.cell_volume() / self.grid.len() as f64;
        Ok((norm * total).sqrt())
    }

    /// Trigonometric interpolation at arbitrary points (wrapped periodically).
    ///
    /// The Nyquist coefficient is split evenly between `±N/2`, so the
    /// interpolant of real samples is real and grid nodes are reproduced.
    pub fn interpolate<P>(&self, points: &[P]) -> Vec<Complex64>
    where
        P: AsRef<[f64]> + Sync,
    {
        points
            .par_iter()
            .map(|p| self.interpolate_one(p.as_ref()))
            .collect()
    }

    pub fn interpolate_one(&self, point: &[f64]) -> Complex64 {
        let grid = &self.grid;
        let n = grid.n_points();
        let dim = grid.dim();
        assert!(point.len() >= dim, "point has fewer components than the grid dimension");
        let phases: Vec<Vec<Complex64>> = (0..dim)
            .map(|a| {
                let xi = point[a] - grid.origin();
                (0..n)
                    .map(|m| {
                        let k = grid.wavenumbers()[m];
                        if m == n / 2 {
                            Complex64::new((k * xi).cos(), 0.0)
                        } else {
                            Complex64::from_polar(1.0, k * xi)
                        }
                    })
                    .collect()
            })
            .collect();
        let c = self.spectrum();
        let sum = match dim {
            1 => c.iter().zip(&phases[0]).map(|(c, e)| c * e).sum::<Complex64>(),
            2 => (0..n)
                .map(|m0| {
                    let row = &c[m0 * n..(m0 + 1) * n];
                    phases[0][m0] * row.iter().zip(&phases[1]).map(|(c, e)| c * e).sum::<Complex64>()
                })
                .sum(),
            _ => (0..n)
                .map(|m0| {
                    let inner: Complex64 = (0..n)
                        .map(|m1| {
                            let base = (m0 * n + m1) * n;
                            let row = &c[base..base + n];
                            phases[1][m1]
                                * row.iter().zip(&phases[2]).map(|(c, e)| c * e).sum::<Complex64>()
                        })
                        .sum();
                    phases[0][m0] * inner
                })
                .sum(),
        };
        sum / grid.len() as f64
    }

    /// Fraction of the mass at grid points with `max_a |x_a| ≥ 0.4 L`
    /// (outer 10% of the box on each side).
    pub fn boundary_mass_fraction(&self) -> f64 {
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let limit = 0.4 * self.grid.box_length();
        let dim = self.grid.dim();
        let shell: f64 = self
            .values
            .par_iter()
            .enumerate()
            .map(|(i, v)| {
                let x = self.grid.point(i);
                if x[..dim].iter().any(|c| c.abs() >= limit) {
                    v.norm_sqr()
                } else {
                    0.0
                }
            })
            .det_sum();
        shell / total
    }

    /// Fraction of spectral energy `Σ|k|²|c_k|²` carried by wave indices with
    /// `max_a |m_a| > N/3` (top third of the resolved band).
    pub fn spectral_tail_fraction(&self) -> f64 {
        let n = self.grid.n_points();
        let (tail, total) = self
            .spectrum()
            .par_iter()
            .with_min_len(PAR_MIN_LEN)
            .enumerate()
            .map(|(i, c)| {
                let e = (1.0 + self.grid.k_squared(i)) * c.norm_sqr();
                if 3 * self.grid.max_wave_index(i) > n {
                    (e, e)
                } else {
                    (0.0, e)
                }
            })
            .det_sum_pair();
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}
