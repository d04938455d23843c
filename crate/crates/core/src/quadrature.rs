//! Composite Gauss–Legendre rules and sampled plane curves.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::fields::Line2D;

/// Nodes and weights of a composite Gauss–Legendre rule on `[a, b]` with
/// `panels` equal panels of `order` points each.
pub fn gauss_legendre_panels(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap());
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let (mid, half) = (lo + 0.5 * width, 0.5 * width);
        for &(x, w) in rule.as_node_weight_pairs() {
            out.push((mid + half * x, half * w));
        }
    }
    out
}

/// Default nodes per panel for curve rules.
pub const CURVE_ORDER: usize = 16;

/// Sample points `x(l_i)` of a plane curve with arclength weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve2D {
    samples: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl Curve2D {
    pub fn new(samples: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if samples.len() != weights.len() || samples.is_empty() {
            return Err(Error::InvalidArgument(
                "curve needs one positive weight per sample".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument("curve weights must be positive".into()));
        }
        if samples.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidArgument(
                "consecutive curve samples must be distinct".into(),
            ));
        }
        Ok(Self { samples, weights })
    }

    /// Straight segment from `a` to `b`.
    pub fn segment(a: [f64; 2], b: [f64; 2], panels: usize, order: usize) -> Result<Self> {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        if len == 0.0 {
            return Err(Error::InvalidArgument("degenerate segment".into()));
        }
        let (samples, weights) = gauss_legendre_panels(0.0, len, panels, order)
            .into_iter()
            .map(|(l, w)| {
                let s = l / len;
                ([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])], w)
            })
            .unzip();
        Self::new(samples, weights)
    }

    /// The part of `line` with arclength parameter in `[l_min, l_max]`.
    pub fn on_line(line: Line2D, l_min: f64, l_max: f64, panels: usize, order: usize) -> Result<Self> {
        Self::segment(line.point_at(l_min), line.point_at(l_max), panels, order)
    }

    /// The chord of `line` inside the box `[-L/2, L/2]²`, with panels no longer
    /// than `max_panel`.
    pub fn line_in_box(line: Line2D, box_length: f64, max_panel: f64) -> Result<Self> {
        let half = 0.5 * box_length;
        let d = line.direction();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for a in 0..2 {
            if d[a].abs() < 1e-15 {
                if line.point[a].abs() > half {
                    return Err(Error::InvalidArgument("line misses the box".into()));
                }
                continue;
            }
            let t1 = (-half - line.point[a]) / d[a];
            let t2 = (half - line.point[a]) / d[a];
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
        if !(hi > lo) {
            return Err(Error::InvalidArgument("line misses the box".into()));
        }
        let panels = ((hi - lo) / max_panel).ceil() as usize;
        Self::on_line(line, lo, hi, panels, CURVE_ORDER)
    }

    /// Parametric curve `x(t)` for `t ∈ [t0, t1]` with speed `|x'(t)|`.
    pub fn parametric<F, G>(
        x: F,
        speed: G,
        t0: f64,
        t1: f64,
        panels: usize,
        order: usize,
    ) -> Result<Self>
    where
        F: Fn(f64) -> [f64; 2],
        G: Fn(f64) -> f64,
    {
        let (samples, weights) = gauss_legendre_panels(t0, t1, panels, order)
            .into_iter()
            .map(|(t, w)| (x(t), w * speed(t)))
            .unzip();
        Self::new(samples, weights)
    }

    /// Piecewise-linear path through `vertices`.
    pub fn polyline(vertices: &[[f64; 2]], panels_per_edge: usize, order: usize) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidArgument("polyline needs two vertices".into()));
        }
        let mut samples = Vec::new();
        let mut weights = Vec::new();
        for e in vertices.windows(2) {
            let seg = Self::segment(e[0], e[1], panels_per_edge, order)?;
            samples.extend(seg.samples);
            weights.extend(seg.weights);
        }
        Self::new(samples, weights)
    }

    pub fn samples(&self) -> &[[f64; 2]] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ f(x(l_i)) w_i`.
    pub fn integrate<F: Fn([f64; 2]) -> f64>(&self, f: F) -> f64 {
        self.samples
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn panels_integrate_polynomials_exactly() {
        let q = gauss_legendre_panels(-1.0, 2.0, 3, 4);
        let v: f64 = q.iter().map(|(x, w)| w * x.powi(7)).sum();
        assert!((v - (256.0 - 1.0) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn segment_length_and_linear_integral() {
        let c = Curve2D::segment([0.0, 0.0], [3.0, 4.0], 2, 8).unwrap();
        assert!((c.length() - 5.0).abs() < 1e-14);
        assert!((c.integrate(|x| x[0]) - 7.5).abs() < 1e-13);
    }

    #[test]
    fn circle_circumference() {
        let c = Curve2D::parametric(|t| [t.cos(), t.sin()], |_| 1.0, 0.0, 2.0 * PI, 8, 16).unwrap();
        assert!((c.length() - 2.0 * PI).abs() < 1e-13);
        let ellipse = Curve2D::parametric(
            |t| [2.0 * t.cos(), t.sin()],
            |t| (4.0 * t.sin().powi(2) + t.cos().powi(2)).sqrt(),
            0.0,
            2.0 * PI,
            16,
            16,
        )
        .unwrap();
        // perimeter of the (2, 1) ellipse
        assert!((ellipse.length() - 9.688448220547675).abs() < 1e-10);
    }

    #[test]
    fn chord_through_box() {
        let c = Curve2D::line_in_box(Line2D::new([0.0, 0.0], PI / 4.0), 10.0, 0.5).unwrap();
        assert!((c.length() - 10.0 * 2f64.sqrt()).abs() < 1e-12);
        let off = Curve2D::line_in_box(Line2D::new([1.0, 2.0], 0.0), 10.0, 0.5).unwrap();
        assert!((off.length() - 10.0).abs() < 1e-12);
        assert!(Curve2D::line_in_box(Line2D::new([0.0, 6.0], 0.0), 10.0, 0.5).is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(Curve2D::new(vec![[0.0, 0.0]], vec![-1.0]).is_err());
        assert!(Curve2D::new(vec![[0.0, 0.0], [0.0, 0.0]], vec![1.0, 1.0]).is_err());
        assert!(Curve2D::polyline(&[[0.0, 0.0]], 1, 4).is_err());
    }
}
