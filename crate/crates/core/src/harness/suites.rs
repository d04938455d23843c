//! Standalone suites behind `verify-fields` and `selftest`.

use num_complex::Complex64;

use crate::error::Result;
use crate::evolve::{evolve, free_gaussian_reference, Nonlinearity, SolverConfig};
use crate::fields::{
    delta_limit_check, diag_1d_weight, line_diagonal_weight_2d, pair_weight_3d, radial_weight,
    random_sample_points, verify_field_identities, IdentityTolerances, Line2D, VectorFieldSpec,
};
use crate::grid::{make_grid, ComplexField};
use crate::initial::{gaussian, random_band_limited};
use crate::interaction::{interaction_action_1d, interaction_action_2d, interaction_action_3d};
use crate::oracle::{diag1d_naive, line2d_quadruple_loop, pair3d_pairwise};
use crate::report::EstimateReport;

/// Sample points per weight kind.
pub const IDENTITY_SAMPLES: usize = 1000;
pub const IDENTITY_EPSILONS: [f64; 2] = [0.0, 0.1];
pub const DELTA_EPSILONS: [f64; 3] = [1e-1, 1e-2, 1e-3];
/// Relative error allowed at the smallest delta-limit ε.
pub const DELTA_TOL: f64 = 1e-3;

/// The four weight kinds at regularization `epsilon`, with short labels.
pub fn weight_catalog(epsilon: f64) -> Result<Vec<(String, VectorFieldSpec)>> {
    Ok(vec![
        ("radial3".into(), radial_weight(3, epsilon)?),
        ("pair3d".into(), pair_weight_3d(epsilon)?),
        (
            "line_diag_2d".into(),
            line_diagonal_weight_2d(Line2D::new([0.3, -0.2], 0.6), epsilon)?,
        ),
        ("diag_1d".into(), diag_1d_weight(epsilon)?),
    ])
}

/// Identity reports for one weight: one line per quantity.
pub fn identity_reports(label: &str, spec: &VectorFieldSpec, seed: u64) -> Vec<EstimateReport> {
    let tol = IdentityTolerances::default();
    let points = random_sample_points(spec, IDENTITY_SAMPLES, 3.0, seed);
    let r = verify_field_identities(spec, &points);
    let name = |q: &str| format!("identity-{label}@{}-{q}", spec.epsilon());
    let le = |q: &str, lhs: f64, rhs: f64, slack: f64| {
        EstimateReport::inequality(name(q), lhs, rhs, 1.0, slack)
            .with_context("points", r.points_checked)
            .with_context("skipped", r.points_skipped)
    };
    vec![
        le("symmetry", r.symmetry, tol.symmetry, 0.0),
        le("trace-div", r.trace_vs_div, tol.trace_vs_div, 0.0),
        le("gradient-fd", r.gradient_fd, tol.finite_difference, 0.0),
        le("jacobian-fd", r.jacobian_fd, tol.finite_difference, 0.0),
        le("psd", (-r.min_eigenvalue).max(0.0), -tol.min_eigenvalue, 0.0),
        le("norm-x", r.max_norm_x, r.norm_bound, tol.norm_rounding),
        le("bilaplacian-fd", r.bilaplacian_fd, tol.bilaplacian, 0.0),
    ]
}

/// Identity suite for every kind and ε, then the delta limits.
pub fn verify_fields() -> Result<Vec<EstimateReport>> {
    let mut out = Vec::new();
    for (i, &eps) in IDENTITY_EPSILONS.iter().enumerate() {
        for (j, (label, spec)) in weight_catalog(eps)?.into_iter().enumerate() {
            out.extend(identity_reports(&label, &spec, (10 * i + j) as u64));
        }
    }
    for (label, spec) in weight_catalog(DELTA_EPSILONS[0])? {
        if spec.delta_constant().is_none() {
            continue;
        }
        let table = delta_limit_check(&spec, 1.0, &DELTA_EPSILONS)?;
        let last = table.rows.last().expect("non-empty epsilon list");
        out.push(
            EstimateReport::inequality(format!("delta-{label}"), last.relative_error, DELTA_TOL, last.target, 0.0)
                .with_context("value", last.value)
                .with_context("epsilon", last.epsilon),
        );
        out.push(EstimateReport::inequality(
            format!("delta-{label}-monotone"),
            if table.monotone { 0.0 } else { 1.0 },
            0.0,
            1.0,
            0.0,
        ));
    }
    Ok(out)
}

/// Boosted Gaussian plus band-limited noise, used by the oracle comparisons.
pub fn oracle_test_field(dim: usize, n: usize, box_length: f64, seed: u64) -> Result<ComplexField> {
    let g = make_grid(dim, n, box_length)?;
    let center: Vec<f64> = (0..dim).map(|a| 0.3 - 0.2 * a as f64).collect();
    let k: Vec<f64> = (0..dim).map(|a| 0.7 + 0.4 * a as f64).collect();
    let envelope = gaussian(&g, 1.0, 1.2, &center, &k)?;
    let noise = random_band_limited(&g, seed, 2.0, 0.3)?;
    envelope.linear_combination(Complex64::new(1.0, 0.0), &noise, Complex64::new(0.5, 0.0))
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Fast kernels against brute-force oracles, and the linear solver against
/// the closed-form free Gaussian.
pub fn selftest() -> Result<Vec<EstimateReport>> {
    let mut out = Vec::new();
    let u3 = oracle_test_field(3, 8, 6.0, 1)?;
    let u2 = oracle_test_field(2, 12, 6.0, 2)?;
    let u1 = oracle_test_field(1, 16, 8.0, 3)?;
    let line = Line2D::new([0.4, -0.3], 0.9);
    for mult in [0.0, 2.0] {
        let eps = mult * u3.grid().spacing();
        let e = relative(interaction_action_3d(&u3, eps)?, pair3d_pairwise(&u3, eps)?);
        out.push(EstimateReport::inequality(format!("oracle-pair3d@{mult}h"), e, 1e-10, 1.0, 0.0));
        let eps = mult * u2.grid().spacing();
        let e = relative(
            interaction_action_2d(&u2, &line, eps)?,
            line2d_quadruple_loop(&u2, &line, eps)?,
        );
        out.push(EstimateReport::inequality(format!("oracle-line2d@{mult}h"), e, 1e-12, 1.0, 0.0));
        let eps = mult * u1.grid().spacing();
        let e = relative(interaction_action_1d(&u1, eps)?, diag1d_naive(&u1, eps)?);
        out.push(EstimateReport::inequality(format!("oracle-diag1d@{mult}h"), e, 1e-12, 1.0, 0.0));
    }

    let g = make_grid(2, 64, 32.0)?;
    let initial = free_gaussian_reference(&g, 0.0, 1.0)?;
    let config = SolverConfig::new(3.0, 0.01, 1.0, 100).with_nonlinearity(Nonlinearity::Off);
    let run = evolve(&initial, &config, &[]).map_err(|e| e.cause)?;
    let reference = free_gaussian_reference(&g, 1.0, 1.0)?;
    let diff = run
        .final_state
        .linear_combination(Complex64::new(1.0, 0.0), &reference, Complex64::new(-1.0, 0.0))?;
    out.push(EstimateReport::inequality(
        "oracle-free-gaussian",
        diff.l2_norm() / reference.l2_norm(),
        1e-8,
        1.0,
        0.0,
    ));
    Ok(out)
}
