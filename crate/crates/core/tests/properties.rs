use num_complex::Complex64;
use proptest::prelude::*;

use morawetz::evolve::{evolve, Nonlinearity, SolverConfig};
use morawetz::fields::{
    diag_1d_weight, line_diagonal_weight_2d, pair_weight_3d, radial_weight, random_sample_points,
    verify_field_identities, IdentityTolerances, Line2D, VectorFieldSpec,
};
use morawetz::grid::{make_grid, ComplexField, Direction};
use morawetz::initial::{gaussian, random_band_limited};
use morawetz::interaction::{interaction_action_1d, interaction_action_2d, interaction_action_3d};
use morawetz::laws::densities;

fn field(dim: usize, n: usize, box_length: f64, seed: u64, band: f64) -> ComplexField {
    let g = make_grid(dim, n, box_length).unwrap();
    random_band_limited(&g, seed, band, 1.0).unwrap()
}

fn conj(u: &ComplexField) -> ComplexField {
    ComplexField::new(u.grid(), u.values().iter().map(|z| z.conj()).collect()).unwrap()
}

fn max_diff(a: &ComplexField, b: &ComplexField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn weight(kind: usize, epsilon: f64) -> VectorFieldSpec {
    match kind {
        0 => radial_weight(3, epsilon).unwrap(),
        1 => pair_weight_3d(epsilon).unwrap(),
        2 => line_diagonal_weight_2d(Line2D::new([0.2, -0.4], 1.1), epsilon).unwrap(),
        _ => diag_1d_weight(epsilon).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip_and_parseval(dim in 1usize..=3, seed in any::<u64>()) {
        let n = if dim == 3 { 8 } else { 16 };
        let u = field(dim, n, 7.0, seed, 3.0);
        let back = u.grid().transform(&u.transform(Direction::Forward), Direction::Inverse);
        let worst = u.values().iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-13, "{worst}");
        let spectral = u.sobolev_seminorm(0.0).unwrap();
        prop_assert!((spectral - u.l2_norm()).abs() <= 1e-12 * u.l2_norm());
    }

    #[test]
    fn derivative_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0, axis in 0usize..2) {
        let u = field(2, 16, 6.0, seed, 2.5);
        let v = field(2, 16, 6.0, seed.wrapping_add(1), 2.5);
        let (ca, cb) = (Complex64::new(a, 0.3), Complex64::new(b, -0.7));
        let lhs = u.linear_combination(ca, &v, cb).unwrap().spectral_derivative(axis, 1).unwrap();
        let du = u.spectral_derivative(axis, 1).unwrap();
        let dv = v.spectral_derivative(axis, 1).unwrap();
        let rhs = du.linear_combination(ca, &dv, cb).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-11);
    }

    #[test]
    fn sobolev_seminorm_is_homogeneous(seed in any::<u64>(), s in 0.0f64..2.0, lambda in -3.0f64..3.0) {
        let u = field(2, 16, 6.0, seed, 2.5);
        let scaled = u.scaled(Complex64::new(0.0, lambda));
        let a = scaled.sobolev_seminorm(s).unwrap();
        let b = lambda.abs() * u.sobolev_seminorm(s).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn stress_tensor_is_psd_with_gradient_trace(seed in any::<u64>()) {
        let u = field(2, 16, 6.0, seed, 2.5);
        let d = densities(&u);
        let grad = u.gradient();
        for i in 0..u.grid().len() {
            let (s00, s01, s10, s11) =
                (d.sigma_at(0, 0)[i], d.sigma_at(0, 1)[i], d.sigma_at(1, 0)[i], d.sigma_at(1, 1)[i]);
            let scale = 1.0 + s00.abs() + s11.abs();
            prop_assert!((s01 - s10).abs() <= 1e-12 * scale);
            prop_assert!(s00 >= -1e-12 * scale && s11 >= -1e-12 * scale);
            prop_assert!(s00 * s11 - s01 * s10 >= -1e-10 * scale * scale);
            let g2: f64 = grad.iter().map(|g| g.values()[i].norm_sqr()).sum();
            prop_assert!((s00 + s11 - 2.0 * g2).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn strang_flow_is_time_reversible(seed in any::<u64>(), steps in 1usize..20, focusing in any::<bool>()) {
        let u = field(2, 16, 8.0, seed, 2.0);
        let nl = if focusing { Nonlinearity::Focusing } else { Nonlinearity::Defocusing };
        let dt = 0.01;
        let config = SolverConfig::new(3.0, dt, dt * steps as f64, steps).with_nonlinearity(nl);
        let forward = evolve(&u, &config, &[]).unwrap().final_state;
        let back = evolve(&conj(&forward), &config, &[]).unwrap().final_state;
        prop_assert!(max_diff(&conj(&back), &u) < 1e-11);
    }

    #[test]
    fn weight_identities_hold(kind in 0usize..4, epsilon in 0.0f64..0.5, seed in any::<u64>()) {
        let spec = weight(kind, epsilon);
        let points = random_sample_points(&spec, 50, 3.0, seed);
        let r = verify_field_identities(&spec, &points);
        let failures: Vec<_> = r
            .failures(&IdentityTolerances::default())
            .into_iter()
            .filter(|f| *f != "norm_x")
            .collect();
        prop_assert!(failures.is_empty(), "{failures:?}");
        prop_assert!(r.min_eigenvalue >= -1e-12);
    }

    #[test]
    fn real_fields_have_zero_action(seed in any::<u64>(), eps_mult in 0.0f64..3.0) {
        let real = |u: ComplexField| {
            ComplexField::new(u.grid(), u.values().iter().map(|z| Complex64::new(z.re, 0.0)).collect()).unwrap()
        };
        let u3 = real(field(3, 8, 6.0, seed, 2.0));
        let u2 = real(field(2, 12, 6.0, seed, 2.0));
        let u1 = real(field(1, 16, 8.0, seed, 2.0));
        let h = |u: &ComplexField| eps_mult * u.grid().spacing();
        prop_assert!(interaction_action_3d(&u3, h(&u3)).unwrap().abs() < 1e-12);
        prop_assert!(interaction_action_2d(&u2, &Line2D::new([0.3, 0.1], 0.4), h(&u2)).unwrap().abs() < 1e-12);
        prop_assert!(interaction_action_1d(&u1, h(&u1)).unwrap().abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn pair_action_is_translation_invariant(
        shift in prop::array::uniform3(-2i32..=2),
        k in prop::array::uniform3(-1.0f64..1.0),
        eps_mult in 0.0f64..3.0,
    ) {
        let g = make_grid(3, 20, 14.0).unwrap();
        let h = g.spacing();
        let eps = eps_mult * h;
        let pair = |offset: &[f64]| {
            let at = |c: [f64; 3]| -> Vec<f64> { c.iter().zip(offset).map(|(a, b)| a + b).collect() };
            let g1 = gaussian(&g, 1.0, 0.7, &at([0.6, 0.0, -0.3]), &k).unwrap();
            let g2 = gaussian(&g, 0.8, 0.6, &at([-0.5, 0.4, 0.2]), &[0.5, -0.8, 0.3]).unwrap();
            g1.linear_combination(Complex64::new(1.0, 0.0), &g2, Complex64::new(1.0, 0.0)).unwrap()
        };
        let base = pair(&[0.0; 3]);
        let center: Vec<f64> = shift.iter().map(|s| *s as f64 * h).collect();
        let moved = pair(&center);
        let a = interaction_action_3d(&base, eps).unwrap();
        let b = interaction_action_3d(&moved, eps).unwrap();
        prop_assert!(a.abs() > 1e-3);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs() + 1e-10, "{a} {b}");
    }

    #[test]
    fn line_action_rotates_with_the_line(
        k in prop::array::uniform2(-1.0f64..1.0),
        c in prop::array::uniform2(-0.5f64..0.5),
        angle in 0.0f64..std::f64::consts::PI,
        offset in -0.5f64..0.5,
        eps_mult in 0.0f64..3.0,
    ) {
        let g = make_grid(2, 16, 10.0).unwrap();
        let eps = eps_mult * g.spacing();
        let n = g.n_points();
        let u = gaussian(&g, 1.0, 0.7, &c, &k).unwrap();
        // v(x, y) = u(y, -x), sampled by index permutation
        let mut values = vec![Complex64::new(0.0, 0.0); g.len()];
        for (flat, slot) in values.iter_mut().enumerate() {
            let [i, j, _] = g.multi_index(flat);
            *slot = u.values()[g.flat_index(&[j, (n - i) % n])];
        }
        let v = ComplexField::new(&g, values).unwrap();
        let line = Line2D::new([offset, 0.3], angle);
        let rotated = Line2D::new([-0.3, offset], angle + std::f64::consts::FRAC_PI_2);
        let a = interaction_action_2d(&u, &line, eps).unwrap();
        let b = interaction_action_2d(&v, &rotated, eps).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs() + 1e-12, "{a} {b}");
    }
}
