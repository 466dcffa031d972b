use std::f64::consts::PI;

use proptest::prelude::*;
use warptrap::evolve::{ModeState, Propagator, WaveField};
use warptrap::geometry::{AngularMode, WarpGeometry, WarpParams};
use warptrap::jet::Jet;
use warptrap::multiplier::{
    closed_form_coefficients, comparison_weights, hardy_check, suite_delta, wall_bump, MultiplierPair,
};
use warptrap::smooth::{smooth_step, smooth_step_value};
use warptrap::spectral::{build_operator, eigen_decompose, eigen_lowest, energy_norms, Grid};
use warptrap::Complex64;

fn geom(m: u32, x0: f64) -> WarpGeometry {
    WarpGeometry::new(WarpParams::new(m, x0).unwrap())
}

/// Central fourth-order difference of f at x.
fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

proptest! {
    #[test]
    fn warp_is_even_and_dominates(m in 1u32..=4, x in -50.0f64..50.0) {
        let g = geom(m, -1.0);
        let a = g.a(x);
        prop_assert!((a - g.a(-x)).abs() <= 1e-14 * a);
        prop_assert!(a >= 1.0 && a >= x.abs());
        prop_assert!((g.da(x) + g.da(-x)).abs() <= 1e-13);
        prop_assert!(g.da(x).abs() <= 1.0 + 1e-14);
    }

    #[test]
    fn warp_derivatives_match_differences(m in 1u32..=4, x in -6.0f64..6.0) {
        let g = geom(m, -1.0);
        let h = 1e-3;
        prop_assert!((g.da(x) - fd(|y| g.a(y), x, h)).abs() <= 1e-8);
        prop_assert!((g.d2a(x) - fd(|y| g.da(y), x, h)).abs() <= 1e-7);
    }

    #[test]
    fn potential_grows_with_l(m in 1u32..=3, l in 0usize..80, x in -4.0f64..4.0) {
        let g = geom(m, -1.0);
        let gap = g.potential(l + 1, x) - g.potential(l, x);
        let expect = 2.0 * (l + 1) as f64 / g.a(x).powi(2);
        prop_assert!((gap - expect).abs() <= 1e-11 * g.potential(l + 1, x).abs().max(1.0));
    }

    #[test]
    fn jet_arithmetic_matches_differences(x in 0.2f64..3.0) {
        let f = |j: Jet| (j.sin() * j.exp() + j.powf(1.5)) / (j * j + 1.0);
        let value = |y: f64| f(Jet::variable(y)).value();
        let jet = f(Jet::variable(x));
        prop_assert!((jet.d[1] - fd(value, x, 1e-3)).abs() <= 1e-8 * (1.0 + jet.d[1].abs()));
        let first = |y: f64| f(Jet::variable(y)).d[1];
        prop_assert!((jet.d[2] - fd(first, x, 1e-3)).abs() <= 1e-7 * (1.0 + jet.d[2].abs()));
    }

    #[test]
    fn smooth_step_is_a_monotone_partition(s in -0.5f64..1.5, t in 0.0f64..1.0) {
        let v = smooth_step_value(s);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v + smooth_step_value(1.0 - s) - 1.0).abs() <= 1e-15);
        let (lo, hi) = if s < t { (s, t) } else { (t, s) };
        prop_assert!(smooth_step_value(lo) <= smooth_step_value(hi));
        let j = smooth_step(Jet::variable(s));
        prop_assert!(j.d.iter().all(|d| d.is_finite()));
        prop_assert!(j.d[1] >= 0.0);
    }

    #[test]
    fn delta_family_coefficients_match_closed_forms(m in 1u32..=3, x in 1e-2f64..1e2, frac in 0.05f64..1.0) {
        let g = geom(m, 1e-4);
        let delta = frac * 2.0 * suite_delta(m);
        let pair = MultiplierPair::delta_family(g, delta).unwrap();
        let c = pair.coefficients(x).as_array();
        let k = closed_form_coefficients(m, delta, x).as_array();
        let s = pair.coefficient_scales(x).as_array();
        for j in 0..4 {
            prop_assert!((c[j] - k[j]).abs() <= 1e-12 * s[j].max(f64::MIN_POSITIVE), "j={} {} vs {}", j, c[j], k[j]);
        }
    }

    #[test]
    fn suite_delta_keeps_margins_positive(m in 1u32..=3, lx in -3.0f64..3.0) {
        let x = 10f64.powf(lx);
        let delta = suite_delta(m);
        let c = closed_form_coefficients(m, delta, x).as_array();
        let w = comparison_weights(m, x).as_array();
        for j in 0..4 {
            prop_assert!(c[j] / w[j] > 0.0, "coefficient {} at x = {}", j, x);
        }
    }

    #[test]
    fn hardy_ratio_respects_the_analytic_constant(
        m in 1u32..=3,
        x0 in 0.05f64..3.0,
        support in 0.3f64..30.0,
        k in 0.0f64..8.0,
    ) {
        let g = geom(m, x0);
        let grid = Grid::new(x0, x0 + support * 1.05, 2000).unwrap();
        let u: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| wall_bump(x0, support, x) * (1.0 + 0.5 * (k * (x - x0) / support).sin()))
            .collect();
        let r = hardy_check(&g, &grid, &u).unwrap();
        prop_assert!(r.lhs > 0.0 && r.rhs > 0.0);
        prop_assert!(r.ratio <= 4.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn free_laplacian_spectrum_is_exact(n in 20usize..300) {
        let grid = Grid::new(0.0, 1.0, n).unwrap();
        let op = build_operator(grid, |_| 0.0, "zero").unwrap();
        let h = grid.h;
        for (k, p) in eigen_lowest(&op, 3).unwrap().iter().enumerate() {
            let exact = 2.0 / (h * h) * (1.0 - ((k + 1) as f64 * PI * h).cos());
            prop_assert!((p.lambda - exact).abs() <= 1e-10 * exact);
        }
    }

    #[test]
    fn evolution_conserves_energy_and_reverses(
        m in 1u32..=2,
        x0 in prop_oneof![-1.5f64..-0.5, 0.5f64..1.5],
        l in 0usize..30,
        center in 0.3f64..0.7,
        width in 0.05f64..0.3,
        kick in -5.0f64..5.0,
        t in 1.0f64..200.0,
    ) {
        let grid = Grid::new(x0, x0 + 4.0, 159).unwrap();
        let prop = Propagator::new(geom(m, x0), grid).unwrap();
        let c = x0 + 4.0 * center;
        let w: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&x| Complex64::from_polar((-((x - c) / width).powi(2)).exp(), kick * x))
            .collect();
        let w_t: Vec<Complex64> = w.iter().map(|v| v * Complex64::new(0.0, -kick)).collect();
        let mode = AngularMode::single_harmonic(l);
        let data = WaveField::single(grid, ModeState::new(mode, w, w_t).unwrap()).unwrap();
        let gm = geom(m, x0);
        let e0 = energy_norms(&data, &gm, x0 + 4.0).unwrap().energy;
        let later = prop.evolve_to(&data, t).unwrap();
        let e1 = energy_norms(&later, &gm, x0 + 4.0).unwrap().energy;
        prop_assert!((e1 - e0).abs() <= 1e-10 * e0);
        let back = prop.evolve_to(&later, 0.0).unwrap();
        let err: f64 = back.modes[0].w.iter().zip(&data.modes[0].w).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = data.modes[0].w.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10 * scale);
    }

    #[test]
    fn eigenbasis_round_trips(n in 10usize..120, l in 0usize..20) {
        let g = geom(1, -1.0);
        let grid = Grid::new(-1.0, 2.0, n).unwrap();
        let op = build_operator(grid, |x| g.potential(l, x), "V_l").unwrap();
        let basis = eigen_decompose(&op).unwrap();
        prop_assert!(basis.lambdas.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(basis.orthogonality_defect() <= 1e-11);
        let v: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let back = basis.reconstruct(&basis.project(&v));
        let err = back.iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-11);
    }
}
