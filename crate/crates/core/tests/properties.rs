use std::sync::Arc;

use obstacle_core::estimators::*;
use obstacle_core::*;
use proptest::prelude::*;

fn grid(d: usize, n: usize) -> Arc<Grid<f64>> {
    Grid::new(GridSpec::new(d, n)).unwrap()
}

fn bulk_energy(w: &Field<f64>) -> f64 {
    cell_gradient_norm_sq(w).values().iter().sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn laplacian_kills_harmonic_quadratics(
        d in 2usize..=3,
        c in prop::array::uniform8(-3.0f64..3.0),
    ) {
        let g = grid(d, 8);
        let u = Field::from_fn(g.clone(), |p| {
            let (x, z, y) = (p.x[0], p.x[1], p.y);
            c[0] + c[1] * x + c[2] * y + c[3] * (x * x - y * y) + c[4] * x * y
                + if d == 3 { c[5] * z + c[6] * x * z + c[7] * (z * z - y * y) } else { 0.0 }
        });
        prop_assert!(laplacian_residual(&u).max_abs() < 1e-9);
    }

    #[test]
    fn normal_trace_is_exact_up_to_degree_two(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, k in 0.5f64..3.0,
    ) {
        let g = grid(2, 16);
        let u = Field::from_fn(g.clone(), |p| a + (k * p.x[0]).sin() + b * p.y + c * p.y * p.y);
        let t = normal_trace(&u).unwrap();
        prop_assert!(t.values().iter().all(|v| (v - b).abs() < 1e-9));
    }

    #[test]
    fn cylinder_sup_is_monotone(
        x0 in -0.3f64..0.3,
        r1 in 0.1f64..0.6,
        dr in 0.0f64..0.1,
        k in 1.0f64..6.0,
    ) {
        let g = grid(2, 32);
        let f = Field::from_fn(g.clone(), |p| (k * p.x[0]).sin() * (1.0 + p.y) + p.x[0] * p.y);
        let a = sup_cylinder(&f, [x0, 0.0], r1).unwrap();
        let b = sup_cylinder(&f, [x0, 0.0], r1 + dr).unwrap();
        prop_assert!(a <= b);
    }

    #[test]
    fn quotient_of_quadratic_is_its_second_derivative(
        a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0,
        e in -3.0f64..3.0, k in 1usize..4, axis in 0usize..4,
    ) {
        let g = grid(3, 8);
        let u = Field::from_fn(g.clone(), |p| {
            let (x, z, y) = (p.x[0], p.x[1], p.y);
            a * x * x + b * x * z + c * z * z + e * x * y - y * y
        });
        let (tau, unit, want) = match axis {
            0 => (TangentialDirection::Axis(0), 1.0, 2.0 * a),
            1 => (TangentialDirection::Axis(1), 1.0, 2.0 * c),
            2 => (TangentialDirection::Diagonal(true), 2f64.sqrt(), a + b + c),
            _ => (TangentialDirection::Diagonal(false), 2f64.sqrt(), a - b + c),
        };
        let q = incremental_quotient(&u, tau, k as f64 * g.h() * unit).unwrap();
        for (_, v) in q.defined_values() {
            prop_assert!((v - want).abs() < 1e-8, "{} vs {}", v, want);
        }
    }

    #[test]
    fn truncation_bounds(w in prop::collection::vec(-5.0f64..5.0, 1..50), r in 0.01f64..1.0, alpha in 0.05f64..0.5) {
        let s = truncation_level(r, alpha).unwrap();
        for threshold in [TruncationThreshold::Verbatim, TruncationThreshold::Sublevel] {
            let t = truncate(&w, r, alpha, threshold).unwrap();
            for (a, b) in w.iter().zip(&t) {
                prop_assert!(b.abs() <= a.abs() + s + 1e-12);
            }
        }
        // Only the sublevel reading is 1-Lipschitz in w, hence |w - w_t| <= s
        // wherever it truncates.
        let t = truncate(&w, r, alpha, TruncationThreshold::Sublevel).unwrap();
        for (a, b) in w.iter().zip(&t) {
            if *b != 0.0 {
                prop_assert!((a - b).abs() <= s + 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn penalized_solutions_obey_the_invariants(
        amplitude in 0.2f64..3.0,
        width in 0.2f64..0.6,
        log_eps in -4.0f64..-1.0,
    ) {
        let g = grid(2, 16);
        let data = DirichletData::PositiveBump { amplitude, width };
        let p = Penalization::canonical(10f64.powf(log_eps)).unwrap();
        let r = solve_penalized(&g, &p, &data, 1e-10, 100).unwrap();
        let gf = data.field(&g);
        let (lo, hi) = (0..g.len())
            .filter(|&i| !g.is_free(i))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), i| (a.min(gf.at(i)), b.max(gf.at(i))));
        let tol = 1e-8;
        prop_assert!(r.u.values().iter().all(|&v| v >= lo - tol && v <= hi + tol));
        prop_assert!(g.flat_nodes().all(|it| r.uy_trace.at(it) <= tol));
        prop_assert!(r.complementarity_defect(&p) <= 1e-8);
        prop_assert!(annulus_width(&r.u) > 0.0);
        let rep = estimate_report(&r, &EstimateOptions::default()).unwrap();
        prop_assert!(rep.is_finite() && rep.c0 >= 0.0);
    }
}

#[test]
fn half_disc_volume_converges_linearly() {
    let want = std::f64::consts::PI * 0.4 * 0.4 / 2.0;
    let errors: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let g = grid(2, n);
            let one = CellField::from_fn(g.clone(), |_| 1.0);
            (weighted_ball_integral(&one, [0.0, 0.0], 0.4, 0.0).unwrap() - want).abs()
        })
        .collect();
    for (k, e) in errors.iter().enumerate() {
        let h = 1.0 / (32 << k) as f64;
        assert!(*e <= 2.0 * h, "{errors:?}");
    }
}

#[test]
fn sublevel_truncation_contracts_the_energy() {
    let g = grid(2, 64);
    for data in [
        DirichletData::SignoriniExact { amplitude: 1.0 },
        DirichletData::PositiveBump { amplitude: 1.0, width: 0.4 },
    ] {
        let r = solve_penalized(&g, &Penalization::canonical(1e-3).unwrap(), &data, 1e-10, 100).unwrap();
        let c0 = semiconvexity_constant(&r, &[g.h()], data.positive_on_rim()).unwrap().c0;
        let w = corrected_velocity(&r, c0).unwrap();
        let base = bulk_energy(&w);
        for rad in [0.05, 0.1, 0.2, 0.4] {
            let t = truncate_field(&w, rad, 0.5, TruncationThreshold::Sublevel).unwrap();
            assert!(bulk_energy(&t) <= 1.01 * base, "r = {rad}");
        }
    }
}

#[test]
fn verbatim_truncation_can_add_energy() {
    // Values straddling the threshold jump from 2s to 0.
    let g = grid(2, 64);
    let w = Field::from_fn(g.clone(), |p| p.x[0]);
    let t = truncate_field(&w, 0.01, 0.5, TruncationThreshold::Verbatim).unwrap();
    assert!(bulk_energy(&t) > bulk_energy(&w));
}
