use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use obstacle_core::estimators::*;
use obstacle_core::solver::{signorini_profile, signorini_profile_dy};
use obstacle_core::*;

fn grid(d: usize, n: usize) -> Arc<Grid<f64>> {
    Grid::new(GridSpec::new(d, n)).unwrap()
}

fn solve(g: &Arc<Grid<f64>>, data: DirichletData<f64>, eps: f64) -> SolveResult<f64> {
    solve_penalized(g, &Penalization::canonical(eps).unwrap(), &data, 1e-10, 100).unwrap()
}

fn exact() -> DirichletData<f64> {
    DirichletData::SignoriniExact { amplitude: 1.0 }
}

#[test]
fn quotient_examples() {
    let g = grid(2, 16);
    let h = g.h();
    let sq = Field::from_fn(g.clone(), |p| p.x[0] * p.x[0]);
    for k in [1.0, 2.0, 4.0] {
        let q = incremental_quotient(&sq, TangentialDirection::Axis(0), k * h).unwrap();
        assert!(q.defined_values().count() > 0);
        for (_, v) in q.defined_values() {
            assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
        }
    }
    let affine = Field::from_fn(g.clone(), |p| 3.0 * p.x[0] - 2.0 * p.y + 1.0);
    let q = incremental_quotient(&affine, TangentialDirection::Axis(0), 2.0 * h).unwrap();
    assert!(q.defined_values().all(|(_, v)| v.abs() < 1e-9));

    let kink = Field::from_fn(g.clone(), |p| p.x[0].abs());
    let delta = 4.0 * h;
    let q = incremental_quotient(&kink, TangentialDirection::Axis(0), delta).unwrap();
    let origin = g.nearest_flat_index([0.0, 0.0]);
    assert_abs_diff_eq!(q.values.at(origin), 2.0 / delta, epsilon = 1e-9);
    // Undefined within delta of the lateral faces.
    assert!(!q.defined[0]);

    assert!(incremental_quotient(&sq, TangentialDirection::Axis(0), 0.5 * h).is_err());
    assert!(incremental_quotient(&sq, TangentialDirection::Axis(0), 1.5 * h).is_err());
    assert!(incremental_quotient(&sq, TangentialDirection::Diagonal(true), h * 2f64.sqrt()).is_err());
}

#[test]
fn diagonal_quotients_in_three_dimensions() {
    let g = grid(3, 8);
    let h = g.h();
    let u = Field::from_fn(g.clone(), |p| p.x[0] * p.x[0] + 3.0 * p.x[0] * p.x[1] - p.x[1] * p.x[1]);
    let cases = [
        (TangentialDirection::Axis(0), h, 2.0),
        (TangentialDirection::Axis(1), 2.0 * h, -2.0),
        (TangentialDirection::Diagonal(true), h * 2f64.sqrt(), 3.0),
        (TangentialDirection::Diagonal(false), 2.0 * h * 2f64.sqrt(), -3.0),
    ];
    for (tau, delta, expected) in cases {
        let q = incremental_quotient(&u, tau, delta).unwrap();
        for (_, v) in q.defined_values() {
            assert_abs_diff_eq!(v, expected, epsilon = 1e-8);
        }
    }
}

#[test]
fn semiconvexity_of_constant_solution() {
    let g = grid(2, 16);
    let r = solve(&g, DirichletData::Constant(1.0), 0.1);
    let s = semiconvexity_constant(&r, &[g.h(), 2.0 * g.h()], true).unwrap();
    assert_eq!(s.c0, 0.0);
    assert!(s.margin > 0.0);
}

#[test]
fn convex_trace_has_vanishing_constant() {
    for n in [16, 32, 64] {
        let g = grid(2, n);
        let u = Field::from_fn(g.clone(), |p| p.x[0] * p.x[0] - p.y * p.y + 0.3 * p.x[0]);
        let s = semiconvexity_in(&u, &[g.h()], 0.2).unwrap();
        assert_eq!(s.c0, 0.0);
        assert_abs_diff_eq!(s.min_quotient, 2.0, epsilon = 1e-8);
    }
}

#[test]
fn semiconvexity_is_stable_in_epsilon() {
    let g = grid(2, 64);
    let steps = [g.h(), 2.0 * g.h(), 4.0 * g.h()];
    let c = |e| semiconvexity_constant(&solve(&g, exact(), e), &steps, false).unwrap().c0;
    let (a, b) = (c(1e-2), c(1e-3));
    assert!((a - b).abs() <= 0.1 * a.max(b) + 1e-9, "C0 {a} vs {b}");
}

#[test]
fn semiconcavity_examples() {
    let g = grid(2, 16);
    let u = Field::from_fn(g.clone(), |p| -p.y * p.y);
    let c = semiconcavity_check(&u, 0.0, 0.2, 1e-9).unwrap();
    assert!(c.passed && c.companion_passed);
    assert_abs_diff_eq!(c.max_uyy, -2.0, epsilon = 1e-8);

    let saddle = Field::from_fn(g.clone(), |p| p.x[0] * p.x[0] - p.y * p.y);
    let c0 = semiconvexity_in(&saddle, &[g.h()], 0.2).unwrap().c0;
    assert_eq!(c0, 0.0);
    let c = semiconcavity_check(&saddle, c0, 0.2, 1e-9).unwrap();
    assert!(c.passed && c.companion_passed);

    let convex_in_y = Field::from_fn(g.clone(), |p| p.y * p.y);
    let c = semiconcavity_check(&convex_in_y, 0.5, 0.2, 1e-9).unwrap();
    assert!(!c.passed && !c.companion_passed);
    assert!(semiconcavity_check(&convex_in_y, 2.0, 0.2, 1e-9).unwrap().passed);
}

#[test]
fn free_boundary_examples() {
    let g = grid(2, 32);
    assert!(free_boundary(&solve(&g, DirichletData::Constant(1.0), 0.1), 0.0).is_empty());
    assert!(free_boundary(&solve(&g, DirichletData::Constant(-1.0), 0.1), 0.0).is_empty());
    let eps = 1e-4;
    let points = free_boundary(&solve(&g, exact(), eps), 0.0);
    assert_eq!(points.len(), 1, "{points:?}");
    assert!(points[0][0].abs() <= g.h() + eps);
}

#[test]
fn corrected_velocity_examples() {
    let g = grid(2, 32);
    let r = solve(&g, exact(), 1e-4);
    let w = corrected_velocity(&r, 0.0).unwrap();
    let uy = uy_field(&r.u, Some(&r.uy_trace)).unwrap();
    assert_eq!(w.values(), uy.values());
    for it in g.flat_nodes() {
        assert_eq!(w.at(it), r.uy_trace.at(it));
    }
    // w vanishes at a free-boundary point.
    let origin = g.nearest_flat_index([0.0, 0.0]);
    assert!(w.at(origin).abs() < 0.1, "{}", w.at(origin));

    let half_sq = Field::from_fn(g.clone(), |p| p.y * p.y / 2.0);
    let w = correct(&uy_field(&half_sq, None).unwrap(), 1.0);
    assert!(w.max_abs() < 1e-10);
}

#[test]
fn uy_field_matches_profile_derivative() {
    let mut errors = Vec::new();
    for n in [16, 32] {
        let g = grid(2, n);
        let u = Field::from_fn(g.clone(), |p| (p.x[0] + 0.5).exp() * (p.y + 0.2).cos());
        let uy = uy_field(&u, None).unwrap();
        let err = (0..g.len())
            .map(|i| {
                let p = g.point(i);
                (uy.at(i) + (p.x[0] + 0.5).exp() * (p.y + 0.2).sin()).abs()
            })
            .fold(0.0, f64::max);
        errors.push(err);
    }
    assert!(errors[1] < errors[0] / 3.0, "{errors:?}");
}

#[test]
fn phi_examples() {
    let g = grid(2, 128);
    let radii = [0.1, 0.2, 0.3, 0.4];
    let w = Field::from_fn(g.clone(), |p| p.y);
    let t = phi_trace(&w, [0.0, 0.0], &radii).unwrap();
    for (r, v) in radii.iter().zip(&t.phi_values) {
        assert!((v - PI * r / 2.0).abs() <= 0.03 * PI * r / 2.0, "r {r}: {v}");
    }
    assert_eq!(t.monotone_defect, 0.0);

    let zero = Field::zeros(g.clone());
    let t = phi_trace(&zero, [0.0, 0.0], &radii).unwrap();
    assert!(t.phi_values.iter().all(|v| *v == 0.0));

    assert!(phi_trace(&w, [0.0, 0.0], &[0.2, 0.1]).is_err());
    assert!(phi_trace(&w, [0.0, 0.0], &[0.01, 0.1]).is_err());
    assert!(phi_trace(&w, [0.0, 0.0], &[0.1, 1.5]).is_err());
}

#[test]
fn phi_is_scale_invariant_on_the_half_power_profile() {
    let g = grid(2, 256);
    let w = Field::from_fn(g.clone(), |p| signorini_profile_dy(p.x[0], p.y));
    let radii: Vec<f64> = (0..7).map(|k| 0.1 + 0.05 * k as f64).collect();
    let t = phi_trace(&w, [0.0, 0.0], &radii).unwrap();
    let target = 9.0 * PI / 16.0;
    for v in &t.phi_values {
        assert!((v - target).abs() <= 0.02 * target, "{v}");
    }
    assert!(t.relative_defect() <= 0.02);
}

#[test]
fn delta_alpha_examples() {
    assert_abs_diff_eq!(delta_alpha(0.5).unwrap(), 1.0 / 48.0, epsilon = 1e-15);
    assert_abs_diff_eq!(delta_alpha(0.25).unwrap(), 3.0 / 160.0, epsilon = 1e-15);
    assert!(delta_alpha(1e-9).unwrap() < 1e-9);
    assert!(delta_alpha(1e-9).unwrap() > 0.0);
    for bad in [0.0, -0.1, 0.51, 1.0] {
        assert!(delta_alpha(bad).is_err());
    }
}

#[test]
fn truncation_examples() {
    let (r, alpha) = (0.25, 0.5);
    let s = truncation_level(r, alpha).unwrap();
    assert_abs_diff_eq!(s, 0.25f64.powf(0.5 + 1.0 / 48.0), epsilon = 1e-15);
    let t = truncate(&[0.0; 3], r, alpha, TruncationThreshold::Verbatim).unwrap();
    assert!(t.iter().all(|v| *v == s));
    let t = truncate(&[-1.0; 3], r, alpha, TruncationThreshold::Verbatim).unwrap();
    assert!(t.iter().all(|v| (*v - (s - 1.0)).abs() < 1e-15));
    let t = truncate(&[s, 2.0 * s, 5.0], r, alpha, TruncationThreshold::Verbatim).unwrap();
    assert!(t.iter().all(|v| *v == 0.0));
    // The sublevel reading leaves values in [-s, s) at zero.
    let t = truncate(&[0.0, -0.5 * s, -2.0 * s], r, alpha, TruncationThreshold::Sublevel).unwrap();
    assert_eq!(t[0], 0.0);
    assert_eq!(t[1], 0.0);
    assert_abs_diff_eq!(t[2], -s, epsilon = 1e-15);
    assert!(truncate(&[0.0], 0.0, alpha, TruncationThreshold::Verbatim).is_err());
}

#[test]
fn hull_examples() {
    let g = grid(2, 32);
    let r = 0.5;
    let flat = Trace::from_fn(g.clone(), |_| 0.0);
    let out = hull_check(&flat, [0.0, 0.0], r, 0.5).unwrap();
    assert!(out.passed);
    assert_eq!(out.sublevel_points, 0);
    let one_sided = Trace::from_fn(g.clone(), |x| if x[0] < -r / 2.0 { -10.0 } else { 0.0 });
    let out = hull_check(&one_sided, [0.0, 0.0], r, 0.5).unwrap();
    assert!(out.passed && out.sublevel_points > 0);
    let two_sided = Trace::from_fn(g.clone(), |x| if x[0].abs() > r / 2.0 { -10.0 } else { 0.0 });
    assert!(!hull_check(&two_sided, [0.0, 0.0], r, 0.5).unwrap().passed);

    let g3 = grid(3, 16);
    let ring = Trace::from_fn(g3.clone(), |x| if x[0] * x[0] + x[1] * x[1] > 0.1 { -10.0 } else { 0.0 });
    assert!(!hull_check(&ring, [0.0, 0.0], 0.5, 0.5).unwrap().passed);
    let half = Trace::from_fn(g3.clone(), |x| if x[1] < -0.1 { -10.0 } else { 0.0 });
    assert!(hull_check(&half, [0.0, 0.0], 0.5, 0.5).unwrap().passed);
}

#[test]
fn hull_check_passes_on_the_homogeneous_solution() {
    let g = grid(2, 128);
    let r = solve(&g, exact(), 1e-4);
    let center = [0.0, 0.0];
    let radii = dyadic_radii(8.0 * g.h(), 0.5);
    let fit = growth_fit(&r, center, &radii).unwrap();
    let alpha = fit.alpha_hat.min(0.5);
    for &rad in &radii {
        assert!(hull_check(&r.uy_trace, center, rad, alpha).unwrap().passed, "r = {rad}");
    }
}

#[test]
fn holder_examples() {
    let g = grid(2, 64);
    let min_sep = 2.0 * g.h();
    let whole = FlatRegion::Inner { margin: 0.0 };
    let c = Trace::from_fn(g.clone(), |_| 3.0);
    assert_eq!(holder_seminorm(&c, 0.5, whole, min_sep).unwrap(), 0.0);

    let profile = Trace::from_fn(g.clone(), |x| signorini_profile_dy(x[0], 0.0));
    let v = holder_seminorm(&profile, 0.5, whole, min_sep).unwrap();
    assert_abs_diff_eq!(v, 1.5, epsilon = 1e-9);

    let id = Trace::from_fn(g.clone(), |x| x[0]);
    assert_abs_diff_eq!(holder_seminorm(&id, 1.0, whole, min_sep).unwrap(), 1.0, epsilon = 1e-12);
    let ball = FlatRegion::Ball { center: [0.0, 0.0], radius: 0.25 };
    assert_abs_diff_eq!(holder_seminorm(&id, 0.5, ball, min_sep).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);

    assert!(holder_seminorm(&id, 1.0, whole, g.h()).is_err());
    assert!(holder_seminorm(&id, 0.0, whole, min_sep).is_err());
}

#[test]
fn growth_fit_examples() {
    let g = grid(2, 128);
    let radii = dyadic_radii(8.0 * g.h(), 0.5);
    assert!(radii.len() >= 4);
    let half = Field::from_fn(g.clone(), |p| signorini_profile_dy(p.x[0], p.y));
    let fit = growth_fit_field(&half, [0.0, 0.0], &radii).unwrap();
    assert!((fit.alpha_hat - 0.5).abs() <= 0.05, "{}", fit.alpha_hat);
    assert_abs_diff_eq!(fit.mu, 4f64.powf(-fit.alpha_hat), epsilon = 1e-12);

    let lipschitz = Field::from_fn(g.clone(), |p| -p.x[0].abs());
    let fit = growth_fit_field(&lipschitz, [0.0, 0.0], &radii).unwrap();
    assert!((fit.alpha_hat - 1.0).abs() <= 0.05, "{}", fit.alpha_hat);
    assert!(fit.fit_residual < 1e-9);
    assert_abs_diff_eq!(fit.k1, 1.0, epsilon = 1e-9);

    assert!(growth_fit_field(&lipschitz, [0.0, 0.0], &radii[..3]).is_err());
}

#[test]
fn growth_fit_on_the_penalized_solution() {
    let g = grid(2, 128);
    let r = solve(&g, exact(), 1e-4);
    let center = nearest_point(&g, &free_boundary(&r, 0.0), [0.0, 0.0]).unwrap();
    let fit = growth_fit(&r, center, &dyadic_radii(8.0 * g.h(), 0.5)).unwrap();
    assert!((fit.alpha_hat - 0.5).abs() <= 0.05, "{}", fit.alpha_hat);
}

#[test]
fn corollary_c_examples() {
    let g = grid(2, 16);
    let tol = 1e-9;
    let c = Field::constant(g.clone(), 2.0);
    let b = corollary1_c_check(&c, 0.0, 0.2, tol);
    assert!(b.passed);
    assert_abs_diff_eq!(b.margin, tol, epsilon = 1e-15);
    let down = Field::from_fn(g.clone(), |p| -p.y);
    assert!(corollary1_c_check(&down, 0.0, 0.2, tol).passed);
    let sq = Field::from_fn(g.clone(), |p| p.y * p.y / 2.0);
    let b = corollary1_c_check(&sq, 0.5, 0.2, tol);
    assert!(b.passed);
    assert_abs_diff_eq!(b.margin, tol, epsilon = 1e-12);
    assert!(!corollary1_c_check(&sq, 0.4, 0.2, tol).passed);
}

#[test]
fn report_entries() {
    let g = grid(2, 64);
    for data in [exact(), DirichletData::PositiveBump { amplitude: 1.0, width: 0.4 }] {
        let r = solve(&g, data, 1e-3);
        let opts = EstimateOptions {
            rim_positive: data.positive_on_rim(),
            growth_radii: vec![0.125, 0.16, 0.2, 0.25, 0.3],
            ..Default::default()
        };
        let rep = estimate_report(&r, &opts).unwrap();
        assert!(rep.is_finite());
        assert!(rep.c0 >= 0.0);
        assert!((0.0..=1.0).contains(&rep.delta0));
        assert!(rep.min_uy <= rep.max_uy);
        assert!(rep.holder(0.5).is_some() && rep.holder(0.9).is_none());
        assert!(rep.growth.is_some());
        assert_abs_diff_eq!(rep.neg_part_sup, r.negative_part_sup(), epsilon = 0.0);
    }
}

#[test]
fn annulus_of_positive_bump() {
    let g = grid(2, 32);
    let r = solve(&g, DirichletData::PositiveBump { amplitude: 1.0, width: 0.4 }, 1e-3);
    let d0 = annulus_width(&r.u);
    assert!(d0 > 0.0 && d0 <= 1.0);
    assert_eq!(annulus_width(&Field::constant(g.clone(), 1.0)), 1.0);
    let margin = inner_margin(&r, true);
    assert!(margin > 0.0 && margin <= 0.5);
    assert_abs_diff_eq!(inner_margin(&r, false), 0.2, epsilon = 1e-15);
}

#[test]
fn profile_trace_is_consistent() {
    let g = grid(2, 64);
    let t = Trace::from_fn(g.clone(), |x| signorini_profile(x[0], 0.0));
    assert_eq!(crossings(&t, 1e-12).len(), 1);
}
