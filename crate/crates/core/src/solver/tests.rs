use super::*;
use crate::grid::{GridSpec, LateralBoundary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid2(n: usize) -> Arc<Grid<f64>> {
    Grid::new(GridSpec::new(2, n)).unwrap()
}

fn column(n: usize) -> Arc<Grid<f64>> {
    Grid::new(GridSpec::new(2, n).with_lateral(LateralBoundary::Reflecting)).unwrap()
}

fn eps(e: f64) -> Penalization<f64> {
    Penalization::canonical(e).unwrap()
}

#[test]
fn energy_examples() {
    let g = grid2(16);
    let p = eps(0.3);
    assert_eq!(energy(&Field::zeros(g.clone()), &p), 0.0);
    let y = Field::from_fn(g.clone(), |q| q.y);
    assert!((energy(&y, &p) - 1.0).abs() < 1e-12);
    let m = Field::constant(g, -1.0);
    assert!((energy(&m, &eps(1.0)) - 1.0).abs() < 1e-12);
}

#[test]
fn positive_constant_is_its_own_solution() {
    let g = grid2(16);
    let r = solve_penalized(&g, &eps(0.1), &DirichletData::Constant(1.0), 1e-10, 50).unwrap();
    assert!(r.u.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    assert!(r.uy_trace.values().iter().all(|v| v.abs() < 1e-10));
    assert_eq!(r.active_count(), 0);
    let s = solve_signorini(&g, &DirichletData::Constant(1.0), 1e-10, 1000).unwrap();
    assert!(s.u.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn negative_constant_gives_affine_column() {
    let g = column(16);
    for e in [1.0, 0.1, 0.01] {
        let r = solve_penalized(&g, &eps(e), &DirichletData::Constant(-1.0), 1e-10, 50).unwrap();
        let expected = -e / (1.0 + e);
        for it in 0..g.plane() {
            assert!((r.u.at(it) - expected).abs() < 1e-8, "eps {e}: {}", r.u.at(it));
            assert!((r.uy_trace.at(it) - expected / e).abs() < 1e-7);
        }
        for i in 0..g.len() {
            let y = g.point(i).y;
            assert!((r.u.at(i) - (expected - y / (1.0 + e))).abs() < 1e-8);
        }
        assert!(r.complementarity_defect(&eps(e)) < 1e-7);
    }
}

#[test]
fn signorini_negative_constant() {
    let g = column(16);
    let r = solve_signorini(&g, &DirichletData::Constant(-1.0), 1e-10, 20_000).unwrap();
    for i in 0..g.len() {
        assert!((r.u.at(i) + g.point(i).y).abs() < 1e-8);
    }
}

#[test]
fn signorini_exact_profile_converges() {
    let data = DirichletData::SignoriniExact { amplitude: 1.0 };
    let mut errs = Vec::new();
    for n in [16, 32] {
        let g = grid2(n);
        let r = solve_signorini(&g, &data, 1e-10, 100_000).unwrap();
        let exact = data.field(&g);
        errs.push(r.u.sub(&exact).unwrap().max_abs());
    }
    assert!(errs[1] < 2e-2, "{errs:?}");
    assert!(errs[1] < errs[0], "{errs:?}");
}

#[test]
fn penalized_approaches_signorini() {
    let g = grid2(32);
    let data = DirichletData::SignoriniExact { amplitude: 1.0 };
    let u0 = solve_signorini(&g, &data, 1e-11, 100_000).unwrap();
    let mut prev = f64::INFINITY;
    for e in [1e-1, 1e-2, 1e-3] {
        let r = solve_penalized(&g, &eps(e), &data, 1e-9, 100).unwrap();
        let d = r.u.sub(&u0.u).unwrap().max_abs();
        assert!(d < prev);
        assert!(d < 2.0 * e, "eps {e}: {d}");
        assert!(r.negative_part_sup() <= 2.0 * e, "{}", r.negative_part_sup());
        prev = d;
    }
}

#[test]
fn oracle_matches_active_set_solver() {
    let g = grid2(8);
    assert_eq!(g.len(), 153);
    let p = eps(0.1);
    for data in [
        DirichletData::Constant(-1.0),
        DirichletData::PositiveBump { amplitude: 1.0, width: 0.5 },
    ] {
        let r = solve_penalized(&g, &p, &data, 1e-12, 50).unwrap();
        let step = oracle_step_bound(&g, &p);
        let o = oracle_minimize(&g, &p, &data, 200_000, step);
        assert!(r.u.sub(&o).unwrap().max_abs() < 1e-9);
    }
}

#[test]
fn oracle_energy_is_nonincreasing() {
    let g = grid2(8);
    let p = eps(0.1);
    let data = DirichletData::PositiveBump { amplitude: 1.0, width: 0.5 };
    let mut last = f64::INFINITY;
    let step = oracle_step_bound(&g, &p);
    oracle_trajectory(&g, &p, &data, 2000, step, |_, u| {
        let e = energy(&Field::from_raw(g.clone(), u.to_vec()), &p);
        assert!(e <= last + 1e-14);
        last = e;
    });
}

#[test]
fn solution_beats_random_perturbations() {
    let g = grid2(16);
    let p = eps(0.05);
    let data = DirichletData::PositiveBump { amplitude: 1.0, width: 0.4 };
    let r = solve_penalized(&g, &p, &data, 1e-10, 50).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let scale = 10f64.powf(rng.gen_range(-4.0..-1.0));
        let mut v = r.u.values().to_vec();
        for (i, x) in v.iter_mut().enumerate() {
            if g.is_free(i) {
                *x += scale * rng.gen_range(-1.0..1.0);
            }
        }
        let e = energy(&Field::new(g.clone(), v).unwrap(), &p);
        assert!(r.energy <= e);
    }
}

#[test]
fn maximum_principle_and_trace_sign() {
    let g = grid2(32);
    let data = DirichletData::PositiveBump { amplitude: 1.0, width: 0.4 };
    for e in [1e-1, 1e-3] {
        let r = solve_penalized(&g, &eps(e), &data, 1e-9, 100).unwrap();
        assert!(r.u.max_abs() <= 1.0 + 1e-9);
        assert!(r.uy_trace.values().iter().enumerate().filter(|(i, _)| g.is_free(*i)).all(|(_, v)| *v <= 1e-9));
        assert!(r.active_count() > 0);
    }
}

#[test]
fn three_dimensional_column() {
    let g = Grid::new(GridSpec::new(3, 8).with_lateral(LateralBoundary::Reflecting)).unwrap();
    let r = solve_penalized(&g, &eps(0.1), &DirichletData::Constant(-1.0), 1e-10, 50).unwrap();
    for it in 0..g.plane() {
        assert!((r.u.at(it) + 0.1 / 1.1).abs() < 1e-8);
    }
}

#[test]
fn single_precision_solve() {
    let g = Grid::<f32>::new(GridSpec::new(2, 16).with_lateral(LateralBoundary::Reflecting)).unwrap();
    let p = Penalization::canonical(0.1f32).unwrap();
    let r = solve_penalized(&g, &p, &DirichletData::Constant(-1.0), 1e-4, 50).unwrap();
    assert!((r.u.at(g.plane() / 2) + 0.1 / 1.1).abs() < 1e-4);
}

#[test]
fn rescaling() {
    let g = grid2(32);
    let data = DirichletData::PositiveBump { amplitude: 1.0, width: 0.4 };
    let r = solve_penalized(&g, &eps(1.0), &data, 1e-10, 50).unwrap();
    let v = rescaled_solution(&r, &eps(1.0)).unwrap();
    assert!(v.sub(&r.u).unwrap().max_abs() < 1e-12);
    assert!(rescaled_solution(&r, &eps(2.0)).is_err());
}

#[test]
fn invalid_inputs() {
    let g = grid2(8);
    assert!(solve_penalized(&g, &eps(0.1), &DirichletData::Constant(1.0), 0.0, 10).is_err());
    let data = DirichletData::PositiveBump { amplitude: 1.0, width: 0.4 };
    match solve_penalized(&g, &eps(1e-3), &data, 1e-12, 1) {
        Err(Error::NonConverged { .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn nodal_rescaling_is_exact() {
    let g = grid2(32);
    let data = DirichletData::SignoriniExact { amplitude: 1.0 };
    let e = 0.25;
    let r = solve_penalized(&g, &eps(e), &data, 1e-11, 50).unwrap();
    let v = rescaled_nodal(&r, &eps(e)).unwrap();
    assert_eq!(v.grid().spec().resolution, 8);
    let direct = solve_penalized(v.grid(), &eps(1.0), &data, 1e-11, 50).unwrap();
    assert!(v.sub(&direct.u).unwrap().max_abs() < 1e-8);
    assert!(rescaled_nodal(&r, &eps(0.3)).is_err());
}
