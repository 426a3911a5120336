//! The invariant suite behind `obstacle-lab verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use obstacle_core::estimators::{
    annulus_width, corollary1_c_check, dyadic_radii, growth_fit, hull_check, inner_margin, semiconcavity_check,
    semiconvexity_constant,
};
use obstacle_core::solver::rescaled_nodal;
use obstacle_core::{energy, solve_penalized, DirichletData, Field, Grid, Penalization, SolveResult};

use crate::config::ExperimentConfig;
use crate::report::{Cell, Table};
use crate::run::{build_grid, free_boundary_center, solve_at};
use crate::LabError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value and the bound it is held to.
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

fn check(name: &'static str, value: f64, bound: f64, detail: String) -> Check {
    Check {
        name,
        passed: value <= bound,
        value,
        bound,
        detail,
    }
}

/// `value <= bound` for every entry, reported at the worst entry.
fn worst_of(name: &'static str, pairs: &[(f64, f64)], what: &str) -> Check {
    let (value, bound) = pairs
        .iter()
        .copied()
        .max_by(|a, b| (a.0 - a.1).total_cmp(&(b.0 - b.1)))
        .unwrap_or((0.0, 0.0));
    check(name, value, bound, format!("{what} {value:.4e} against {bound:.4e}"))
}

fn variation(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if hi > 0.0 {
        (hi - lo) / hi
    } else {
        0.0
    }
}

fn dirichlet_range(grid: &Grid<f64>, g: &Field<f64>) -> (f64, f64) {
    (0..grid.len())
        .filter(|&i| !grid.is_free(i))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| (lo.min(g.at(i)), hi.max(g.at(i))))
}

/// Energies of `count` random perturbations of `u` (free nodes only) minus
/// the energy of `u`; the smallest difference is returned.
fn minimality_gap(result: &SolveResult<f64>, p: &Penalization<f64>, count: usize, seed: u64) -> f64 {
    let grid = result.grid();
    let base = energy(&result.u, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gap = f64::INFINITY;
    for k in 0..count {
        let scale = [1e-1, 1e-2, 1e-3][k % 3];
        let mut values = result.u.values().to_vec();
        for (i, v) in values.iter_mut().enumerate() {
            if grid.is_free(i) {
                *v += scale * rng.gen_range(-1.0..1.0);
            }
        }
        let perturbed = Field::new(grid.clone(), values).expect("same grid");
        gap = gap.min(energy(&perturbed, p) - base);
    }
    gap
}

pub fn verify(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<Check>, LabError> {
    let grid = build_grid(cfg)?;
    let data = cfg.data();
    let tol = cfg.estimator.tol;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::Config(e.to_string()))?;
    let results: Vec<SolveResult<f64>> = pool.install(|| {
        cfg.epsilon_list
            .par_iter()
            .map(|&e| solve_at(cfg, &grid, e))
            .collect::<Result<Vec<_>, LabError>>()
    })?;
    let pens: Vec<Penalization<f64>> = cfg
        .epsilon_list
        .iter()
        .map(|&e| Penalization::canonical(e))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();

    out.push(worst_of(
        "solver_residual",
        &results.iter().map(|r| (r.residual, cfg.solver.tol)).collect::<Vec<_>>(),
        "residual",
    ));

    // Maximum principle.
    let g = data.field(&grid);
    let (gmin, gmax) = dirichlet_range(&grid, &g);
    let gsup = gmin.abs().max(gmax.abs());
    let mut mp = Vec::new();
    for r in &results {
        let (lo, hi) = r.u.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        mp.push((gmin - lo, tol));
        mp.push((hi - gmax, tol));
        if gmin < 0.0 && gmax > 0.0 {
            mp.push((r.u.max_abs() - gsup, tol));
        }
    }
    out.push(worst_of("maximum_principle", &mp, "excess over the data range"));

    // Sign and bound of the trace.
    let uy_max: Vec<(f64, f64)> = results
        .iter()
        .map(|r| {
            let m = grid.flat_nodes().map(|it| r.uy_trace.at(it)).fold(f64::NEG_INFINITY, f64::max);
            (m, tol)
        })
        .collect();
    out.push(worst_of("trace_sign", &uy_max, "max u_y"));
    let bounds: Vec<f64> = results
        .iter()
        .map(|r| -grid.flat_nodes().map(|it| r.uy_trace.at(it)).fold(f64::INFINITY, f64::min))
        .collect();
    let var = variation(&bounds);
    out.push(check(
        "trace_bound_stability",
        var,
        0.1,
        format!("C = -min u_y over the sweep {bounds:.4?}, variation {var:.4}"),
    ));

    // Annulus positivity.
    if data.positive_on_rim() {
        let widths: Vec<f64> = results.iter().map(|r| annulus_width(&r.u)).collect();
        let least = widths.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(Check {
            name: "annulus_positivity",
            passed: least > 0.0,
            value: least,
            bound: 0.0,
            detail: format!("delta0 over the sweep {widths:.4?}"),
        });
    } else {
        out.push(Check {
            name: "annulus_positivity",
            passed: true,
            value: 0.0,
            bound: 0.0,
            detail: "skipped: data is not positive on the rim".into(),
        });
    }

    // Semiconvexity and its consequences.
    let rim = data.positive_on_rim();
    let deltas: Vec<f64> = cfg.estimator.quotient_steps.iter().map(|&k| k as f64 * grid.h()).collect();
    let m = grid.tangential_axes() as f64;
    let mut c0s = Vec::new();
    let (mut concave, mut companion, mut growth) = (Vec::new(), Vec::new(), Vec::new());
    for r in &results {
        let semi = semiconvexity_constant(r, &deltas, rim)?;
        let margin = inner_margin(r, rim);
        let cc = semiconcavity_check(&r.u, semi.c0, margin, tol)?;
        let gb = corollary1_c_check(&r.u, m * semi.c0, margin, tol);
        c0s.push(semi.c0);
        concave.push((-cc.margin, 0.0));
        companion.push((-cc.companion_margin, 0.0));
        growth.push((-gb.margin, 0.0));
    }
    out.push(check(
        "semiconvexity",
        if c0s.iter().all(|c| c.is_finite()) { 0.0 } else { 1.0 },
        0.0,
        format!("C0 over the sweep {c0s:.4?}"),
    ));
    out.push(worst_of("semiconcavity", &concave, "max u_yy - m C0 - tol"));
    out.push(worst_of("concavity_of_uy", &companion, "worst u_y increment beyond m C0 dt + tol"));
    out.push(worst_of("quadratic_growth", &growth, "worst u(t) - u(0) beyond m C0 t^2 + tol"));

    // The discrete equations and minimality.
    out.push(worst_of(
        "complementarity",
        &results
            .iter()
            .zip(&pens)
            .map(|(r, p)| (r.complementarity_defect(p), tol))
            .collect::<Vec<_>>(),
        "|u_y - beta(u)|",
    ));
    let gaps: Vec<(f64, f64)> = results
        .iter()
        .zip(&pens)
        .enumerate()
        .map(|(k, (r, p))| {
            let gap = minimality_gap(r, p, 100, cfg.seed.wrapping_add(k as u64));
            (-gap, 1e-12 * r.energy.abs().max(1.0))
        })
        .collect();
    out.push(worst_of("minimality", &gaps, "energy(u) - min energy(perturbed)"));

    // Penalization family.
    let mut adm_fail = Vec::new();
    let mut cov = 0.0f64;
    for p in &pens {
        if !p.admissibility((-2.0, 2.0), 101).all_passed() {
            adm_fail.push(p.epsilon());
        }
        for sigma in [0.5, 2.0, 10.0] {
            let q = p.rescale(sigma)?;
            cov = cov.max((q.epsilon() - p.epsilon() / sigma).abs() / q.epsilon());
            for k in 0..=40 {
                let t = -2.0 + 0.1 * k as f64;
                cov = cov.max((q.beta(t) - p.beta(sigma * t)).abs() / (1.0 + p.beta(sigma * t).abs()));
            }
            if !q.admissibility((-2.0, 2.0), 101).all_passed() {
                adm_fail.push(q.epsilon());
            }
        }
    }
    out.push(Check {
        name: "admissibility",
        passed: adm_fail.is_empty(),
        value: adm_fail.len() as f64,
        bound: 0.0,
        detail: format!("members failing the audit: {adm_fail:?}"),
    });
    out.push(check(
        "penalty_scaling",
        cov,
        1e-12,
        format!("max relative mismatch of beta_(eps/s)(t) and beta_eps(s t): {cov:.3e}"),
    ));

    // Blow-up identity on the homogeneous profile.
    let exact = DirichletData::SignoriniExact { amplitude: 1.0 };
    let eps_id = 8.0 / cfg.resolution as f64;
    let p_id = Penalization::canonical(eps_id)?;
    let solved = solve_penalized(&grid, &p_id, &exact, cfg.solver.tol, cfg.solver.max_iterations)?;
    let v = rescaled_nodal(&solved, &p_id)?;
    let unit = Penalization::canonical(1.0)?;
    let direct = solve_penalized(v.grid(), &unit, &exact, cfg.solver.tol, cfg.solver.max_iterations)?;
    let scale = v.max_abs().max(1.0);
    let diff = v.sub(&direct.u)?.max_abs() / scale;
    out.push(check(
        "blow_up_covariance",
        diff,
        1e-6,
        format!("eps = {eps_id}: |v - v_direct| / |v| = {diff:.3e}"),
    ));
    let vg = direct.grid();
    let ident = vg
        .flat_nodes()
        .filter(|&it| direct.active_set[it])
        .map(|it| (direct.uy_trace.at(it) - direct.u.at(it)).abs())
        .fold(0.0, f64::max)
        / scale;
    let active = vg.flat_nodes().filter(|&it| direct.active_set[it]).count();
    out.push(Check {
        name: "blow_up_active_identity",
        passed: active > 0 && ident <= 1e-6,
        value: ident,
        bound: 1e-6,
        detail: format!("max |v_y - v| / |v| over {active} active nodes = {ident:.3e}"),
    });

    // Convex-hull lemma on the homogeneous profile.
    let smallest = *cfg.epsilon_list.last().expect("validated non-empty");
    let p_small = Penalization::canonical(smallest)?;
    let hom = solve_penalized(&grid, &p_small, &exact, cfg.solver.tol, cfg.solver.max_iterations)?;
    let fb = free_boundary_center(&hom, cfg);
    let center = grid.flat_point(grid.nearest_flat_index(fb));
    let radii = cfg.fit_radii(center);
    let fit = growth_fit(&hom, center, &radii)?;
    let alpha = fit.alpha_hat.clamp(1e-3, 0.5);
    let lo = radii.first().copied().unwrap_or(8.0 * grid.h());
    let hi = radii.last().copied().unwrap_or(lo);
    let mut hull_fail = Vec::new();
    let dyadic = dyadic_radii(lo, hi);
    for &r in &dyadic {
        if !hull_check(&hom.uy_trace, center, r, alpha)?.passed {
            hull_fail.push(r);
        }
    }
    out.push(Check {
        name: "hull_check",
        passed: hull_fail.is_empty() && !dyadic.is_empty(),
        value: hull_fail.len() as f64,
        bound: 0.0,
        detail: format!(
            "alpha = {alpha:.4} at x = {center:.4?}, radii {dyadic:.4?}, failing {hull_fail:?}"
        ),
    });

    Ok(out)
}

pub fn table(checks: &[Check], hash: &str) -> Table {
    let mut t = Table::new(["invariant", "passed", "value", "bound", "config_hash"]);
    for c in checks {
        t.push(vec![
            c.name.into(),
            c.passed.into(),
            Cell::from(c.value),
            Cell::from(c.bound),
            hash.into(),
        ]);
    }
    t
}
