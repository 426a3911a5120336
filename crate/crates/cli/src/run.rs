//! The subcommands as library functions, plus their file output.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use obstacle_core::estimators::{
    corrected_velocity, estimate_report, free_boundary, growth_fit, least_squares, nearest_point, phi_trace,
    EstimateOptions, EstimateReport, GrowthFit, MonotonicityTrace,
};
use obstacle_core::spectral::{eigenvalue_min, SphereMesh};
use obstacle_core::{solve_penalized, solve_signorini, FlatPoint, Grid, Penalization, SolveResult};

use crate::config::ExperimentConfig;
use crate::report::{write_json, Cell, Table};
use crate::LabError;

type R<T> = Result<T, LabError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    PhiTrace,
    Spectrum,
    FitGrowth,
    Verify,
}

pub fn build_grid(cfg: &ExperimentConfig) -> R<Arc<Grid<f64>>> {
    Ok(Grid::new(cfg.grid_spec())?)
}

pub fn solve_at(cfg: &ExperimentConfig, grid: &Arc<Grid<f64>>, epsilon: f64) -> R<SolveResult<f64>> {
    let p = Penalization::canonical(epsilon)?;
    Ok(solve_penalized(
        grid,
        &p,
        &cfg.data(),
        cfg.solver.tol,
        cfg.solver.max_iterations,
    )?)
}

pub fn solve_limit(cfg: &ExperimentConfig, grid: &Arc<Grid<f64>>) -> R<SolveResult<f64>> {
    Ok(solve_signorini(
        grid,
        &cfg.data(),
        cfg.solver.limit_tol,
        cfg.solver.limit_max_sweeps,
    )?)
}

/// 1/2 and 3/4 followed by the configured extras.
pub fn holder_exponents(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut out = vec![0.5, 0.75];
    for &a in &cfg.alpha_list {
        if !out.iter().any(|e| (e - a).abs() < 1e-12) {
            out.push(a);
        }
    }
    out
}

pub fn estimate_options(cfg: &ExperimentConfig) -> EstimateOptions<f64> {
    EstimateOptions {
        rim_positive: cfg.data().positive_on_rim(),
        quotient_steps: cfg.estimator.quotient_steps.clone(),
        holder_exponents: holder_exponents(cfg),
        holder_margin: cfg.holder_margin(),
        min_separation: cfg.estimator.min_separation,
        growth_radii: Vec::new(),
        free_boundary_level: cfg.estimator.free_boundary_level,
    }
}

/// The free-boundary point closest to the configured center, or the
/// center itself when the trace does not cross the level.
pub fn free_boundary_center(result: &SolveResult<f64>, cfg: &ExperimentConfig) -> FlatPoint<f64> {
    let points = free_boundary(result, cfg.estimator.free_boundary_level);
    nearest_point(result.grid(), &points, cfg.center).unwrap_or(cfg.center)
}

/// `phi` of the corrected velocity about `center`, over the configured
/// radii whose half-balls stay inside the box.
pub fn phi_about(
    result: &SolveResult<f64>,
    cfg: &ExperimentConfig,
    c0: f64,
    center: FlatPoint<f64>,
) -> R<MonotonicityTrace<f64>> {
    let grid = result.grid();
    let room = grid.lateral_distance(center).min(cfg.normal_extent) * (1.0 + 1e-12);
    let radii: Vec<f64> = cfg.phi_radii().into_iter().filter(|&r| r <= room).collect();
    if radii.len() < 2 {
        return Err(LabError::Config("fewer than two phi radii fit inside the box".into()));
    }
    let w = corrected_velocity(result, c0)?;
    Ok(phi_trace(&w, center, &radii)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub report: EstimateReport<f64>,
    pub alpha_hat: f64,
    pub phi_defect: f64,
    pub iterations: usize,
    pub runtime_ms: f64,
    pub limit_distance: Option<f64>,
}

impl SweepRow {
    pub fn holder(&self, exponent: f64) -> f64 {
        self.report.holder(exponent).unwrap_or(f64::NAN)
    }

    /// `-min u_y`, the measured trace bound.
    pub fn trace_bound(&self) -> f64 {
        (-self.report.min_uy).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    /// Log-log slope of `sup (u)_-` against `epsilon`, with its RMS residual.
    pub neg_part_slope: f64,
    pub neg_part_fit_residual: f64,
    pub holder_half_ratio: f64,
    pub sup_uy_variation: f64,
    pub trace_bound_variation: f64,
    pub c0_variation: f64,
    /// `(exponent, slope of log seminorm against log epsilon)`.
    pub holder_slopes: Vec<(f64, f64)>,
    /// `|u_eps - u_0|_inf / eps` per row.
    pub limit_constants: Vec<f64>,
    /// Relative change of the limit constant over the two smallest `eps`.
    pub limit_constant_drift: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
    pub exponents: Vec<f64>,
}

fn variation(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > 0.0 {
        (hi - lo) / hi
    } else {
        0.0
    }
}

fn ratio(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    hi / lo
}

fn log_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pairs.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (slope, _, rms) = least_squares(&lx, &ly);
    (slope, rms)
}

pub fn summarize(rows: &[SweepRow], exponents: &[f64]) -> SweepSummary {
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let neg: Vec<f64> = rows.iter().map(|r| r.report.neg_part_sup).collect();
    let (neg_part_slope, neg_part_fit_residual) = log_slope(&eps, &neg);
    let holder_slopes = exponents
        .iter()
        .map(|&a| {
            let hs: Vec<f64> = rows.iter().map(|r| r.holder(a)).collect();
            (a, log_slope(&eps, &hs).0)
        })
        .collect();
    let limit_constants: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.limit_distance.map(|d| d / r.epsilon))
        .collect();
    let limit_constant_drift = match limit_constants.as_slice() {
        [.., a, b] => Some((a - b).abs() / a.max(*b)),
        _ => None,
    };
    SweepSummary {
        neg_part_slope,
        neg_part_fit_residual,
        holder_half_ratio: ratio(rows.iter().map(|r| r.holder(0.5))),
        sup_uy_variation: variation(rows.iter().map(|r| r.report.sup_uy)),
        trace_bound_variation: variation(rows.iter().map(SweepRow::trace_bound)),
        c0_variation: variation(rows.iter().map(|r| r.report.c0)),
        holder_slopes,
        limit_constants,
        limit_constant_drift,
    }
}

/// All per-solution measurements of one sweep entry.
pub fn measure(
    cfg: &ExperimentConfig,
    result: &SolveResult<f64>,
    epsilon: f64,
    runtime_ms: f64,
    limit: Option<&SolveResult<f64>>,
) -> R<SweepRow> {
    let report = estimate_report(result, &estimate_options(cfg))?;
    let center = free_boundary_center(result, cfg);
    let fit = growth_fit(result, center, &cfg.fit_radii(center))?;
    let phi = phi_about(result, cfg, report.c0, center)?;
    let limit_distance = match limit {
        Some(l) => Some(result.u.sub(&l.u)?.max_abs()),
        None => None,
    };
    Ok(SweepRow {
        epsilon,
        report,
        alpha_hat: fit.alpha_hat,
        phi_defect: phi.relative_defect(),
        iterations: result.iterations,
        runtime_ms,
        limit_distance,
    })
}

/// Independent solves for every `epsilon` of the list, run on `workers`
/// threads; rows come back in list order (decreasing `epsilon`).
pub fn sweep(cfg: &ExperimentConfig, workers: usize) -> R<Sweep> {
    let grid = build_grid(cfg)?;
    let limit = if cfg.compare_limit {
        Some(solve_limit(cfg, &grid)?)
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::Config(e.to_string()))?;
    let rows: Vec<R<SweepRow>> = pool.install(|| {
        cfg.epsilon_list
            .par_iter()
            .map(|&e| {
                let start = Instant::now();
                let result = solve_at(cfg, &grid, e)?;
                let ms = if cfg.timings {
                    start.elapsed().as_secs_f64() * 1e3
                } else {
                    0.0
                };
                measure(cfg, &result, e, ms, limit.as_ref())
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<R<Vec<_>>>()?;
    let exponents = holder_exponents(cfg);
    let summary = summarize(&rows, &exponents);
    Ok(Sweep { rows, summary, exponents })
}

fn exponent_label(a: f64) -> String {
    match a {
        a if a == 0.5 => "holder_half".into(),
        a if a == 0.75 => "holder_075".into(),
        a => format!("holder_{}", format!("{a}").replace('.', "")),
    }
}

pub fn sweep_table(sweep: &Sweep, cfg: &ExperimentConfig, hash: &str) -> Table {
    let mut header: Vec<String> = ["epsilon", "sup_u", "min_uy", "neg_part_sup", "C0", "delta0"]
        .map(String::from)
        .to_vec();
    header.extend(sweep.exponents.iter().map(|&a| exponent_label(a)));
    header.extend(["alpha_hat", "phi_defect", "iterations", "runtime_ms", "sup_uy"].map(String::from));
    if cfg.compare_limit {
        header.push("limit_distance".into());
    }
    header.push("config_hash".into());
    let mut t = Table::new(header);
    for r in &sweep.rows {
        let rep = &r.report;
        let mut row: Vec<Cell> = vec![
            r.epsilon.into(),
            rep.sup_u.into(),
            rep.min_uy.into(),
            rep.neg_part_sup.into(),
            rep.c0.into(),
            rep.delta0.into(),
        ];
        row.extend(sweep.exponents.iter().map(|&a| Cell::from(r.holder(a))));
        row.extend([
            r.alpha_hat.into(),
            r.phi_defect.into(),
            r.iterations.into(),
            r.runtime_ms.into(),
            rep.sup_uy.into(),
        ]);
        if let Some(d) = r.limit_distance {
            row.push(d.into());
        }
        row.push(hash.into());
        t.push(row);
    }
    t
}

pub fn sweep_json(sweep: &Sweep, hash: &str) -> serde_json::Value {
    let s = &sweep.summary;
    json!({
        "config_hash": hash,
        "rows": sweep.rows.len(),
        "all_finite": sweep.rows.iter().all(|r| r.report.is_finite() && r.alpha_hat.is_finite() && r.phi_defect.is_finite()),
        "neg_part_slope": s.neg_part_slope,
        "neg_part_fit_residual": s.neg_part_fit_residual,
        "holder_half_ratio": s.holder_half_ratio,
        "sup_uy_variation": s.sup_uy_variation,
        "trace_bound_variation": s.trace_bound_variation,
        "c0_variation": s.c0_variation,
        "holder_slopes": s.holder_slopes.iter().map(|(a, v)| json!({"exponent": a, "slope": v})).collect::<Vec<_>>(),
        "limit_constants": s.limit_constants,
        "limit_constant_drift": s.limit_constant_drift,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub dimension: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub lambda: f64,
    pub iterations: usize,
}

impl SpectrumRow {
    /// `(2n - 1) / 4` with `n = d - 1`.
    pub fn exact(&self) -> f64 {
        (2.0 * (self.dimension as f64 - 1.0) - 1.0) / 4.0
    }
}

pub fn spectrum_resolutions(cfg: &ExperimentConfig) -> Vec<usize> {
    if !cfg.spectrum.resolutions.is_empty() {
        return cfg.spectrum.resolutions.clone();
    }
    if cfg.dimension == 2 {
        vec![64, 128, 256, 512]
    } else {
        vec![32, 64, 128]
    }
}

pub fn spectrum(cfg: &ExperimentConfig) -> R<Vec<SpectrumRow>> {
    spectrum_resolutions(cfg)
        .into_iter()
        .map(|n| {
            let (mesh, n_phi) = if cfg.dimension == 2 {
                (SphereMesh::<f64>::arc(n)?, 1)
            } else {
                (SphereMesh::<f64>::hemisphere(n, n)?, n)
            };
            let pair = eigenvalue_min(&mesh, cfg.spectrum.tol, cfg.spectrum.max_iterations)?;
            Ok(SpectrumRow {
                dimension: cfg.dimension,
                n_theta: n,
                n_phi,
                lambda: pair.lambda,
                iterations: pair.iterations,
            })
        })
        .collect()
}

pub fn spectrum_table(rows: &[SpectrumRow], hash: &str) -> Table {
    let mut t = Table::new([
        "dimension",
        "n_theta",
        "n_phi",
        "lambda",
        "exact",
        "relative_error",
        "iterations",
        "config_hash",
    ]);
    for r in rows {
        t.push(vec![
            r.dimension.into(),
            r.n_theta.into(),
            r.n_phi.into(),
            r.lambda.into(),
            r.exact().into(),
            ((r.lambda - r.exact()).abs() / r.exact()).into(),
            r.iterations.into(),
            hash.into(),
        ]);
    }
    t
}

pub fn phi_table(trace: &MonotonicityTrace<f64>, hash: &str) -> Table {
    let mut t = Table::new(["radius", "phi", "config_hash"]);
    for (r, v) in trace.radii.iter().zip(&trace.phi_values) {
        t.push(vec![(*r).into(), (*v).into(), hash.into()]);
    }
    t
}

pub fn growth_table(fit: &GrowthFit<f64>, hash: &str) -> Table {
    let mut t = Table::new(["radius", "sup_uy", "fitted", "config_hash"]);
    for (r, s) in fit.radii.iter().zip(&fit.sups) {
        t.push(vec![
            (*r).into(),
            (*s).into(),
            (fit.k1 * r.powf(fit.alpha_hat)).into(),
            hash.into(),
        ]);
    }
    t
}

fn point_columns(d: usize) -> Vec<&'static str> {
    if d == 2 {
        vec!["x"]
    } else {
        vec!["x1", "x2"]
    }
}

/// Nodal values, one row per node, row-major with `y` outermost.
pub fn field_table(result: &SolveResult<f64>, hash: &str) -> Table {
    let grid = result.grid();
    let mut header = point_columns(grid.dimension());
    header.extend(["y", "u", "config_hash"]);
    let mut t = Table::new(header);
    for i in 0..grid.len() {
        let p = grid.point(i);
        let mut row: Vec<Cell> = vec![p.x[0].into()];
        if grid.dimension() == 3 {
            row.push(p.x[1].into());
        }
        row.extend([p.y.into(), result.u.at(i).into(), hash.into()]);
        t.push(row);
    }
    t
}

pub fn trace_table(result: &SolveResult<f64>, hash: &str) -> Table {
    let grid = result.grid();
    let mut header = point_columns(grid.dimension());
    header.extend(["u", "uy", "active", "config_hash"]);
    let mut t = Table::new(header);
    for it in 0..grid.plane() {
        let x = grid.flat_point(it);
        let mut row: Vec<Cell> = vec![x[0].into()];
        if grid.dimension() == 3 {
            row.push(x[1].into());
        }
        row.extend([
            result.u.at(it).into(),
            result.uy_trace.at(it).into(),
            result.active_set[it].into(),
            hash.into(),
        ]);
        t.push(row);
    }
    t
}

pub fn solve_report_table(result: &SolveResult<f64>, rep: &EstimateReport<f64>, epsilon: f64, hash: &str) -> Table {
    let mut t = Table::new([
        "epsilon",
        "sup_u",
        "sup_uy",
        "min_uy",
        "max_uy",
        "C0",
        "delta0",
        "neg_part_sup",
        "holder_half",
        "holder_075",
        "iterations",
        "linear_iterations",
        "residual",
        "energy",
        "active_count",
        "config_hash",
    ]);
    t.push(vec![
        epsilon.into(),
        rep.sup_u.into(),
        rep.sup_uy.into(),
        rep.min_uy.into(),
        rep.max_uy.into(),
        rep.c0.into(),
        rep.delta0.into(),
        rep.neg_part_sup.into(),
        rep.holder(0.5).unwrap_or(f64::NAN).into(),
        rep.holder(0.75).unwrap_or(f64::NAN).into(),
        result.iterations.into(),
        result.linear_iterations.into(),
        result.residual.into(),
        result.energy.into(),
        result.active_count().into(),
        hash.into(),
    ]);
    t
}

/// Printable summary of a run and the invariant that failed, if any.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub violation: Option<String>,
}

/// Runs a subcommand and writes its artifacts to `out`.
pub fn execute(command: Command, cfg: &ExperimentConfig, out: &Path, workers: usize) -> R<Outcome> {
    std::fs::create_dir_all(out)?;
    let hash = cfg.hash();
    let mut lines = Vec::new();
    let mut violation = None;
    match command {
        Command::Solve => {
            let grid = build_grid(cfg)?;
            let result = solve_at(cfg, &grid, cfg.epsilon)?;
            let rep = estimate_report(&result, &estimate_options(cfg))?;
            field_table(&result, &hash).write(&out.join("field.csv"))?;
            trace_table(&result, &hash).write(&out.join("trace.csv"))?;
            solve_report_table(&result, &rep, cfg.epsilon, &hash).write(&out.join("report.csv"))?;
            lines.push(format!(
                "solve: eps {:e}, {} iterations, residual {:e}, {} active nodes",
                cfg.epsilon,
                result.iterations,
                result.residual,
                result.active_count()
            ));
        }
        Command::Sweep => {
            let s = sweep(cfg, workers)?;
            sweep_table(&s, cfg, &hash).write(&out.join("sweep.csv"))?;
            let summary = sweep_json(&s, &hash);
            write_json(&out.join("sweep.json"), &summary)?;
            lines.push(format!(
                "sweep: {} rows, neg_part slope {:.4}, holder_half ratio {:.4}, sup_uy variation {:.4}",
                s.rows.len(),
                s.summary.neg_part_slope,
                s.summary.holder_half_ratio,
                s.summary.sup_uy_variation
            ));
            if summary["all_finite"] != json!(true) {
                violation = Some("sweep report holds non-finite values".into());
            }
        }
        Command::PhiTrace => {
            let grid = build_grid(cfg)?;
            let result = solve_at(cfg, &grid, cfg.epsilon)?;
            let rep = estimate_report(&result, &estimate_options(cfg))?;
            let center = free_boundary_center(&result, cfg);
            let trace = phi_about(&result, cfg, rep.c0, center)?;
            phi_table(&trace, &hash).write(&out.join("phi_trace.csv"))?;
            write_json(
                &out.join("phi_trace.json"),
                &json!({
                    "config_hash": hash,
                    "center": center,
                    "C0": rep.c0,
                    "monotone_defect": trace.monotone_defect,
                    "relative_defect": trace.relative_defect(),
                }),
            )?;
            lines.push(format!(
                "phi-trace: {} radii, relative defect {:.4e}",
                trace.radii.len(),
                trace.relative_defect()
            ));
        }
        Command::Spectrum => {
            let rows = spectrum(cfg)?;
            spectrum_table(&rows, &hash).write(&out.join("spectrum.csv"))?;
            if let Some(last) = rows.last() {
                lines.push(format!(
                    "spectrum: d={} {}x{} lambda {:.6} (exact {})",
                    last.dimension,
                    last.n_theta,
                    last.n_phi,
                    last.lambda,
                    last.exact()
                ));
            }
        }
        Command::FitGrowth => {
            let grid = build_grid(cfg)?;
            let result = solve_at(cfg, &grid, cfg.epsilon)?;
            let center = free_boundary_center(&result, cfg);
            let fit = growth_fit(&result, center, &cfg.fit_radii(center))?;
            growth_table(&fit, &hash).write(&out.join("growth.csv"))?;
            write_json(
                &out.join("growth.json"),
                &json!({
                    "config_hash": hash,
                    "center": center,
                    "alpha_hat": fit.alpha_hat,
                    "K1": fit.k1,
                    "mu": fit.mu,
                    "fit_residual": fit.fit_residual,
                }),
            )?;
            lines.push(format!(
                "fit-growth: alpha_hat {:.4}, K1 {:.4}, mu {:.4}, residual {:.3e}",
                fit.alpha_hat, fit.k1, fit.mu, fit.fit_residual
            ));
        }
        Command::Verify => {
            let suite = crate::verify::verify(cfg, workers)?;
            crate::verify::table(&suite, &hash).write(&out.join("verify.csv"))?;
            for c in &suite {
                lines.push(format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            let failed: Vec<&str> = suite.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            if !failed.is_empty() {
                violation = Some(failed.join(", "));
            }
        }
    }
    Ok(Outcome { lines, violation })
}
