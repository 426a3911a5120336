//! Free-boundary location, Hölder seminorms of traces and growth-rate fits.

use crate::error::{Error, Result};
use crate::grid::{sup_cylinder, Field, FlatPoint, Grid, NodeClass, Trace};
use crate::scalar::{lit, to_f64, Real};
use crate::solver::SolveResult;

use super::quotients::uy_field;

/// Midpoints of flat edges whose end values lie on opposite sides of `tol`.
pub fn free_boundary<T: Real>(result: &SolveResult<T>, tol: T) -> Vec<FlatPoint<T>> {
    crossings(&result.u.bottom_layer(), tol)
}

/// [`free_boundary`] for an arbitrary layer-0 trace.
pub fn crossings<T: Real>(trace: &Trace<T>, level: T) -> Vec<FlatPoint<T>> {
    let grid = trace.grid();
    let nt = grid.nt();
    let two = lit::<T>(2.0);
    let mut out = Vec::new();
    for it in grid.flat_nodes() {
        let steps: &[usize] = if grid.tangential_axes() == 2 { &[1, nt] } else { &[1] };
        for &s in steps {
            let jt = it + s;
            if jt >= grid.plane() || grid.class(jt) != NodeClass::Flat {
                continue;
            }
            // Same row for the x-step.
            if s == 1 && jt % nt == 0 {
                continue;
            }
            let (a, b) = (trace.at(it) - level, trace.at(jt) - level);
            if (a > T::zero()) != (b > T::zero()) {
                let (p, q) = (grid.flat_point(it), grid.flat_point(jt));
                out.push([(p[0] + q[0]) / two, (p[1] + q[1]) / two]);
            }
        }
    }
    out
}

/// The crossing closest to `target`.
pub fn nearest_point<T: Real>(grid: &Grid<T>, points: &[FlatPoint<T>], target: FlatPoint<T>) -> Option<FlatPoint<T>> {
    points.iter().copied().min_by(|a, b| {
        grid.flat_distance(*a, target)
            .partial_cmp(&grid.flat_distance(*b, target))
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// Part of the flat face on which seminorms are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlatRegion<T> {
    /// `|x - center| <= radius`.
    Ball { center: FlatPoint<T>, radius: T },
    /// Every flat node at lateral distance at least `margin`.
    Inner { margin: T },
}

impl<T: Real> FlatRegion<T> {
    pub fn contains(&self, grid: &Grid<T>, x: FlatPoint<T>) -> bool {
        let slack = grid.h() * lit(1e-9);
        match *self {
            Self::Ball { center, radius } => grid.flat_distance(x, center) <= radius + slack,
            Self::Inner { margin } => grid.lateral_distance(x) + slack >= margin,
        }
    }
}

/// `max |v(x) - v(z)| / |x - z|^exponent` over flat nodes of `region` with
/// `|x - z| >= min_sep`; `min_sep` must be at least `2h`.
pub fn holder_seminorm<T: Real>(trace: &Trace<T>, exponent: T, region: FlatRegion<T>, min_sep: T) -> Result<T> {
    let grid = trace.grid();
    if min_sep < lit::<T>(2.0) * grid.h() * (T::one() - lit(1e-9)) {
        return Err(Error::InvalidConfig(format!("separation {min_sep} below 2h")));
    }
    if !(exponent > T::zero()) {
        return Err(Error::InvalidConfig(format!("exponent {exponent} must be positive")));
    }
    let pts: Vec<([f64; 2], f64)> = trace
        .flat_samples()
        .filter(|(x, _)| region.contains(grid, *x))
        .map(|(x, v)| ([to_f64(x[0]), to_f64(x[1])], to_f64(v)))
        .collect();
    let e = to_f64(exponent);
    let sep2 = to_f64(min_sep).powi(2) * (1.0 - 1e-9);
    let mut best = 0.0f64;
    for (i, (x, v)) in pts.iter().enumerate() {
        for (z, w) in &pts[i + 1..] {
            let d2 = (x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2);
            if d2 < sep2 {
                continue;
            }
            let q = (v - w).abs() / d2.powf(e / 2.0);
            best = best.max(q);
        }
    }
    Ok(lit(best))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit<T> {
    pub center: FlatPoint<T>,
    pub radii: Vec<T>,
    pub sups: Vec<T>,
    /// Least-squares slope of `log sup |u_y|` against `log r`.
    pub alpha_hat: T,
    /// `exp(intercept)`.
    pub k1: T,
    /// `4^{-alpha_hat}`, the per-step decay over radii `4^{-k}`.
    pub mu: T,
    /// Root mean square of the log residuals.
    pub fit_residual: T,
}

/// Fits `sup_{Gamma_r(center)} |u_y| ~ K1 r^alpha` over the usable radii.
pub fn growth_fit<T: Real>(result: &SolveResult<T>, center: FlatPoint<T>, radii: &[T]) -> Result<GrowthFit<T>> {
    let uy = uy_field(&result.u, Some(&result.uy_trace))?;
    growth_fit_field(&uy, center, radii)
}

/// [`growth_fit`] for a given `u_y` field. Radii below `8h`, leaving the
/// domain or with a vanishing supremum are skipped.
pub fn growth_fit_field<T: Real>(uy: &Field<T>, center: FlatPoint<T>, radii: &[T]) -> Result<GrowthFit<T>> {
    let grid = uy.grid();
    let min_r = lit::<T>(8.0) * grid.h() * (T::one() - lit(1e-9));
    let mut used = Vec::new();
    let mut sups = Vec::new();
    for &r in radii {
        if r < min_r {
            continue;
        }
        if let Ok(s) = sup_cylinder(uy, center, r) {
            if s > T::zero() {
                used.push(r);
                sups.push(s);
            }
        }
    }
    if used.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "growth fit needs four usable radii, found {}",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|r| to_f64(*r).ln()).collect();
    let ys: Vec<f64> = sups.iter().map(|s| to_f64(*s).ln()).collect();
    let (slope, intercept, rms) = least_squares(&xs, &ys);
    Ok(GrowthFit {
        center,
        radii: used,
        sups,
        alpha_hat: lit(slope),
        k1: lit(intercept.exp()),
        mu: lit(4f64.powf(-slope)),
        fit_residual: lit(rms),
    })
}

/// Slope, intercept and root-mean-square residual of a straight-line fit.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Dyadic radii `2^{-k}` in `[lo, hi]`, increasing.
pub fn dyadic_radii(lo: f64, hi: f64) -> Vec<f64> {
    let mut r = 2f64.powf((hi * (1.0 + 1e-12)).log2().floor());
    let mut out = Vec::new();
    while r >= lo * (1.0 - 1e-12) {
        out.push(r);
        r /= 2.0;
    }
    out.reverse();
    out
}
