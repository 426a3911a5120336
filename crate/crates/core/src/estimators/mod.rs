//! Measured versions of the epsilon-uniform estimates.

mod monotonicity;
mod quotients;
mod regularity;

pub use monotonicity::{
    delta_alpha, hull_check, phi_trace, truncate, truncate_field, truncation_level, HullOutcome, MonotonicityTrace,
    TruncationThreshold,
};
pub use quotients::{
    annulus_width, corollary1_c_check, correct, corrected_velocity, incremental_quotient, inner_margin, inner_region,
    semiconcavity_check, semiconvexity_constant, semiconvexity_in, uy_field, ConcavityCheck, GrowthBound,
    QuotientField, Semiconvexity, TangentialDirection,
};
pub use regularity::{
    crossings, dyadic_radii, free_boundary, growth_fit, growth_fit_field, holder_seminorm, least_squares,
    nearest_point, FlatRegion, GrowthFit,
};

use crate::error::Result;
use crate::scalar::{lit, Real};
use crate::solver::SolveResult;

/// What [`estimate_report`] measures and where.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions<T> {
    /// Data positive on the rim of the flat face (enables the annulus margin).
    pub rim_positive: bool,
    /// Increments for the semiconvexity constant, in units of `h`.
    pub quotient_steps: Vec<usize>,
    pub holder_exponents: Vec<T>,
    /// Lateral margin of the flat region used for seminorms and `sup |u_y|`.
    pub holder_margin: T,
    /// Minimum pair separation in units of `h` (at least 2).
    pub min_separation: usize,
    /// Radii for the growth fit; empty skips it.
    pub growth_radii: Vec<T>,
    /// Level at which the free boundary is detected.
    pub free_boundary_level: T,
}

impl<T: Real> Default for EstimateOptions<T> {
    fn default() -> Self {
        Self {
            rim_positive: true,
            quotient_steps: vec![1, 2, 4],
            holder_exponents: vec![lit(0.5), lit(0.75)],
            holder_margin: lit(0.5),
            min_separation: 2,
            growth_radii: Vec::new(),
            free_boundary_level: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport<T> {
    pub sup_u: T,
    /// `max |u_y|` over the seminorm region of the flat face.
    pub sup_uy: T,
    /// `min u_y` over the whole flat face.
    pub min_uy: T,
    pub max_uy: T,
    pub c0: T,
    pub delta0: T,
    pub neg_part_sup: T,
    /// `(exponent, seminorm)` pairs.
    pub holder_seminorms: Vec<(T, T)>,
    pub growth: Option<GrowthFit<T>>,
}

impl<T: Real> EstimateReport<T> {
    pub fn holder(&self, exponent: T) -> Option<T> {
        self.holder_seminorms
            .iter()
            .find(|(e, _)| (*e - exponent).abs() < lit(1e-12))
            .map(|(_, v)| *v)
    }

    pub fn is_finite(&self) -> bool {
        let scalars = [self.sup_u, self.sup_uy, self.min_uy, self.max_uy, self.c0, self.delta0, self.neg_part_sup];
        scalars.iter().all(|v| v.is_finite()) && self.holder_seminorms.iter().all(|(_, v)| v.is_finite())
    }
}

/// Measures every per-solution quantity of the report.
pub fn estimate_report<T: Real>(result: &SolveResult<T>, options: &EstimateOptions<T>) -> Result<EstimateReport<T>> {
    let grid = result.grid();
    let h = grid.h();
    let deltas: Vec<T> = options.quotient_steps.iter().map(|&k| h * lit(k as f64)).collect();
    let semi = semiconvexity_constant(result, &deltas, options.rim_positive)?;
    let delta0 = if options.rim_positive {
        annulus_width(&result.u)
    } else {
        grid.spec().tangential_extent
    };
    let region = FlatRegion::Inner {
        margin: options.holder_margin,
    };
    let trace = &result.uy_trace;
    let mut sup_uy = T::zero();
    let mut min_uy = T::infinity();
    let mut max_uy = T::neg_infinity();
    for (x, v) in trace.flat_samples() {
        min_uy = min_uy.min(v);
        max_uy = max_uy.max(v);
        if region.contains(grid, x) {
            sup_uy = sup_uy.max(v.abs());
        }
    }
    let min_sep = h * lit(options.min_separation.max(2) as f64);
    let holder_seminorms = options
        .holder_exponents
        .iter()
        .map(|&e| holder_seminorm(trace, e, region, min_sep).map(|v| (e, v)))
        .collect::<Result<Vec<_>>>()?;
    let growth = if options.growth_radii.is_empty() {
        None
    } else {
        let points = free_boundary(result, options.free_boundary_level);
        let center = nearest_point(grid, &points, [T::zero(), T::zero()]).unwrap_or([T::zero(), T::zero()]);
        Some(growth_fit(result, center, &options.growth_radii)?)
    };
    Ok(EstimateReport {
        sup_u: result.u.max_abs(),
        sup_uy,
        min_uy,
        max_uy,
        c0: semi.c0,
        delta0,
        neg_part_sup: result.negative_part_sup(),
        holder_seminorms,
        growth,
    })
}
