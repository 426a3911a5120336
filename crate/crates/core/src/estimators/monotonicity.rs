//! The weighted energy `phi(r)` of the corrected velocity, the truncation
//! used against the half-sphere eigenvalue and the convex-hull test.

use crate::error::{Error, Result};
use crate::grid::{cell_gradient_norm_sq, weighted_ball_integral, Field, FlatPoint, Trace};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityTrace<T> {
    pub center: FlatPoint<T>,
    pub radii: Vec<T>,
    pub phi_values: Vec<T>,
    /// `max (phi(r_i) - phi(r_{i+1}))_+` over consecutive radii.
    pub monotone_defect: T,
}

impl<T: Real> MonotonicityTrace<T> {
    /// Defect divided by the value at the largest radius.
    pub fn relative_defect(&self) -> T {
        match self.phi_values.last() {
            Some(&last) if last > T::zero() => self.monotone_defect / last,
            _ => self.monotone_defect,
        }
    }
}

/// `phi(r) = r^{-1} int_{B_r^+(center)} |grad w|^2 / |X - center|^{d-2}`
/// for each radius, with the cell-centred gradient of `w`.
pub fn phi_trace<T: Real>(w: &Field<T>, center: FlatPoint<T>, radii: &[T]) -> Result<MonotonicityTrace<T>> {
    if radii.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidConfig("radii must be strictly increasing".into()));
    }
    let grid = w.grid();
    let cells = cell_gradient_norm_sq(w);
    let exponent = lit::<T>(grid.dimension() as f64 - 2.0);
    let phi_values = radii
        .iter()
        .map(|&r| weighted_ball_integral(&cells, center, r, exponent).map(|v| v / r))
        .collect::<Result<Vec<_>>>()?;
    let monotone_defect = phi_values
        .windows(2)
        .fold(T::zero(), |m, p| m.max(p[0] - p[1]));
    Ok(MonotonicityTrace {
        center,
        radii: radii.to_vec(),
        phi_values,
        monotone_defect,
    })
}

/// `delta_alpha = (alpha / (alpha + 1) - alpha / 2) / 4` for `alpha in (0, 1/2]`.
pub fn delta_alpha<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > T::zero() && alpha <= lit(0.5)) {
        return Err(Error::InvalidConfig(format!("alpha {alpha} outside (0, 1/2]")));
    }
    Ok((alpha / (alpha + T::one()) - alpha / lit(2.0)) / lit(4.0))
}

/// Which threshold the truncation compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationThreshold {
    /// `w < s`, as printed.
    #[default]
    Verbatim,
    /// `w < -s`, the sublevel set the surrounding argument works with.
    Sublevel,
}

/// `w_t = w + s` where `w` is below the threshold and `0` elsewhere, with
/// `s = r^{alpha + delta_alpha}`.
pub fn truncate<T: Real>(values: &[T], r: T, alpha: T, threshold: TruncationThreshold) -> Result<Vec<T>> {
    let s = truncation_level(r, alpha)?;
    let cut = match threshold {
        TruncationThreshold::Verbatim => s,
        TruncationThreshold::Sublevel => -s,
    };
    Ok(values
        .iter()
        .map(|&w| if w < cut { w + s } else { T::zero() })
        .collect())
}

/// [`truncate`] applied to a nodal field.
pub fn truncate_field<T: Real>(w: &Field<T>, r: T, alpha: T, threshold: TruncationThreshold) -> Result<Field<T>> {
    Field::new(w.grid().clone(), truncate(w.values(), r, alpha, threshold)?)
}

/// `r^{alpha + delta_alpha}`.
pub fn truncation_level<T: Real>(r: T, alpha: T) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::InvalidConfig(format!("radius {r} must be positive")));
    }
    Ok(r.powf(alpha + delta_alpha(alpha)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullOutcome<T> {
    /// The origin is outside the convex hull of the sublevel set.
    pub passed: bool,
    pub threshold: T,
    pub sublevel_points: usize,
}

/// Whether the convex hull of `{x in B'_r(center) : u_y < -r^{alpha + delta_alpha}}`
/// avoids `center`.
pub fn hull_check<T: Real>(trace: &Trace<T>, center: FlatPoint<T>, r: T, alpha: T) -> Result<HullOutcome<T>> {
    let s = truncation_level(r, alpha)?;
    let grid = trace.grid();
    let slack = grid.h() * lit(1e-9);
    let points: Vec<[f64; 2]> = trace
        .flat_samples()
        .filter(|(x, v)| *v < -s && grid.flat_distance(*x, center) <= r + slack)
        .map(|(x, _)| {
            [
                (x[0] - center[0]).to_f64().unwrap_or(0.0),
                (x[1] - center[1]).to_f64().unwrap_or(0.0),
            ]
        })
        .collect();
    let contains = if grid.tangential_axes() == 1 {
        let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        !points.is_empty() && lo <= 0.0 && hi >= 0.0
    } else {
        hull_contains_origin(&points)
    };
    Ok(HullOutcome {
        passed: !contains,
        threshold: s,
        sublevel_points: points.len(),
    })
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull by the monotone chain; the origin on the hull boundary
/// counts as contained.
fn hull_contains_origin(points: &[[f64; 2]]) -> bool {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    match pts.len() {
        0 => return false,
        1 => return pts[0] == [0.0, 0.0],
        _ => {}
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let o = [0.0, 0.0];
    if hull.len() < 3 {
        // Collinear set: the origin must lie on the segment.
        let (a, b) = (pts[0], pts[pts.len() - 1]);
        let on_line = cross(a, b, o).abs() <= 1e-12 * (1.0 + (b[0] - a[0]).abs() + (b[1] - a[1]).abs());
        let within = (o[0] - a[0]) * (o[0] - b[0]) <= 0.0 && (o[1] - a[1]) * (o[1] - b[1]) <= 0.0;
        return on_line && within;
    }
    // Counter-clockwise hull: inside or on the boundary iff no edge has the
    // origin strictly to its right.
    (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], o) >= 0.0)
}
