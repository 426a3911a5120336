//! Second differences of solutions: tangential semiconvexity, semiconcavity
//! in `y` and the derived one-sided bounds on `u_y`.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Trace};
use crate::scalar::{lit, Real};
use crate::solver::SolveResult;

/// Tangential lattice direction of an incremental quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentialDirection {
    /// Unit vector along tangential axis 0 or 1.
    Axis(usize),
    /// `(e_0 + e_1) / sqrt(2)` or, with `false`, `(e_0 - e_1) / sqrt(2)` (d = 3 only).
    Diagonal(bool),
}

impl TangentialDirection {
    /// Every lattice direction available in dimension `d`.
    pub fn all(dimension: usize) -> Vec<Self> {
        if dimension == 3 {
            vec![Self::Axis(0), Self::Axis(1), Self::Diagonal(true), Self::Diagonal(false)]
        } else {
            vec![Self::Axis(0)]
        }
    }

    fn lattice_step(&self) -> ([isize; 2], f64) {
        match *self {
            Self::Axis(0) => ([1, 0], 1.0),
            Self::Axis(_) => ([0, 1], 1.0),
            Self::Diagonal(true) => ([1, 1], std::f64::consts::SQRT_2),
            Self::Diagonal(false) => ([1, -1], std::f64::consts::SQRT_2),
        }
    }
}

/// Incremental quotient with a mask of nodes where it is defined.
#[derive(Debug, Clone)]
pub struct QuotientField<T> {
    pub values: Field<T>,
    pub defined: Vec<bool>,
}

impl<T: Real> QuotientField<T> {
    pub fn defined_values(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.defined
            .iter()
            .enumerate()
            .filter(|(_, d)| **d)
            .map(|(i, _)| (i, self.values.at(i)))
    }
}

/// `(u(x + delta tau) + u(x - delta tau) - 2 u(x)) / delta^2`.
///
/// `delta` must be a positive multiple of the lattice step along `tau`
/// (`h`, or `h sqrt 2` on diagonals). Undefined nodes hold zero.
pub fn incremental_quotient<T: Real>(u: &Field<T>, tau: TangentialDirection, delta: T) -> Result<QuotientField<T>> {
    let grid = u.grid().clone();
    let (step, unit) = tau.lattice_step();
    let m = grid.tangential_axes();
    if step[1] != 0 && m < 2 {
        return Err(Error::InvalidConfig(format!("direction {tau:?} needs two tangential axes")));
    }
    let lattice = grid.h() * lit(unit);
    let ratio = delta / lattice;
    let k = ratio.round();
    if ratio < T::one() - lit(1e-9) || (ratio - k).abs() > lit(1e-6) {
        return Err(Error::InvalidConfig(format!(
            "delta {delta} is not a positive multiple of the lattice step {lattice}"
        )));
    }
    let k = k.to_f64().unwrap_or(1.0) as isize;
    let nt = grid.nt() as isize;
    let offset = |c: [usize; 3], s: isize| -> Option<usize> {
        let a = c[0] as isize + s * k * step[0];
        let b = c[1] as isize + s * k * step[1];
        (a >= 0 && a < nt && b >= 0 && (b < nt || m < 2)).then(|| grid.index([a as usize, b as usize], c[2]))
    };
    let inv = T::one() / (delta * delta);
    let v = u.values();
    let mut values = vec![T::zero(); grid.len()];
    let mut defined = vec![false; grid.len()];
    for i in 0..grid.len() {
        let c = grid.coords(i);
        if let (Some(p), Some(q)) = (offset(c, 1), offset(c, -1)) {
            values[i] = (v[p] + v[q] - lit::<T>(2.0) * v[i]) * inv;
            defined[i] = true;
        }
    }
    Ok(QuotientField {
        values: Field::new(grid, values)?,
        defined,
    })
}

/// Nodes at lateral distance at least `margin` from the lateral faces and at
/// height at most `H - margin`.
pub fn inner_region<T: Real>(grid: &Grid<T>, margin: T) -> Vec<bool> {
    let top = grid.spec().normal_extent - margin;
    let slack = grid.h() * lit(1e-9);
    (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            grid.lateral_distance(p.x) + slack >= margin && p.y <= top + slack
        })
        .collect()
}

/// Width of the flat annulus next to the lateral boundary on which
/// `u(., 0) > 0`: the distance to the closest non-positive flat node, less
/// one spacing. Equals `L` when no flat node is non-positive.
pub fn annulus_width<T: Real>(u: &Field<T>) -> T {
    let grid = u.grid();
    let dmin = grid
        .flat_nodes()
        .filter(|&it| u.at(it) <= T::zero())
        .map(|it| grid.lateral_distance(grid.flat_point(it)))
        .fold(T::infinity(), T::min);
    if dmin.is_infinite() {
        grid.spec().tangential_extent
    } else {
        (dmin - grid.h()).max(T::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Semiconvexity<T> {
    /// `max(0, -min u_tt)` over the inner region.
    pub c0: T,
    /// Lateral margin of the inner region.
    pub margin: T,
    /// Smallest quotient found (may be positive).
    pub min_quotient: T,
}

/// `C0 = max(0, -min u_tt)` over every lattice direction and `delta`, on
/// nodes at distance `margin` from the lateral faces.
pub fn semiconvexity_in<T: Real>(u: &Field<T>, deltas: &[T], margin: T) -> Result<Semiconvexity<T>> {
    let grid = u.grid();
    let region = inner_region(grid, margin);
    let mut min_q = T::infinity();
    for tau in TangentialDirection::all(grid.dimension()) {
        for &delta in deltas {
            let (_, unit) = tau.lattice_step();
            let d = if unit > 1.0 { delta * lit(unit) } else { delta };
            let q = incremental_quotient(u, tau, d)?;
            for (i, v) in q.defined_values() {
                if region[i] {
                    min_q = min_q.min(v);
                }
            }
        }
    }
    if min_q.is_infinite() {
        return Err(Error::InsufficientData("inner region holds no quotient".into()));
    }
    Ok(Semiconvexity {
        c0: (-min_q).max(T::zero()),
        margin,
        min_quotient: min_q,
    })
}

/// Margin used by [`semiconvexity_constant`]: the annulus width when the
/// data is positive on the rim, `0.2 L` otherwise or when the annulus is empty.
pub fn inner_margin<T: Real>(result: &SolveResult<T>, rim_positive: bool) -> T {
    let l = result.grid().spec().tangential_extent;
    let fallback = l * lit(0.2);
    if !rim_positive {
        return fallback;
    }
    let d0 = annulus_width(&result.u);
    if d0 > T::zero() {
        d0.min(l * lit(0.5))
    } else {
        fallback
    }
}

pub fn semiconvexity_constant<T: Real>(result: &SolveResult<T>, deltas: &[T], rim_positive: bool) -> Result<Semiconvexity<T>> {
    semiconvexity_in(&result.u, deltas, inner_margin(result, rim_positive))
}

/// Centred differences in `y` inside, `trace` (or the one-sided stencil) on
/// `y = 0` and a second-order backward difference on the top layer.
pub fn uy_field<T: Real>(u: &Field<T>, trace: Option<&Trace<T>>) -> Result<Field<T>> {
    let grid = u.grid().clone();
    let p = grid.plane();
    let ny = grid.ny();
    if ny < 3 {
        return Err(Error::InsufficientData("u_y needs three y-layers".into()));
    }
    let bottom = match trace {
        Some(t) => {
            if !t.grid().same_as(&grid) {
                return Err(Error::GridMismatch);
            }
            t.clone()
        }
        None => crate::grid::normal_trace(u)?,
    };
    let v = u.values();
    let h = grid.h();
    let two_h = lit::<T>(2.0) * h;
    let values = (0..grid.len())
        .map(|i| {
            let iy = i / p;
            if iy == 0 {
                bottom.at(i)
            } else if iy + 1 == ny {
                (lit::<T>(3.0) * v[i] - lit::<T>(4.0) * v[i - p] + v[i - 2 * p]) / two_h
            } else {
                (v[i + p] - v[i - p]) / two_h
            }
        })
        .collect();
    Field::new(grid, values)
}

/// `w = u_y - m C0 y` with `m = d - 1`; on `y = 0` it is the solver's trace.
pub fn corrected_velocity<T: Real>(result: &SolveResult<T>, c0: T) -> Result<Field<T>> {
    let uy = uy_field(&result.u, Some(&result.uy_trace))?;
    Ok(correct(&uy, c0))
}

/// `uy - m C0 y` for an arbitrary `u_y` field.
pub fn correct<T: Real>(uy: &Field<T>, c0: T) -> Field<T> {
    let grid = uy.grid().clone();
    let m = lit::<T>(grid.tangential_axes() as f64);
    let values = (0..grid.len())
        .map(|i| uy.at(i) - m * c0 * grid.point(i).y)
        .collect();
    Field::from_raw(grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavityCheck<T> {
    pub passed: bool,
    /// `bound - observed`; negative when the check fails.
    pub margin: T,
    pub max_uyy: T,
    /// One-sided bound `u_y(x,t) - u_y(x,s) <= m C0 (t - s)` on node pairs.
    pub companion_passed: bool,
    pub companion_margin: T,
}

/// `max u_yy <= m C0 + tol` on interior nodes of the inner region, and the
/// implied bound on increments of `u_y` along each column.
pub fn semiconcavity_check<T: Real>(u: &Field<T>, c0: T, margin: T, tol: T) -> Result<ConcavityCheck<T>> {
    let grid = u.grid();
    let region = inner_region(grid, margin);
    let p = grid.plane();
    let ny = grid.ny();
    let h2 = grid.h() * grid.h();
    let v = u.values();
    let m = lit::<T>(grid.tangential_axes() as f64);
    let bound = m * c0;
    let mut max_uyy = T::neg_infinity();
    for i in p..(ny - 1) * p {
        if region[i] {
            let uyy = (v[i + p] + v[i - p] - lit::<T>(2.0) * v[i]) / h2;
            max_uyy = max_uyy.max(uyy);
        }
    }
    if max_uyy.is_infinite() {
        return Err(Error::InsufficientData("inner region holds no interior node".into()));
    }
    let uy = uy_field(u, None)?;
    let mut worst = T::neg_infinity();
    for it in 0..p {
        if !region[it] {
            continue;
        }
        // Pairs of interior layers at dyadic separations.
        let mut gap = 1;
        while gap + 1 < ny - 1 {
            for s in 1..ny - 1 - gap {
                let i = s * p + it;
                let j = (s + gap) * p + it;
                if !region[j] {
                    continue;
                }
                let dt = grid.normal_coord(s + gap) - grid.normal_coord(s);
                worst = worst.max(uy.at(j) - uy.at(i) - bound * dt);
            }
            gap *= 2;
        }
    }
    let companion_margin = if worst.is_infinite() { T::zero() } else { tol - worst };
    let margin_val = bound + tol - max_uyy;
    Ok(ConcavityCheck {
        passed: margin_val >= T::zero(),
        margin: margin_val,
        max_uyy,
        companion_passed: companion_margin >= T::zero(),
        companion_margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound<T> {
    pub passed: bool,
    /// `min (C t^2 + tol - (u(x', t) - u(x', 0)))`.
    pub margin: T,
}

/// `u(x', t) - u(x', 0) <= C t^2` at every node of the inner region.
pub fn corollary1_c_check<T: Real>(u: &Field<T>, c: T, margin: T, tol: T) -> GrowthBound<T> {
    let grid = u.grid();
    let region = inner_region(grid, margin);
    let p = grid.plane();
    let mut worst = T::infinity();
    for i in 0..grid.len() {
        if !region[i] {
            continue;
        }
        let t = grid.point(i).y;
        let slack = c * t * t + tol - (u.at(i) - u.at(i % p));
        worst = worst.min(slack);
    }
    let worst = if worst.is_infinite() { tol } else { worst };
    GrowthBound {
        passed: worst >= T::zero(),
        margin: worst,
    }
}
