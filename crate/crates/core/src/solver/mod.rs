//! Discrete solutions of the penalized problem, its zero-penalty limit and a
//! brute-force descent oracle.
//!
//! All three minimise the same discrete energy
//!
//! ```text
//! E(u) = h^d/2 * sum_cells mean_edges |D u|^2 + h^(d-1) * sum_bottom tau_i * P(u_i)
//! ```
//!
//! with `P` the antiderivative of `beta` and `tau_i` the trapezoid weight
//! of a bottom node. Residuals are reported in flux units, i.e. the energy
//! gradient divided by `h^(d-1)`; on the flat face that is exactly
//! `|beta(u) - u_y|` with `u_y` the discrete flux trace.

mod stencil;

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{cell_edge_energy_density, normal_trace, CellField, Field, Grid, GridSpec, NodeClass, Point, Trace};
use crate::linalg::conjugate_gradient;
use crate::penalization::Penalization;
use crate::scalar::{lit, to_f64, Real};

pub(crate) use stencil::Stencil;

/// Boundary data `g` on the data nodes. Every preset is a function on the
/// whole box, which also serves as the initial guess of the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirichletData<T> {
    Constant(T),
    /// `amplitude * rho^{3/2} cos(3 theta / 2)` in polar coordinates of the
    /// `(x1, y)` plane; constant in `x2` when `d = 3`.
    SignoriniExact { amplitude: T },
    /// `amplitude * (2 exp(-(y/width)^2) - 1)`: positive where the lateral
    /// faces meet the flat face, negative on the top face.
    PositiveBump { amplitude: T, width: T },
}

impl<T: Real> DirichletData<T> {
    pub fn eval(&self, p: Point<T>) -> T {
        match *self {
            Self::Constant(c) => c,
            Self::SignoriniExact { amplitude } => amplitude * signorini_profile(p.x[0], p.y),
            Self::PositiveBump { amplitude, width } => {
                let s = p.y / width;
                amplitude * (lit::<T>(2.0) * (-s * s).exp() - T::one())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Constant(c) => c.is_finite(),
            Self::SignoriniExact { amplitude } => amplitude.is_finite() && amplitude > T::zero(),
            Self::PositiveBump { amplitude, width } => {
                amplitude.is_finite() && amplitude > T::zero() && width.is_finite() && width > T::zero()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid boundary data {self:?}")))
        }
    }

    /// Whether the data is strictly positive where the lateral faces meet the
    /// flat face. The exact Signorini profile vanishes on the contact side.
    pub fn positive_on_rim(&self) -> bool {
        match *self {
            Self::Constant(c) => c > T::zero(),
            Self::SignoriniExact { .. } => false,
            Self::PositiveBump { .. } => true,
        }
    }

    pub fn field(&self, grid: &Arc<Grid<T>>) -> Field<T> {
        Field::from_fn(grid.clone(), |p| self.eval(p))
    }
}

/// `rho^{3/2} cos(3 theta / 2)` with `theta in [0, pi]` measured from the
/// positive `x` axis; the limiting solution with contact set `{x <= 0}`.
pub fn signorini_profile<T: Real>(x: T, y: T) -> T {
    let rho = (x * x + y * y).sqrt();
    if rho == T::zero() {
        return T::zero();
    }
    let theta = y.atan2(x);
    rho * rho.sqrt() * (lit::<T>(1.5) * theta).cos()
}

/// Normal derivative of [`signorini_profile`]: `-(3/2) Im z^{1/2}`.
pub fn signorini_profile_dy<T: Real>(x: T, y: T) -> T {
    let rho = (x * x + y * y).sqrt();
    if rho == T::zero() {
        return T::zero();
    }
    let theta = y.atan2(x);
    -lit::<T>(1.5) * rho.sqrt() * (theta / lit(2.0)).sin()
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub u: Field<T>,
    /// Discrete normal derivative on the `y = 0` layer. At free nodes it is
    /// the flux implied by the boundary row; at rim data nodes the one-sided
    /// three-point difference.
    pub uy_trace: Trace<T>,
    /// Per layer-0 node: engaged penalty (`u < 0`), or contact for the limit problem.
    pub active_set: Vec<bool>,
    /// Outer iterations (active-set updates, or sweeps for the limit problem).
    pub iterations: usize,
    /// Total inner conjugate-gradient iterations.
    pub linear_iterations: usize,
    pub residual: T,
    pub energy: T,
    /// `None` for the limit problem.
    pub epsilon: Option<T>,
}

impl<T: Real> SolveResult<T> {
    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.u.grid()
    }

    /// Largest violation of the complementarity conditions at flat nodes:
    /// `|u_y|` where `u >= 0` and `|u_y - u / eps|` where `u < 0`.
    pub fn complementarity_defect(&self, p: &Penalization<T>) -> T {
        let grid = self.grid();
        grid.flat_nodes()
            .map(|it| (self.u.at(it), self.uy_trace.at(it)))
            .fold(T::zero(), |m, (u, uy)| m.max((uy - p.beta(u)).abs()))
    }

    /// `sup (u)_-` over the flat face.
    pub fn negative_part_sup(&self) -> T {
        self.grid()
            .flat_nodes()
            .fold(T::zero(), |m, it| m.max(-self.u.at(it)))
    }

    pub fn active_count(&self) -> usize {
        self.active_set.iter().filter(|a| **a).count()
    }
}

/// Discrete energy: bulk Dirichlet energy plus the trapezoid-rule boundary
/// penalty `(1/2eps) int (u)_-^2`.
pub fn energy<T: Real>(u: &Field<T>, p: &Penalization<T>) -> T {
    let grid = u.grid();
    let v = u.values();
    let h = grid.h();
    let cells = CellField::<T>::len_for(grid);
    let half_vol = h.powi(grid.dimension() as i32) / lit(2.0);
    let bulk = (0..cells)
        .map(|c| cell_edge_energy_density(grid, v, c))
        .fold(T::zero(), |a, b| a + b)
        * half_vol;
    let stencil = Stencil::new(grid);
    let area = h.powi(grid.tangential_axes() as i32);
    let penalty = (0..grid.plane())
        .map(|it| stencil.tangential_fraction(grid.coords(it)) * p.potential(v[it]))
        .fold(T::zero(), |a, b| a + b)
        * area;
    bulk + penalty
}

/// Energy gradient divided by `h^(d-2)`, zero at data nodes.
fn scaled_gradient<T: Real>(stencil: &Stencil<T>, grid: &Grid<T>, u: &[T], p: &Penalization<T>, out: &mut [T]) {
    stencil.bulk(u, out);
    let h = grid.h();
    for it in 0..grid.plane() {
        if grid.is_free(it) {
            let tau = stencil.tangential_fraction(grid.coords(it));
            out[it] = out[it] + h * tau * p.beta(u[it]);
        }
    }
}

/// Max flux-unit residual of the penalized system at free nodes, with the
/// data values read from `u` itself.
pub fn penalized_residual<T: Real>(u: &Field<T>, p: &Penalization<T>) -> T {
    let grid = u.grid();
    let stencil = Stencil::new(grid);
    let mut g = vec![T::zero(); grid.len()];
    scaled_gradient(&stencil, grid, u.values(), p, &mut g);
    flux_max(&stencil, grid, &g)
}

fn flux_max<T: Real>(stencil: &Stencil<T>, grid: &Grid<T>, g: &[T]) -> T {
    let h = grid.h();
    (0..grid.len())
        .filter(|&i| grid.is_free(i))
        .map(|i| g[i].abs() / (h * stencil.tangential_fraction(grid.coords(i))))
        .fold(T::zero(), T::max)
}

/// Discrete normal derivative on layer 0 (see [`SolveResult::uy_trace`]).
fn flux_trace<T: Real>(stencil: &Stencil<T>, u: &Field<T>) -> Result<Trace<T>> {
    let grid = u.grid();
    let onesided = normal_trace(u)?;
    let h = grid.h();
    let v = u.values();
    let values = (0..grid.plane())
        .map(|it| {
            if grid.is_free(it) {
                let ui = v[it];
                let mut acc = T::zero();
                stencil.for_each_neighbor(it, |j, w| acc = acc + w * (ui - v[j]));
                -acc / (h * stencil.tangential_fraction(grid.coords(it)))
            } else {
                onesided.at(it)
            }
        })
        .collect();
    Trace::new(grid.clone(), values)
}

fn pinned_start<T: Real>(grid: &Arc<Grid<T>>, g: &DirichletData<T>, initial: Option<&Field<T>>) -> Result<Vec<T>> {
    let mut u = match initial {
        Some(f) => {
            if !f.grid().same_as(grid) {
                return Err(Error::GridMismatch);
            }
            f.values().to_vec()
        }
        None => g.field(grid).into_values(),
    };
    for (i, ui) in u.iter_mut().enumerate() {
        if !grid.is_free(i) {
            *ui = g.eval(grid.point(i));
        }
    }
    Ok(u)
}

fn set_hash(mask: &[bool]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    mask.hash(&mut h);
    h.finish()
}

/// Active-set (semismooth Newton) solution of the penalized system.
///
/// `max_iterations` bounds the number of active-set updates.
pub fn solve_penalized<T: Real>(
    grid: &Arc<Grid<T>>,
    p: &Penalization<T>,
    g: &DirichletData<T>,
    tol: T,
    max_iterations: usize,
) -> Result<SolveResult<T>> {
    solve_penalized_from(grid, p, g, tol, max_iterations, None)
}

/// [`solve_penalized`] with an explicit initial guess (data nodes are reset).
pub fn solve_penalized_from<T: Real>(
    grid: &Arc<Grid<T>>,
    p: &Penalization<T>,
    g: &DirichletData<T>,
    tol: T,
    max_iterations: usize,
    initial: Option<&Field<T>>,
) -> Result<SolveResult<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    g.validate()?;
    let n = grid.len();
    let h = grid.h();
    let plane = grid.plane();
    let stencil = Stencil::new(grid);
    let mut u = pinned_start(grid, g, initial)?;

    // Data part of the right-hand side: b = -bulk(g restricted to data nodes).
    let mut gext = vec![T::zero(); n];
    for i in 0..n {
        if !grid.is_free(i) {
            gext[i] = u[i];
        }
    }
    let mut b_data = vec![T::zero(); n];
    stencil.bulk(&gext, &mut b_data);
    for v in b_data.iter_mut() {
        *v = -*v;
    }

    let taus: Vec<T> = (0..plane).map(|it| stencil.tangential_fraction(grid.coords(it))).collect();
    let min_tau = taus.iter().fold(T::one(), |m, &t| m.min(t));
    let inner_atol = tol * h * min_tau * lit(0.1);
    let inner_cap = 4000usize.max(60 * grid.nt().max(grid.ny()));

    let mut x: Vec<T> = (0..n).map(|i| if grid.is_free(i) { u[i] } else { T::zero() }).collect();
    let mut diag = vec![T::zero(); plane];
    let mut rhs = b_data.clone();
    let mut grad = vec![T::zero(); n];
    let mut seen: HashMap<u64, T> = HashMap::new();
    let mut linear_iterations = 0usize;
    let mut last_residual = T::infinity();

    let active_of = |u: &[T]| -> Vec<bool> {
        (0..plane)
            .map(|it| grid.is_free(it) && p.beta_prime(u[it]) > T::zero())
            .collect::<Vec<_>>()
    };
    let mut active = active_of(&u);

    for outer in 1..=max_iterations {
        // Linearise beta about the current iterate on the flat face.
        rhs.copy_from_slice(&b_data);
        for it in 0..plane {
            if grid.is_free(it) {
                let bp = p.beta_prime(u[it]);
                diag[it] = h * taus[it] * bp;
                rhs[it] = rhs[it] - h * taus[it] * (p.beta(u[it]) - bp * u[it]);
            }
        }
        let outcome = conjugate_gradient(
            |v, out| {
                stencil.bulk(v, out);
                for it in 0..plane {
                    out[it] = out[it] + diag[it] * v[it];
                }
            },
            &rhs,
            &mut x,
            inner_atol,
            inner_cap,
        );
        linear_iterations += outcome.iterations;
        for i in 0..n {
            if grid.is_free(i) {
                u[i] = x[i];
            }
        }
        scaled_gradient(&stencil, grid, &u, p, &mut grad);
        let residual = flux_max(&stencil, grid, &grad);
        last_residual = residual;
        let next = active_of(&u);
        if next == active && residual <= tol {
            return finish(grid, &stencil, u, next, outer, linear_iterations, residual, Some(*p));
        }
        let key = set_hash(&next);
        if next != active {
            if let Some(&prev) = seen.get(&key) {
                if residual >= prev {
                    // The set repeats without progress: descend on the energy.
                    descend(&stencil, grid, p, &mut u, 500);
                    for i in 0..n {
                        if grid.is_free(i) {
                            x[i] = u[i];
                        }
                    }
                }
            }
        }
        seen.entry(key)
            .and_modify(|r| *r = (*r).min(residual))
            .or_insert(residual);
        active = active_of(&u);
    }
    Err(Error::NonConverged {
        iterations: max_iterations,
        residual: to_f64(last_residual),
    })
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Real>(
    grid: &Arc<Grid<T>>,
    stencil: &Stencil<T>,
    u: Vec<T>,
    active: Vec<bool>,
    iterations: usize,
    linear_iterations: usize,
    residual: T,
    p: Option<Penalization<T>>,
) -> Result<SolveResult<T>> {
    let field = Field::new(grid.clone(), u)?;
    let uy_trace = flux_trace(stencil, &field)?;
    let energy = match &p {
        Some(p) => energy(&field, p),
        None => energy(&field, &Penalization::canonical(T::one())?),
    };
    Ok(SolveResult {
        u: field,
        uy_trace,
        active_set: active,
        iterations,
        linear_iterations,
        residual,
        energy,
        epsilon: p.map(|p| p.epsilon()),
    })
}

/// Largest gradient step that is safe for every grid (Gershgorin bound on
/// the scaled Hessian, halved).
pub fn oracle_step_bound<T: Real>(grid: &Grid<T>, p: &Penalization<T>) -> T {
    let stencil = Stencil::new(grid);
    let mut worst = T::zero();
    for i in 0..grid.len() {
        if !grid.is_free(i) {
            continue;
        }
        let mut d = stencil.weight_sum(i);
        if grid.coords(i)[2] == 0 {
            d = d + grid.h() * stencil.tangential_fraction(grid.coords(i)) * p.lipschitz();
        }
        worst = worst.max(d);
    }
    T::one() / (lit::<T>(2.0) * worst)
}

fn descend<T: Real>(stencil: &Stencil<T>, grid: &Grid<T>, p: &Penalization<T>, u: &mut [T], steps: usize) {
    let step = oracle_step_bound(grid, p);
    let mut grad = vec![T::zero(); u.len()];
    for _ in 0..steps {
        scaled_gradient(stencil, grid, u, p, &mut grad);
        for (ui, gi) in u.iter_mut().zip(&grad) {
            *ui = *ui - step * *gi;
        }
    }
}

/// Plain gradient descent on the discrete energy with data nodes pinned,
/// starting from zero at free nodes. `step_size` multiplies the energy
/// gradient divided by `h^(d-2)`; it must stay below
/// [`oracle_step_bound`]-like stability limits.
pub fn oracle_minimize<T: Real>(
    grid: &Arc<Grid<T>>,
    p: &Penalization<T>,
    g: &DirichletData<T>,
    steps: usize,
    step_size: T,
) -> Field<T> {
    oracle_trajectory(grid, p, g, steps, step_size, |_, _| {})
}

/// [`oracle_minimize`] that reports every iterate to `observe(step, u)`.
pub fn oracle_trajectory<T: Real>(
    grid: &Arc<Grid<T>>,
    p: &Penalization<T>,
    g: &DirichletData<T>,
    steps: usize,
    step_size: T,
    mut observe: impl FnMut(usize, &[T]),
) -> Field<T> {
    let stencil = Stencil::new(grid);
    let mut u: Vec<T> = (0..grid.len())
        .map(|i| if grid.is_free(i) { T::zero() } else { g.eval(grid.point(i)) })
        .collect();
    let mut grad = vec![T::zero(); u.len()];
    for k in 0..steps {
        scaled_gradient(&stencil, grid, &u, p, &mut grad);
        for (ui, gi) in u.iter_mut().zip(&grad) {
            *ui = *ui - step_size * *gi;
        }
        observe(k + 1, &u);
    }
    Field::from_raw(grid.clone(), u)
}

/// Over-relaxation factor for the projected sweeps, from the Jacobi spectral
/// radius of the model problem on the box.
fn sor_factor<T: Real>(grid: &Grid<T>) -> T {
    let spec = grid.spec();
    let h = to_f64(grid.h());
    let pi = std::f64::consts::PI;
    let mut rho = (pi * h / (2.0 * to_f64(spec.normal_extent))).cos();
    let lateral = match grid.lateral() {
        crate::grid::LateralBoundary::Dirichlet => (pi * h / (2.0 * to_f64(spec.tangential_extent))).cos(),
        crate::grid::LateralBoundary::Reflecting => 1.0,
    };
    let m = grid.tangential_axes() as f64;
    rho = (rho + m * lateral) / (m + 1.0);
    let omega = 2.0 / (1.0 + (1.0 - rho * rho).max(0.0).sqrt());
    lit(omega.clamp(1.0, 1.99))
}

/// Projected successive over-relaxation for the zero-penalty limit:
/// harmonic inside, `u >= 0`, `u_y <= 0`, `u u_y = 0` on the flat face.
///
/// `max_iterations` bounds the number of sweeps. The relaxation factor is
/// chosen from the grid; factor one gives projected Gauss-Seidel.
pub fn solve_signorini<T: Real>(
    grid: &Arc<Grid<T>>,
    g: &DirichletData<T>,
    tol: T,
    max_iterations: usize,
) -> Result<SolveResult<T>> {
    solve_signorini_with(grid, g, tol, max_iterations, None)
}

pub fn solve_signorini_with<T: Real>(
    grid: &Arc<Grid<T>>,
    g: &DirichletData<T>,
    tol: T,
    max_iterations: usize,
    relaxation: Option<T>,
) -> Result<SolveResult<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    g.validate()?;
    let stencil = Stencil::new(grid);
    let omega = relaxation.unwrap_or_else(|| sor_factor(grid));
    let mut u = pinned_start(grid, g, None)?;
    let free: Vec<usize> = (0..grid.len()).filter(|&i| grid.is_free(i)).collect();
    let inv_diag: Vec<T> = free.iter().map(|&i| stencil.weight_sum(i).recip()).collect();
    let bottom: Vec<bool> = free.iter().map(|&i| grid.coords(i)[2] == 0).collect();
    for v in free.iter().filter(|&&i| grid.coords(i)[2] == 0) {
        u[*v] = u[*v].max(T::zero());
    }
    let mut residual = T::infinity();
    for sweep in 1..=max_iterations {
        for (k, &i) in free.iter().enumerate() {
            let mut s = T::zero();
            stencil.for_each_neighbor(i, |j, w| s = s + w * u[j]);
            let gs = s * inv_diag[k];
            let mut next = u[i] + omega * (gs - u[i]);
            if bottom[k] {
                next = next.max(T::zero());
            }
            u[i] = next;
        }
        if sweep % 10 == 0 || sweep == max_iterations {
            residual = signorini_residual(&stencil, grid, &u);
            if residual <= tol {
                let active = (0..grid.plane()).map(|it| grid.is_free(it) && u[it] <= T::zero()).collect();
                return finish(grid, &stencil, u, active, sweep, 0, residual, None);
            }
        }
    }
    Err(Error::NonConverged {
        iterations: max_iterations,
        residual: to_f64(residual),
    })
}

/// Interior rows in flux units; flat rows by the natural complementarity
/// residual `|min(u, -u_y)|`.
fn signorini_residual<T: Real>(stencil: &Stencil<T>, grid: &Grid<T>, u: &[T]) -> T {
    let h = grid.h();
    let mut worst = T::zero();
    for i in 0..grid.len() {
        if !grid.is_free(i) {
            continue;
        }
        let ui = u[i];
        let mut acc = T::zero();
        stencil.for_each_neighbor(i, |j, w| acc = acc + w * (ui - u[j]));
        let coords = grid.coords(i);
        let flux = acc / (h * stencil.tangential_fraction(coords));
        let r = if coords[2] == 0 {
            // flux = -u_y
            ui.min(flux).abs()
        } else {
            flux.abs()
        };
        worst = worst.max(r);
    }
    worst
}

/// Multilinear interpolation of a nodal field at `p` (clamped to the box).
pub fn interpolate<T: Real>(u: &Field<T>, p: Point<T>) -> T {
    let grid = u.grid();
    let h = grid.h();
    let l = grid.spec().tangential_extent;
    let locate = |c: T, n: usize| -> (usize, T) {
        let s = (c / h).max(T::zero());
        let i = s.floor().to_f64().unwrap_or(0.0).min((n - 2) as f64) as usize;
        let f = (s - lit(i as f64)).max(T::zero()).min(T::one());
        (i, f)
    };
    let axes = grid.axes();
    let mut base = [0usize; 3];
    let mut frac = [T::zero(); 3];
    for &a in axes {
        let c = match a {
            0 => p.x[0] + l,
            1 => p.x[1] + l,
            _ => p.y,
        };
        let (i, f) = locate(c, grid.axis_len(a));
        base[a] = i;
        frac[a] = f;
    }
    let origin = grid.index([base[0], base[1]], base[2]);
    let mut total = T::zero();
    for corner in 0..(1usize << axes.len()) {
        let mut w = T::one();
        let mut idx = origin;
        for (bit, &a) in axes.iter().enumerate() {
            if corner >> bit & 1 == 1 {
                w = w * frac[a];
                idx += grid.axis_stride(a);
            } else {
                w = w * (T::one() - frac[a]);
            }
        }
        if w != T::zero() {
            total = total + w * u.at(idx);
        }
    }
    total
}

/// `v(X) = eps^{-3/2} u(eps X)` sampled on the same grid.
pub fn rescaled_solution<T: Real>(result: &SolveResult<T>, p: &Penalization<T>) -> Result<Field<T>> {
    let eps = p.epsilon();
    if eps > T::one() {
        return Err(Error::OutOfDomain(format!("scale {eps} maps the box outside itself")));
    }
    let grid = result.grid().clone();
    let factor = eps.powf(lit(-1.5));
    let u = &result.u;
    Ok(Field::from_fn(grid, |q| {
        let scaled = Point {
            x: [q.x[0] * eps, q.x[1] * eps],
            y: q.y * eps,
        };
        factor * interpolate(u, scaled)
    }))
}

/// Exact nodal form of the same scaling: the node values times
/// `eps^{-3/2}` on the box stretched by `1 / eps`, which has the same node
/// counts. The discrete system is covariant under this map, so the field
/// solves the unit-penalty problem with data `eps^{-3/2} g(eps X)` there.
/// Requires `eps * resolution` to be an integer.
pub fn rescaled_nodal<T: Real>(result: &SolveResult<T>, p: &Penalization<T>) -> Result<Field<T>> {
    let grid = result.grid();
    let spec = grid.spec();
    let eps = p.epsilon();
    let scaled = eps * lit(spec.resolution as f64);
    let n = scaled.round();
    if (scaled - n).abs() > lit(1e-9) || n < T::one() {
        return Err(Error::InvalidConfig(format!(
            "eps * resolution = {scaled} is not a positive integer"
        )));
    }
    let stretched = GridSpec {
        tangential_extent: spec.tangential_extent / eps,
        normal_extent: spec.normal_extent / eps,
        resolution: to_f64(n) as usize,
        ..*spec
    };
    let target = Grid::new(stretched)?;
    if target.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let factor = eps.powf(lit(-1.5));
    Field::new(target, result.u.values().iter().map(|&v| v * factor).collect())
}

/// Flat nodes where the penalty is engaged, as booleans over layer 0.
pub fn flat_mask<T: Real>(grid: &Grid<T>, pred: impl Fn(usize) -> bool) -> Vec<bool> {
    (0..grid.plane())
        .map(|it| grid.class(it) == NodeClass::Flat && pred(it))
        .collect()
}

#[cfg(test)]
mod tests;
