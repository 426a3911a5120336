//! Half-box lattice `[-L, L]^(d-1) x [0, H]` with the flat face at `y = 0`.
//!
//! Nodes are stored row-major with the normal axis outermost: the linear
//! index of node `(i1, [i2,] iy)` is `iy * plane + i2 * nt + i1` where `nt`
//! is the number of nodes per tangential axis and `plane = nt^(d-1)`.
//! The lower half of the reflected problem is never stored.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

static NEXT_GRID_ID: AtomicU64 = AtomicU64::new(1);

/// Tangential coordinates of a point on the flat face. The second entry is
/// ignored in two dimensions.
pub type FlatPoint<T> = [T; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: [T; 2],
    pub y: T,
}

/// Treatment of the lateral faces of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LateralBoundary {
    /// Data prescribed on the lateral faces.
    #[default]
    Dirichlet,
    /// Even reflection across the lateral faces (zero normal flux); only the
    /// top face carries data. Used for column problems whose solution does
    /// not depend on the tangential variables.
    Reflecting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    /// Ambient dimension, 2 or 3.
    pub dimension: usize,
    /// Half-width `L` of every tangential axis.
    pub tangential_extent: T,
    /// Height `H` of the box.
    pub normal_extent: T,
    /// Nodes per unit length; the spacing is `1 / resolution`.
    pub resolution: usize,
    pub lateral: LateralBoundary,
}

impl<T: Real> GridSpec<T> {
    /// Unit half-box `[-1, 1]^(d-1) x [0, 1]`.
    pub fn new(dimension: usize, resolution: usize) -> Self {
        Self {
            dimension,
            tangential_extent: T::one(),
            normal_extent: T::one(),
            resolution,
            lateral: LateralBoundary::Dirichlet,
        }
    }

    pub fn with_lateral(mut self, lateral: LateralBoundary) -> Self {
        self.lateral = lateral;
        self
    }

    pub fn with_extents(mut self, tangential: T, normal: T) -> Self {
        self.tangential_extent = tangential;
        self.normal_extent = normal;
        self
    }

    pub fn spacing(&self) -> T {
        T::one() / lit(self.resolution as f64)
    }

    /// Validates the spec and returns `(tangential nodes per axis, normal nodes)`.
    pub fn node_counts(&self) -> Result<(usize, usize)> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(Error::InvalidConfig(format!(
                "dimension must be 2 or 3, got {}",
                self.dimension
            )));
        }
        if self.resolution < 8 {
            return Err(Error::InvalidConfig(format!(
                "resolution must be at least 8, got {}",
                self.resolution
            )));
        }
        let half = integral_cells(self.tangential_extent, self.resolution, "tangential_extent")?;
        let height = integral_cells(self.normal_extent, self.resolution, "normal_extent")?;
        if half < 2 {
            return Err(Error::InvalidConfig("tangential extent spans fewer than 2 cells".into()));
        }
        if height < 2 {
            return Err(Error::InvalidConfig("normal extent spans fewer than 2 cells".into()));
        }
        Ok((2 * half + 1, height + 1))
    }
}

fn integral_cells<T: Real>(extent: T, resolution: usize, name: &str) -> Result<usize> {
    let cells = extent.to_f64().unwrap_or(f64::NAN) * resolution as f64;
    if !(cells.is_finite() && cells > 0.0) || (cells - cells.round()).abs() > 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "{name} times resolution must be a positive integer, got {cells}"
        )));
    }
    Ok(cells.round() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Interior,
    /// Node of the flat face `y = 0`, excluding its relative boundary.
    Flat,
    /// Lateral faces, top face and the rim of the flat face.
    Dirichlet,
}

#[derive(Debug)]
pub struct Grid<T> {
    spec: GridSpec<T>,
    id: u64,
    h: T,
    nt: usize,
    ny: usize,
    plane: usize,
    class: Vec<NodeClass>,
}

impl<T: Real> Grid<T> {
    pub fn new(spec: GridSpec<T>) -> Result<Arc<Self>> {
        let (nt, ny) = spec.node_counts()?;
        let m = spec.dimension - 1;
        let plane = nt.pow(m as u32);
        let mut class = Vec::with_capacity(plane * ny);
        for iy in 0..ny {
            for it in 0..plane {
                let (i1, i2) = (it % nt, it / nt);
                let lateral = spec.lateral == LateralBoundary::Dirichlet
                    && (i1 == 0 || i1 == nt - 1 || (m == 2 && (i2 == 0 || i2 == nt - 1)));
                let c = if lateral || iy == ny - 1 {
                    NodeClass::Dirichlet
                } else if iy == 0 {
                    NodeClass::Flat
                } else {
                    NodeClass::Interior
                };
                class.push(c);
            }
        }
        Ok(Arc::new(Self {
            spec,
            id: NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed),
            h: spec.spacing(),
            nt,
            ny,
            plane,
            class,
        }))
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    /// Number of tangential axes, `d - 1`.
    pub fn tangential_axes(&self) -> usize {
        self.spec.dimension - 1
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    /// Nodes per tangential axis.
    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Nodes along the normal axis.
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Nodes per `y = const` layer.
    pub fn plane(&self) -> usize {
        self.plane
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.class[idx]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    pub fn is_free(&self, idx: usize) -> bool {
        self.class[idx] != NodeClass::Dirichlet
    }

    pub fn lateral(&self) -> LateralBoundary {
        self.spec.lateral
    }

    /// Lattice axes present: 0 and 1 are tangential (1 only when d = 3), 2 is `y`.
    pub fn axes(&self) -> &'static [usize] {
        if self.tangential_axes() == 2 {
            &[0, 1, 2]
        } else {
            &[0, 2]
        }
    }

    pub fn axis_len(&self, axis: usize) -> usize {
        if axis == 2 {
            self.ny
        } else {
            self.nt
        }
    }

    pub fn axis_stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.nt,
            _ => self.plane,
        }
    }

    /// Per-axis lattice coordinates `[i1, i2, iy]` of a node.
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let (t, iy) = self.split(idx);
        [t[0], t[1], iy]
    }

    /// Neighbours of `idx` along `axis` (minus side, plus side). Missing
    /// neighbours are mirrored across reflecting faces and `None` otherwise.
    pub fn axis_neighbors(&self, idx: usize, axis: usize) -> (Option<usize>, Option<usize>) {
        let c = self.coords(idx)[axis];
        let n = self.axis_len(axis);
        let s = self.axis_stride(axis);
        let minus = (c > 0).then(|| idx - s);
        let plus = (c + 1 < n).then(|| idx + s);
        if axis != 2 && self.spec.lateral == LateralBoundary::Reflecting {
            (minus.or(plus), plus.or(minus))
        } else {
            (minus, plus)
        }
    }

    pub fn index(&self, tangential: [usize; 2], iy: usize) -> usize {
        iy * self.plane + tangential[1] * self.nt + tangential[0]
    }

    /// Splits a linear index into tangential indices and the layer.
    pub fn split(&self, idx: usize) -> ([usize; 2], usize) {
        let iy = idx / self.plane;
        let it = idx % self.plane;
        ([it % self.nt, it / self.nt], iy)
    }

    pub fn tangential_coord(&self, i: usize) -> T {
        lit::<T>(i as f64) * self.h - self.spec.tangential_extent
    }

    pub fn normal_coord(&self, iy: usize) -> T {
        lit::<T>(iy as f64) * self.h
    }

    pub fn point(&self, idx: usize) -> Point<T> {
        let (t, iy) = self.split(idx);
        let x2 = if self.tangential_axes() == 2 {
            self.tangential_coord(t[1])
        } else {
            T::zero()
        };
        Point {
            x: [self.tangential_coord(t[0]), x2],
            y: self.normal_coord(iy),
        }
    }

    /// Flat-face coordinates of the layer-0 node with in-plane index `it`.
    pub fn flat_point(&self, it: usize) -> FlatPoint<T> {
        let p = self.point(it);
        p.x
    }

    /// Distance of a flat point from the lateral boundary.
    pub fn lateral_distance(&self, x: FlatPoint<T>) -> T {
        let l = self.spec.tangential_extent;
        let mut d = l - x[0].abs();
        if self.tangential_axes() == 2 {
            d = d.min(l - x[1].abs());
        }
        d
    }

    /// Tangential distance between two flat points.
    pub fn flat_distance(&self, a: FlatPoint<T>, b: FlatPoint<T>) -> T {
        let dx = a[0] - b[0];
        if self.tangential_axes() == 2 {
            let dz = a[1] - b[1];
            (dx * dx + dz * dz).sqrt()
        } else {
            dx.abs()
        }
    }

    /// In-plane index of the layer-0 node closest to `x`.
    pub fn nearest_flat_index(&self, x: FlatPoint<T>) -> usize {
        let snap = |c: T| -> usize {
            let f = ((c + self.spec.tangential_extent) / self.h).round();
            f.to_f64().unwrap_or(0.0).clamp(0.0, (self.nt - 1) as f64) as usize
        };
        let i2 = if self.tangential_axes() == 2 { snap(x[1]) } else { 0 };
        i2 * self.nt + snap(x[0])
    }

    /// Layer-0 in-plane indices of flat nodes.
    pub fn flat_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.plane).filter(move |&it| self.class[it] == NodeClass::Flat)
    }

    pub fn same_as(&self, other: &Grid<T>) -> bool {
        self.id == other.id
    }

    fn require_inside(&self, center: FlatPoint<T>, radius: T, height: T) -> Result<()> {
        let slack = self.h * lit(1e-9);
        let l = self.spec.tangential_extent;
        let mut ok = center[0] - radius >= -l - slack && center[0] + radius <= l + slack;
        if self.tangential_axes() == 2 {
            ok &= center[1] - radius >= -l - slack && center[1] + radius <= l + slack;
        }
        ok &= height <= self.spec.normal_extent + slack;
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!(
                "radius {radius} about ({}, {}) with height {height}",
                center[0], center[1]
            )))
        }
    }
}

pub fn build_grid<T: Real>(spec: GridSpec<T>) -> Result<Arc<Grid<T>>> {
    Grid::new(spec)
}

/// Nodal values on a grid.
#[derive(Debug, Clone)]
pub struct Field<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidConfig(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values }
    }

    pub fn constant(grid: Arc<Grid<T>>, c: T) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn(Point<T>) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: Arc<Grid<T>>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, idx: usize) -> T {
        self.values[idx]
    }

    pub fn ensure_same_grid(&self, other: &Field<T>) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn sub(&self, other: &Field<T>) -> Result<Field<T>> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Ok(Self::from_raw(self.grid.clone(), values))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Values of the `y = 0` layer.
    pub fn bottom_layer(&self) -> Trace<T> {
        Trace {
            grid: self.grid.clone(),
            values: self.values[..self.grid.plane()].to_vec(),
        }
    }
}

/// Values on the `y = 0` layer (flat nodes plus the rim), indexed in-plane.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Real> Trace<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.plane() {
            return Err(Error::InvalidConfig(format!(
                "trace has {} values for {} layer nodes",
                values.len(),
                grid.plane()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn(FlatPoint<T>) -> T) -> Self {
        let values = (0..grid.plane()).map(|it| f(grid.flat_point(it))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn at(&self, it: usize) -> T {
        self.values[it]
    }

    /// `(point, value)` pairs over flat nodes.
    pub fn flat_samples(&self) -> impl Iterator<Item = (FlatPoint<T>, T)> + '_ {
        self.grid
            .flat_nodes()
            .map(move |it| (self.grid.flat_point(it), self.values[it]))
    }
}

/// Values attached to lattice cells, located at cell centres.
#[derive(Debug, Clone)]
pub struct CellField<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Real> CellField<T> {
    /// Number of cells along a tangential axis and along `y`.
    fn shape(grid: &Grid<T>) -> (usize, usize, usize) {
        let ct = grid.nt() - 1;
        let cplane = ct.pow(grid.tangential_axes() as u32);
        (ct, cplane, grid.ny() - 1)
    }

    pub fn len_for(grid: &Grid<T>) -> usize {
        let (_, cplane, cy) = Self::shape(grid);
        cplane * cy
    }

    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != Self::len_for(&grid) {
            return Err(Error::InvalidConfig("cell field length mismatch".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn(Point<T>) -> T) -> Self {
        let n = Self::len_for(&grid);
        let values = (0..n).map(|c| f(cell_center(&grid, c))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

pub fn cell_center<T: Real>(grid: &Grid<T>, cell: usize) -> Point<T> {
    let (ct, cplane, _) = CellField::shape(grid);
    let cy = cell / cplane;
    let it = cell % cplane;
    let half = grid.h() / lit(2.0);
    let x1 = grid.tangential_coord(it % ct) + half;
    let x2 = if grid.tangential_axes() == 2 {
        grid.tangential_coord(it / ct) + half
    } else {
        T::zero()
    };
    Point {
        x: [x1, x2],
        y: grid.normal_coord(cy) + half,
    }
}

/// Indices of the `2^d` corner nodes of a cell, lowest corner first, with
/// bit 0 for axis x1, bit 1 for the next tangential axis (d = 3) and the
/// last bit for `y`.
fn cell_corners<T: Real>(grid: &Grid<T>, cell: usize) -> ([usize; 8], usize) {
    let (ct, cplane, _) = CellField::<T>::shape(grid);
    let cy = cell / cplane;
    let it = cell % cplane;
    let (c1, c2) = (it % ct, it / ct);
    let base = grid.index([c1, c2], cy);
    let m = grid.tangential_axes();
    let strides = [1, grid.nt(), grid.plane()];
    let axes = m + 1;
    let mut out = [0usize; 8];
    for (corner, slot) in out.iter_mut().enumerate().take(1 << axes) {
        let mut idx = base;
        for a in 0..axes {
            if corner >> a & 1 == 1 {
                let s = if a == m { strides[2] } else { strides[a] };
                idx += s;
            }
        }
        *slot = idx;
    }
    (out, 1 << axes)
}

/// Cell-centred gradient of a nodal field: each partial derivative is the
/// average of the cell's edge differences along that axis.
pub fn cell_gradient_norm_sq<T: Real>(u: &Field<T>) -> CellField<T> {
    let grid = u.grid().clone();
    let n = CellField::len_for(&grid);
    let axes = grid.dimension();
    let inv = T::one() / (grid.h() * lit((1usize << (axes - 1)) as f64));
    let v = u.values();
    let values = (0..n)
        .map(|c| {
            let (corners, count) = cell_corners(&grid, c);
            let mut sum = T::zero();
            for a in 0..axes {
                let mut g = T::zero();
                for k in 0..count {
                    if k >> a & 1 == 1 {
                        g = g + v[corners[k]] - v[corners[k ^ (1 << a)]];
                    }
                }
                g = g * inv;
                sum = sum + g * g;
            }
            sum
        })
        .collect();
    CellField { grid, values }
}

/// Cell-wise mean of squared edge difference quotients, summed over axes.
/// Summing `h^d / 2` times this over cells gives the discrete Dirichlet
/// energy whose Euler-Lagrange rows are the five/seven-point Laplacian.
pub(crate) fn cell_edge_energy_density<T: Real>(grid: &Grid<T>, v: &[T], cell: usize) -> T {
    let (corners, count) = cell_corners(grid, cell);
    let axes = grid.dimension();
    let h = grid.h();
    let mut sum = T::zero();
    for a in 0..axes {
        let mut acc = T::zero();
        for k in 0..count {
            if k >> a & 1 == 1 {
                let d = (v[corners[k]] - v[corners[k ^ (1 << a)]]) / h;
                acc = acc + d * d;
            }
        }
        sum = sum + acc / lit((count / 2) as f64);
    }
    sum
}

/// Standard `(2d+1)`-point Laplacian at interior nodes, zero elsewhere.
pub fn laplacian_residual<T: Real>(u: &Field<T>) -> Field<T> {
    let grid = u.grid().clone();
    let v = u.values();
    let h2 = grid.h() * grid.h();
    let two = lit::<T>(2.0);
    let out = (0..grid.len())
        .map(|i| {
            if grid.class(i) != NodeClass::Interior {
                return T::zero();
            }
            grid.axes()
                .iter()
                .map(|&a| match grid.axis_neighbors(i, a) {
                    (Some(m), Some(p)) => v[m] + v[p] - two * v[i],
                    _ => unreachable!("interior nodes have both neighbours"),
                })
                .fold(T::zero(), |a, b| a + b)
                / h2
        })
        .collect();
    Field::from_raw(grid, out)
}

/// Second-order one-sided normal derivative on the `y = 0` layer:
/// `(-3u(x,0) + 4u(x,h) - u(x,2h)) / 2h`.
pub fn normal_trace<T: Real>(u: &Field<T>) -> Result<Trace<T>> {
    let grid = u.grid().clone();
    if grid.ny() < 3 {
        return Err(Error::InsufficientData("normal trace needs three y-layers".into()));
    }
    let p = grid.plane();
    let v = u.values();
    let two_h = lit::<T>(2.0) * grid.h();
    let values = (0..p)
        .map(|it| (lit::<T>(-3.0) * v[it] + lit::<T>(4.0) * v[it + p] - v[it + 2 * p]) / two_h)
        .collect();
    Trace::new(grid, values)
}

/// Midpoint-rule value of `int_{B_r^+(center)} f / |X - center|^exponent`.
///
/// A cell contributes iff its centre lies in the closed half-ball; distances
/// are measured to cell centres, which sit `h/2` above the flat face.
pub fn weighted_ball_integral<T: Real>(
    cells: &CellField<T>,
    center: FlatPoint<T>,
    r: T,
    exponent: T,
) -> Result<T> {
    let grid = cells.grid();
    let h = grid.h();
    if r < lit::<T>(4.0) * h * (T::one() - lit(1e-9)) {
        return Err(Error::InvalidConfig(format!("radius {r} below 4h")));
    }
    // The weight stays integrable for any exponent below the ambient dimension.
    let ambient = lit::<T>(grid.dimension() as f64);
    if exponent < T::zero() || exponent >= ambient {
        return Err(Error::InvalidConfig(format!(
            "weight exponent {exponent} outside [0, d)"
        )));
    }
    grid.require_inside(center, r, r)?;
    let m = grid.tangential_axes();
    let (ct, cplane, cy_count) = CellField::<T>::shape(grid);
    let half = h / lit(2.0);
    let r2 = r * r;
    let volume = h.powi(grid.dimension() as i32);
    let l = grid.spec().tangential_extent;
    // Restrict the scan to the bounding box of the ball.
    let lo = |c: T| -> usize {
        let f = ((c - r + l) / h - T::one()).floor();
        f.to_f64().unwrap_or(0.0).max(0.0) as usize
    };
    let hi = |c: T| -> usize {
        let f = ((c + r + l) / h + T::one()).ceil();
        (f.to_f64().unwrap_or(0.0) as usize).min(ct)
    };
    let (a0, a1) = (lo(center[0]), hi(center[0]));
    let (b0, b1) = if m == 2 { (lo(center[1]), hi(center[1])) } else { (0, 1) };
    let ymax = {
        let f = (r / h + T::one()).ceil();
        (f.to_f64().unwrap_or(0.0) as usize).min(cy_count)
    };
    let mut total = T::zero();
    for cy in 0..ymax {
        let y = grid.normal_coord(cy) + half;
        for c2 in b0..b1 {
            let dz = if m == 2 {
                grid.tangential_coord(c2) + half - center[1]
            } else {
                T::zero()
            };
            for c1 in a0..a1 {
                let dx = grid.tangential_coord(c1) + half - center[0];
                let rho2 = dx * dx + dz * dz + y * y;
                if rho2 > r2 {
                    continue;
                }
                let f = cells.values()[cy * cplane + c2 * ct + c1];
                let w = if exponent == T::zero() {
                    T::one()
                } else {
                    rho2.sqrt().powf(-exponent)
                };
                total = total + f * w;
            }
        }
    }
    Ok(total * volume)
}

/// Height of the cylinder `Gamma_r`.
pub fn cylinder_height<T: Real>(dimension: usize, r: T) -> T {
    r / (lit::<T>(2.0) * lit::<T>((2 * dimension - 2) as f64).sqrt())
}

/// `max |values|` over nodes of `Gamma_r(center) = B'_r(center) x [0, r / (2 sqrt(2d-2))]`.
pub fn sup_cylinder<T: Real>(values: &Field<T>, center: FlatPoint<T>, r: T) -> Result<T> {
    let grid = values.grid();
    let height = cylinder_height(grid.dimension(), r);
    grid.require_inside(center, r, height)?;
    let slack = grid.h() * lit(1e-9);
    let v = values.values();
    let mut best = T::zero();
    for iy in 0..grid.ny() {
        if grid.normal_coord(iy) > height + slack {
            break;
        }
        for it in 0..grid.plane() {
            if grid.flat_distance(grid.flat_point(it), center) <= r + slack {
                best = best.max(v[iy * grid.plane() + it].abs());
            }
        }
    }
    Ok(best)
}

/// Same as [`sup_cylinder`] restricted to the `y = 0` layer.
pub fn sup_cylinder_trace<T: Real>(trace: &Trace<T>, center: FlatPoint<T>, r: T) -> Result<T> {
    let grid = trace.grid();
    grid.require_inside(center, r, cylinder_height(grid.dimension(), r))?;
    let slack = grid.h() * lit(1e-9);
    Ok((0..grid.plane())
        .filter(|&it| grid.flat_distance(grid.flat_point(it), center) <= r + slack)
        .fold(T::zero(), |m, it| m.max(trace.at(it).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid2(n: usize) -> Arc<Grid<f64>> {
        Grid::new(GridSpec::new(2, n)).unwrap()
    }

    #[test]
    fn node_counts_and_classes() {
        let g = grid2(8);
        assert_eq!(g.len(), 153);
        assert_eq!(g.flat_nodes().count(), 15);
        let g3 = Grid::<f64>::new(GridSpec::new(3, 8)).unwrap();
        assert_eq!(g3.len(), 17 * 17 * 9);
        assert_eq!(g3.flat_nodes().count(), 15 * 15);
        let interior = g.classes().iter().filter(|c| **c == NodeClass::Interior).count();
        assert_eq!(interior, 15 * 7);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Grid::<f64>::new(GridSpec::new(2, 4)).is_err());
        assert!(Grid::<f64>::new(GridSpec::new(4, 8)).is_err());
        assert!(Grid::<f64>::new(GridSpec::new(2, 8).with_extents(0.3, 1.0)).is_err());
    }

    #[test]
    fn origin_is_a_node() {
        let g = grid2(8);
        let it = g.nearest_flat_index([0.0, 0.0]);
        assert_eq!(g.flat_point(it)[0], 0.0);
        assert_eq!(g.class(it), NodeClass::Flat);
    }

    #[test]
    fn laplacian_exact_cases() {
        let g = grid2(16);
        let affine = Field::from_fn(g.clone(), |p| 0.3 + 2.0 * p.x[0] - 1.5 * p.y);
        assert!(laplacian_residual(&affine).max_abs() < 1e-10);
        let saddle = Field::from_fn(g.clone(), |p| p.x[0] * p.x[0] - p.y * p.y);
        assert!(laplacian_residual(&saddle).max_abs() < 1e-9);
        let sq = Field::from_fn(g.clone(), |p| p.x[0] * p.x[0]);
        let lap = laplacian_residual(&sq);
        for i in 0..g.len() {
            let want = if g.class(i) == NodeClass::Interior { 2.0 } else { 0.0 };
            assert_abs_diff_eq!(lap.at(i), want, epsilon = 1e-9);
        }
    }

    #[test]
    fn laplacian_3d_harmonic_quadratics() {
        let g = Grid::<f64>::new(GridSpec::new(3, 8)).unwrap();
        let u = Field::from_fn(g, |p| p.x[0] * p.x[1] + p.x[1] * p.x[1] - p.y * p.y + p.x[0] * p.y);
        assert!(laplacian_residual(&u).max_abs() < 1e-9);
    }

    #[test]
    fn normal_trace_exact_on_quadratics() {
        let g = grid2(8);
        let lin = normal_trace(&Field::from_fn(g.clone(), |p| p.y)).unwrap();
        assert!(lin.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let quad = normal_trace(&Field::from_fn(g.clone(), |p| p.y * p.y)).unwrap();
        assert!(quad.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn normal_trace_of_signorini_profile() {
        // u = rho^{3/2} cos(3 theta / 2); u_y(x,0) = -(3/2)|x|^{1/2} on x < 0.
        let exact = |p: Point<f64>| {
            let rho = (p.x[0] * p.x[0] + p.y * p.y).sqrt();
            let th = p.y.atan2(p.x[0]);
            rho.powf(1.5) * (1.5 * th).cos()
        };
        let mut errs = Vec::new();
        for n in [64, 256] {
            let g = grid2(n);
            let tr = normal_trace(&Field::from_fn(g.clone(), exact)).unwrap();
            let mut err: f64 = 0.0;
            for (x, v) in tr.flat_samples() {
                if x[0].abs() < 0.25 {
                    continue;
                }
                let want = if x[0] < 0.0 { -1.5 * x[0].abs().sqrt() } else { 0.0 };
                err = err.max((v - want).abs());
            }
            errs.push(err);
        }
        assert!(errs[1] < errs[0]);
        assert!(errs[1] < 1e-3);
    }

    #[test]
    fn half_disc_area_and_weighted_integral() {
        for n in [64, 128] {
            let g = grid2(n);
            let one = CellField::from_fn(g.clone(), |_| 1.0);
            let r = 0.5;
            let area = weighted_ball_integral(&one, [0.0, 0.0], r, 0.0).unwrap();
            let want = std::f64::consts::PI * r * r / 2.0;
            assert!((area - want).abs() < 4.0 * g.h() * r, "n={n} area={area}");
        }
        // Exponent 1 integrates rho^{-1} rho over the half disc: pi r.
        let g = grid2(256);
        let one = CellField::from_fn(g.clone(), |_| 1.0);
        let v = weighted_ball_integral(&one, [0.0, 0.0], 0.5, 1.0).unwrap();
        assert!((v - std::f64::consts::PI * 0.5).abs() < 0.03, "{v}");
    }

    #[test]
    fn sqrt_profile_energy_is_linear_in_radius() {
        let g = grid2(512);
        // |grad w|^2 = (9/16)/rho for w = -(3/2) Im z^{1/2}.
        let cells = CellField::from_fn(g.clone(), |p| {
            9.0 / 16.0 / (p.x[0] * p.x[0] + p.y * p.y).sqrt()
        });
        for r in [0.1, 0.2, 0.4] {
            let v = weighted_ball_integral(&cells, [0.0, 0.0], r, 0.0).unwrap();
            let want = 9.0 * std::f64::consts::PI / 16.0 * r;
            assert!((v / want - 1.0).abs() < 0.02, "r={r} v={v} want={want}");
        }
    }

    #[test]
    fn ball_preconditions() {
        let g = grid2(16);
        let one = CellField::from_fn(g.clone(), |_| 1.0);
        assert!(weighted_ball_integral(&one, [0.0, 0.0], 0.1, 0.0).is_err());
        assert!(weighted_ball_integral(&one, [0.9, 0.0], 0.5, 0.0).is_err());
        assert!(weighted_ball_integral(&one, [0.0, 0.0], 0.5, 2.0).is_err());
    }

    #[test]
    fn cylinder_sups() {
        let g = grid2(64);
        let c = Field::constant(g.clone(), -2.5);
        assert_eq!(sup_cylinder(&c, [0.0, 0.0], 0.5).unwrap(), 2.5);
        let y = Field::from_fn(g.clone(), |p| p.y);
        let s = sup_cylinder(&y, [0.0, 0.0], 0.5).unwrap();
        let want = 0.5 / (2.0 * 2f64.sqrt());
        assert!(s <= want + 1e-12 && want - s <= g.h());
        let tr = Trace::from_fn(g.clone(), |x| if x[0] < 0.0 { -1.5 * (-x[0]).sqrt() } else { 0.0 });
        let s = sup_cylinder_trace(&tr, [0.0, 0.0], 0.5).unwrap();
        assert!((s - 1.5 * 0.5f64.sqrt()).abs() < 1.5 * g.h().sqrt());
        assert!(sup_cylinder(&y, [0.8, 0.0], 0.5).is_err());
    }

    #[test]
    fn field_grid_identity() {
        let a = Field::zeros(grid2(8));
        let b = Field::zeros(grid2(8));
        assert_eq!(a.sub(&b).unwrap_err(), Error::GridMismatch);
        assert!(a.sub(&a).is_ok());
        assert!(Field::new(grid2(8), vec![f64::NAN; 153]).is_err());
    }

    #[test]
    fn cell_gradient_of_linear_field() {
        let g = Grid::<f64>::new(GridSpec::new(3, 8)).unwrap();
        let u = Field::from_fn(g, |p| 2.0 * p.x[0] - p.x[1] + 3.0 * p.y);
        let c = cell_gradient_norm_sq(&u);
        assert!(c.values().iter().all(|v| (v - 14.0).abs() < 1e-9));
    }
}
