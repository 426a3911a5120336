//! Euler-Lagrange rows of the discrete energy.
//!
//! The bulk energy is `h^d / 2` times the cell-wise mean of squared edge
//! difference quotients. Differentiating it gives, at every free node, a sum
//! `sum_e w_e (u_i - u_j)` over lattice edges where `w_e` is the fraction of
//! the `2^(d-1)` cells around a full edge that actually exist. Interior rows
//! are the standard Laplacian; rows on the flat face are the ghost-point
//! elimination of `u_y = beta(u)`, halved, so the system stays symmetric.

use crate::grid::Grid;
use crate::scalar::{lit, Real};

pub(crate) struct Stencil<'g, T> {
    grid: &'g Grid<T>,
    half: T,
}

impl<'g, T: Real> Stencil<'g, T> {
    pub fn new(grid: &'g Grid<T>) -> Self {
        Self {
            grid,
            half: lit(0.5),
        }
    }

    #[inline]
    fn at_face(&self, coords: [usize; 3], axis: usize) -> bool {
        let c = coords[axis];
        c == 0 || c + 1 == self.grid.axis_len(axis)
    }

    /// Weight of the edges leaving `coords` along `axis`.
    #[inline]
    pub fn edge_weight(&self, coords: [usize; 3], axis: usize) -> T {
        let mut w = T::one();
        for &b in self.grid.axes() {
            if b != axis && self.at_face(coords, b) {
                w = w * self.half;
            }
        }
        w
    }

    /// Share of a full flat-face cell owned by the node: 1 inside the face,
    /// 1/2 on an edge of it, 1/4 at a corner.
    #[inline]
    pub fn tangential_fraction(&self, coords: [usize; 3]) -> T {
        let mut w = T::one();
        for &b in self.grid.axes() {
            if b != 2 && self.at_face(coords, b) {
                w = w * self.half;
            }
        }
        w
    }

    /// Sum of edge weights at a node (the diagonal of the bulk operator).
    pub fn weight_sum(&self, idx: usize) -> T {
        let coords = self.grid.coords(idx);
        let mut total = T::zero();
        for &a in self.grid.axes() {
            let w = self.edge_weight(coords, a);
            let n = self.grid.axis_len(a);
            if coords[a] > 0 {
                total = total + w;
            }
            if coords[a] + 1 < n {
                total = total + w;
            }
        }
        total
    }

    /// Calls `f(j, w)` for every lattice neighbour `j` of `idx`.
    #[inline]
    pub fn for_each_neighbor(&self, idx: usize, mut f: impl FnMut(usize, T)) {
        let coords = self.grid.coords(idx);
        for &a in self.grid.axes() {
            let w = self.edge_weight(coords, a);
            let s = self.grid.axis_stride(a);
            if coords[a] > 0 {
                f(idx - s, w);
            }
            if coords[a] + 1 < self.grid.axis_len(a) {
                f(idx + s, w);
            }
        }
    }

    fn row_general(&self, x: &[T], idx: usize) -> T {
        let xi = x[idx];
        let mut acc = T::zero();
        self.for_each_neighbor(idx, |j, w| acc = acc + w * (xi - x[j]));
        acc
    }

    /// `out_i = sum_e w_e (x_i - x_j)` at free nodes, zero at data nodes.
    pub fn bulk(&self, x: &[T], out: &mut [T]) {
        let g = self.grid;
        let (nt, ny, p) = (g.nt(), g.ny(), g.plane());
        let three_d = g.tangential_axes() == 2;
        let n2 = if three_d { nt } else { 1 };
        for iy in 0..ny {
            for i2 in 0..n2 {
                let base = iy * p + i2 * nt;
                for i1 in 0..nt {
                    let idx = base + i1;
                    if !g.is_free(idx) {
                        out[idx] = T::zero();
                        continue;
                    }
                    let deep = i1 > 0
                        && i1 + 1 < nt
                        && iy > 0
                        && iy + 1 < ny
                        && (!three_d || (i2 > 0 && i2 + 1 < nt));
                    if deep {
                        let xi = x[idx];
                        let mut acc = (xi - x[idx - 1]) + (xi - x[idx + 1]) + (xi - x[idx - p]) + (xi - x[idx + p]);
                        if three_d {
                            acc = acc + (xi - x[idx - nt]) + (xi - x[idx + nt]);
                        }
                        out[idx] = acc;
                    } else {
                        out[idx] = self.row_general(x, idx);
                    }
                }
            }
        }
    }
}
