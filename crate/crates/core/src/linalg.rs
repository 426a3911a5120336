//! Matrix-free conjugate gradient and a minimal CSR matrix.

use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome<T> {
    pub iterations: usize,
    /// Max-norm of the recomputed residual `b - A x` at exit.
    pub residual: T,
    pub converged: bool,
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Solves `A x = b` for symmetric positive definite `A`, starting from the
/// incoming `x`. Stops once `max |b - A x| <= atol`.
///
/// `apply(v, out)` must write `A v` into `out`. Entries that `apply` keeps
/// at zero (eliminated unknowns) stay untouched as long as `b` and the
/// initial `x` are zero there.
pub fn conjugate_gradient<T: Real>(
    apply: impl Fn(&[T], &mut [T]),
    b: &[T],
    x: &mut [T],
    atol: T,
    max_iterations: usize,
) -> CgOutcome<T> {
    let n = b.len();
    let mut r = vec![T::zero(); n];
    let mut ap = vec![T::zero(); n];
    apply(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut res = max_abs(&r);
    // Cheap two-norm screen before paying for the max-norm.
    let screen = atol * atol * lit::<T>(n as f64);
    let mut it = 0;
    while res > atol && it < max_iterations {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() || !pap.is_finite() {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        it += 1;
        // Refresh the recursively updated residual now and then.
        if it % 500 == 0 {
            apply(x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        if rr_new <= screen || it % 50 == 0 {
            res = max_abs(&r);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    apply(x, &mut ap);
    let residual = b.iter().zip(&ap).fold(T::zero(), |m, (&bi, &ai)| m.max((bi - ai).abs()));
    CgOutcome {
        iterations: it,
        residual,
        converged: residual <= atol * lit(1.0 + 1e-6),
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                let k = vals.len() - 1;
                vals[k] = vals[k] + v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let mut out = vec![T::zero(); self.n];
        self.mul_vec(x, &mut out);
        dot(x, &out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_tridiagonal() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        a.mul_vec(&xs, &mut b);
        let mut x = vec![0.0; n];
        let out = conjugate_gradient(|v, o| a.mul_vec(v, o), &b, &mut x, 1e-12, 1000);
        assert!(out.converged);
        assert!(x.iter().zip(&xs).all(|(p, q)| (p - q).abs() < 1e-9));
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]);
        assert_eq!(a.quadratic_form(&[1.0, 1.0]), 4.0);
    }
}
