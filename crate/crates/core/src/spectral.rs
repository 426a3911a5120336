//! Lowest eigenvalue of the Laplace-Beltrami operator on the upper half of
//! the unit sphere with Dirichlet data on half of the equator.
//!
//! In two dimensions the half-sphere is the arc `theta in [0, pi]`, Neumann
//! at `theta = 0` and Dirichlet at `theta = pi`. In three dimensions the
//! hemisphere `{y >= 0}` is meshed in latitude-longitude coordinates about
//! the `y` axis: `theta` is the polar angle from the pole `y = 1` and `phi`
//! the longitude, sampled at half-integer steps so that no node sits on the
//! two points where the boundary condition switches. Equator nodes with
//! `sin(phi) < 0` carry the Dirichlet condition. Both cases use a vertex-centred finite-volume scheme whose
//! stiffness matrix is symmetric and whose mass matrix is the diagonal of
//! control-volume areas.

use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, dot, CsrMatrix};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct SphereMesh<T> {
    dimension: usize,
    /// Nodes on the arc (d = 2) or rings below the pole (d = 3).
    n_theta: usize,
    /// Longitudes per ring (1 when d = 2).
    n_phi: usize,
    dirichlet: Vec<bool>,
    stiffness: CsrMatrix<T>,
    mass: Vec<T>,
}

impl<T: Real> SphereMesh<T> {
    /// Uniform arc mesh with `nodes` points on `[0, pi]`.
    pub fn arc(nodes: usize) -> Result<Self> {
        if nodes < 32 {
            return Err(Error::InvalidConfig(format!("{nodes} nodes on the arc, need at least 32")));
        }
        let mut mask = vec![false; nodes];
        mask[nodes - 1] = true;
        Self::build(2, nodes, 1, mask)
    }

    /// Latitude-longitude mesh with `n_theta` rings and `n_phi` longitudes.
    pub fn hemisphere(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 32 || n_phi < 32 {
            return Err(Error::InvalidConfig(format!(
                "{n_theta}x{n_phi} hemisphere mesh, need at least 32 per axis"
            )));
        }
        let mut mesh = Self::build(3, n_theta, n_phi, Vec::new())?;
        let mask = (0..mesh.len())
            .map(|i| mesh.is_equatorial(i) && mesh.angles(i)[1].sin() < -lit::<T>(1e-12))
            .collect();
        mesh.dirichlet = mask;
        Ok(mesh)
    }

    /// Same mesh with another Dirichlet set. Only equatorial nodes may be flagged.
    pub fn with_dirichlet(&self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.len() {
            return Err(Error::InvalidConfig("Dirichlet mask length mismatch".into()));
        }
        if mask.iter().enumerate().any(|(i, &m)| m && !self.is_equatorial(i)) {
            return Err(Error::InvalidConfig("Dirichlet flags must sit on the equator".into()));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::Singular("no Dirichlet node: the pure Neumann problem has eigenvalue 0".into()));
        }
        Ok(Self {
            dirichlet: mask,
            ..self.clone()
        })
    }

    fn build(dimension: usize, n_theta: usize, n_phi: usize, dirichlet: Vec<bool>) -> Result<Self> {
        let (triplets, mass) = if dimension == 2 {
            assemble_arc(n_theta)
        } else {
            assemble_hemisphere(n_theta, n_phi)
        };
        let n = mass.len();
        Ok(Self {
            dimension,
            n_theta,
            n_phi,
            dirichlet,
            stiffness: CsrMatrix::from_triplets(n, triplets),
            mass,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn dirichlet(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    /// `[theta, phi]` of node `i` (`phi = 0` in two dimensions).
    pub fn angles(&self, i: usize) -> [T; 2] {
        if self.dimension == 2 {
            let dt = T::PI() / lit((self.n_theta - 1) as f64);
            return [dt * lit(i as f64), T::zero()];
        }
        if i == 0 {
            return [T::zero(), T::zero()];
        }
        let dt = T::FRAC_PI_2() / lit(self.n_theta as f64);
        let dp = lit::<T>(2.0) * T::PI() / lit(self.n_phi as f64);
        let j = (i - 1) / self.n_phi + 1;
        let k = (i - 1) % self.n_phi;
        [dt * lit(j as f64), dp * (lit::<T>(k as f64) + lit(0.5))]
    }

    /// Cartesian position `(x1, x2, y)` on the unit sphere; `x2 = 0` when d = 2.
    pub fn position(&self, i: usize) -> [T; 3] {
        let [theta, phi] = self.angles(i);
        if self.dimension == 2 {
            [theta.cos(), T::zero(), theta.sin()]
        } else {
            [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
        }
    }

    pub fn is_equatorial(&self, i: usize) -> bool {
        if self.dimension == 2 {
            i == 0 || i + 1 == self.n_theta
        } else {
            i > 0 && (i - 1) / self.n_phi + 1 == self.n_theta
        }
    }

    /// Samples `f(position)` at every node, zeroed on Dirichlet nodes.
    pub fn sample(&self, f: impl Fn([T; 3]) -> T) -> Vec<T> {
        (0..self.len())
            .map(|i| if self.dirichlet[i] { T::zero() } else { f(self.position(i)) })
            .collect()
    }

    fn apply(&self, w: &[T], out: &mut [T]) {
        self.stiffness.mul_vec(w, out);
        for (o, &d) in out.iter_mut().zip(&self.dirichlet) {
            if d {
                *o = T::zero();
            }
        }
    }
}

fn assemble_arc<T: Real>(n: usize) -> (Vec<(usize, usize, T)>, Vec<T>) {
    let dt = T::PI() / lit((n - 1) as f64);
    let c = dt.recip();
    let mut t = Vec::with_capacity(4 * n);
    for i in 0..n - 1 {
        t.push((i, i, c));
        t.push((i + 1, i + 1, c));
        t.push((i, i + 1, -c));
        t.push((i + 1, i, -c));
    }
    let mut mass = vec![dt; n];
    mass[0] = dt / lit(2.0);
    mass[n - 1] = dt / lit(2.0);
    (t, mass)
}

fn assemble_hemisphere<T: Real>(nt: usize, np: usize) -> (Vec<(usize, usize, T)>, Vec<T>) {
    let dt = T::FRAC_PI_2() / lit(nt as f64);
    let dp = lit::<T>(2.0) * T::PI() / lit(np as f64);
    let half = lit::<T>(0.5);
    let n = 1 + nt * np;
    let idx = |j: usize, k: usize| 1 + (j - 1) * np + (k % np);
    let theta = |j: f64| dt * lit(j);
    let mut trip = Vec::with_capacity(10 * n);
    let edge = |a: usize, b: usize, c: T, trip: &mut Vec<(usize, usize, T)>| {
        trip.push((a, a, c));
        trip.push((b, b, c));
        trip.push((a, b, -c));
        trip.push((b, a, -c));
    };
    let mut mass = vec![T::zero(); n];
    mass[0] = dp * lit(np as f64) * (T::one() - (dt * half).cos());
    for j in 1..=nt {
        let lo = theta(j as f64 - 0.5);
        let equator = j == nt;
        let hi = if equator { theta(j as f64) } else { theta(j as f64 + 0.5) };
        let area = dp * (lo.cos() - hi.cos());
        let sin_j = theta(j as f64).sin();
        let ring = if equator { dt * half } else { dt };
        for k in 0..np {
            let i = idx(j, k);
            mass[i] = area;
            // Towards the pole (or the previous ring).
            let inward = dp * lo.sin() / dt;
            let other = if j == 1 { 0 } else { idx(j - 1, k) };
            edge(i, other, inward, &mut trip);
            // Along the ring.
            edge(i, idx(j, k + 1), ring / (sin_j * dp), &mut trip);
        }
    }
    (trip, mass)
}

/// Discrete `int |grad w|^2 / int w^2`.
pub fn rayleigh_quotient<T: Real>(mesh: &SphereMesh<T>, w: &[T]) -> Result<T> {
    if w.len() != mesh.len() {
        return Err(Error::InvalidConfig("vector length does not match the mesh".into()));
    }
    if w.iter().zip(mesh.dirichlet()).any(|(v, &d)| d && *v != T::zero()) {
        return Err(Error::InvalidConfig("test vector does not vanish on Dirichlet nodes".into()));
    }
    let denom = w.iter().zip(mesh.mass()).fold(T::zero(), |a, (&v, &m)| a + m * v * v);
    if !(denom > T::zero()) {
        return Err(Error::Singular("zero test vector".into()));
    }
    Ok(mesh.stiffness.quadratic_form(w) / denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair<T> {
    pub lambda: T,
    /// Unit vector in the discrete `L^2` (mass) norm.
    pub vector: Vec<T>,
    pub iterations: usize,
}

/// Smallest eigenvalue by inverse iteration; stops when the relative change
/// of the Rayleigh quotient drops below `tol`.
pub fn eigenvalue_min<T: Real>(mesh: &SphereMesh<T>, tol: T, max_iterations: usize) -> Result<Eigenpair<T>> {
    if !mesh.dirichlet().iter().any(|&d| d) {
        return Err(Error::Singular("no Dirichlet node".into()));
    }
    let n = mesh.len();
    let mass_norm = |v: &[T]| v.iter().zip(mesh.mass()).fold(T::zero(), |a, (&x, &m)| a + m * x * x).sqrt();
    let mut w = mesh.sample(|p| T::one() + p[0] * lit(0.5));
    let norm = mass_norm(&w);
    w.iter_mut().for_each(|v| *v = *v / norm);
    let mut lambda = rayleigh_quotient(mesh, &w)?;
    let mut rhs = vec![T::zero(); n];
    let inner_tol = (tol * lit(1e-2)).max(lit(1e-8));
    for it in 1..=max_iterations {
        for i in 0..n {
            rhs[i] = if mesh.dirichlet[i] { T::zero() } else { mesh.mass[i] * w[i] };
        }
        let scale = rhs.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let mut next: Vec<T> = w.iter().map(|&v| v / lambda).collect();
        let out = conjugate_gradient(|v, o| mesh.apply(v, o), &rhs, &mut next, inner_tol * scale, 20 * n);
        if !out.converged {
            return Err(Error::NonConverged {
                iterations: out.iterations,
                residual: out.residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        let norm = mass_norm(&next);
        next.iter_mut().for_each(|v| *v = *v / norm);
        // Fix the sign so the vector is positive on average.
        if dot(&next, mesh.mass()) < T::zero() {
            next.iter_mut().for_each(|v| *v = -*v);
        }
        let updated = rayleigh_quotient(mesh, &next)?;
        let change = ((updated - lambda) / updated).abs();
        w = next;
        lambda = updated;
        if change <= tol {
            return Ok(Eigenpair {
                lambda,
                vector: w,
                iterations: it,
            });
        }
    }
    Err(Error::NonConverged {
        iterations: max_iterations,
        residual: 0.0,
    })
}
