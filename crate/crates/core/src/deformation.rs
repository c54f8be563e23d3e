//! Symmetric fields on `B4`, their norms, and the ray deformation
//! `g(x) = x + zeta(x) x / |x|`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, R_MAX};
use crate::harmonics::{norm3, Direction, ModeValues, SymmetryBasis};

/// Radial grid and angular basis shared by all fields of one problem.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: RadialGrid,
    pub basis: SymmetryBasis,
}

impl Discretization {
    pub fn new(grid: RadialGrid, basis: SymmetryBasis) -> Arc<Self> {
        Arc::new(Self { grid, basis })
    }

    pub fn n_radial(&self) -> usize {
        self.grid.len()
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    /// Mode curves from samples `f(r_i * xi_a)`, laid out `[i][a]`.
    pub fn analyze(&self, samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let nm = self.n_modes();
        let mut curves = vec![vec![0.0; self.n_radial()]; nm];
        for (i, row) in samples.iter().enumerate() {
            let c = self.basis.forward_unchecked(row);
            for m in 0..nm {
                curves[m][i] = c[m];
            }
        }
        curves
    }

    /// Mode curves of a function given pointwise.
    pub fn project<F: Fn([f64; 3]) -> f64>(&self, f: F) -> Vec<Vec<f64>> {
        let samples: Vec<Vec<f64>> = self
            .grid
            .nodes()
            .iter()
            .map(|&r| {
                self.basis
                    .directions()
                    .iter()
                    .map(|d| f([r * d.xi[0], r * d.xi[1], r * d.xi[2]]))
                    .collect()
            })
            .collect();
        self.analyze(&samples)
    }

    /// Radial profile along angular node `a`: `sum_m c_m(r) Y_m(xi_a)`.
    pub fn ray(&self, curves: &[Vec<f64>], a: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_radial()];
        for (m, c) in curves.iter().enumerate() {
            let y = self.basis.value(m, a);
            for (o, v) in out.iter_mut().zip(c) {
                *o += y * v;
            }
        }
        out
    }

    /// Radial profile along an arbitrary direction.
    pub fn ray_along(&self, curves: &[Vec<f64>], mv: &ModeValues) -> Vec<f64> {
        let mut out = vec![0.0; self.n_radial()];
        for (c, y) in curves.iter().zip(&mv.value) {
            if *y == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(c) {
                *o += y * v;
            }
        }
        out
    }

    /// Value and gradient of `sum_m c_m(|x|) Y_m(x / |x|)`.
    pub fn value_and_gradient(&self, curves: &[Vec<f64>], x: [f64; 3]) -> (f64, [f64; 3]) {
        let r = norm3(x);
        if r == 0.0 {
            let mut g = 0.0;
            for (m, c) in curves.iter().enumerate() {
                if self.basis.modes()[m] == (0, 0) {
                    g = c[0];
                }
            }
            return (g * 0.282_094_791_773_878_14, [0.0; 3]);
        }
        let d = Direction::of(x);
        let mv = self.basis.mode_values(&d);
        let (mut v, mut dr, mut dt, mut dp) = (0.0, 0.0, 0.0, 0.0);
        for (m, c) in curves.iter().enumerate() {
            let (cv, cd) = self.grid.interpolate_with_derivative(c, r.min(R_MAX));
            v += cv * mv.value[m];
            dr += cd * mv.value[m];
            dt += cv * mv.d_theta[m];
            dp += cv * mv.d_phi[m];
        }
        let (et, ep) = (d.e_theta(), d.e_phi());
        let mut g = [0.0; 3];
        for k in 0..3 {
            g[k] = dr * d.xi[k] + (dt * et[k] + dp * ep[k]) / r;
        }
        (v, g)
    }

    /// `sup |grad f|` over the tensor grid for mode curves `c`.
    fn gradient_sup(&self, curves: &[Vec<f64>]) -> f64 {
        let grid = &self.grid;
        let derivs: Vec<Vec<Vec<f64>>> = curves.iter().map(|c| grid.panel_derivatives(c)).collect();
        let nd = self.basis.n_directions();
        let mut best = 0.0_f64;
        for (pi, p) in grid.panels().iter().enumerate() {
            for (j, &r) in p.nodes.iter().enumerate() {
                let i = p.start + j;
                for a in 0..nd {
                    let (mut dr, mut dt, mut dp) = (0.0, 0.0, 0.0);
                    for (m, c) in curves.iter().enumerate() {
                        let d = derivs[m][pi][j];
                        let over_r = if r > 0.0 { c[i] / r } else { d };
                        dr += d * self.basis.value(m, a);
                        dt += over_r * self.basis.d_theta(m, a);
                        dp += over_r * self.basis.d_phi(m, a);
                    }
                    best = best.max((dr * dr + dt * dt + dp * dp).sqrt());
                }
            }
        }
        best
    }

    /// `sup |grad f| / |x|` for reduced curves `tau = f / r^2`.
    fn reduced_gradient_sup(&self, reduced: &[Vec<f64>]) -> f64 {
        let grid = &self.grid;
        let derivs: Vec<Vec<Vec<f64>>> = reduced.iter().map(|c| grid.panel_derivatives(c)).collect();
        let nd = self.basis.n_directions();
        let mut best = 0.0_f64;
        for (pi, p) in grid.panels().iter().enumerate() {
            for (j, &r) in p.nodes.iter().enumerate() {
                let i = p.start + j;
                for a in 0..nd {
                    let (mut dr, mut dt, mut dp) = (0.0, 0.0, 0.0);
                    for (m, t) in reduced.iter().enumerate() {
                        let radial = 2.0 * t[i] + r * derivs[m][pi][j];
                        dr += radial * self.basis.value(m, a);
                        dt += t[i] * self.basis.d_theta(m, a);
                        dp += t[i] * self.basis.d_phi(m, a);
                    }
                    best = best.max((dr * dr + dt * dt + dp * dp).sqrt());
                }
            }
        }
        best
    }
}

fn check_shape(disc: &Discretization, curves: &[Vec<f64>]) -> Result<()> {
    if curves.len() != disc.n_modes() {
        return Err(Error::SampleCount { expected: disc.n_modes(), got: curves.len() });
    }
    for c in curves {
        if c.len() != disc.n_radial() {
            return Err(Error::SampleCount { expected: disc.n_radial(), got: c.len() });
        }
    }
    Ok(())
}

fn combine(a: &[Vec<f64>], alpha: f64, b: &[Vec<f64>], beta: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| alpha * u + beta * v).collect())
        .collect()
}

/// A deformation `zeta` in the space `X`.
#[derive(Debug, Clone)]
pub struct DeformationField {
    disc: Arc<Discretization>,
    curves: Vec<Vec<f64>>,
    x_norm: f64,
}

impl DeformationField {
    /// Builds a field from mode curves; the value at the origin is forced to 0.
    pub fn new(disc: Arc<Discretization>, mut curves: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(&disc, &curves)?;
        for c in &mut curves {
            c[0] = 0.0;
        }
        let x_norm = disc.gradient_sup(&curves);
        Ok(Self { disc, curves, x_norm })
    }

    pub fn zero(disc: Arc<Discretization>) -> Self {
        let curves = vec![vec![0.0; disc.n_radial()]; disc.n_modes()];
        Self { disc, curves, x_norm: 0.0 }
    }

    /// Projects a pointwise function onto the symmetric basis.
    pub fn from_fn<F: Fn([f64; 3]) -> f64>(disc: Arc<Discretization>, f: F) -> Result<Self> {
        let curves = disc.project(f);
        Self::new(disc, curves)
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    pub fn into_curves(self) -> Vec<Vec<f64>> {
        self.curves
    }

    /// `sup |grad zeta|` over the evaluation grid.
    pub fn x_norm(&self) -> f64 {
        self.x_norm
    }

    pub fn is_admissible(&self, radius: f64) -> bool {
        self.x_norm < radius
    }

    /// `self * alpha + other * beta`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        Self::new(self.disc.clone(), combine(&self.curves, alpha, &other.curves, beta))
            .expect("shapes agree")
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.combine(alpha, self, 0.0)
    }

    /// `zeta(x)`.
    pub fn value(&self, x: [f64; 3]) -> f64 {
        self.disc.value_and_gradient(&self.curves, x).0
    }

    /// `grad zeta(x)`.
    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        self.disc.value_and_gradient(&self.curves, x).1
    }

    /// Ray profile of `zeta` along angular node `a`.
    pub fn ray(&self, a: usize) -> Ray<'_> {
        Ray { grid: &self.disc.grid, values: self.disc.ray(&self.curves, a) }
    }

    /// Ray profile of `zeta` along an arbitrary direction.
    pub fn ray_along(&self, d: &Direction) -> Ray<'_> {
        let mv = self.disc.basis.mode_values(d);
        Ray { grid: &self.disc.grid, values: self.disc.ray_along(&self.curves, &mv) }
    }

    /// `g(x) = x (1 + zeta(x) / |x|)`.
    pub fn g_apply(&self, x: [f64; 3]) -> [f64; 3] {
        let r = norm3(x);
        if r == 0.0 {
            return [0.0; 3];
        }
        let f = 1.0 + self.value(x) / r;
        [x[0] * f, x[1] * f, x[2] * f]
    }

    /// `Dg(x)`, entry `[j][k] = d g_j / d x_k`.
    pub fn g_jacobian(&self, x: [f64; 3]) -> Result<[[f64; 3]; 3]> {
        let r = norm3(x);
        if r == 0.0 {
            return Err(Error::InvalidParameter("Jacobian of g is undefined at the origin".into()));
        }
        let (z, g) = self.disc.value_and_gradient(&self.curves, x);
        let xh = [x[0] / r, x[1] / r, x[2] / r];
        let mut m = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                let delta = if j == k { 1.0 } else { 0.0 };
                m[j][k] = delta + xh[j] * g[k] + z / r * (delta - xh[j] * xh[k]);
            }
        }
        Ok(m)
    }

    /// Solves `g(x) = y` on the ray through `y`, for `|y| <= 3`.
    pub fn g_inverse(&self, y: [f64; 3]) -> Result<[f64; 3]> {
        let s = norm3(y);
        if s > 3.0 * (1.0 + 1e-12) {
            return Err(Error::OutOfRange(s));
        }
        if s == 0.0 {
            return Ok([0.0; 3]);
        }
        let ray = self.ray_along(&Direction::of(y));
        let t = ray.invert(s)?;
        let f = t / s;
        Ok([y[0] * f, y[1] * f, y[2] * f])
    }
}

/// `zeta` restricted to one ray, as values at the radial nodes.
#[derive(Debug, Clone)]
pub struct Ray<'a> {
    grid: &'a RadialGrid,
    pub values: Vec<f64>,
}

impl<'a> Ray<'a> {
    pub fn new(grid: &'a RadialGrid, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    /// `(z(t), z'(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        self.grid.interpolate_with_derivative(&self.values, t)
    }

    /// Root `t` of `t + z(t) = s` by safeguarded Newton iteration.
    pub fn invert(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        if R_MAX + self.values[self.values.len() - 1] < s {
            return Err(Error::RootNotBracketed { target: s });
        }
        let (mut lo, mut hi) = (0.0, R_MAX);
        let mut t = s.min(R_MAX);
        for _ in 0..200 {
            let (z, dz) = self.eval(t);
            let f = t + z - s;
            if f == 0.0 {
                return Ok(t);
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let slope = 1.0 + dz;
            let mut next = if slope > 0.0 { t - f / slope } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 2.0 * f64::EPSILON * t || hi - lo <= 2.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::RootNotBracketed { target: s })
    }
}

/// A field in the space `Y`, stored as reduced curves `f_nm(r) / r^2`.
#[derive(Debug, Clone)]
pub struct YField {
    disc: Arc<Discretization>,
    reduced: Vec<Vec<f64>>,
    y_norm: f64,
}

impl YField {
    /// From reduced curves; origin values are extrapolated from `(0, 1]`.
    pub fn from_reduced(disc: Arc<Discretization>, mut reduced: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(&disc, &reduced)?;
        for t in &mut reduced {
            t[0] = disc.grid.extrapolate_to_origin(t);
        }
        let y_norm = disc.reduced_gradient_sup(&reduced);
        Ok(Self { disc, reduced, y_norm })
    }

    /// From mode curves of `f` itself.
    pub fn from_values(disc: Arc<Discretization>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(&disc, &values)?;
        let r = disc.grid.nodes().to_vec();
        let reduced = values
            .iter()
            .map(|c| c.iter().zip(&r).map(|(v, r)| if *r > 0.0 { v / (r * r) } else { 0.0 }).collect())
            .collect();
        Self::from_reduced(disc, reduced)
    }

    pub fn zero(disc: Arc<Discretization>) -> Self {
        let reduced = vec![vec![0.0; disc.n_radial()]; disc.n_modes()];
        Self { disc, reduced, y_norm: 0.0 }
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn reduced(&self) -> &[Vec<f64>] {
        &self.reduced
    }

    /// Mode curves `f_nm(r)`.
    pub fn values(&self) -> Vec<Vec<f64>> {
        let r = self.disc.grid.nodes();
        self.reduced
            .iter()
            .map(|t| t.iter().zip(r).map(|(v, r)| v * r * r).collect())
            .collect()
    }

    /// `sup |grad f| / |x|` over the evaluation grid.
    pub fn y_norm(&self) -> f64 {
        self.y_norm
    }

    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let reduced = combine(&self.reduced, alpha, &other.reduced, beta);
        let y_norm = self.disc.reduced_gradient_sup(&reduced);
        Self { disc: self.disc.clone(), reduced, y_norm }
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.combine(alpha, self, 0.0)
    }

    /// `f(x)`.
    pub fn value(&self, x: [f64; 3]) -> f64 {
        let r = norm3(x);
        r * r * self.disc.value_and_gradient(&self.reduced, x).0
    }
}
