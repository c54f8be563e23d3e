//! Non-rotating polytropic base state.
//!
//! With `w = E0 - U0` the radial Poisson equation becomes the Emden equation
//! `w'' + (2/r) w' = -4 pi c_k w_+^n`, `n = k + 3/2`. It is shot outward from
//! a series start and rescaled so that the support is the unit ball.
//!
//! The node values of `U0` and `U0'` are then recomputed from the Newtonian
//! integral of `rho0` with the same radial quadrature the operator uses, so
//! the discrete base state is a root of the discrete operator to rounding.

use ode_solvers::{Dop853, OutputType, System, Vector3};
use serde::Serialize;
use std::f64::consts::PI;

use crate::ansatz::{closure_constant, h_eval, h_prime, AnsatzParams};
use crate::error::{Error, Result};
use crate::grid::{RadialGrid, R_MAX};
use crate::harmonics::PotentialOperator;

const R_START: f64 = 1e-4;
const RTOL: f64 = 1e-13;

struct Emden {
    coeff: f64,
    n: f64,
}

// The radius is carried as a third component: the DOP853 tableau in
// ode_solvers places its last stage at the wrong abscissa, so only
// autonomous systems are integrated correctly.
impl System<f64, Vector3<f64>> for Emden {
    fn system(&self, _r: f64, y: &Vector3<f64>, dy: &mut Vector3<f64>) {
        dy[0] = y[1];
        dy[1] = -self.coeff * y[0].max(0.0).powf(self.n) - 2.0 * y[1] / y[2];
        dy[2] = 1.0;
    }
}

struct StopAtZero(Emden);

impl System<f64, Vector3<f64>> for StopAtZero {
    fn system(&self, r: f64, y: &Vector3<f64>, dy: &mut Vector3<f64>) {
        self.0.system(r, y, dy)
    }

    fn solout(&mut self, _r: f64, y: &Vector3<f64>, _dy: &Vector3<f64>) -> bool {
        y[0] < 0.0
    }
}

/// Outward solution of the Emden equation for one central depth.
#[derive(Debug, Clone)]
pub struct EmdenSolution {
    pub k: f64,
    pub w_c: f64,
    /// First zero of `w`.
    pub radius: f64,
    /// `w'(radius)`.
    pub slope: f64,
    /// Length scale `1 / sqrt(4 pi c_k w_c^(n-1))`.
    pub scale: f64,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub wp: Vec<f64>,
}

fn series_start(coeff: f64, n: f64, w_c: f64, r: f64) -> (f64, f64) {
    // theta(xi) = 1 - xi^2/6 + n xi^4/120 - n(8n-5) xi^6/15120
    let a = 1.0 / (coeff * w_c.powf(n - 1.0)).sqrt();
    let x = r / a;
    let x2 = x * x;
    let th = 1.0 - x2 / 6.0 + n * x2 * x2 / 120.0 - n * (8.0 * n - 5.0) * x2 * x2 * x2 / 15120.0;
    let dth = -x / 3.0 + n * x2 * x / 30.0 - n * (8.0 * n - 5.0) * x2 * x2 * x / 2520.0;
    (w_c * th, w_c * dth / a)
}

/// Sparse-output DOP853 with stiffness detection disabled; the `2/r`
/// term near the centre otherwise trips the heuristic.
fn solver<F: System<f64, Vector3<f64>>>(f: F, r0: f64, r1: f64, y: Vector3<f64>, atol: f64) -> Dop853<f64, Vector3<f64>, F> {
    Dop853::from_param(
        f, r0, r1, r1 - r0, y, RTOL, atol, 0.9, 0.0, 0.333, 6.0, r1 - r0, 0.0, 1_000_000, u32::MAX, OutputType::Sparse,
    )
}

fn step(sys: Emden, r0: f64, r1: f64, mut y: Vector3<f64>, atol: f64) -> Result<Vector3<f64>> {
    y[2] = r0;
    if r1 == r0 {
        return Ok(y);
    }
    let mut s = solver(sys, r0, r1, y, atol);
    s.integrate().map_err(|e| Error::Integration(e.to_string()))?;
    Ok(*s.y_out().last().expect("integrator produced no output"))
}

/// Integrates from the centre to the first zero of `w`.
pub fn solve_emden(k: f64, w_c: f64) -> Result<EmdenSolution> {
    if !(k > 1.0) {
        return Err(Error::InvalidParameter(format!("polytropic exponent k = {k} must exceed 1")));
    }
    if !(w_c > 0.0) {
        return Err(Error::InvalidParameter(format!("central depth w_c = {w_c} must be positive")));
    }
    let n = k + 1.5;
    let coeff = 4.0 * PI * closure_constant(k);
    let scale = 1.0 / (coeff * w_c.powf(n - 1.0)).sqrt();
    let r_start = R_START * scale.min(1.0);
    let r_max = 1000.0 * scale;
    let atol = 1e-16 * w_c;
    let (w0, wp0) = series_start(coeff, n, w_c, r_start);
    let mut s = solver(StopAtZero(Emden { coeff, n }), r_start, r_max, Vector3::new(w0, wp0, r_start), atol);
    s.integrate().map_err(|e| Error::Integration(e.to_string()))?;
    let xs = s.x_out().clone();
    let ys = s.y_out().clone();
    let last = ys.len() - 1;
    if ys[last][0] >= 0.0 {
        return Err(Error::NonCompactSupport(r_max));
    }
    // Newton on the zero from the last positive accepted point
    let (r_lo, y_lo) = (xs[last - 1], ys[last - 1]);
    let mut r_root = r_lo - y_lo[0] / y_lo[1];
    for _ in 0..50 {
        let y = step(Emden { coeff, n }, r_lo, r_root, y_lo, atol)?;
        let dr = -y[0] / y[1];
        r_root += dr;
        if dr.abs() <= 1e-15 * r_root {
            break;
        }
    }
    let y_root = step(Emden { coeff, n }, r_lo, r_root, y_lo, atol)?;
    let mut r = vec![0.0];
    let mut w = vec![w_c];
    let mut wp = vec![0.0];
    for (x, y) in xs[..last].iter().zip(&ys[..last]) {
        r.push(*x);
        w.push(y[0]);
        wp.push(y[1]);
    }
    r.push(r_root);
    w.push(0.0);
    wp.push(y_root[1]);
    Ok(EmdenSolution { k, w_c, radius: r_root, slope: y_root[1], scale, r, w, wp })
}

impl EmdenSolution {
    /// `(w, w')` at the given increasing radii in `[0, radius]`.
    pub fn sample(&self, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
        let n = self.k + 1.5;
        let coeff = 4.0 * PI * closure_constant(self.k);
        let atol = 1e-16 * self.w_c;
        let r_start = self.r[1];
        let mut out = Vec::with_capacity(radii.len());
        let (w0, wp0) = series_start(coeff, n, self.w_c, r_start);
        let mut pos = r_start;
        let mut y = Vector3::new(w0, wp0, r_start);
        for &t in radii {
            if t > self.radius * (1.0 + 1e-14) {
                return Err(Error::OutOfRange(t));
            }
            if t <= r_start {
                out.push(series_start(coeff, n, self.w_c, t));
                continue;
            }
            let t = t.min(self.radius);
            y = step(Emden { coeff, n }, pos, t, y, atol)?;
            pos = t;
            out.push((y[0], y[1]));
        }
        Ok(out)
    }

    /// Dimensionless first zero `xi_1 = radius / scale`.
    pub fn xi1(&self) -> f64 {
        self.radius / self.scale
    }
}

/// The normalized base state on the radial grid.
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub params: AnsatzParams,
    #[serde(skip)]
    grid: RadialGrid,
    pub nodes: Vec<f64>,
    pub u0: Vec<f64>,
    pub u0p: Vec<f64>,
    pub rho0: Vec<f64>,
    pub rho0p: Vec<f64>,
    /// `U0(0)`.
    pub u0_center: f64,
    /// `(U0(r) - U0(0)) / r^2` at the nodes, with the limit at `r = 0`.
    pub u0_reduced: Vec<f64>,
    /// `U0'(r) / r` at the nodes, with the limit at `r = 0`.
    pub u0p_reduced: Vec<f64>,
    pub mass: f64,
    pub e0: f64,
    pub e1: f64,
    pub c_lb: f64,
    /// Central depth of the normalized Emden solution.
    pub w_c: f64,
    /// `E0 - U0` from the shooting solution at the nodes of `[0, 1]`.
    #[serde(skip)]
    pub w_ode: Vec<f64>,
}

/// Point values of the base state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileValues {
    pub u0: f64,
    pub u0p: f64,
    pub rho0: f64,
    pub rho0p: f64,
}

/// Rescales an Emden solution to unit support and fills the grid.
pub fn normalize_profile(raw: &EmdenSolution, grid: &RadialGrid) -> Result<RadialProfile> {
    let n = raw.k + 1.5;
    let lambda = raw.radius;
    let amp = lambda.powf(2.0 / (n - 1.0));
    let c_k = closure_constant(raw.k);
    let nodes = grid.nodes().to_vec();
    let inner: Vec<f64> = nodes.iter().filter(|&&r| r < 1.0).map(|r| r * lambda).collect();
    let sampled = raw.sample(&inner)?;
    let mut w_ode = vec![0.0; nodes.len()];
    let mut rho_ode = vec![0.0; nodes.len()];
    for (i, (w, _)) in sampled.iter().enumerate() {
        w_ode[i] = amp * w;
        rho_ode[i] = c_k * w_ode[i].max(0.0).powf(n);
    }
    let op = PotentialOperator::new(grid, &[0]);
    let pot = op.apply(0, &rho_ode);
    let u0_center = pot.center;
    let u0_reduced = pot.reduced;
    let u0p_reduced = pot.reduced_deriv;
    let i1 = grid.node_index(1.0).expect("grid has a node at r = 1");
    let e0 = u0_center + u0_reduced[i1];
    let mass = -e0;
    let e1 = 0.5 * mass;
    let params = AnsatzParams::new(raw.k, e0, e1)?;
    let mut u0 = vec![0.0; nodes.len()];
    let mut u0p = vec![0.0; nodes.len()];
    let mut rho0 = vec![0.0; nodes.len()];
    let mut rho0p = vec![0.0; nodes.len()];
    for (i, &r) in nodes.iter().enumerate() {
        if r < 1.0 {
            u0[i] = u0_center + r * r * u0_reduced[i];
            u0p[i] = r * u0p_reduced[i];
            rho0[i] = h_eval(u0[i], &params);
            rho0p[i] = h_prime(u0[i], &params) * u0p[i];
        } else if r == 1.0 {
            u0[i] = e0;
            u0p[i] = mass;
        } else {
            u0[i] = -mass / r;
            u0p[i] = mass / (r * r);
        }
    }
    let c_lb = nodes
        .iter()
        .zip(&u0p)
        .skip(1)
        .map(|(r, d)| d / r)
        .fold(f64::INFINITY, f64::min);
    let profile = RadialProfile {
        params,
        grid: grid.clone(),
        nodes,
        u0,
        u0p,
        rho0,
        rho0p,
        u0_center,
        u0_reduced,
        u0p_reduced,
        mass,
        e0,
        e1,
        c_lb,
        w_c: raw.w_c * amp,
        w_ode,
    };
    profile.validate()?;
    Ok(profile)
}

/// Shoots, normalizes and validates the base state for exponent `k`.
pub fn build_profile(k: f64, grid: &RadialGrid) -> Result<RadialProfile> {
    let raw = solve_emden(k, 1.0)?;
    normalize_profile(&raw, grid)
}

impl RadialProfile {
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Structural checks run after construction.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidProfile(m));
        if !(self.rho0[0] > 0.0) {
            return fail(format!("central density {} is not positive", self.rho0[0]));
        }
        for i in 1..self.nodes.len() {
            if self.rho0[i] > self.rho0[i - 1] || self.rho0[i] < 0.0 {
                return fail(format!("density not monotone at r = {}", self.nodes[i]));
            }
            if !(self.u0[i] > self.u0[i - 1]) {
                return fail(format!("potential not increasing at r = {}", self.nodes[i]));
            }
            if self.nodes[i] >= 1.0 && self.rho0[i] != 0.0 {
                return fail(format!("density nonzero outside the unit ball at r = {}", self.nodes[i]));
            }
        }
        if !(self.e1 > 0.0) || !(self.c_lb > 0.0) {
            return fail(format!("E1 = {}, C_lb = {}", self.e1, self.c_lb));
        }
        Ok(())
    }

    /// `(U0, U0', rho0, rho0')` at `0 <= r <= 4`.
    pub fn eval(&self, r: f64) -> Result<ProfileValues> {
        if !(0.0..=R_MAX).contains(&r) {
            return Err(Error::OutOfRange(r));
        }
        Ok(self.eval_unchecked(r))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> ProfileValues {
        if r >= 1.0 {
            return ProfileValues { u0: -self.mass / r, u0p: self.mass / (r * r), rho0: 0.0, rho0p: 0.0 };
        }
        let g = &self.grid;
        ProfileValues {
            u0: self.u0_center + r * r * g.interpolate(&self.u0_reduced, r),
            u0p: r * g.interpolate(&self.u0p_reduced, r),
            rho0: g.interpolate(&self.rho0, r).max(0.0),
            rho0p: g.interpolate(&self.rho0p, r).min(0.0),
        }
    }

    /// `U0(t)` for any `t >= 0`.
    #[inline]
    pub fn u0_at(&self, t: f64) -> f64 {
        if t >= 1.0 {
            -self.mass / t
        } else {
            self.u0_center + t * t * self.grid.interpolate(&self.u0_reduced, t)
        }
    }

    /// `U0'(t)` for any `t >= 0`.
    #[inline]
    pub fn u0p_at(&self, t: f64) -> f64 {
        if t >= 1.0 {
            self.mass / (t * t)
        } else {
            t * self.grid.interpolate(&self.u0p_reduced, t)
        }
    }

    /// `rho0'(t)`, zero outside the unit ball.
    pub fn rho0p_at(&self, t: f64) -> f64 {
        if t >= 1.0 {
            0.0
        } else {
            self.grid.interpolate(&self.rho0p, t).min(0.0)
        }
    }

    /// Angular-velocity cap `sqrt(E1) / 4`.
    pub fn omega_cap(&self) -> f64 {
        self.e1.sqrt() / 4.0
    }

    /// CSV with a `#` header line carrying `k, M, E0, E1`.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# k={},M={},E0={},E1={}\nr,U0,U0p,rho0,rho0p\n",
            self.params.k, self.mass, self.e0, self.e1
        );
        for i in 0..self.nodes.len() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                self.nodes[i], self.u0[i], self.u0p[i], self.rho0[i], self.rho0p[i]
            ));
        }
        s
    }
}
