//! Physics checks on a reconstructed state: orbits in the rotating frame,
//! symmetry and flattening measures, and finite-difference Poisson residuals.

use ode_solvers::{Dop853, OutputType, System, Vector6};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::ansatz::{h_eval, jacobi_energy, phi_eval};
use crate::error::{Error, Result};
use crate::harmonics::Direction;
use crate::operator::SolutionState;

/// Step used by the finite-difference Laplacians.
pub const FD_STEP: f64 = 5e-4;

/// A sampled characteristic of the rotating-frame flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitSample {
    pub x0: [f64; 3],
    pub v0: [f64; 3],
    pub times: Vec<f64>,
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    /// Jacobi integral along the orbit.
    pub e_j: Vec<f64>,
    /// `x1 v2 - x2 v1`.
    pub p: Vec<f64>,
    /// Phase-space density along the orbit.
    pub f: Vec<f64>,
}

impl OrbitSample {
    /// `max |E_J(t) - E_J(0)| / |E_J(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.e_j[0];
        self.e_j.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0.abs()
    }

    /// `max |f(t) - f(0)|`.
    pub fn f_variation(&self) -> f64 {
        let f0 = self.f[0];
        self.f.iter().map(|f| (f - f0).abs()).fold(0.0, f64::max)
    }

    pub fn max_radius(&self) -> f64 {
        self.positions.iter().map(|x| norm(*x)).fold(0.0, f64::max)
    }

    /// CSV with columns `t,x1,x2,x3,v1,v2,v3,e_j,p,f`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x1,x2,x3,v1,v2,v3,e_j,p,f\n");
        for i in 0..self.times.len() {
            let (x, v) = (self.positions[i], self.velocities[i]);
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                self.times[i], x[0], x[1], x[2], v[0], v[1], v[2], self.e_j[i], self.p[i], self.f[i]
            ));
        }
        s
    }
}

fn norm(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

struct RotatingFrame<'a> {
    state: &'a SolutionState,
}

impl System<f64, Vector6<f64>> for RotatingFrame<'_> {
    fn system(&self, _t: f64, y: &Vector6<f64>, dy: &mut Vector6<f64>) {
        let w = self.state.omega;
        let (_, g) = self.state.potential_and_gradient([y[0], y[1], y[2]]);
        dy[0] = y[3];
        dy[1] = y[4];
        dy[2] = y[5];
        dy[3] = -g[0] + 2.0 * w * y[4] + w * w * y[0];
        dy[4] = -g[1] - 2.0 * w * y[3] + w * w * y[1];
        dy[5] = -g[2];
    }
}

/// Integrates the characteristic system from `(x0, v0)` over `[0, t_end]`,
/// recording `samples + 1` equally spaced points.
///
/// The flow is autonomous, so the integrator never needs the time variable.
pub fn integrate_characteristic(
    state: &SolutionState,
    x0: [f64; 3],
    v0: [f64; 3],
    t_end: f64,
    samples: usize,
    tol: f64,
) -> Result<OrbitSample> {
    if !(t_end > 0.0) || samples == 0 || !(tol > 0.0) {
        return Err(Error::InvalidParameter("orbit window, sample count and tolerance must be positive".into()));
    }
    let p = &state.profile().params;
    let e_j0 = jacobi_energy(x0, v0, state.potential(x0), state.omega);
    if !(norm(x0) < 4.0 && e_j0 < p.e0) {
        return Err(Error::InvalidParameter(format!("initial data is not bound: E_J = {e_j0}, E0 = {}", p.e0)));
    }
    let mut out = OrbitSample {
        x0,
        v0,
        times: Vec::with_capacity(samples + 1),
        positions: Vec::with_capacity(samples + 1),
        velocities: Vec::with_capacity(samples + 1),
        e_j: Vec::with_capacity(samples + 1),
        p: Vec::with_capacity(samples + 1),
        f: Vec::with_capacity(samples + 1),
    };
    let mut record = |t: f64, x: [f64; 3], v: [f64; 3]| {
        let u = state.potential(x);
        let e = jacobi_energy(x, v, u, state.omega);
        out.times.push(t);
        out.positions.push(x);
        out.velocities.push(v);
        out.e_j.push(e);
        out.p.push(x[0] * v[1] - x[1] * v[0]);
        out.f.push(if norm(x) < 4.0 { phi_eval(e, p) } else { 0.0 });
    };
    record(0.0, x0, v0);
    let mut y = Vector6::new(x0[0], x0[1], x0[2], v0[0], v0[1], v0[2]);
    let dt = t_end / samples as f64;
    for j in 0..samples {
        let t0 = j as f64 * dt;
        let sys = RotatingFrame { state };
        let mut stepper = Dop853::from_param(
            sys,
            t0,
            t0 + dt,
            dt,
            y,
            tol,
            tol * 1e-2,
            0.9,
            0.0,
            0.333,
            6.0,
            dt,
            0.0,
            1_000_000,
            u32::MAX,
            OutputType::Sparse,
        );
        stepper.integrate().map_err(|e| Error::Integration(e.to_string()))?;
        y = *stepper.y_out().last().expect("integrator returns the end point");
        let x = [y[0], y[1], y[2]];
        let t = t0 + dt;
        if norm(x) >= 4.0 {
            return Err(Error::OrbitEscaped { t });
        }
        record(t, x, [y[3], y[4], y[5]]);
    }
    Ok(out)
}

/// Symmetry and shape measures of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `max |rho(Ax) - rho(x)|` over the coordinate reflections and probe points.
    pub mirror: f64,
    /// Largest `(n, m) != (0, 0)` density mode relative to the monopole.
    pub sphericity: f64,
    /// Largest `m != 0` density mode relative to the monopole.
    pub axisymmetry: f64,
    /// Largest `m != 0` mode of `zeta`.
    pub zeta_axisymmetry: f64,
    pub equatorial_radius: f64,
    pub polar_radius: f64,
    /// `(R_eq - R_pol) / R_eq`, positive for an oblate body.
    pub flattening: f64,
}

/// Deterministic probe points filling `B3`.
pub fn probe_points(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let u = (i as f64 + 0.5) / count as f64;
            let r = 2.9 * u.cbrt();
            let z = 1.0 - 2.0 * ((i * 7 % count) as f64 + 0.5) / count as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * s * phi.cos(), r * s * phi.sin(), r * z]
        })
        .collect()
}

/// Radius where the density along `d` first vanishes.
pub fn support_edge(state: &SolutionState, d: &Direction) -> Result<f64> {
    let ray = state.zeta.ray_along(d);
    let profile = state.profile();
    let p = &profile.params;
    let w2 = state.omega * state.omega;
    let arg = |s: f64| -> Result<f64> {
        let t = ray.invert(s)?;
        let u = if t >= 2.0 { f64::INFINITY } else { profile.u0_at(t) };
        Ok(u - 0.5 * w2 * (s * d.sin_theta).powi(2) - p.e0)
    };
    let (mut lo, mut hi) = (0.0, 3.0);
    if arg(hi)? <= 0.0 {
        return Err(Error::NonCompactSupport(hi));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if arg(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn measure_symmetry(state: &SolutionState) -> Result<SymmetryReport> {
    let modes = state.discretization().basis.modes().to_vec();
    let rho_sup = state.density.mode_sup();
    let zeta_sup: Vec<f64> =
        state.zeta.curves().iter().map(|c| c.iter().fold(0.0, |m: f64, v| m.max(v.abs()))).collect();
    let scale = rho_sup[0];
    let rel = |pred: &dyn Fn(usize, usize) -> bool, sup: &[f64]| {
        modes.iter().zip(sup).filter(|((n, m), _)| pred(*n, *m)).map(|(_, v)| *v).fold(0.0, f64::max)
    };
    let sphericity = rel(&|n, m| (n, m) != (0, 0), &rho_sup) / scale;
    let axisymmetry = rel(&|_, m| m != 0, &rho_sup) / scale;
    let zeta_axisymmetry = rel(&|_, m| m != 0, &zeta_sup);
    let mut mirror = 0.0_f64;
    for x in probe_points(64) {
        let r0 = state.density.value(x);
        for axis in 0..3 {
            let mut y = x;
            y[axis] = -y[axis];
            mirror = mirror.max((state.density.value(y) - r0).abs());
        }
    }
    let equatorial_radius = support_edge(state, &Direction::from_angles(0.0, 0.0))?;
    let polar_radius = support_edge(state, &Direction::from_angles(1.0, 0.0))?;
    Ok(SymmetryReport {
        mirror,
        sphericity,
        axisymmetry,
        zeta_axisymmetry,
        equatorial_radius,
        polar_radius,
        flattening: (equatorial_radius - polar_radius) / equatorial_radius,
    })
}

/// Seven-point Laplacian of `U` at `x`.
pub fn fd_laplacian(state: &SolutionState, x: [f64; 3], h: f64) -> f64 {
    let u0 = state.potential(x);
    let mut acc = -6.0 * u0;
    for k in 0..3 {
        for sgn in [-1.0, 1.0] {
            let mut y = x;
            y[k] += sgn * h;
            acc += state.potential(y);
        }
    }
    acc / (h * h)
}

/// `max |Delta U - 4 pi h~(omega, r, U)|` over a Cartesian grid of spacing
/// `spacing` inside the ball of radius 2.9.
pub fn poisson_residual(state: &SolutionState, spacing: f64, h: f64) -> f64 {
    let p = &state.profile().params;
    let n = (2.9 / spacing).floor() as i64;
    let mut worst = 0.0_f64;
    for i in -n..=n {
        for j in -n..=n {
            for k in -n..=n {
                let x = [i as f64 * spacing, j as f64 * spacing, k as f64 * spacing];
                if norm(x) > 2.9 {
                    continue;
                }
                let u = state.potential(x);
                let rc2 = x[0] * x[0] + x[1] * x[1];
                let rho = if u < p.e0 + p.e1 { h_eval(u - 0.5 * state.omega.powi(2) * rc2, p) } else { 0.0 };
                worst = worst.max((fd_laplacian(state, x, h) - 4.0 * PI * rho).abs());
            }
        }
    }
    worst
}

/// `max |Delta U|` at probe points in the shell `3.2 <= |x| <= 6`.
pub fn exterior_laplacian(state: &SolutionState, h: f64) -> f64 {
    probe_points(64)
        .into_iter()
        .map(|x| {
            let f = (3.2 + 2.8 * norm(x) / 2.9) / norm(x);
            let y = [x[0] * f, x[1] * f, x[2] * f];
            fd_laplacian(state, y, h).abs()
        })
        .fold(0.0, f64::max)
}
