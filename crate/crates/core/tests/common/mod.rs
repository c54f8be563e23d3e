//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotsteady::ansatz::AnsatzParams;
use rotsteady::config::Config;
use rotsteady::deformation::{DeformationField, Discretization};
use rotsteady::operator::Model;
use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

/// Reference first zero of the Lane–Emden equation of index 3.
pub const XI1_N3: f64 = 6.896_848_619_376_960_4;

/// Double-exponential quadrature of `f` over `[a, b]`; tolerates integrable
/// endpoint singularities. Refines the step until two levels agree to `tol`
/// relative to the integral magnitude.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    if half == 0.0 {
        return 0.0;
    }
    let eval = |t: f64| -> f64 {
        let s = 0.5 * PI * t.sinh();
        let ch = s.cosh();
        let x = s.tanh();
        let w = 0.5 * PI * t.cosh() / (ch * ch);
        // distance to the nearer endpoint, computed without cancellation
        let dist = half / (s.abs().exp() * ch);
        let pt = if x < 0.0 { a + dist } else { b - dist };
        if dist <= 0.0 || pt <= a || pt >= b {
            return 0.0;
        }
        w * f(pt)
    };
    let t_max = 4.0;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut t = h;
    while t <= t_max {
        sum += eval(t) + eval(-t);
        t += h;
    }
    let mut prev = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        let mut t = h;
        while t <= t_max {
            sum += eval(t) + eval(-t);
            t += 2.0 * h;
        }
        let cur = sum * h * half;
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `h, h', h''` straight from their defining velocity integrals, written in
/// the offset `u = E - s` so the endpoint singularity is resolved exactly.
pub fn closure_oracle(s: f64, p: &AnsatzParams) -> (f64, f64, f64) {
    let c = 4.0 * PI * SQRT_2;
    let d = p.e0 - s;
    let phi = |u: f64| (d - u).max(0.0).powf(p.k);
    let dphi = |u: f64| -p.k * (d - u).max(0.0).powf(p.k - 1.0);
    let h = c * tanh_sinh(|u| u.sqrt() * phi(u), 0.0, d, 1e-15);
    let h1 = -c * tanh_sinh(|u| phi(u) / (2.0 * u.sqrt()), 0.0, d, 1e-15);
    let h2 = -c * tanh_sinh(|u| dphi(u) / (2.0 * u.sqrt()), 0.0, d, 1e-15);
    (h, h1, h2)
}

/// One classical Runge–Kutta step of `y' = f(x, y)`.
fn rk4_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(f: &F, x: f64, y: &[f64; N], h: f64) -> [f64; N] {
    let add = |y: &[f64; N], k: &[f64; N], s: f64| {
        let mut o = *y;
        for i in 0..N {
            o[i] += s * k[i];
        }
        o
    };
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(x + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(x + h, &add(y, &k3, h));
    let mut o = *y;
    for i in 0..N {
        o[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    o
}

/// First zero of `theta'' + 2 theta' / xi + theta^n = 0`, `theta(0) = 1`,
/// by fixed-step RK4 and cubic Hermite root location.
fn lane_emden_zero(n: f64, h: f64) -> f64 {
    let f = |x: f64, y: &[f64; 2]| [y[1], -y[0].max(0.0).powf(n) - 2.0 * y[1] / x];
    let x0: f64 = 1e-3;
    let mut y = [1.0 - x0 * x0 / 6.0 + n * x0.powi(4) / 120.0, -x0 / 3.0 + n * x0.powi(3) / 30.0];
    let mut x = x0;
    loop {
        let y1 = rk4_step(&f, x, &y, h);
        if y1[0] <= 0.0 {
            // Hermite cubic on [x, x + h], Newton from the secant estimate
            let (p0, m0, p1, m1) = (y[0], y[1] * h, y1[0], y1[1] * h);
            let mut s = p0 / (p0 - p1);
            for _ in 0..50 {
                let (s2, s3) = (s * s, s * s * s);
                let v = (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * m1;
                let d = (6.0 * s2 - 6.0 * s) * p0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * p1 + (3.0 * s2 - 2.0 * s) * m1;
                s -= v / d;
            }
            return x + s * h;
        }
        y = y1;
        x += h;
    }
}

/// Richardson-extrapolated Lane–Emden first zero.
pub fn lane_emden_xi1(n: f64) -> f64 {
    let h = 2e-3;
    let a = lane_emden_zero(n, h);
    let b = lane_emden_zero(n, 0.5 * h);
    (16.0 * b - a) / 15.0
}

/// `(w, w')` of `w'' + 2 w' / r = -coeff w_+^n`, `w(0) = w_c`, at `r_end`, by RK4
/// with `steps` steps after a series start.
pub fn emden_rk4(coeff: f64, n: f64, w_c: f64, r_end: f64, steps: usize) -> (f64, f64) {
    let f = |x: f64, y: &[f64; 2]| [y[1], -coeff * y[0].max(0.0).powf(n) - 2.0 * y[1] / x];
    let r0 = 1e-4 * r_end;
    let a = coeff * w_c.powf(n);
    let b = a * n * coeff * w_c.powf(n - 1.0);
    let mut y = [w_c - a * r0 * r0 / 6.0 + b * r0.powi(4) / 120.0, -a * r0 / 3.0 + b * r0.powi(3) / 30.0];
    let h = (r_end - r0) / steps as f64;
    let mut x = r0;
    for _ in 0..steps {
        y = rk4_step(&f, x, &y, h);
        x += h;
    }
    (y[0], y[1])
}

/// Richardson-extrapolated [`emden_rk4`].
pub fn emden_value(coeff: f64, n: f64, w_c: f64, r_end: f64) -> (f64, f64) {
    let a = emden_rk4(coeff, n, w_c, r_end, 4000);
    let b = emden_rk4(coeff, n, w_c, r_end, 8000);
    ((16.0 * b.0 - a.0) / 15.0, (16.0 * b.1 - a.1) / 15.0)
}

/// Small model for fast tests.
pub fn small_model() -> Model {
    Model::new(&small_config()).unwrap()
}

pub fn small_config() -> Config {
    Config { nodes_per_panel: 32, n_max: 4, ..Config::default() }
}

pub fn default_model() -> Model {
    Model::new(&Config::default()).unwrap()
}

pub fn norm(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Seeded generator for reproducible random directions.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth random symmetric field with mode curves `a r^2 exp(-b r)` plus a
/// linear monopole term, scaled to X-norm `target`.
pub fn random_field(disc: &Arc<Discretization>, rng: &mut ChaCha8Rng, target: f64) -> DeformationField {
    let sq = (4.0 * PI).sqrt();
    let linear: f64 = rng.random_range(-1.0..1.0);
    let curves: Vec<Vec<f64>> = (0..disc.n_modes())
        .map(|m| {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(0.2..2.0);
            disc.grid
                .nodes()
                .iter()
                .map(|&r| a * r * r * (-b * r).exp() + if m == 0 { linear * sq * r } else { 0.0 })
                .collect()
        })
        .collect();
    let z = DeformationField::new(disc.clone(), curves).unwrap();
    z.scale(target / z.x_norm())
}

/// Fixed test points in the open ball of radius 3.9, off the panel edges.
pub fn probes() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for &r in &[0.05, 0.37, 0.83, 1.21, 1.66, 2.45, 3.1, 3.85] {
        for &(c, p) in &[(1.0f64, 0.0f64), (0.0, 0.0), (0.5, 0.7), (-0.3, 2.2), (0.81, 4.0)] {
            let s = (1.0 - c * c).sqrt();
            out.push([r * s * p.cos(), r * s * p.sin(), r * c]);
        }
    }
    out
}
