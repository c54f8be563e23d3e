//! Polytropic ansatz `phi(E) = (E0 - E)_+^k` and its velocity-integrated closures.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

/// How `h` and its derivatives are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureMethod {
    /// Closed-form power laws.
    #[default]
    ClosedForm,
    /// Adaptive quadrature of the velocity integrals.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub k: f64,
    pub e0: f64,
    pub e1: f64,
    pub c_k: f64,
    #[serde(default)]
    pub method: ClosureMethod,
}

/// `4 pi sqrt(2) Gamma(k+1) Gamma(3/2) / Gamma(k+5/2)`.
pub fn closure_constant(k: f64) -> f64 {
    4.0 * PI * SQRT_2 * gamma(k + 1.0) * gamma(1.5) / gamma(k + 2.5)
}

impl AnsatzParams {
    pub fn new(k: f64, e0: f64, e1: f64) -> Result<Self> {
        if !(k > 1.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("polytropic exponent k = {k} must exceed 1")));
        }
        if !(e0 < 0.0) {
            return Err(Error::InvalidParameter(format!("cutoff energy E0 = {e0} must be negative")));
        }
        if !(e1 > 0.0) {
            return Err(Error::InvalidParameter(format!("margin energy E1 = {e1} must be positive")));
        }
        Ok(Self { k, e0, e1, c_k: closure_constant(k), method: ClosureMethod::ClosedForm })
    }

    pub fn with_method(mut self, method: ClosureMethod) -> Self {
        self.method = method;
        self
    }

    /// Exponent of the density closure, `k + 3/2`.
    pub fn density_exponent(&self) -> f64 {
        self.k + 1.5
    }
}

/// `phi(E_J) = (E0 - E_J)_+^k`.
pub fn phi_eval(e_j: f64, p: &AnsatzParams) -> f64 {
    let d = p.e0 - e_j;
    if d > 0.0 {
        d.powf(p.k)
    } else {
        0.0
    }
}

fn phi_prime(e: f64, p: &AnsatzParams) -> f64 {
    let d = p.e0 - e;
    if d > 0.0 {
        -p.k * d.powf(p.k - 1.0)
    } else {
        0.0
    }
}

/// Spatial density `h(s) = 4 pi sqrt2 int_s^E0 sqrt(E - s) phi(E) dE`.
pub fn h_eval(s: f64, p: &AnsatzParams) -> f64 {
    let d = p.e0 - s;
    if d <= 0.0 {
        return 0.0;
    }
    match p.method {
        ClosureMethod::ClosedForm => p.c_k * d.powf(p.k + 1.5),
        ClosureMethod::Quadrature => h_quadrature(s, p).0,
    }
}

/// `(h'(s), h''(s))`.
pub fn h_derivatives(s: f64, p: &AnsatzParams) -> (f64, f64) {
    let d = p.e0 - s;
    if d <= 0.0 {
        return (0.0, 0.0);
    }
    match p.method {
        ClosureMethod::ClosedForm => {
            let a = p.k + 1.5;
            (-p.c_k * a * d.powf(a - 1.0), p.c_k * a * (a - 1.0) * d.powf(a - 2.0))
        }
        ClosureMethod::Quadrature => {
            let (_, h1, h2) = h_quadrature(s, p);
            (h1, h2)
        }
    }
}

/// `h'(s)` alone.
pub fn h_prime(s: f64, p: &AnsatzParams) -> f64 {
    h_derivatives(s, p).0
}

/// Quadrature evaluation of `(h, h', h'')` after substituting `E = s + w^2`.
pub fn h_quadrature(s: f64, p: &AnsatzParams) -> (f64, f64, f64) {
    let d = p.e0 - s;
    if d <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let top = d.sqrt();
    let c = 4.0 * PI * SQRT_2;
    let tol = 1e-15;
    let h = c * integrate_adaptive(&|w: f64| 2.0 * w * w * phi_eval(s + w * w, p), 0.0, top, tol * d.powf(p.k + 1.5));
    let h1 = -c * integrate_adaptive(&|w: f64| phi_eval(s + w * w, p), 0.0, top, tol * d.powf(p.k + 0.5));
    let h2 = -c * integrate_adaptive(&|w: f64| phi_prime(s + w * w, p), 0.0, top, tol * d.powf(p.k - 0.5));
    (h, h1, h2)
}

/// Cutoff closure: `h(u - omega^2 r^2 / 2)` if `u < E0 + E1`, else 0.
pub fn tilde_h(omega: f64, r: f64, u: f64, p: &AnsatzParams) -> f64 {
    if u < p.e0 + p.e1 {
        h_eval(u - 0.5 * omega * omega * r * r, p)
    } else {
        0.0
    }
}

/// `d tilde_h / du` with the same cutoff.
pub fn tilde_h_du(omega: f64, r: f64, u: f64, p: &AnsatzParams) -> f64 {
    if u < p.e0 + p.e1 {
        h_prime(u - 0.5 * omega * omega * r * r, p)
    } else {
        0.0
    }
}

/// Phase-space density in the rotating frame; zero for `|x| >= 4`.
pub fn f_eval<U: Fn([f64; 3]) -> f64>(x: [f64; 3], v: [f64; 3], u: U, omega: f64, p: &AnsatzParams) -> f64 {
    let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if norm >= 4.0 {
        return 0.0;
    }
    phi_eval(jacobi_energy(x, v, u(x), omega), p)
}

/// `E_J = |v|^2/2 + U - omega^2 (x1^2 + x2^2)/2`.
pub fn jacobi_energy(x: [f64; 3], v: [f64; 3], u: f64, omega: f64) -> f64 {
    0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) + u - 0.5 * omega * omega * (x[0] * x[0] + x[1] * x[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> AnsatzParams {
        AnsatzParams::new(1.5, -0.3, 0.15).unwrap()
    }

    #[test]
    fn phi_examples() {
        let p = params();
        assert_eq!(phi_eval(p.e0, &p), 0.0);
        assert_eq!(phi_eval(p.e0 + 1.0, &p), 0.0);
        assert!((phi_eval(p.e0 - 1.0, &p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closure_constant_matches_reference_value() {
        // high-precision value of 4 pi sqrt2 Gamma(5/2) Gamma(3/2) / Gamma(4)
        let c = closure_constant(1.5);
        assert!(((c - 3.489_432_099_819_439_8) / c).abs() < 1e-12, "{c}");
        let p = params();
        assert!((h_eval(p.e0 - 1.0, &p) - p.c_k).abs() < 1e-14);
        assert!((h_prime(p.e0 - 1.0, &p) + 3.0 * p.c_k).abs() < 1e-13);
    }

    #[test]
    fn vacuum_branch_is_zero() {
        let p = params();
        assert_eq!(h_eval(p.e0, &p), 0.0);
        assert_eq!(h_derivatives(p.e0 + 0.2, &p), (0.0, 0.0));
        assert_eq!(tilde_h(0.05, 1.0, p.e0 + p.e1 + 0.1, &p), 0.0);
        assert_eq!(tilde_h(0.0, 3.0, p.e0 - 0.1, &p), h_eval(p.e0 - 0.1, &p));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(AnsatzParams::new(1.0, -0.3, 0.1).is_err());
        assert!(AnsatzParams::new(1.5, 0.1, 0.1).is_err());
        assert!(AnsatzParams::new(1.5, -0.3, 0.0).is_err());
    }

    #[test]
    fn quadrature_path_agrees() {
        let p = params();
        let q = p.with_method(ClosureMethod::Quadrature);
        for s in [-1.3, -0.8, -0.31] {
            let a = h_eval(s, &p);
            let b = h_eval(s, &q);
            assert!(((a - b) / a).abs() < 1e-11, "{a} {b}");
        }
    }
}
