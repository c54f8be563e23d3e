//! Run configuration, read from a single JSON document.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and numerical parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Polytropic exponent of the ansatz.
    pub k: f64,
    /// Gauss–Lobatto nodes per radial panel.
    pub nodes_per_panel: usize,
    /// Highest harmonic degree (even).
    pub n_max: usize,
    /// Polar nodes of the angular grid; `n_max + 2` when absent.
    pub n_theta: Option<usize>,
    /// Azimuthal nodes of the angular grid; `2 n_max + 4` when absent.
    pub n_phi: Option<usize>,
    /// Radius of the admissible ball in `X`.
    pub r_omega: f64,
    /// Chord iteration stops once the `Y` residual is below this.
    pub newton_tol: f64,
    pub max_iters: usize,
    /// Use the full derivative in place of the frozen `L0`.
    pub use_full_derivative: bool,
    /// Largest angular velocity of a continuation; half the cap when absent.
    pub omega_max: Option<f64>,
    pub omega_steps: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            k: 1.5,
            nodes_per_panel: 64,
            n_max: 8,
            n_theta: None,
            n_phi: None,
            r_omega: 0.125,
            newton_tol: 1e-9,
            max_iters: 30,
            use_full_derivative: false,
            omega_max: None,
            omega_steps: 8,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.k > 1.0) {
            return bad(format!("k = {} must exceed 1", self.k));
        }
        if self.k + 1.5 >= 5.0 {
            return bad(format!("k = {} gives a polytrope without compact support", self.k));
        }
        if self.nodes_per_panel < 8 {
            return bad(format!("nodes_per_panel = {} is below 8", self.nodes_per_panel));
        }
        if self.n_max % 2 == 1 || self.n_max < 2 {
            return bad(format!("n_max = {} must be even and at least 2", self.n_max));
        }
        if !(self.r_omega > 0.0 && self.r_omega <= 0.125) {
            return bad(format!("r_omega = {} must lie in (0, 1/8]", self.r_omega));
        }
        if !(self.newton_tol > 0.0) || self.max_iters == 0 {
            return bad("tolerances and iteration limits must be positive".into());
        }
        if let Some(w) = self.omega_max {
            if !(w >= 0.0) {
                return bad(format!("omega_max = {w} must be non-negative"));
            }
        }
        if self.omega_steps == 0 {
            return bad("omega_steps must be positive".into());
        }
        Ok(())
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta.unwrap_or(self.n_max + 2)
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi.unwrap_or(2 * self.n_max + 4)
    }
}
