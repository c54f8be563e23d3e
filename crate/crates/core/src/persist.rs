//! State files, diagnostics records and CSV exports.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::config::Config;
use crate::deformation::DeformationField;
use crate::diagnostics::{exterior_laplacian, measure_symmetry, poisson_residual, SymmetryReport, FD_STEP};
use crate::error::{Error, Result};
use crate::operator::{Model, SolutionState};

/// Schema tag written into every state file.
pub const STATE_SCHEMA: &str = "rotsteady-state/1";

/// Spacing of the Cartesian probe grid for the Poisson residual.
pub const POISSON_SPACING: f64 = 0.2;

/// Bounds applied by [`StateDiagnostics::checks`].
pub const POISSON_TOL: f64 = 5e-4;
pub const MIRROR_TOL: f64 = 1e-12;
pub const AXISYMMETRY_TOL: f64 = 1e-8;
pub const EXTERIOR_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitude {
    pub n: usize,
    pub m: usize,
    /// `sup_r |rho_nm(r)|`.
    pub rho: f64,
    /// `sup_r |zeta_nm(r)|`.
    pub zeta: f64,
}

/// Everything `verify` recomputes from the raw state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub omega: f64,
    pub c: f64,
    pub mass: f64,
    pub e0: f64,
    pub e1: f64,
    pub residual_y: f64,
    pub consistency_error: f64,
    pub zeta_x_norm: f64,
    pub support_radius: f64,
    pub symmetry: SymmetryReport,
    pub poisson_residual: f64,
    pub exterior_laplacian: f64,
    pub modes: Vec<ModeAmplitude>,
}

/// One pass/fail line of a verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl StateDiagnostics {
    pub fn compute(state: &SolutionState) -> Result<Self> {
        let p = state.profile();
        let basis = &state.discretization().basis;
        let rho = state.density.mode_sup();
        let modes = basis
            .modes()
            .iter()
            .enumerate()
            .map(|(i, &(n, m))| ModeAmplitude {
                n,
                m,
                rho: rho[i],
                zeta: state.zeta.curves()[i].iter().fold(0.0, |a: f64, v| a.max(v.abs())),
            })
            .collect();
        Ok(Self {
            omega: state.omega,
            c: state.c,
            mass: p.mass,
            e0: p.e0,
            e1: p.e1,
            residual_y: state.residual_y,
            consistency_error: state.consistency_error,
            zeta_x_norm: state.zeta.x_norm(),
            support_radius: state.density.support_radius(),
            symmetry: measure_symmetry(state)?,
            poisson_residual: poisson_residual(state, POISSON_SPACING, FD_STEP),
            exterior_laplacian: exterior_laplacian(state, 1e-3),
            modes,
        })
    }

    /// The invariants every accepted state must satisfy.
    pub fn checks(&self, cfg: &Config) -> Vec<Check> {
        let below = |name: &str, value: f64, bound: f64| Check { name: name.into(), value, bound, passed: value < bound };
        let above = |name: &str, value: f64, bound: f64| Check { name: name.into(), value, bound, passed: value > bound };
        let mut out = vec![
            below("residual_y", self.residual_y, cfg.newton_tol),
            above("max_principle", self.c, self.e0 + self.e1),
            below("support_radius", self.support_radius, 3.0),
            below("zeta_x_norm", self.zeta_x_norm, cfg.r_omega),
            below("poisson_residual", self.poisson_residual, POISSON_TOL),
            below("exterior_laplacian", self.exterior_laplacian, EXTERIOR_TOL),
            below("mirror", self.symmetry.mirror, MIRROR_TOL),
            below("axisymmetry", self.symmetry.axisymmetry, AXISYMMETRY_TOL),
            below("zeta_axisymmetry", self.symmetry.zeta_axisymmetry, AXISYMMETRY_TOL),
        ];
        if self.omega != 0.0 {
            out.push(above("sphericity", self.symmetry.sphericity, 0.0));
        }
        out
    }
}

/// A solved state on disk: configuration, `omega`, the mode curves of `zeta`
/// and the diagnostics computed when it was written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub schema: String,
    pub config: Config,
    pub omega: f64,
    pub modes: Vec<(usize, usize)>,
    pub zeta: Vec<Vec<f64>>,
    pub diagnostics: StateDiagnostics,
}

impl StateFile {
    pub fn from_state(config: &Config, state: &SolutionState) -> Result<Self> {
        Ok(Self {
            schema: STATE_SCHEMA.into(),
            config: config.clone(),
            omega: state.omega,
            modes: state.discretization().basis.modes().to_vec(),
            zeta: state.zeta.curves().to_vec(),
            diagnostics: StateDiagnostics::compute(state)?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        if f.schema != STATE_SCHEMA {
            return Err(Error::InvalidParameter(format!("unknown state schema {:?}", f.schema)));
        }
        f.config.validate()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Rebuilds the model and the solution state from the stored curves.
    pub fn restore(&self) -> Result<(Model, SolutionState)> {
        let model = Model::new(&self.config)?;
        if self.modes != model.basis().modes() {
            return Err(Error::InvalidParameter("stored mode layout does not match the configuration".into()));
        }
        let zeta = DeformationField::new(model.discretization().clone(), self.zeta.clone())?;
        let state = model.reconstruct(self.omega, &zeta)?;
        Ok((model, state))
    }
}

/// Outcome of [`verify_state`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Recomputed diagnostics equal the stored ones bit for bit.
    pub reproduced: bool,
    pub checks: Vec<Check>,
    pub diagnostics: StateDiagnostics,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.reproduced && self.checks.iter().all(|c| c.passed)
    }
}

/// Recomputes every diagnostic of a stored state and re-runs the invariant checks.
pub fn verify_state(file: &StateFile) -> Result<VerifyReport> {
    let (_, state) = file.restore()?;
    let diagnostics = StateDiagnostics::compute(&state)?;
    Ok(VerifyReport {
        reproduced: diagnostics == file.diagnostics,
        checks: diagnostics.checks(&file.config),
        diagnostics,
    })
}

/// `rho` and `U` on an `(r, theta)` grid in the half plane `phi = 0`.
/// Columns: `r,theta,rho,u`.
pub fn fields_csv(state: &SolutionState, n_r: usize, n_theta: usize) -> String {
    let mut s = String::from("r,theta,rho,u\n");
    for i in 0..=n_r {
        let r = 3.0 * i as f64 / n_r as f64;
        for j in 0..=n_theta {
            let th = std::f64::consts::PI * j as f64 / n_theta as f64;
            let x = [r * th.sin(), 0.0, r * th.cos()];
            s.push_str(&format!("{},{},{},{}\n", r, th, state.density.value(x), state.potential(x)));
        }
    }
    s
}
