//! Chord iteration for `T(omega, zeta) = 0` and natural continuation in `omega`.

use serde::Serialize;

use crate::config::Config;
use crate::deformation::DeformationField;
use crate::error::{Error, Result};
use crate::linearized::{apply_dt_at, LinearizedOperator};
use crate::operator::{Model, SolutionState};

/// Result of one solve at fixed `omega`.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub zeta: DeformationField,
    pub iterations: usize,
    /// `|T(omega, zeta_k)|_Y` for every iterate, the last one accepted.
    pub residuals: Vec<f64>,
}

fn check_admissible(z: &DeformationField, r_omega: f64) -> Result<()> {
    if z.x_norm() >= r_omega {
        return Err(Error::AdmissibilityLost { norm: z.x_norm(), radius: r_omega });
    }
    Ok(())
}

/// Chord iteration `zeta <- zeta - L0^-1 T(omega, zeta)`, or the full
/// derivative when `cfg.use_full_derivative` is set.
pub fn newton_solve(
    model: &Model,
    lin: &LinearizedOperator,
    omega: f64,
    z_init: &DeformationField,
    cfg: &Config,
) -> Result<NewtonOutcome> {
    model.check_omega(omega)?;
    check_admissible(z_init, cfg.r_omega)?;
    let mut z = z_init.clone();
    let mut residuals = Vec::new();
    for it in 0..=cfg.max_iters {
        let ev = model.evaluate(omega, &z)?;
        let res = ev.residual.y_norm();
        residuals.push(res);
        if res < cfg.newton_tol {
            return Ok(NewtonOutcome { zeta: z, iterations: it, residuals });
        }
        if it == cfg.max_iters {
            break;
        }
        let mut step = lin.solve_l0(&ev.residual)?;
        if cfg.use_full_derivative {
            // preconditioned Richardson on d_zeta T step = T
            for _ in 0..20 {
                let applied = apply_dt_at(model, &ev, omega, &z, &step)?;
                let defect = applied.combine(1.0, &ev.residual, -1.0);
                if defect.y_norm() <= 1e-3 * res {
                    break;
                }
                step = step.combine(1.0, &lin.solve_l0(&defect)?, -1.0);
            }
        }
        z = z.combine(1.0, &step, -1.0);
        check_admissible(&z, cfg.r_omega)?;
    }
    Err(Error::NoConvergence { omega, iterations: cfg.max_iters, residual: *residuals.last().unwrap() })
}

/// Summary of one accepted continuation step.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub omega: f64,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub zeta_x_norm: f64,
    pub c: f64,
    /// `sup_r |rho_20(r)|`.
    pub rho_20: f64,
}

/// The family produced by [`continuation`].
#[derive(Debug)]
pub struct ContinuationReport {
    pub states: Vec<SolutionState>,
    pub records: Vec<StepRecord>,
    /// Largest `omega` whose solve was accepted.
    pub last_good_omega: f64,
    /// Why the march stopped early, if it did.
    pub failure: Option<Error>,
}

/// `omega_max` of the configuration, defaulting to half the cap.
pub fn resolve_omega_max(model: &Model, cfg: &Config) -> Result<f64> {
    let w = cfg.omega_max.unwrap_or(0.5 * model.omega_cap());
    model.check_omega(w)?;
    Ok(w)
}

/// Marches `omega = 0, h, 2h, ..., omega_max` with warm starts
/// `zeta_i (omega_{i+1} / omega_i)^2`.
pub fn continuation(model: &Model, lin: &LinearizedOperator, cfg: &Config) -> Result<ContinuationReport> {
    let omega_max = resolve_omega_max(model, cfg)?;
    let steps = cfg.omega_steps;
    let mut states: Vec<SolutionState> = Vec::with_capacity(steps + 1);
    let mut records = Vec::with_capacity(steps + 1);
    let mut failure = None;
    let mut last_good_omega = 0.0;
    let i20 = model.basis().mode_index(2, 0)?;
    for i in 0..=steps {
        let omega = omega_max * i as f64 / steps as f64;
        let init = match states.last() {
            Some(prev) if prev.omega > 0.0 => prev.zeta.scale((omega / prev.omega).powi(2)),
            Some(prev) => prev.zeta.clone(),
            None => model.zero_field(),
        };
        let solved = newton_solve(model, lin, omega, &init, cfg).and_then(|out| {
            let state = model.reconstruct(omega, &out.zeta)?;
            Ok((out, state))
        });
        match solved {
            Ok((out, state)) => {
                records.push(StepRecord {
                    omega,
                    iterations: out.iterations,
                    residual: *out.residuals.last().unwrap(),
                    residual_history: out.residuals,
                    zeta_x_norm: state.zeta.x_norm(),
                    c: state.c,
                    rho_20: state.density.mode_sup()[i20],
                });
                last_good_omega = omega;
                states.push(state);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok(ContinuationReport { states, records, last_good_omega, failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_needs_no_iteration() {
        let cfg = Config { nodes_per_panel: 32, n_max: 4, ..Config::default() };
        let m = Model::new(&cfg).unwrap();
        let lin = LinearizedOperator::new(&m).unwrap();
        let out = newton_solve(&m, &lin, 0.0, &m.zero_field(), &cfg).unwrap();
        assert!(out.iterations <= 1);
        assert!(out.zeta.x_norm() < 1e-10);
    }
}
