//! The operator `T(omega, zeta)` and reconstruction of the rotating state.
//!
//! For a deformation `zeta` the density is `rho(y) = h~(omega, r(y), U0(|g^-1(y)|))`
//! and `V = -int rho(y) / |x - y| dy` its potential; then
//! `T(omega, zeta)(x) = U0(|x|) - V(g(x)) - U0(0) + V(0)`.
//! Residuals are carried as reduced curves `T / r^2`.

use std::sync::Arc;

use crate::ansatz::{tilde_h, AnsatzParams};
use crate::basestate::{build_profile, RadialProfile};
use crate::config::Config;
use crate::deformation::{DeformationField, Discretization, Ray, YField};
use crate::error::{Error, Result};
use crate::grid::{RadialGrid, R_MAX};
use crate::harmonics::{newtonian_potential, norm3, Direction, ModePotential, PotentialOperator, SymmetryBasis};

const INV_SQRT_4PI: f64 = 0.282_094_791_773_878_14;

/// Tolerance of the potential consistency check `U(x) = U0(|g^-1(x)|)`.
pub const CONSISTENCY_TOL: f64 = 1e-7;

/// Base state, discretization and potential matrices of one problem.
#[derive(Debug, Clone)]
pub struct Model {
    config: Config,
    profile: RadialProfile,
    disc: Arc<Discretization>,
    potential: PotentialOperator,
}

impl Model {
    pub fn new(config: &Config) -> Result<Self> {
        config.validate()?;
        let grid = RadialGrid::new(config.nodes_per_panel);
        let basis = SymmetryBasis::with_grid(config.n_max, config.n_theta(), config.n_phi())?;
        let profile = build_profile(config.k, &grid)?;
        let potential = PotentialOperator::new(&grid, &basis.degrees());
        let disc = Discretization::new(grid, basis);
        Ok(Self { config: config.clone(), profile, disc, potential })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn params(&self) -> &AnsatzParams {
        &self.profile.params
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.disc.grid
    }

    pub fn basis(&self) -> &SymmetryBasis {
        &self.disc.basis
    }

    pub fn potential_operator(&self) -> &PotentialOperator {
        &self.potential
    }

    /// `sqrt(E1) / 4`.
    pub fn omega_cap(&self) -> f64 {
        self.profile.omega_cap()
    }

    pub fn check_omega(&self, omega: f64) -> Result<()> {
        let cap = self.omega_cap();
        if !(omega.abs() < cap) {
            return Err(Error::OmegaOutOfRange { omega, cap });
        }
        Ok(())
    }

    pub fn zero_field(&self) -> DeformationField {
        DeformationField::zero(self.disc.clone())
    }

    /// Density `rho_zeta` sampled on the tensor grid and transformed.
    pub fn rho_zeta(&self, omega: f64, z: &DeformationField) -> Result<DensityField> {
        self.check_omega(omega)?;
        let grid = self.grid();
        let basis = self.basis();
        let p = self.params();
        let nodes = grid.nodes();
        let mut samples = vec![vec![0.0; basis.n_directions()]; nodes.len()];
        for (a, d) in basis.directions().iter().enumerate() {
            let ray = z.ray(a);
            for (i, &s) in nodes.iter().enumerate() {
                let t = ray.invert(s)?;
                if t >= 2.0 {
                    // t is increasing in s, and the cutoff holds from here on
                    break;
                }
                let u = self.profile.u0_at(t);
                samples[i][a] = tilde_h(omega, s * d.sin_theta, u, p);
            }
        }
        let curves = self.disc.analyze(&samples);
        Ok(DensityField { disc: self.disc.clone(), samples, curves })
    }

    /// Potential mode curves of a density.
    pub fn potential_of(&self, density: &DensityField) -> Vec<ModePotential> {
        newtonian_potential(self.basis(), &self.potential, &density.curves)
    }

    /// `T(omega, zeta)` together with the intermediate density and potential.
    pub fn evaluate(&self, omega: f64, z: &DeformationField) -> Result<Evaluation> {
        let density = self.rho_zeta(omega, z)?;
        let potentials = self.potential_of(&density);
        let residual = self.residual(z, &potentials)?;
        Ok(Evaluation { density, potentials, residual })
    }

    /// `T(omega, zeta)` as a field in `Y`.
    pub fn t_eval(&self, omega: f64, z: &DeformationField) -> Result<YField> {
        Ok(self.evaluate(omega, z)?.residual)
    }

    /// `U0(|x|) - U0(0) - V(g(x)) + V(0)` over the grid, divided by `|x|^2`.
    fn residual(&self, z: &DeformationField, pots: &[ModePotential]) -> Result<YField> {
        let grid = self.grid();
        let basis = self.basis();
        let nodes = grid.nodes();
        let nd = basis.n_directions();
        let mut samples = vec![vec![0.0; nd]; nodes.len()];
        let mut combined = vec![0.0; nodes.len()];
        for a in 0..nd {
            combined.iter_mut().for_each(|v| *v = 0.0);
            for (m, pot) in pots.iter().enumerate() {
                let y = basis.value(m, a);
                for (c, v) in combined.iter_mut().zip(&pot.reduced) {
                    *c += y * v;
                }
            }
            let zr = self.disc.ray(z.curves(), a);
            for i in 1..nodes.len() {
                let r = nodes[i];
                let big_r = r + zr[i];
                let vt = if big_r <= R_MAX {
                    grid.interpolate(&combined, big_r)
                } else {
                    pots.iter()
                        .enumerate()
                        .map(|(m, pot)| basis.value(m, a) * pot.eval_reduced(grid, big_r).0)
                        .sum()
                };
                let ratio = big_r / r;
                samples[i][a] = self.profile.u0_reduced[i] - ratio * ratio * vt;
            }
        }
        YField::from_reduced(self.disc.clone(), self.disc.analyze(&samples))
    }

    /// Assembles the solution triple for a root `zeta` of `T(omega, .)`.
    pub fn reconstruct(&self, omega: f64, z: &DeformationField) -> Result<SolutionState> {
        let Evaluation { density, potentials, residual } = self.evaluate(omega, z)?;
        let v0 = potentials[0].center * INV_SQRT_4PI;
        let c = self.profile.u0_center - v0;
        let bound = self.profile.e0 + self.profile.e1;
        if !(c > bound) {
            return Err(Error::MaxPrincipleViolation { c, bound });
        }
        let state = SolutionState {
            omega,
            zeta: z.clone(),
            density,
            potentials,
            c,
            residual_y: residual.y_norm(),
            consistency_error: 0.0,
            profile: self.profile.clone(),
            disc: self.disc.clone(),
        };
        let err = state.consistency_check(self.config.r_omega)?;
        if !(err < CONSISTENCY_TOL) {
            return Err(Error::ConsistencyError { max_error: err });
        }
        Ok(SolutionState { consistency_error: err, ..state })
    }
}

/// Intermediate results of one operator evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub density: DensityField,
    pub potentials: Vec<ModePotential>,
    pub residual: YField,
}

/// Density samples on the tensor grid (`[i][a]`) and their mode curves.
#[derive(Debug, Clone)]
pub struct DensityField {
    disc: Arc<Discretization>,
    samples: Vec<Vec<f64>>,
    curves: Vec<Vec<f64>>,
}

impl DensityField {
    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    /// Largest grid radius carrying positive density.
    pub fn support_radius(&self) -> f64 {
        let nodes = self.disc.grid.nodes();
        self.samples
            .iter()
            .zip(nodes)
            .filter(|(row, _)| row.iter().any(|&v| v > 0.0))
            .map(|(_, &r)| r)
            .fold(0.0, f64::max)
    }

    /// Density at `x` from the mode curves.
    pub fn value(&self, x: [f64; 3]) -> f64 {
        if norm3(x) > R_MAX {
            return 0.0;
        }
        self.disc.value_and_gradient(&self.curves, x).0
    }

    /// `sup_r |rho_nm(r)|` for every mode.
    pub fn mode_sup(&self) -> Vec<f64> {
        self.curves.iter().map(|c| c.iter().fold(0.0, |m: f64, v| m.max(v.abs()))).collect()
    }
}

/// One point of the rotating family.
#[derive(Debug, Clone)]
pub struct SolutionState {
    pub omega: f64,
    pub zeta: DeformationField,
    pub density: DensityField,
    pub potentials: Vec<ModePotential>,
    /// `U = V + C`.
    pub c: f64,
    pub residual_y: f64,
    pub consistency_error: f64,
    profile: RadialProfile,
    disc: Arc<Discretization>,
}

impl SolutionState {
    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    /// `U(x)` anywhere in space.
    pub fn potential(&self, x: [f64; 3]) -> f64 {
        self.potential_and_gradient(x).0
    }

    /// `(U(x), grad U(x))`; exterior multipole continuation beyond `r = 4`.
    pub fn potential_and_gradient(&self, x: [f64; 3]) -> (f64, [f64; 3]) {
        let grid = &self.disc.grid;
        let r = norm3(x);
        if r == 0.0 {
            return (self.potentials[0].center * INV_SQRT_4PI + self.c, [0.0; 3]);
        }
        let d = Direction::of(x);
        let mv = self.disc.basis.mode_values(&d);
        let (mut v, mut dr, mut dt, mut dp) = (0.0, 0.0, 0.0, 0.0);
        for (m, pot) in self.potentials.iter().enumerate() {
            let (pv, pd) = pot.eval(grid, r);
            v += pv * mv.value[m];
            dr += pd * mv.value[m];
            dt += pv * mv.d_theta[m];
            dp += pv * mv.d_phi[m];
        }
        let (et, ep) = (d.e_theta(), d.e_phi());
        let mut g = [0.0; 3];
        for k in 0..3 {
            g[k] = dr * d.xi[k] + (dt * et[k] + dp * ep[k]) / r;
        }
        (v + self.c, g)
    }

    /// `U0(|g^-1(x)|)` for `|x| <= 3`.
    pub fn potential_via_deformation(&self, x: [f64; 3]) -> Result<f64> {
        let y = self.zeta.g_inverse(x)?;
        Ok(self.profile.u0_at(norm3(y)))
    }

    /// `h~(omega, r(x), U(x))`.
    pub fn density_closure(&self, x: [f64; 3]) -> f64 {
        let rc = (x[0] * x[0] + x[1] * x[1]).sqrt();
        tilde_h(self.omega, rc, self.potential(x), &self.profile.params)
    }

    /// Largest `|U(x) - U0(|g^-1(x)|)|` over midpoints of the radial nodes in
    /// `B3` along the angular grid directions.
    pub fn consistency_check(&self, r_omega: f64) -> Result<f64> {
        if self.zeta.x_norm() >= r_omega {
            return Err(Error::AdmissibilityLost { norm: self.zeta.x_norm(), radius: r_omega });
        }
        let nodes = self.disc.grid.nodes();
        let mut worst = 0.0_f64;
        for d in self.disc.basis.directions() {
            let ray: Ray<'_> = self.zeta.ray_along(d);
            for w in nodes.windows(2) {
                let s = 0.5 * (w[0] + w[1]);
                if s > 3.0 {
                    break;
                }
                let x = [s * d.xi[0], s * d.xi[1], s * d.xi[2]];
                let t = ray.invert(s)?;
                let err = (self.potential(x) - self.profile.u0_at(t)).abs();
                worst = worst.max(err);
            }
        }
        Ok(worst)
    }
}
