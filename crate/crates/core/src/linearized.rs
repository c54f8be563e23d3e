//! Linearization of `T` at the base state.
//!
//! `L0 = -U0' (id - K)` with
//! `(K L)(x) = -(1 / U0'(|x|)) int (1/|x-y| - 1/|y|) rho0'(|y|) L(y) dy`.
//! `K` is diagonal in the harmonic degree; on degree `n` it is the radial
//! integral operator `K_n` with kernel
//! `-(4 pi / (2n+1)) s^2 rho0'(s) (min^n / max^(n+1) - [n = 0] / s) / U0'(r)`.

use nalgebra::{DMatrix, DVector, LU};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::ansatz::tilde_h_du;
use crate::basestate::RadialProfile;
use crate::deformation::{DeformationField, Discretization, Ray, YField};
use crate::error::{Error, Result};
use crate::grid::{RadialGrid, R_MAX};
use crate::harmonics::ModePotential;
use crate::operator::{Evaluation, Model};
use crate::quadrature::gauss_legendre;

/// `s^2 k_n(r, s)`, the radial kernel of `K_n` without the `-c rho0'(s) / U0'(r)` factor.
fn kernel(n: usize, r: f64, s: f64) -> f64 {
    if n == 0 {
        if s < r {
            s * (s / r - 1.0)
        } else {
            0.0
        }
    } else if s < r {
        s * s * (s / r).powi(n as i32) / r
    } else {
        s * (r / s).powi(n as i32)
    }
}

/// `K_n` on the radial grid together with the factorization of `id - K_n`.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub degree: usize,
    matrix: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    /// `sup_r int |k_n(r, s)| ds` of the continuous operator.
    pub norm_inf: f64,
    /// Maximum absolute row sum of the Nystrom matrix.
    pub matrix_norm_inf: f64,
    /// Infinity-norm condition number of `id - K_n`.
    pub condition: f64,
}

/// Row of `K_n` at `r > 0` by quadrature over `[0, 1]`.
pub fn assemble_kn(profile: &RadialProfile, n: usize, grid: &RadialGrid) -> Result<ModeOperator> {
    if n % 2 == 1 {
        return Err(Error::InvalidParameter(format!("degree {n} is odd")));
    }
    let c = 4.0 * PI / (2 * n + 1) as f64;
    let size = grid.len();
    let mut m = DMatrix::zeros(size, size);
    let mut row = vec![0.0; size];
    for i in 1..size {
        let r = grid.nodes()[i];
        let pre = -c / profile.u0p[i];
        row.iter_mut().for_each(|v| *v = 0.0);
        let f = |s: f64| if s < 1.0 { pre * profile.rho0p_at(s) * kernel(n, r, s) } else { 0.0 };
        grid.accumulate_row(&mut row, i, true, f);
        if n > 0 {
            grid.accumulate_row(&mut row, i, false, f);
        }
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    let id_minus = DMatrix::identity(size, size) - &m;
    let lu = id_minus.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::SingularOperator(n))?;
    let row_norm = |a: &DMatrix<f64>| (0..a.nrows()).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let matrix_norm_inf = row_norm(&m);
    let condition = row_norm(&id_minus) * row_norm(&inv);
    if !(condition.is_finite() && condition < 1.0 / (1e3 * f64::EPSILON)) {
        return Err(Error::SingularOperator(n));
    }
    Ok(ModeOperator {
        degree: n,
        lu,
        matrix: m,
        norm_inf: kn_norm(profile, n),
        matrix_norm_inf,
        condition,
    })
}

/// `int_0^1 |k_n(r, s)| ds` of the continuous operator at radius `r > 0`.
pub fn kn_row_abs_sum(profile: &RadialProfile, n: usize, r: f64) -> f64 {
    let (x, w) = gauss_legendre(48);
    row_abs_sum(profile, n, r, &x, &w)
}

fn row_abs_sum(profile: &RadialProfile, n: usize, r: f64, x: &[f64], w: &[f64]) -> f64 {
    let map = |a: f64, b: f64| -> (Vec<f64>, Vec<f64>) {
        let (h, c) = (0.5 * (b - a), 0.5 * (a + b));
        (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
    };
    let c = 4.0 * PI / (2 * n + 1) as f64;
    let f = |s: f64| profile.rho0p_at(s).abs() * kernel(n, r, s).abs();
    let split = r.min(1.0);
    let (p1, w1) = map(0.0, split);
    let mut total: f64 = p1.iter().zip(&w1).map(|(s, w)| w * f(*s)).sum();
    if split < 1.0 {
        let (p2, w2) = map(split, 1.0);
        total += p2.iter().zip(&w2).map(|(s, w)| w * f(*s)).sum::<f64>();
    }
    c * total / profile.u0p_at(r)
}

/// `sup_r` of [`kn_row_abs_sum`] by a scan followed by golden-section refinement.
pub fn kn_norm(profile: &RadialProfile, n: usize) -> f64 {
    let (x, w) = gauss_legendre(48);
    let g = |r: f64| row_abs_sum(profile, n, r, &x, &w);
    let samples = 800;
    let h = R_MAX / samples as f64;
    let (mut best_r, mut best) = (h, g(h));
    for j in 2..=samples {
        let r = j as f64 * h;
        let v = g(r);
        if v > best {
            best = v;
            best_r = r;
        }
    }
    let (mut a, mut b) = ((best_r - h).max(1e-6), (best_r + h).min(R_MAX));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        }
    }
    best.max(f1).max(f2)
}

impl ModeOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(v)).as_slice().to_vec()
    }

    /// Solves `(id - K_n) x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.lu
            .solve(&DVector::from_column_slice(b))
            .map(|x| x.as_slice().to_vec())
            .ok_or(Error::SingularOperator(self.degree))
    }
}

/// Norm and conditioning summary of one degree.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeOperatorSummary {
    pub degree: usize,
    pub norm_inf: f64,
    pub matrix_norm_inf: f64,
    pub bound: f64,
    pub condition: f64,
}

/// `K_n` for every degree of the basis and the maps `L0`, `L0^-1`.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    disc: Arc<Discretization>,
    u0p_reduced: Vec<f64>,
    ops: Vec<ModeOperator>,
}

impl LinearizedOperator {
    pub fn new(model: &Model) -> Result<Self> {
        let ops = model
            .basis()
            .degrees()
            .into_iter()
            .map(|n| assemble_kn(model.profile(), n, model.grid()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            disc: model.discretization().clone(),
            u0p_reduced: model.profile().u0p_reduced.clone(),
            ops,
        })
    }

    pub fn ops(&self) -> &[ModeOperator] {
        &self.ops
    }

    pub fn op(&self, degree: usize) -> &ModeOperator {
        &self.ops[degree / 2]
    }

    pub fn summaries(&self) -> Vec<ModeOperatorSummary> {
        self.ops
            .iter()
            .map(|o| ModeOperatorSummary {
                degree: o.degree,
                norm_inf: o.norm_inf,
                matrix_norm_inf: o.matrix_norm_inf,
                bound: 3.0 / (2 * o.degree + 1) as f64,
                condition: o.condition,
            })
            .collect()
    }

    /// CSV with columns `n, norm_inf, matrix_norm_inf, bound, condition`.
    pub fn norms_csv(&self) -> String {
        let mut s = String::from("n,norm_inf,matrix_norm_inf,bound,condition\n");
        for o in self.summaries() {
            s.push_str(&format!("{},{},{},{},{}\n", o.degree, o.norm_inf, o.matrix_norm_inf, o.bound, o.condition));
        }
        s
    }

    fn degree_of(&self, mode: usize) -> usize {
        self.disc.basis.modes()[mode].0
    }

    /// `K` applied to mode curves.
    pub fn apply_k(&self, curves: &[Vec<f64>]) -> Vec<Vec<f64>> {
        curves.iter().enumerate().map(|(m, c)| self.op(self.degree_of(m)).apply(c)).collect()
    }

    /// `L0^-1 g`: solves `(id - K_n) L_n = -g_n / U0'` per mode.
    pub fn solve_l0(&self, g: &YField) -> Result<DeformationField> {
        let r = self.disc.grid.nodes();
        let mut out = Vec::with_capacity(g.reduced().len());
        for (m, tau) in g.reduced().iter().enumerate() {
            let mut rhs = vec![0.0; r.len()];
            for i in 1..r.len() {
                rhs[i] = -r[i] * tau[i] / self.u0p_reduced[i];
            }
            out.push(self.op(self.degree_of(m)).solve(&rhs)?);
        }
        DeformationField::new(self.disc.clone(), out)
    }

    /// `L0 L = -U0' (L - K L)`.
    pub fn apply_l0(&self, lambda: &DeformationField) -> Result<YField> {
        let r = self.disc.grid.nodes();
        let kl = self.apply_k(lambda.curves());
        let reduced = lambda
            .curves()
            .iter()
            .zip(&kl)
            .map(|(l, k)| {
                let mut t = vec![0.0; r.len()];
                for i in 1..r.len() {
                    t[i] = -self.u0p_reduced[i] * (l[i] - k[i]) / r[i];
                }
                t
            })
            .collect();
        YField::from_reduced(self.disc.clone(), reduced)
    }
}

/// Full derivative `d_zeta T(omega, zeta) L`.
pub fn apply_dt(model: &Model, omega: f64, z: &DeformationField, lambda: &DeformationField) -> Result<YField> {
    let ev = model.evaluate(omega, z)?;
    apply_dt_at(model, &ev, omega, z, lambda)
}

/// [`apply_dt`] reusing the evaluation of `T(omega, zeta)`.
///
/// With `sigma(y) = h~_u U0'(t) L(t y^) / (1 + d_t zeta(t y^))`, `t y^ = g^-1(y)`,
/// and `W` its potential, the derivative is
/// `W(g(x)) - W(0) - d_R V(g(x)) L(x)`.
pub fn apply_dt_at(
    model: &Model,
    ev: &Evaluation,
    omega: f64,
    z: &DeformationField,
    lambda: &DeformationField,
) -> Result<YField> {
    let disc = model.discretization();
    let grid = model.grid();
    let basis = model.basis();
    let profile = model.profile();
    let p = model.params();
    let nodes = grid.nodes();
    let nd = basis.n_directions();
    let mut sigma = vec![vec![0.0; nd]; nodes.len()];
    for (a, d) in basis.directions().iter().enumerate() {
        let ray = z.ray(a);
        let lam = Ray::new(grid, disc.ray(lambda.curves(), a));
        for (i, &s) in nodes.iter().enumerate() {
            let t = ray.invert(s)?;
            if t >= 2.0 {
                break;
            }
            let hu = tilde_h_du(omega, s * d.sin_theta, profile.u0_at(t), p);
            if hu == 0.0 {
                continue;
            }
            let (_, dz) = ray.eval(t);
            sigma[i][a] = hu * profile.u0p_at(t) * lam.eval(t).0 / (1.0 + dz);
        }
    }
    let w: Vec<ModePotential> =
        crate::harmonics::newtonian_potential(basis, model.potential_operator(), &disc.analyze(&sigma));
    let mut samples = vec![vec![0.0; nd]; nodes.len()];
    let mut wt = vec![0.0; nodes.len()];
    let mut vd = vec![0.0; nodes.len()];
    for a in 0..nd {
        wt.iter_mut().for_each(|v| *v = 0.0);
        vd.iter_mut().for_each(|v| *v = 0.0);
        for m in 0..basis.n_modes() {
            let y = basis.value(m, a);
            for j in 0..nodes.len() {
                wt[j] += y * w[m].reduced[j];
                vd[j] += y * ev.potentials[m].reduced_deriv[j];
            }
        }
        let zr = disc.ray(z.curves(), a);
        let lr = disc.ray(lambda.curves(), a);
        for i in 1..nodes.len() {
            let r = nodes[i];
            let big_r = r + zr[i];
            let (w_red, v_red) = if big_r <= R_MAX {
                (grid.interpolate(&wt, big_r), grid.interpolate(&vd, big_r))
            } else {
                let mut acc = (0.0, 0.0);
                for m in 0..basis.n_modes() {
                    let y = basis.value(m, a);
                    acc.0 += y * w[m].eval_reduced(grid, big_r).0;
                    acc.1 += y * ev.potentials[m].eval_reduced(grid, big_r).1;
                }
                acc
            };
            let ratio = big_r / r;
            samples[i][a] = ratio * ratio * w_red - ratio * v_red * lr[i] / r;
        }
    }
    YField::from_reduced(disc.clone(), disc.analyze(&samples))
}
