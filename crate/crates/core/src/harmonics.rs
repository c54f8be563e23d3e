//! Real spherical harmonics restricted to the mirror-symmetric subspace,
//! spherical transforms and the multipole Newtonian potential.
//!
//! The symmetric subspace is spanned by `Y_nm = Pbar_n^m(cos t) cos(m p) / sqrt(4 pi)`
//! with `n` and `m` even, where `Pbar` are fully normalized associated
//! Legendre functions (mean square `1` over the sphere for every order).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, R_MAX};
use crate::quadrature::gauss_legendre;

const INV_SQRT_4PI: f64 = 0.282_094_791_773_878_14;

/// Fully normalized `Pbar_n^m(x)`, `Pbar_n^m / sin` and `d Pbar_n^m / d theta`
/// for `0 <= m <= n <= n_max`, indexed `[n * (n_max + 1) + m]`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    n_max: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub dtheta: Vec<f64>,
}

impl LegendreTable {
    pub fn new(n_max: usize, x: f64, u: f64) -> Self {
        let w = n_max + 1;
        let mut p = vec![0.0; w * w];
        let mut q = vec![0.0; w * w];
        let mut dtheta = vec![0.0; w * w];
        let idx = |n: usize, m: usize| n * w + m;
        for m in 0..=n_max {
            // diagonal seeds
            let (pmm, qmm) = match m {
                0 => (1.0, 0.0),
                1 => (3f64.sqrt() * u, 3f64.sqrt()),
                _ => {
                    let f = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
                    (f * u * p[idx(m - 1, m - 1)], f * u * q[idx(m - 1, m - 1)])
                }
            };
            p[idx(m, m)] = pmm;
            q[idx(m, m)] = qmm;
            if m < n_max {
                let f = ((2 * m + 3) as f64).sqrt() * x;
                p[idx(m + 1, m)] = f * pmm;
                q[idx(m + 1, m)] = f * qmm;
            }
            for n in (m + 2)..=n_max {
                let (nf, mf) = (n as f64, m as f64);
                let a = ((2.0 * nf - 1.0) * (2.0 * nf + 1.0) / ((nf - mf) * (nf + mf))).sqrt();
                let b = ((2.0 * nf + 1.0) * (nf + mf - 1.0) * (nf - mf - 1.0)
                    / ((nf - mf) * (nf + mf) * (2.0 * nf - 3.0)))
                    .sqrt();
                p[idx(n, m)] = a * x * p[idx(n - 1, m)] - b * p[idx(n - 2, m)];
                q[idx(n, m)] = a * x * q[idx(n - 1, m)] - b * q[idx(n - 2, m)];
            }
        }
        for n in 0..=n_max {
            let nf = n as f64;
            for m in 0..=n {
                dtheta[idx(n, m)] = if m == 0 {
                    if n == 0 {
                        0.0
                    } else {
                        -(nf * (nf + 1.0) / 2.0).sqrt() * p[idx(n, 1)]
                    }
                } else {
                    let mf = m as f64;
                    let lower = if n > m { q[idx(n - 1, m)] } else { 0.0 };
                    nf * x * q[idx(n, m)]
                        - ((2.0 * nf + 1.0) * (nf * nf - mf * mf) / (2.0 * nf - 1.0)).sqrt() * lower
                };
            }
        }
        Self { n_max, p, q, dtheta }
    }

    fn idx(&self, n: usize, m: usize) -> usize {
        n * (self.n_max + 1) + m
    }

    pub fn p(&self, n: usize, m: usize) -> f64 {
        self.p[self.idx(n, m)]
    }

    pub fn q(&self, n: usize, m: usize) -> f64 {
        self.q[self.idx(n, m)]
    }

    pub fn dtheta(&self, n: usize, m: usize) -> f64 {
        self.dtheta[self.idx(n, m)]
    }
}

/// Legendre polynomial `P_n(t)`.
pub fn legendre_p(n: usize, t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("Legendre argument {t} outside [-1, 1]")));
    }
    Ok(crate::quadrature::legendre_with_derivative(n, t).0)
}

/// Spherical angles of a direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub xi: [f64; 3],
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn from_angles(cos_theta: f64, phi: f64) -> Self {
        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        Self {
            xi: [sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta],
            cos_theta,
            sin_theta,
            phi,
        }
    }

    /// Direction of a nonzero vector.
    pub fn of(x: [f64; 3]) -> Self {
        let r = norm3(x);
        let cos_theta = (x[2] / r).clamp(-1.0, 1.0);
        let rho = x[0].hypot(x[1]);
        let phi = if rho > 0.0 { x[1].atan2(x[0]) } else { 0.0 };
        Self { xi: [x[0] / r, x[1] / r, x[2] / r], cos_theta, sin_theta: rho / r, phi }
    }

    pub fn e_theta(&self) -> [f64; 3] {
        [self.cos_theta * self.phi.cos(), self.cos_theta * self.phi.sin(), -self.sin_theta]
    }

    pub fn e_phi(&self) -> [f64; 3] {
        [-self.phi.sin(), self.phi.cos(), 0.0]
    }
}

pub(crate) fn norm3(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Values and surface-gradient components of every basis mode at one direction.
#[derive(Debug, Clone)]
pub struct ModeValues {
    pub value: Vec<f64>,
    /// `d Y / d theta`.
    pub d_theta: Vec<f64>,
    /// `(1 / sin theta) d Y / d phi`.
    pub d_phi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SymmetryBasis {
    n_max: usize,
    modes: Vec<(usize, usize)>,
    directions: Vec<Direction>,
    weights: Vec<f64>,
    n_theta: usize,
    n_phi: usize,
    /// Mode-major tables, `[mode * n_dir + a]`.
    values: Vec<f64>,
    d_theta: Vec<f64>,
    d_phi: Vec<f64>,
}

impl SymmetryBasis {
    /// Basis up to even degree `n_max` with the default angular grid.
    pub fn new(n_max: usize) -> Result<Self> {
        Self::with_grid(n_max, n_max + 2, 2 * n_max + 4)
    }

    pub fn with_grid(n_max: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_max % 2 == 1 {
            return Err(Error::InvalidParameter(format!("maximum degree {n_max} must be even")));
        }
        if n_theta < n_max + 1 {
            return Err(Error::InvalidParameter(format!("need at least {} polar nodes", n_max + 1)));
        }
        if n_phi < 2 * n_max + 2 {
            return Err(Error::InvalidParameter(format!("need at least {} azimuthal nodes", 2 * n_max + 2)));
        }
        let modes: Vec<(usize, usize)> = (0..=n_max)
            .step_by(2)
            .flat_map(|n| (0..=n).step_by(2).map(move |m| (n, m)))
            .collect();
        let (xs, ws) = gauss_legendre(n_theta);
        let mut directions = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (x, w) in xs.iter().zip(&ws) {
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                directions.push(Direction::from_angles(*x, phi));
                weights.push(w * 2.0 * PI / n_phi as f64);
            }
        }
        let mut basis = Self {
            n_max,
            modes,
            directions,
            weights,
            n_theta,
            n_phi,
            values: Vec::new(),
            d_theta: Vec::new(),
            d_phi: Vec::new(),
        };
        let nd = basis.directions.len();
        let nm = basis.modes.len();
        basis.values = vec![0.0; nm * nd];
        basis.d_theta = vec![0.0; nm * nd];
        basis.d_phi = vec![0.0; nm * nd];
        for a in 0..nd {
            let mv = basis.mode_values(&basis.directions[a]);
            for i in 0..nm {
                basis.values[i * nd + a] = mv.value[i];
                basis.d_theta[i * nd + a] = mv.d_theta[i];
                basis.d_phi[i * nd + a] = mv.d_phi[i];
            }
        }
        Ok(basis)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> &[(usize, usize)] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode_index(&self, n: usize, m: usize) -> Result<usize> {
        self.modes
            .iter()
            .position(|&md| md == (n, m))
            .ok_or(Error::ModeNotInBasis { n, m })
    }

    /// Even degrees `0, 2, ..., n_max`.
    pub fn degrees(&self) -> Vec<usize> {
        (0..=self.n_max).step_by(2).collect()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn n_directions(&self) -> usize {
        self.directions.len()
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        (self.n_theta, self.n_phi)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Tabulated `Y_mode` at angular node `a`.
    #[inline]
    pub fn value(&self, mode: usize, a: usize) -> f64 {
        self.values[mode * self.directions.len() + a]
    }

    #[inline]
    pub fn d_theta(&self, mode: usize, a: usize) -> f64 {
        self.d_theta[mode * self.directions.len() + a]
    }

    #[inline]
    pub fn d_phi(&self, mode: usize, a: usize) -> f64 {
        self.d_phi[mode * self.directions.len() + a]
    }

    /// Values and surface derivatives of all modes at an arbitrary direction.
    pub fn mode_values(&self, d: &Direction) -> ModeValues {
        let t = LegendreTable::new(self.n_max, d.cos_theta, d.sin_theta);
        let nm = self.modes.len();
        let mut out = ModeValues { value: vec![0.0; nm], d_theta: vec![0.0; nm], d_phi: vec![0.0; nm] };
        for (i, &(n, m)) in self.modes.iter().enumerate() {
            let (c, s) = ((m as f64 * d.phi).cos(), (m as f64 * d.phi).sin());
            out.value[i] = t.p(n, m) * c * INV_SQRT_4PI;
            out.d_theta[i] = t.dtheta(n, m) * c * INV_SQRT_4PI;
            out.d_phi[i] = if m == 0 { 0.0 } else { -(m as f64) * t.q(n, m) * s * INV_SQRT_4PI };
        }
        out
    }

    /// Orthonormal real harmonic `Y_nm(xi)`.
    pub fn eval_basis(&self, n: usize, m: usize, xi: [f64; 3]) -> Result<f64> {
        let i = self.mode_index(n, m)?;
        let len = norm3(xi);
        if (len - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitVector(len));
        }
        Ok(self.mode_values(&Direction::of(xi)).value[i])
    }

    /// Quadrature coefficients `int Y_nm f dOmega` from samples at the angular nodes.
    pub fn forward_transform(&self, samples: &[f64]) -> Result<Vec<f64>> {
        let nd = self.directions.len();
        if samples.len() != nd {
            return Err(Error::SampleCount { expected: nd, got: samples.len() });
        }
        Ok(self.forward_unchecked(samples))
    }

    pub(crate) fn forward_unchecked(&self, samples: &[f64]) -> Vec<f64> {
        let nd = self.directions.len();
        let ws: Vec<f64> = samples.iter().zip(&self.weights).map(|(s, w)| s * w).collect();
        (0..self.modes.len())
            .map(|i| {
                self.values[i * nd..(i + 1) * nd]
                    .iter()
                    .zip(&ws)
                    .map(|(y, v)| y * v)
                    .sum()
            })
            .collect()
    }

    /// Samples at the angular nodes from mode coefficients.
    pub fn inverse_transform(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.modes.len() {
            return Err(Error::SampleCount { expected: self.modes.len(), got: coeffs.len() });
        }
        let nd = self.directions.len();
        let mut out = vec![0.0; nd];
        for (i, c) in coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            for (o, y) in out.iter_mut().zip(&self.values[i * nd..(i + 1) * nd]) {
                *o += c * y;
            }
        }
        Ok(out)
    }
}

/// All `2n + 1` orthonormal real harmonics of degree `n` at `xi`:
/// the zonal one, then cosine and sine pairs for `m = 1..=n`.
pub fn full_degree_values(n: usize, xi: [f64; 3]) -> Vec<f64> {
    let d = Direction::of(xi);
    let t = LegendreTable::new(n, d.cos_theta, d.sin_theta);
    let mut out = Vec::with_capacity(2 * n + 1);
    out.push(t.p(n, 0) * INV_SQRT_4PI);
    for m in 1..=n {
        let a = m as f64 * d.phi;
        out.push(t.p(n, m) * a.cos() * INV_SQRT_4PI);
        out.push(t.p(n, m) * a.sin() * INV_SQRT_4PI);
    }
    out
}

/// Precomputed radial Nystrom matrices of the multipole potential.
///
/// For a density mode `rho_nm` on the radial grid the matrices produce the
/// reduced curves `(V_nm(r) - V_00(0) [n = 0]) / r^2` and `V_nm'(r) / r`,
/// which stay well scaled as `r -> 0`.
#[derive(Debug, Clone)]
pub struct PotentialOperator {
    degrees: Vec<usize>,
    n: usize,
    reduced: Vec<Vec<f64>>,
    reduced_deriv: Vec<Vec<f64>>,
    center: Vec<f64>,
    moments: Vec<Vec<f64>>,
}

impl PotentialOperator {
    pub fn new(grid: &RadialGrid, degrees: &[usize]) -> Self {
        let n = grid.len();
        let r = grid.nodes();
        let mut reduced = Vec::new();
        let mut reduced_deriv = Vec::new();
        let mut moments = Vec::new();
        for &deg in degrees {
            let c = 4.0 * PI / (2 * deg + 1) as f64;
            let nf = deg as i32;
            let mut a = vec![0.0; n * n];
            let mut b = vec![0.0; n * n];
            for i in 0..n {
                let ri = r[i];
                let ra = &mut a[i * n..(i + 1) * n];
                let rb = &mut b[i * n..(i + 1) * n];
                if i == 0 {
                    match deg {
                        0 => {
                            ra[0] = 2.0 * PI / 3.0;
                            rb[0] = 4.0 * PI / 3.0;
                        }
                        2 => {
                            grid.accumulate_row(ra, 0, false, |s| if s > 0.0 { -c / s } else { 0.0 });
                            for (x, y) in rb.iter_mut().zip(ra.iter()) {
                                *x = 2.0 * y;
                            }
                        }
                        _ => {}
                    }
                    continue;
                }
                if deg == 0 {
                    grid.accumulate_row(ra, i, true, |s| 4.0 * PI * s * (1.0 - s / ri) / (ri * ri));
                    grid.accumulate_row(rb, i, true, |s| 4.0 * PI * (s / ri).powi(2) / ri);
                } else {
                    grid.accumulate_row(ra, i, true, |s| -c * (s / ri).powi(nf + 2) / ri);
                    grid.accumulate_row(ra, i, false, |s| -c * (ri / s).powi(nf) * s / (ri * ri));
                    grid.accumulate_row(rb, i, true, |s| c * (nf + 1) as f64 * (s / ri).powi(nf + 2) / ri);
                    grid.accumulate_row(rb, i, false, |s| -c * nf as f64 * (ri / s).powi(nf) * s / (ri * ri));
                }
            }
            reduced.push(a);
            reduced_deriv.push(b);
            moments.push(r.iter().zip(grid.weights()).map(|(s, w)| w * s.powi(nf + 2)).collect());
        }
        let center = r.iter().zip(grid.weights()).map(|(s, w)| -4.0 * PI * w * s).collect();
        Self { degrees: degrees.to_vec(), n, reduced, reduced_deriv, center, moments }
    }

    fn slot(&self, degree: usize) -> usize {
        self.degrees.iter().position(|&d| d == degree).expect("degree not assembled")
    }

    /// Reduced potential and derivative curves of one density mode.
    pub fn apply(&self, degree: usize, rho: &[f64]) -> ModePotential {
        let k = self.slot(degree);
        let n = self.n;
        let mv = |m: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| m[i * n..(i + 1) * n].iter().zip(rho).map(|(a, b)| a * b).sum())
                .collect()
        };
        let dot = |v: &[f64]| -> f64 { v.iter().zip(rho).map(|(a, b)| a * b).sum() };
        ModePotential {
            degree,
            reduced: mv(&self.reduced[k]),
            reduced_deriv: mv(&self.reduced_deriv[k]),
            center: if degree == 0 { dot(&self.center) } else { 0.0 },
            moment: dot(&self.moments[k]),
        }
    }
}

/// Potential of one density mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePotential {
    pub degree: usize,
    /// `(V(r) - center) / r^2` at the radial nodes.
    pub reduced: Vec<f64>,
    /// `V'(r) / r` at the radial nodes.
    pub reduced_deriv: Vec<f64>,
    /// `V_00(0)` for the monopole, zero otherwise.
    pub center: f64,
    /// `int s^(n+2) rho(s) ds`.
    pub moment: f64,
}

impl ModePotential {
    fn exterior_factor(&self) -> f64 {
        -4.0 * PI / (2 * self.degree + 1) as f64 * self.moment
    }

    /// `(V(r), V'(r))`; uses the exterior multipole law beyond the grid.
    pub fn eval(&self, grid: &RadialGrid, r: f64) -> (f64, f64) {
        if r > R_MAX {
            let a = self.exterior_factor();
            let n = self.degree as i32;
            return (a * r.powi(-n - 1), -(n + 1) as f64 * a * r.powi(-n - 2));
        }
        let v = grid.interpolate(&self.reduced, r);
        let d = grid.interpolate(&self.reduced_deriv, r);
        (self.center + r * r * v, r * d)
    }

    /// `(V(r) - center) / r^2` and `V'(r) / r`.
    pub fn eval_reduced(&self, grid: &RadialGrid, r: f64) -> (f64, f64) {
        if r > R_MAX {
            let (v, d) = self.eval(grid, r);
            return ((v - self.center) / (r * r), d / r);
        }
        (grid.interpolate(&self.reduced, r), grid.interpolate(&self.reduced_deriv, r))
    }
}

/// Potential mode curves of a density given as mode curves on the radial grid.
pub fn newtonian_potential(
    basis: &SymmetryBasis,
    op: &PotentialOperator,
    density: &[Vec<f64>],
) -> Vec<ModePotential> {
    basis
        .modes()
        .iter()
        .zip(density)
        .map(|(&(n, _), rho)| op.apply(n, rho))
        .collect()
}
