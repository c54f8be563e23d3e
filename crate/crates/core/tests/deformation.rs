mod common;

use common::norm;
use proptest::prelude::*;
use rotsteady::deformation::{DeformationField, Discretization, YField};
use rotsteady::grid::RadialGrid;
use rotsteady::harmonics::SymmetryBasis;
use std::sync::{Arc, OnceLock};

fn disc() -> Arc<Discretization> {
    static D: OnceLock<Arc<Discretization>> = OnceLock::new();
    D.get_or_init(|| Discretization::new(RadialGrid::new(32), SymmetryBasis::new(4).unwrap())).clone()
}

/// Smooth field with mode curves `a r^2 exp(-b r)` plus a linear monopole term,
/// rescaled to X-norm `target`.
fn field(coeffs: &[(f64, f64)], linear: f64, target: f64) -> DeformationField {
    let d = disc();
    let sq = (4.0 * std::f64::consts::PI).sqrt();
    let curves: Vec<Vec<f64>> = coeffs
        .iter()
        .enumerate()
        .map(|(m, (a, b))| {
            d.grid
                .nodes()
                .iter()
                .map(|&r| a * r * r * (-b * r).exp() + if m == 0 { linear * sq * r } else { 0.0 })
                .collect()
        })
        .collect();
    let z = DeformationField::new(d, curves).unwrap();
    z.scale(target / z.x_norm())
}

fn admissible() -> impl Strategy<Value = DeformationField> {
    let n = disc().n_modes();
    (proptest::collection::vec((-1.0f64..1.0, 0.2f64..2.0), n), -1.0f64..1.0, 0.005f64..0.124)
        .prop_map(|(c, l, t)| field(&c, l, t))
}

fn point(radius: f64) -> impl Strategy<Value = [f64; 3]> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.01f64..1.0).prop_filter_map("nonzero", move |(a, b, c, s)| {
        let l = (a * a + b * b + c * c).sqrt();
        (l > 0.1).then(|| [a / l * s * radius, b / l * s * radius, c / l * s * radius])
    })
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Spectral norm of a 3x3 matrix by power iteration on `A^T A`.
fn op_norm(m: &[[f64; 3]; 3]) -> f64 {
    let mut v = [1.0, 0.7, 0.3];
    let mut s = 0.0;
    for _ in 0..200 {
        let mut w = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                w[i] += m[i][j] * v[j];
            }
        }
        let mut u = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                u[j] += m[i][j] * w[i];
            }
        }
        let l = norm(u);
        if l == 0.0 {
            return 0.0;
        }
        s = l.sqrt();
        v = [u[0] / l, u[1] / l, u[2] / l];
    }
    s
}

fn inverse3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c = |i: usize, j: usize| {
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        let (p, q) = ((j + 1) % 3, (j + 2) % 3);
        m[a][p] * m[b][q] - m[a][q] * m[b][p]
    };
    let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[j][i] = c(i, j) / det;
        }
    }
    out
}

fn minus_id(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut o = *m;
    for (k, row) in o.iter_mut().enumerate() {
        row[k] -= 1.0;
    }
    o
}

#[test]
fn zero_field_is_identity() {
    let z = DeformationField::zero(disc());
    assert_eq!(z.x_norm(), 0.0);
    for x in [[0.3, 0.1, -0.2], [0.0, 0.0, 2.9], [3.0, 0.5, 1.0]] {
        assert_eq!(z.g_apply(x), x);
        let j = z.g_jacobian(x).unwrap();
        assert!(op_norm(&minus_id(&j)) < 1e-14);
        let y = z.g_inverse([x[0] * 0.7, x[1] * 0.7, x[2] * 0.7]).unwrap();
        assert!(norm(sub(y, [x[0] * 0.7, x[1] * 0.7, x[2] * 0.7])) < 1e-14);
    }
    assert_eq!(z.g_apply([0.0; 3]), [0.0; 3]);
    assert!(z.g_jacobian([0.0; 3]).is_err());
    assert!(z.g_inverse([0.0, 3.5, 0.0]).is_err());
}

#[test]
fn origin_values_are_forced_to_zero() {
    let d = disc();
    let curves = vec![vec![1.0; d.n_radial()]; d.n_modes()];
    let z = DeformationField::new(d, curves).unwrap();
    assert!(z.curves().iter().all(|c| c[0] == 0.0));
    assert_eq!(z.value([0.0; 3]), 0.0);
}

#[test]
fn distance_field_has_unit_norm() {
    let z = DeformationField::from_fn(disc(), norm).unwrap();
    assert!((z.x_norm() - 1.0).abs() < 1e-12);
    let f = YField::from_values(disc(), disc().project(|x| 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]))).unwrap();
    assert!((f.y_norm() - 1.0).abs() < 1e-12);
    assert_eq!(DeformationField::zero(disc()).x_norm(), 0.0);
}

#[test]
fn norms_are_stable_under_grid_refinement() {
    let f = |x: [f64; 3]| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        (0.3 * r2 + 0.2 * (x[0] * x[0] - x[2] * x[2]) + 0.1 * x[1] * x[1] * x[2] * x[2]) * (-r2).exp()
    };
    // default resolution against doubled radial and angular densities
    let coarse = Discretization::new(RadialGrid::new(64), SymmetryBasis::new(8).unwrap());
    let fine = Discretization::new(RadialGrid::new(128), SymmetryBasis::with_grid(8, 20, 40).unwrap());
    let a = DeformationField::from_fn(coarse.clone(), f).unwrap().x_norm();
    let b = DeformationField::from_fn(fine.clone(), f).unwrap().x_norm();
    assert!((a - b).abs() < 0.01 * b, "{a} vs {b}");
    let ya = YField::from_values(coarse.clone(), coarse.project(f)).unwrap().y_norm();
    let yb = YField::from_values(fine.clone(), fine.project(f)).unwrap().y_norm();
    assert!((ya - yb).abs() < 0.01 * yb, "{ya} vs {yb}");
}

#[test]
fn contraction_beyond_admissibility_is_detected() {
    let z = DeformationField::from_fn(disc(), |x| -0.9 * norm(x)).unwrap();
    assert!(!z.is_admissible(0.125));
    assert!(z.g_inverse([0.0, 0.0, 2.9]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn radial_bounds(z in admissible(), x in point(4.0)) {
        let r = norm(x);
        let g = norm(z.g_apply(x));
        prop_assert!(0.5 * r <= g && g <= 1.5 * r);
    }

    #[test]
    fn equivariant_under_reflections(z in admissible(), x in point(4.0)) {
        let g = z.g_apply(x);
        for k in 0..3 {
            let mut a = x;
            a[k] = -a[k];
            let mut ga = g;
            ga[k] = -ga[k];
            prop_assert!(norm(sub(z.g_apply(a), ga)) < 1e-13);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences(z in admissible(), x in point(3.9)) {
        let r = norm(x);
        prop_assume!((r - 1.0).abs() > 1e-3 && (r - 2.0).abs() > 1e-3 && r > 1e-2);
        let j = z.g_jacobian(x).unwrap();
        let h = 1e-5;
        let mut err = 0.0f64;
        for k in 0..3 {
            let mut p = x;
            let mut m = x;
            p[k] += h;
            m[k] -= h;
            let (gp, gm) = (z.g_apply(p), z.g_apply(m));
            for i in 0..3 {
                err = err.max(((gp[i] - gm[i]) / (2.0 * h) - j[i][k]).abs());
            }
        }
        prop_assert!(err < 1e-6, "err {err}");
        prop_assert!(op_norm(&minus_id(&j)) < 0.5);
        prop_assert!(op_norm(&minus_id(&inverse3(&j))) < 0.5);
    }

    #[test]
    fn inverse_round_trip(z in admissible(), y in point(3.0)) {
        let x = z.g_inverse(y).unwrap();
        prop_assert!(norm(sub(z.g_apply(x), y)) < 1e-10);
        // the preimage stays on the ray through y
        let c = (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]) / (norm(x) * norm(y));
        prop_assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ray_order_and_ball_inclusion(z in admissible(), dir in point(1.0), t1 in 0.0f64..4.0, t2 in 0.0f64..4.0) {
        let d = norm(dir);
        let u = [dir[0] / d, dir[1] / d, dir[2] / d];
        let at = |t: f64| norm(z.g_apply([u[0] * t, u[1] * t, u[2] * t]));
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        prop_assume!(hi - lo > 1e-9);
        prop_assert!(at(lo) < at(hi));
        prop_assert!(at(2.0) < 3.0);
    }

    #[test]
    fn inverse_is_lipschitz_in_zeta(a in admissible(), b in admissible(), y in point(3.0)) {
        let d = a.combine(1.0, &b, -1.0).x_norm();
        let (xa, xb) = (a.g_inverse(y).unwrap(), b.g_inverse(y).unwrap());
        // t + zeta(t) = s gives |t_a - t_b| <= |zeta_a - zeta_b|(t) / (1 - r_omega) and t <= 2 s
        prop_assert!(norm(sub(xa, xb)) <= 2.0 / (1.0 - 0.125) * d * norm(y) + 1e-12);
    }

    #[test]
    fn x_norm_is_a_seminorm(a in admissible(), b in admissible(), s in -3.0f64..3.0) {
        let sum = a.combine(1.0, &b, 1.0).x_norm();
        prop_assert!(sum <= a.x_norm() + b.x_norm() + 1e-15);
        prop_assert!((a.scale(s).x_norm() - s.abs() * a.x_norm()).abs() < 1e-14);
    }
}
