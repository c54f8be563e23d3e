mod common;

use common::{emden_value, lane_emden_xi1, rel, tanh_sinh, XI1_N3};
use rotsteady::ansatz::{closure_constant, h_eval};
use rotsteady::basestate::{build_profile, solve_emden, RadialProfile};
use rotsteady::grid::RadialGrid;
use std::f64::consts::PI;

fn profile() -> RadialProfile {
    build_profile(1.5, &RadialGrid::new(64)).unwrap()
}

#[test]
fn lane_emden_first_zero_matches_rk4_oracle() {
    let oracle = lane_emden_xi1(3.0);
    assert!(rel(oracle, XI1_N3) < 1e-10, "oracle {oracle}");
    let sol = solve_emden(1.5, 1.0).unwrap();
    assert!(rel(sol.xi1(), oracle) < 1e-8, "xi1 {}", sol.xi1());
}

#[test]
fn scaling_symmetry_of_support_radius() {
    let base = solve_emden(1.5, 1.0).unwrap();
    for lambda in [0.5f64, 2.0, 3.7] {
        let scaled = solve_emden(1.5, lambda.powf(2.0 / (1.5 + 0.5))).unwrap();
        assert!(rel(scaled.radius * lambda, base.radius) < 1e-9, "lambda {lambda}");
    }
}

#[test]
fn centre_is_regular() {
    let (k, w_c) = (1.5, 1.3);
    let sol = solve_emden(k, w_c).unwrap();
    let limit = -(4.0 * PI / 6.0) * closure_constant(k) * w_c.powf(k + 1.5);
    let r = 1e-3 * sol.radius;
    let (w, _) = sol.sample(&[r]).unwrap()[0];
    assert!(rel((w - w_c) / (r * r), limit) < 1e-5);
}

#[test]
fn normalization_constants() {
    let p = profile();
    let grid = p.grid().clone();
    let i1 = grid.node_index(1.0).unwrap();
    let i2 = grid.node_index(2.0).unwrap();
    assert_eq!(p.u0[i1], p.e0);
    assert!(rel(p.e0, -p.mass) < 1e-15);
    assert!(rel(p.e1, p.mass / 2.0) < 1e-12);
    assert!((p.u0[i2] - (-p.mass / 2.0)).abs() < 1e-12);
    assert!(rel(p.w_c, 1.041_521_850_703_022_8) < 1e-8);
    assert!(rel(p.mass, 0.304_782_221_390_211_24) < 1e-8);
    assert!(p.c_lb > 0.0 && p.e1 > 0.0);
    assert_eq!(p.rho0[i1], 0.0);
    assert!(p.rho0p[i1].is_finite());
    p.validate().unwrap();
}

#[test]
fn exterior_law_and_vacuum() {
    let p = profile();
    for (r, u) in p.nodes.iter().zip(&p.u0) {
        if *r >= 1.0 {
            assert!((u + p.mass / r).abs() < 1e-8, "r = {r}");
        }
    }
    let v = p.eval(2.0).unwrap();
    assert_eq!(v.u0, -p.mass / 2.0);
    assert_eq!(p.eval(0.0).unwrap().u0p, 0.0);
    assert!(p.eval(4.5).is_err());
}

#[test]
fn central_curvature_matches_density() {
    let p = profile();
    let curvature = p.u0p_reduced[0];
    assert!(rel(curvature, 4.0 * PI / 3.0 * p.rho0[0]) < 1e-6);
    assert!(rel(2.0 * p.u0_reduced[0], curvature) < 1e-6);
}

#[test]
fn interpolant_matches_reintegrated_ode() {
    let p = profile();
    let coeff = 4.0 * PI * p.params.c_k;
    let n = p.params.k + 1.5;
    let w_c = p.e0 - p.u0_center;
    for r in [0.25, 0.5, 0.8] {
        let (w, wp) = emden_value(coeff, n, w_c, r);
        let v = p.eval(r).unwrap();
        assert!(rel(v.u0, p.e0 - w) < 1e-8, "U0({r})");
        assert!(rel(v.u0p, -wp) < 1e-8, "U0'({r})");
    }
    // the re-integrated profile vanishes exactly at the normalized support edge
    let (w1, _) = emden_value(coeff, n, w_c, 1.0);
    assert!(w1.abs() < 1e-8 * w_c);
}

#[test]
fn poisson_integrals_hold_at_nodes() {
    let p = profile();
    let rho = |s: f64| p.eval(s).unwrap().rho0;
    for (i, &r) in p.nodes.iter().enumerate().skip(1).step_by(7) {
        let inner = tanh_sinh(|s| s * s * rho(s), 0.0, r.min(1.0), 1e-14);
        let outer = if r < 1.0 { tanh_sinh(|s| s * rho(s), r, 1.0, 1e-14) } else { 0.0 };
        let u0p = 4.0 * PI * inner / (r * r);
        let u0 = -4.0 * PI * inner / r - 4.0 * PI * outer;
        assert!((p.u0p[i] - u0p).abs() < 1e-8, "U0' at {r}");
        assert!((p.u0[i] - u0).abs() < 1e-8, "U0 at {r}");
    }
}

#[test]
fn density_is_closure_of_potential() {
    let p = profile();
    for (i, &r) in p.nodes.iter().enumerate() {
        if r < 1.0 {
            assert!(rel(p.rho0[i], h_eval(p.u0[i], &p.params)) < 1e-9, "r = {r}");
        }
    }
}

#[test]
fn monotonicity_and_lower_bound() {
    let p = profile();
    for w in p.u0.windows(2) {
        assert!(w[1] > w[0]);
    }
    for w in p.rho0.windows(2) {
        assert!(w[1] <= w[0]);
    }
    for (i, &r) in p.nodes.iter().enumerate().skip(1) {
        assert!(p.u0p[i] >= p.c_lb * r * (1.0 - 1e-12));
    }
}

#[test]
fn csv_export_layout() {
    let p = profile();
    let csv = p.to_csv();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# k=1.5,M="));
    assert_eq!(lines.next().unwrap(), "r,U0,U0p,rho0,rho0p");
    assert_eq!(lines.count(), p.nodes.len());
}
