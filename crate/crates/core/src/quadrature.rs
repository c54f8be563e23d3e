//! Gauss rules, barycentric interpolation and an adaptive integrator.

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint value of P_n'
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Lobatto nodes and weights on `[-1, 1]` with `n >= 2` points, ascending.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let deg = n - 1;
    let df = deg as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    x[0] = -1.0;
    x[n - 1] = 1.0;
    for i in 1..=(n - 1) / 2 {
        // interior nodes are the roots of P'_deg
        let mut z = (std::f64::consts::PI * i as f64 / df).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(deg, z);
            let d2p = (2.0 * z * dp - df * (df + 1.0) * p) / (1.0 - z * z);
            let dz = dp / d2p;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    for i in 0..n {
        let (p, _) = legendre_with_derivative(deg, x[i]);
        w[i] = 2.0 / (df * (df + 1.0) * p * p);
    }
    (x, w)
}

/// Barycentric weights for arbitrary distinct nodes, scaled to unit maximum.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let (lo, hi) = nodes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let scale = if hi > lo { 4.0 / (hi - lo) } else { 1.0 };
    let mut w: Vec<f64> = (0..n)
        .map(|j| {
            let mut p = 1.0;
            for k in 0..n {
                if k != j {
                    p *= scale * (nodes[j] - nodes[k]);
                }
            }
            1.0 / p
        })
        .collect();
    let m = w.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    for v in &mut w {
        *v /= m;
    }
    w
}

/// Writes the Lagrange cardinal values `l_j(x)` into `out`.
pub fn lagrange_row(nodes: &[f64], bw: &[f64], x: f64, out: &mut [f64]) {
    if let Some(i) = nodes.iter().position(|&v| v == x) {
        out.iter_mut().for_each(|o| *o = 0.0);
        out[i] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for j in 0..nodes.len() {
        let t = bw[j] / (x - nodes[j]);
        out[j] = t;
        denom += t;
    }
    for o in out.iter_mut() {
        *o /= denom;
    }
}

/// Evaluates the interpolant and its derivative at `x`.
pub fn interpolate_with_derivative(nodes: &[f64], bw: &[f64], values: &[f64], x: f64) -> (f64, f64) {
    if let Some(i) = nodes.iter().position(|&v| v == x) {
        let mut d = 0.0;
        for j in 0..nodes.len() {
            if j != i {
                d += (bw[j] / bw[i]) * (values[j] - values[i]) / (nodes[i] - nodes[j]);
            }
        }
        return (values[i], d);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..nodes.len() {
        let t = bw[j] / (x - nodes[j]);
        num += t * values[j];
        den += t;
    }
    let p = num / den;
    let mut dnum = 0.0;
    for j in 0..nodes.len() {
        let dx = x - nodes[j];
        dnum += bw[j] / dx * (p - values[j]) / dx;
    }
    (p, dnum / den)
}

/// Evaluates the interpolant at `x`.
pub fn interpolate(nodes: &[f64], bw: &[f64], values: &[f64], x: f64) -> f64 {
    if let Some(i) = nodes.iter().position(|&v| v == x) {
        return values[i];
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..nodes.len() {
        let t = bw[j] / (x - nodes[j]);
        num += t * values[j];
        den += t;
    }
    num / den
}

/// Spectral differentiation matrix, row-major.
pub fn differentiation_matrix(nodes: &[f64], bw: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bw[j] / bw[i]) / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn mapped_gauss(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// Adaptive bisection with a ten-point Gauss rule.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let (x, w) = gauss_legendre(10);
    let rule = |lo: f64, hi: f64| {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        h * x.iter().zip(&w).map(|(t, wt)| wt * f(c + h * t)).sum::<f64>()
    };
    let mut stack = vec![(a, b, rule(a, b), 0usize)];
    let mut total = 0.0;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule(lo, mid);
        let right = rule(mid, hi);
        let err = (left + right - whole).abs();
        let scale = (left + right).abs().max(1e-300);
        if err <= tol.max(1e-15 * scale) || depth >= 50 {
            total += left + right;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_high_degree_monomials() {
        let (x, w) = gauss_legendre(12);
        for p in 0..24 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn lobatto_rule_is_exact_to_degree_2n_minus_3() {
        for n in [2usize, 5, 16, 64] {
            let (x, w) = gauss_lobatto(n);
            assert_eq!(x[0], -1.0);
            assert_eq!(x[n - 1], 1.0);
            for p in 0..(2 * n - 2) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} p={p}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn barycentric_interpolation_reproduces_smooth_function() {
        let (x, _) = gauss_lobatto(40);
        let nodes: Vec<f64> = x.iter().map(|t| 1.0 + 0.5 * (t + 1.0)).collect();
        let bw = barycentric_weights(&nodes);
        let vals: Vec<f64> = nodes.iter().map(|s| (3.0 * s).sin()).collect();
        for &t in &[1.0, 1.1234, 1.5, 1.999, 2.0] {
            let (p, dp) = interpolate_with_derivative(&nodes, &bw, &vals, t);
            assert!((p - (3.0 * t).sin()).abs() < 1e-14);
            assert!((dp - 3.0 * (3.0 * t).cos()).abs() < 1e-11);
        }
        let d = differentiation_matrix(&nodes, &bw);
        for i in 0..nodes.len() {
            let s: f64 = (0..nodes.len()).map(|j| d[i * nodes.len() + j] * vals[j]).sum();
            assert!((s - 3.0 * (3.0 * nodes[i]).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn adaptive_rule_handles_endpoint_singularity() {
        let v = integrate_adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-14);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }
}
