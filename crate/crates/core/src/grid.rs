//! Composite Gauss–Lobatto radial grid on `[0, 4]`.
//!
//! Panels are `[0, 1]`, `[1, 2]` and `[2, 4]`, so the edge of the spherical
//! support and the edges of the balls `B2`, `B4` are panel boundaries. Nodes
//! on a shared boundary are stored once.

use crate::quadrature::{
    barycentric_weights, gauss_legendre, gauss_lobatto, interpolate, interpolate_with_derivative,
    lagrange_row,
};

/// Panel boundaries of the radial grid.
pub const PANEL_EDGES: [f64; 4] = [0.0, 1.0, 2.0, 4.0];

/// Outer radius of the grid.
pub const R_MAX: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    /// Global index of the first node.
    pub start: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub bary: Vec<f64>,
}

impl Panel {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.nodes.len()
    }
}

/// Points, weights and interpolation matrix for a partial panel.
#[derive(Debug, Clone)]
pub struct PartialRule {
    pub panel: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `points.len() x panel.len()` Lagrange matrix.
    pub lagrange: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    panels: Vec<Panel>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    origin_extrapolation: Vec<f64>,
    gauss_ref: (Vec<f64>, Vec<f64>),
}

impl RadialGrid {
    /// Builds the grid with `per_panel` Lobatto nodes on every panel.
    pub fn new(per_panel: usize) -> Self {
        assert!(per_panel >= 4, "need at least four nodes per panel");
        let (x, w) = gauss_lobatto(per_panel);
        let mut panels = Vec::new();
        let mut nodes: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for p in 0..PANEL_EDGES.len() - 1 {
            let (a, b) = (PANEL_EDGES[p], PANEL_EDGES[p + 1]);
            let h = 0.5 * (b - a);
            let mut pn: Vec<f64> = x.iter().map(|t| a + h * (t + 1.0)).collect();
            pn[0] = a;
            pn[per_panel - 1] = b;
            let pw: Vec<f64> = w.iter().map(|v| v * h).collect();
            let start = if p == 0 { 0 } else { nodes.len() - 1 };
            for (j, (&r, &wt)) in pn.iter().zip(&pw).enumerate() {
                if p > 0 && j == 0 {
                    weights[start] += wt;
                } else {
                    nodes.push(r);
                    weights.push(wt);
                }
            }
            let bary = barycentric_weights(&pn);
            panels.push(Panel { a, b, start, nodes: pn, weights: pw, bary });
        }
        let p0 = &panels[0];
        let inner = &p0.nodes[1..];
        let bw = barycentric_weights(inner);
        let mut origin_extrapolation = vec![0.0; inner.len()];
        lagrange_row(inner, &bw, 0.0, &mut origin_extrapolation);
        let gauss_ref = gauss_legendre(per_panel);
        Self { panels, nodes, weights, origin_extrapolation, gauss_ref }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Composite quadrature weights on `[0, 4]`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.panels[0].len()
    }

    /// Panel containing `r`, the lower one on a shared boundary.
    pub fn panel_of(&self, r: f64) -> usize {
        self.panels
            .iter()
            .position(|p| r <= p.b)
            .unwrap_or(self.panels.len() - 1)
    }

    /// Index of the node equal to `r`, if any.
    pub fn node_index(&self, r: f64) -> Option<usize> {
        self.nodes.iter().position(|&v| v == r)
    }

    /// Interpolates node values at `r`.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let p = &self.panels[self.panel_of(r)];
        interpolate(&p.nodes, &p.bary, &values[p.range()], r)
    }

    /// Interpolated value and derivative at `r`.
    pub fn interpolate_with_derivative(&self, values: &[f64], r: f64) -> (f64, f64) {
        let p = &self.panels[self.panel_of(r)];
        interpolate_with_derivative(&p.nodes, &p.bary, &values[p.range()], r)
    }

    /// Lagrange row of the panel containing `r`: `(panel index, row)`.
    pub fn lagrange_row(&self, r: f64, out: &mut Vec<f64>) -> usize {
        let pi = self.panel_of(r);
        let p = &self.panels[pi];
        out.resize(p.len(), 0.0);
        lagrange_row(&p.nodes, &p.bary, r, out);
        pi
    }

    /// Derivative values per panel: `result[p][j]` is the derivative at local node `j`.
    pub fn panel_derivatives(&self, values: &[f64]) -> Vec<Vec<f64>> {
        self.panels
            .iter()
            .map(|p| {
                let v = &values[p.range()];
                p.nodes
                    .iter()
                    .map(|&r| interpolate_with_derivative(&p.nodes, &p.bary, v, r).1)
                    .collect()
            })
            .collect()
    }

    /// Extrapolates values given at the nodes of `(0, 1]` to the origin.
    pub fn extrapolate_to_origin(&self, values: &[f64]) -> f64 {
        self.origin_extrapolation
            .iter()
            .enumerate()
            .map(|(j, c)| c * values[j + 1])
            .sum()
    }

    /// Rule for `[a_p, r_i]` when node `i` is strictly inside panel `p`.
    fn partial_rule(&self, i: usize, below: bool) -> Option<PartialRule> {
        let r = self.nodes[i];
        let pi = self
            .panels
            .iter()
            .position(|p| r > p.a && r < p.b)?;
        let p = &self.panels[pi];
        let (lo, hi) = if below { (p.a, r) } else { (r, p.b) };
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        let points: Vec<f64> = self.gauss_ref.0.iter().map(|t| c + h * t).collect();
        let weights: Vec<f64> = self.gauss_ref.1.iter().map(|w| w * h).collect();
        let n = p.len();
        let mut lagrange = vec![0.0; points.len() * n];
        for (q, &s) in points.iter().enumerate() {
            lagrange_row(&p.nodes, &p.bary, s, &mut lagrange[q * n..(q + 1) * n]);
        }
        Some(PartialRule { panel: pi, points, weights, lagrange })
    }

    /// Row `c` with `sum_j c_j f(r_j) ~ integral of kernel(s) f(s)` over `[0, r_i]`
    /// (`below`) or `[r_i, 4]`.
    pub fn integration_row<K: Fn(f64) -> f64>(&self, i: usize, below: bool, kernel: K) -> Vec<f64> {
        let mut row = vec![0.0; self.len()];
        self.accumulate_row(&mut row, i, below, |s| kernel(s));
        row
    }

    /// Adds the integration row of `kernel` to `row`.
    pub fn accumulate_row<K: FnMut(f64) -> f64>(&self, row: &mut [f64], i: usize, below: bool, mut kernel: K) {
        let r = self.nodes[i];
        for p in &self.panels {
            let inside = if below { p.b <= r } else { p.a >= r };
            if inside {
                for (j, (&s, &w)) in p.nodes.iter().zip(&p.weights).enumerate() {
                    row[p.start + j] += w * kernel(s);
                }
            }
        }
        if let Some(rule) = self.partial_rule(i, below) {
            let p = &self.panels[rule.panel];
            let n = p.len();
            for (q, (&s, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let kw = w * kernel(s);
                if kw == 0.0 {
                    continue;
                }
                for j in 0..n {
                    row[p.start + j] += kw * rule.lagrange[q * n + j];
                }
            }
        }
    }
}
