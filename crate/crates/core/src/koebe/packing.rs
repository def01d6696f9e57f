//! Orthogonal circle patterns for the vertex-face incidence (quad) graph.
//!
//! Vertex circles and face circles are laid out in the plane after a
//! stereographic projection from the tangency point of one edge `{a, b}`
//! with faces `f, g`; those four circles become straight lines. The
//! remaining radii solve the angle-sum equations
//! `sum_k 2 atan(r_k / r_j) = Φ_j`, with `Φ_j = 2π` minus `π` for every
//! line neighbor, as the minimizer of a convex functional of the log-radii.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::graph::PolyhedralGraph;
use crate::error::{Error, Result};

const DEFECT_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 200;

/// Convergence record of the radius solver.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub max_defect: f64,
    /// Maximum angle defect before each Newton step.
    pub defects: Vec<f64>,
    /// Edge whose tangency point was sent to infinity.
    pub edge_at_infinity: usize,
}

/// Tangency points of all edges on `S^2`, indexed like `graph.edges()`.
#[derive(Clone, Debug)]
pub struct Pattern {
    pub tangency: Vec<Vector3<f64>>,
    pub report: SolverReport,
}

/// Quad-graph node: vertices first, then faces.
struct QuadGraph {
    rings: Vec<Vec<usize>>,
    line: Vec<bool>,
}

impl QuadGraph {
    fn new(g: &PolyhedralGraph, at_infinity: usize) -> Self {
        let n = g.n_vertices();
        let mut rings: Vec<Vec<usize>> = (0..n).map(|v| g.faces_around(v).into_iter().map(|f| n + f).collect()).collect();
        rings.extend(g.faces().iter().map(|f| f.clone()));
        let e = g.edges()[at_infinity];
        let mut line = vec![false; rings.len()];
        for node in [e.a, e.b, n + e.left, n + e.right] {
            line[node] = true;
        }
        Self { rings, line }
    }
}

/// `Ti_2(y) = ∫_0^y atan(t)/t dt`, the inverse tangent integral.
fn ti2(y: f64) -> f64 {
    if y > 1.0 {
        return ti2(1.0 / y) + FRAC_PI_2 * y.ln();
    }
    let (nodes, weights) = gauss_legendre();
    let half = y / 2.0;
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let t = half * (x + 1.0);
            let f = if t == 0.0 { 1.0 } else { t.atan() / t };
            w * f
        })
        .sum::<f64>()
        * half
}

/// Catalan's constant `Ti_2(1)`.
const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;

/// 32-point Gauss-Legendre rule on `[-1, 1]`.
fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 32;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        (nodes, weights)
    })
}

/// Pair potential with `d/dx = -2 atan(e^{-x})`.
fn pair_potential(x: f64) -> f64 {
    2.0 * (ti2((-x).exp()) - CATALAN)
}

struct Problem {
    nodes: Vec<usize>,
    index: Vec<Option<usize>>,
    pairs: Vec<(usize, usize)>,
    target: Vec<f64>,
}

impl Problem {
    fn new(q: &QuadGraph, n_vertices: usize) -> Self {
        let nodes: Vec<usize> = (0..q.rings.len()).filter(|&j| !q.line[j]).collect();
        let mut index = vec![None; q.rings.len()];
        for (i, &j) in nodes.iter().enumerate() {
            index[j] = Some(i);
        }
        let mut pairs = Vec::new();
        for v in (0..n_vertices).filter(|&v| !q.line[v]) {
            for &f in &q.rings[v] {
                if let Some(fi) = index[f] {
                    pairs.push((index[v].expect("finite vertex"), fi));
                }
            }
        }
        let target = nodes
            .iter()
            .map(|&j| 2.0 * PI - PI * q.rings[j].iter().filter(|&&k| q.line[k]).count() as f64)
            .collect();
        Self { nodes, index, pairs, target }
    }

    /// Functional value; the gauge variable 0 is fixed at 0.
    fn energy(&self, rho: &DVector<f64>) -> f64 {
        let pairs: f64 = self.pairs.iter().map(|&(v, f)| pair_potential(rho[f] - rho[v]) - PI * rho[v]).sum();
        pairs + self.target.iter().zip(rho.iter()).map(|(t, r)| t * r).sum::<f64>()
    }

    /// Angle defects `Φ_j - Σ 2 atan(r_k / r_j)`.
    fn gradient(&self, rho: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::from_column_slice(&self.target);
        for &(v, f) in &self.pairs {
            g[v] -= 2.0 * (rho[f] - rho[v]).exp().atan();
            g[f] -= 2.0 * (rho[v] - rho[f]).exp().atan();
        }
        g
    }

    fn hessian(&self, rho: &DVector<f64>) -> DMatrix<f64> {
        let m = self.nodes.len();
        let mut h = DMatrix::zeros(m, m);
        for &(v, f) in &self.pairs {
            let w = 1.0 / (rho[f] - rho[v]).cosh();
            h[(v, v)] += w;
            h[(f, f)] += w;
            h[(v, f)] -= w;
            h[(f, v)] -= w;
        }
        h
    }
}

/// Solves for the radii and lays out the pattern, returning the tangency
/// points on the sphere.
pub fn solve(g: &PolyhedralGraph, at_infinity: usize) -> Result<Pattern> {
    let q = QuadGraph::new(g, at_infinity);
    let p = Problem::new(&q, g.n_vertices());
    let m = p.nodes.len();
    let mut rho = DVector::zeros(m);
    let mut report = SolverReport { edge_at_infinity: at_infinity, ..Default::default() };
    loop {
        let grad = p.gradient(&rho);
        let defect = grad.amax();
        report.defects.push(defect);
        report.max_defect = defect;
        if defect < DEFECT_TOL {
            break;
        }
        if report.iterations >= MAX_NEWTON || !defect.is_finite() {
            return Err(Error::SolverDiverged { iterations: report.iterations, defect, trace: report.defects });
        }
        report.iterations += 1;
        // Fix rho_0 = 0 to remove the scaling freedom.
        let h = p.hessian(&rho).view((1, 1), (m - 1, m - 1)).into_owned();
        let rhs = -grad.rows(1, m - 1).into_owned();
        let step = h
            .cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or_else(|| Error::SolverDiverged { iterations: report.iterations, defect, trace: report.defects.clone() })?;
        let mut full = DVector::zeros(m);
        full.rows_mut(1, m - 1).copy_from(&step);
        let slope = grad.dot(&full);
        let e0 = p.energy(&rho);
        let mut t = 1.0;
        while t > 1e-12 && p.energy(&(&rho + &full * t)) > e0 + 1e-4 * t * slope {
            t /= 2.0;
        }
        rho += full * t;
    }

    let radius: Vec<f64> = rho.iter().map(|r| r.exp()).collect();
    let centers = layout(&q, &p, &radius)?;
    let tangency = g
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            if k == at_infinity {
                return Ok(Vector3::new(0.0, 0.0, 1.0));
            }
            let (v, other) = if q.line[e.a] { (e.b, e.a) } else { (e.a, e.b) };
            let ring = &q.rings[v];
            let vi = p.index[v].expect("finite endpoint");
            let (c, r, phi) = &centers[vi];
            let half = |node: usize| p.index[node].map_or(FRAC_PI_2, |k| (radius[k] / r).atan());
            let mut angle = *phi;
            for s in 0..ring.len() {
                let next = ring[(s + 1) % ring.len()];
                angle += half(ring[s]);
                if g.edge_between(v, ring[s] - g.n_vertices(), next - g.n_vertices()) == Some(k) {
                    let t = c + Vector2::new(angle.cos(), angle.sin()) * *r;
                    return Ok(inverse_stereographic(&t));
                }
                angle += half(next);
            }
            Err(Error::NotPolyhedralGraph(format!("edge {{{v}, {other}}} is missing from the ring of {v}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pattern { tangency, report })
}

/// Places every finite circle: center, radius and the direction angle of
/// the first ring neighbor.
fn layout(q: &QuadGraph, p: &Problem, radius: &[f64]) -> Result<Vec<(Vector2<f64>, f64, f64)>> {
    let m = p.nodes.len();
    let mut placed: Vec<Option<(Vector2<f64>, f64, f64)>> = vec![None; m];
    placed[0] = Some((Vector2::zeros(), radius[0], 0.0));
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (c, r, phi0) = placed[i].expect("queued nodes are placed");
        let ring = &q.rings[p.nodes[i]];
        let half = |node: usize| p.index[node].map_or(FRAC_PI_2, |k| (radius[k] / r).atan());
        let mut angle = phi0;
        for s in 0..ring.len() {
            if s > 0 {
                angle += half(ring[s - 1]) + half(ring[s]);
            }
            let Some(k) = p.index[ring[s]] else { continue };
            if placed[k].is_some() {
                continue;
            }
            let ck = c + Vector2::new(angle.cos(), angle.sin()) * (r * r + radius[k] * radius[k]).sqrt();
            // Direction from k back to i, then back up to k's first neighbor.
            let back = q.rings[ring[s]].iter().position(|&x| x == p.nodes[i]).expect("rings are symmetric");
            let ring_k = &q.rings[ring[s]];
            let half_k = |node: usize| p.index[node].map_or(FRAC_PI_2, |j| (radius[j] / radius[k]).atan());
            let mut phi = angle + PI;
            for t in (1..=back).rev() {
                phi -= half_k(ring_k[t]) + half_k(ring_k[t - 1]);
            }
            placed[k] = Some((ck, radius[k], phi));
            queue.push_back(k);
        }
    }
    placed
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::NotPolyhedralGraph("circle pattern is disconnected".into()))
}

/// Inverse stereographic projection from the north pole.
pub fn inverse_stereographic(t: &Vector2<f64>) -> Vector3<f64> {
    let s = t.norm_squared();
    Vector3::new(2.0 * t.x, 2.0 * t.y, s - 1.0) / (s + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn inverse_tangent_integral() {
        assert!((ti2(1.0) - CATALAN).abs() < 1e-15);
        // Series check at y = 0.3.
        let series: f64 = (0..60).map(|k| (-1f64).powi(k) * 0.3f64.powi(2 * k + 1) / ((2 * k + 1) as f64).powi(2)).sum();
        assert!((ti2(0.3) - series).abs() < 1e-15);
        assert!((ti2(4.0) - ti2(0.25) - FRAC_PI_2 * 4f64.ln()).abs() < 1e-15);
        // Derivative of the pair potential.
        for x in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let h = 1e-5;
            let fd = (pair_potential(x + h) - pair_potential(x - h)) / (2.0 * h);
            assert!((fd + 2.0 * (-x).exp().atan()).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn tangency_points_are_on_the_sphere() {
        for p in [fixtures::tetrahedron(), fixtures::cube3(), fixtures::dodecahedron()] {
            let g = PolyhedralGraph::from_polytope(&p).unwrap();
            let pattern = solve(&g, 0).unwrap();
            assert!(pattern.report.max_defect < DEFECT_TOL);
            assert!(pattern.tangency.iter().all(|t| (t.norm() - 1.0).abs() < 1e-12));
            // Distinct edges touch at distinct points.
            for i in 0..pattern.tangency.len() {
                for j in 0..i {
                    assert!((pattern.tangency[i] - pattern.tangency[j]).norm() > 1e-6);
                }
            }
        }
    }
}
