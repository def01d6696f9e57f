//! Midscribed realizations built from edge tangency points.

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use super::graph::PolyhedralGraph;
use super::mobius::{CircleOnSphere, MobiusMap};
use super::packing::SolverReport;
use crate::error::{Error, Result};
use crate::sphere::Tolerances;

/// Bound on every realization residual.
pub const TANGENCY_TOL: f64 = 1e-6;

/// Largest deviations from an exact midscribed configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `|dist(o, edge line) - 1|` and the distance of each tangency point
    /// from its edge line.
    pub edge_tangency: f64,
    /// `|I + 1|` for touching circles and `|I|` for orthogonal ones, with
    /// `I` the inversive distance.
    pub circle_tangency: f64,
    /// Tangency points off their circles and vertices off their face planes.
    pub incidence: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.edge_tangency.max(self.circle_tangency).max(self.incidence)
    }
}

/// A polyhedron with the combinatorics of `graph` whose edges all touch the
/// unit sphere, with its face circles (incircles) and vertex circles.
#[derive(Clone, Debug, Serialize)]
pub struct KoebeRealization {
    pub graph: PolyhedralGraph,
    pub vertices: Vec<Vector3<f64>>,
    pub face_circles: Vec<CircleOnSphere>,
    pub vertex_circles: Vec<CircleOnSphere>,
    /// Tangency point of each edge of `graph.edges()`.
    pub tangency: Vec<Vector3<f64>>,
    pub residuals: Residuals,
    pub solver: SolverReport,
}

impl KoebeRealization {
    /// Fits vertex and face circles through the tangency points. Each cap is
    /// oriented away from the tangency points of the other edges.
    pub fn from_tangency(
        graph: PolyhedralGraph,
        tangency: Vec<Vector3<f64>>,
        solver: SolverReport,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = graph.n_vertices();
        let vertex_edges: Vec<Vec<usize>> = (0..n)
            .map(|v| (0..graph.edges().len()).filter(|&k| graph.edges()[k].a == v || graph.edges()[k].b == v).collect())
            .collect();
        let face_edges: Vec<Vec<usize>> = graph.faces().iter().map(|f| face_edge_cycle(&graph, f)).collect();
        let vertex_circles = vertex_edges
            .iter()
            .map(|e| fit_circle(&tangency, e, tol))
            .collect::<Result<Vec<_>>>()?;
        let face_circles = face_edges.iter().map(|e| fit_circle(&tangency, e, tol)).collect::<Result<Vec<_>>>()?;
        Self::from_circles(graph, vertex_circles, face_circles, tangency, solver)
    }

    fn from_circles(
        graph: PolyhedralGraph,
        vertex_circles: Vec<CircleOnSphere>,
        face_circles: Vec<CircleOnSphere>,
        tangency: Vec<Vector3<f64>>,
        solver: SolverReport,
    ) -> Result<Self> {
        if let Some(v) = vertex_circles.iter().position(|c| c.offset <= 0.0) {
            return Err(Error::VerificationFailed(format!(
                "vertex circle {v} is not smaller than a hemisphere (offset {:e})",
                vertex_circles[v].offset
            )));
        }
        let vertices = vertex_circles.iter().map(|c| c.pole()).collect();
        let mut k = Self { graph, vertices, face_circles, vertex_circles, tangency, residuals: Residuals::default(), solver };
        k.residuals = k.compute_residuals();
        Ok(k)
    }

    fn compute_residuals(&self) -> Residuals {
        let mut r = Residuals::default();
        for (e, t) in self.graph.edges().iter().zip(&self.tangency) {
            let (p, q) = (&self.vertices[e.a], &self.vertices[e.b]);
            let d = (q - p).normalize();
            let dist = p.cross(&d).norm();
            r.edge_tangency = r.edge_tangency.max((dist - 1.0).abs()).max((t - p).cross(&d).norm());
            for c in [&self.vertex_circles[e.a], &self.vertex_circles[e.b], &self.face_circles[e.left], &self.face_circles[e.right]] {
                r.incidence = r.incidence.max(c.residual(t).abs());
            }
            r.circle_tangency = r
                .circle_tangency
                .max((self.vertex_circles[e.a].inversive(&self.vertex_circles[e.b]) + 1.0).abs())
                .max((self.face_circles[e.left].inversive(&self.face_circles[e.right]) + 1.0).abs());
        }
        for (f, cycle) in self.graph.faces().iter().enumerate() {
            let c = &self.face_circles[f];
            for &v in cycle {
                let rel = (c.normal.dot(&self.vertices[v]) - c.offset).abs() / self.vertices[v].norm().max(1.0);
                r.incidence = r.incidence.max(rel);
                r.circle_tangency = r.circle_tangency.max(c.inversive(&self.vertex_circles[v]).abs());
            }
        }
        r
    }

    pub fn check(&self) -> Result<()> {
        let worst = self.residuals.max();
        if !(worst <= TANGENCY_TOL) {
            return Err(Error::VerificationFailed(format!("realization residual {worst:e} exceeds {TANGENCY_TOL:e}")));
        }
        Ok(())
    }

    /// Image under a Möbius transformation, acting on circles and tangency
    /// points directly.
    pub fn transform(&self, m: &MobiusMap) -> Result<Self> {
        let vertex_circles = self.vertex_circles.iter().map(|c| m.apply_circle(c)).collect();
        let face_circles = self.face_circles.iter().map(|c| m.apply_circle(c)).collect();
        let tangency = self.tangency.iter().map(|t| m.apply_point(t).normalize()).collect();
        Self::from_circles(self.graph.clone(), vertex_circles, face_circles, tangency, self.solver.clone())
    }

    /// Tangency points of face `j` in the cyclic order of its edges.
    pub fn face_tangency(&self, j: usize) -> Vec<Vector3<f64>> {
        face_edge_cycle(&self.graph, &self.graph.faces()[j]).into_iter().map(|e| self.tangency[e]).collect()
    }

    /// Smallest signed distance from `p` to the chords of face `j`'s ideal
    /// polygon, measured inside the face plane; positive inside.
    pub fn relint_distance(&self, j: usize, p: &Vector3<f64>) -> f64 {
        let q = self.face_tangency(j);
        let m = self.face_circles[j].normal;
        let centroid = q.iter().sum::<Vector3<f64>>() / q.len() as f64;
        (0..q.len())
            .map(|k| {
                let a = q[k];
                let b = q[(k + 1) % q.len()];
                let nu = m.cross(&(b - a)).normalize();
                let s = if nu.dot(&(centroid - a)) >= 0.0 { 1.0 } else { -1.0 };
                s * nu.dot(&(p - a))
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Edges of a face cycle `v_0 v_1 ... v_{k-1}`, edge `k` joining `v_k` and
/// `v_{k+1}`.
fn face_edge_cycle(graph: &PolyhedralGraph, face: &[usize]) -> Vec<usize> {
    (0..face.len())
        .map(|k| graph.edge_index(face[k], face[(k + 1) % face.len()]).expect("face edges exist"))
        .collect()
}

/// Circle through the tangency points `on`, oriented so that the other
/// tangency points lie outside its cap.
fn fit_circle(points: &[Vector3<f64>], on: &[usize], tol: &Tolerances) -> Result<CircleOnSphere> {
    let a = DMatrix::from_fn(on.len().max(4), 4, |r, c| match (on.get(r), c) {
        (Some(_), 3) => -1.0,
        (Some(&k), c) => points[k][c],
        (None, _) => 0.0,
    });
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smallest = (0..4).min_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y])).expect("4 columns");
    let w = v_t.row(smallest);
    let mut c = CircleOnSphere::new(Vector3::new(w[0], w[1], w[2]), w[3], tol.pred)?;
    let outside: f64 = (0..points.len()).filter(|k| !on.contains(k)).map(|k| c.residual(&points[k])).sum();
    if outside > 0.0 {
        c = CircleOnSphere { normal: -c.normal, offset: -c.offset };
    }
    Ok(c)
}

/// Möbius transformation placing the conformal barycenter of the tangency
/// points at the origin.
pub fn center_tangency(tangency: &[Vector3<f64>]) -> Result<MobiusMap> {
    let mut total = MobiusMap::identity();
    let mut pts = tangency.to_vec();
    for _ in 0..2000 {
        let mean = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
        if mean.norm() < 1e-14 {
            return Ok(total);
        }
        let step = MobiusMap::boost_to_origin(&(mean * 0.9))?;
        pts = pts.iter().map(|t| step.apply_point(t).normalize()).collect();
        total = step.compose(&total);
    }
    let mean = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
    if mean.norm() < 1e-10 {
        Ok(total)
    } else {
        Err(Error::VerificationFailed(format!("centering stalled at |mean| = {:e}", mean.norm())))
    }
}
