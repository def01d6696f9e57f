//! Convex polytopes in `E^d`, with facets computed by lifting to the cone
//! over `(x, 1)`.

use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use nalgebra::DVector;

use crate::cone;
use crate::error::{Error, Result};
use crate::lattice::FaceLattice;
use crate::linalg;
use crate::sphere::Tolerances;

/// A full-dimensional convex polytope `{ x : <n_i, x> <= b_i }` together with
/// its extreme vertices.
#[derive(Clone, Debug)]
pub struct EuclideanPolytope {
    dim: usize,
    vertices: Vec<DVector<f64>>,
    facet_normals: Vec<DVector<f64>>,
    offsets: Vec<f64>,
    incidence: Vec<FixedBitSet>,
    tol: Tolerances,
    lattice: OnceLock<FaceLattice>,
}

impl EuclideanPolytope {
    /// Convex hull of `points`. Duplicates (relative to the polytope's size)
    /// are merged and non-extreme points dropped; the surviving vertices keep
    /// their input order.
    pub fn from_vertices(points: &[DVector<f64>], tol: &Tolerances) -> Result<Self> {
        tol.validate()?;
        let d = points.first().map_or(0, |p| p.len());
        if d < 1 {
            return Err(Error::DegenerateDimension("empty point set".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: p.len() });
        }
        let mut centroid = DVector::zeros(d);
        for p in points {
            centroid += p;
        }
        centroid /= points.len() as f64;
        let radius = points.iter().map(|p| (p - &centroid).norm()).fold(0.0, f64::max);
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::DegenerateDimension("points coincide".into()));
        }

        let mut kept: Vec<usize> = Vec::new();
        for (i, p) in points.iter().enumerate() {
            if !kept.iter().any(|&j| (&points[j] - p).norm() <= tol.dedup * radius) {
                kept.push(i);
            }
        }
        if kept.len() < d + 1 {
            return Err(Error::DegenerateDimension(format!("{} distinct points cannot span E^{d}", kept.len())));
        }
        let lifted: Vec<DVector<f64>> = kept
            .iter()
            .map(|&i| {
                let x = (&points[i] - &centroid) / radius;
                DVector::from_fn(d + 1, |k, _| if k < d { x[k] } else { 1.0 }).normalize()
            })
            .collect();
        let refs: Vec<&DVector<f64>> = lifted.iter().collect();
        if linalg::rank(&refs, d + 1, 1e-10) < d + 1 {
            return Err(Error::DegenerateDimension("points lie in a hyperplane".into()));
        }
        let hull = cone::cone_hull(&lifted, tol.pred)?;

        let extreme: Vec<usize> = (0..kept.len())
            .filter(|&i| {
                let mut meet: Option<FixedBitSet> = None;
                for inc in hull.incidence.iter().filter(|s| s.contains(i)) {
                    match meet.as_mut() {
                        Some(m) => m.intersect_with(inc),
                        None => meet = Some(inc.clone()),
                    }
                }
                meet.is_some_and(|m| m.count_ones(..) == 1)
            })
            .collect();

        let mut facets: Vec<(DVector<f64>, f64, FixedBitSet)> = hull
            .normals
            .iter()
            .zip(&hull.incidence)
            .map(|(ab, inc)| {
                // <a, y> + beta <= 0 with y = (x - centroid) / radius.
                let a = ab.rows(0, d).into_owned();
                let beta = ab[d];
                let len = a.norm();
                let normal = a / len;
                let offset = normal.dot(&centroid) - beta * radius / len;
                let mut s = FixedBitSet::with_capacity(extreme.len());
                for (new, &old) in extreme.iter().enumerate() {
                    if inc.contains(old) {
                        s.insert(new);
                    }
                }
                (normal, offset, s)
            })
            .collect();
        facets.sort_by(|a, b| {
            let ka: Vec<i64> = a.0.iter().map(|x| (x * 1e9).round() as i64).collect();
            let kb: Vec<i64> = b.0.iter().map(|x| (x * 1e9).round() as i64).collect();
            ka.cmp(&kb).then(a.1.total_cmp(&b.1))
        });

        let vertices: Vec<DVector<f64>> = extreme.iter().map(|&i| points[kept[i]].clone()).collect();
        let mut facet_normals = Vec::with_capacity(facets.len());
        let mut offsets = Vec::with_capacity(facets.len());
        let mut incidence = Vec::with_capacity(facets.len());
        for (n, b, s) in facets {
            facet_normals.push(n);
            offsets.push(b);
            incidence.push(s);
        }
        let p = Self { dim: d, vertices, facet_normals, offsets, incidence, tol: *tol, lattice: OnceLock::new() };
        p.validate(radius)?;
        Ok(p)
    }

    fn validate(&self, radius: f64) -> Result<()> {
        let slack = self.tol.pred * radius.max(1.0) * 10.0;
        for (f, (n, b)) in self.facet_normals.iter().zip(&self.offsets).enumerate() {
            for (i, v) in self.vertices.iter().enumerate() {
                let s = n.dot(v) - b;
                let tight = self.incidence[f].contains(i);
                if s > slack || (tight && s.abs() > slack) {
                    return Err(Error::DegenerateDimension(format!(
                        "vertex {i} is inconsistent with facet {f} (residual {s:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_rows(rows: &[Vec<f64>], tol: &Tolerances) -> Result<Self> {
        let pts: Vec<DVector<f64>> = rows.iter().map(|r| DVector::from_column_slice(r)).collect();
        Self::from_vertices(&pts, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    /// Unit outer facet normals.
    pub fn facet_normals(&self) -> &[DVector<f64>] {
        &self.facet_normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn incidence(&self) -> &[FixedBitSet] {
        &self.incidence
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    pub fn face_lattice(&self) -> &FaceLattice {
        self.lattice.get_or_init(|| FaceLattice::from_incidence(self.vertices.len(), &self.incidence))
    }

    /// Facets containing the proper face with vertex set `face`.
    pub fn facets_of_face(&self, face: &[usize]) -> Result<Vec<usize>> {
        let mut sorted = face.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        self.face_lattice()
            .find(&sorted)
            .map(|f| f.facets.clone())
            .ok_or_else(|| Error::InvalidFace(format!("{sorted:?} is not a proper face")))
    }

    pub fn vertex_facets(&self, v: usize) -> Vec<usize> {
        (0..self.incidence.len()).filter(|&f| self.incidence[f].contains(v)).collect()
    }

    pub fn centroid(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    pub fn max_vertex_norm(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// For `d = 3`: the vertex cycle of every facet, counterclockwise when
    /// seen from outside.
    pub fn facet_cycles(&self) -> Result<Vec<Vec<usize>>> {
        if self.dim != 3 {
            return Err(Error::UnsupportedDimension { dim: self.dim, reason: "facet cycles need d = 3".into() });
        }
        Ok(self
            .facet_normals
            .iter()
            .zip(&self.incidence)
            .map(|(n, inc)| {
                let ids: Vec<usize> = inc.ones().collect();
                let mut c = DVector::zeros(3);
                for &i in &ids {
                    c += &self.vertices[i];
                }
                c /= ids.len() as f64;
                let frame = linalg::complement_basis(std::slice::from_ref(n), 3);
                let (mut u, mut w) = (frame[0].clone(), frame[1].clone());
                // Orient (u, w, n) positively so angles increase counterclockwise.
                if linalg::det_of_columns(&[&u, &w, n]) < 0.0 {
                    std::mem::swap(&mut u, &mut w);
                }
                let mut ids = ids;
                ids.sort_by(|&a, &b| {
                    let da = &self.vertices[a] - &c;
                    let db = &self.vertices[b] - &c;
                    da.dot(&w).atan2(da.dot(&u)).total_cmp(&db.dot(&w).atan2(db.dot(&u)))
                });
                ids
            })
            .collect())
    }
}
