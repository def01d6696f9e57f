//! Spherical convex polytopes, represented through their polyhedral cones.
//!
//! A [`SphericalPolytope`] stores its extreme vertices, the outer facet
//! normals of the cone `pos(V)` (so the cone is `{ y : <n_i, y> <= 0 }`), the
//! vertex-facet incidence, and a margin witness: a center `c` with
//! `<c, v> >= margin` for every vertex.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use nalgebra::DVector;
use serde::Serialize;

use crate::cone;
use crate::error::{Error, Result};
use crate::lattice::FaceLattice;
use crate::linalg;
use crate::sphere::{Tolerances, UnitPoint};

#[derive(Clone, Debug)]
pub struct SphericalPolytope {
    dim: usize,
    vertices: Vec<UnitPoint>,
    facet_normals: Vec<UnitPoint>,
    incidence: Vec<FixedBitSet>,
    margin: f64,
    center: UnitPoint,
    tol: Tolerances,
    id: u64,
    lattice: OnceLock<FaceLattice>,
    polar: OnceLock<Box<SphericalPolytope>>,
}

/// A proper face of a specific polytope, identified by its sorted vertex
/// index set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Face {
    #[serde(skip)]
    owner: u64,
    pub vertices: Vec<usize>,
    /// Facets containing the face, as indices into the owner's facet list.
    pub facets: Vec<usize>,
    pub dim: usize,
    /// Normal of a supporting greatsphere exposing exactly this face.
    #[serde(serialize_with = "serialize_point")]
    pub normal: UnitPoint,
}

fn serialize_point<S: serde::Serializer>(p: &UnitPoint, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.to_vec().serialize(s)
}

impl Face {
    pub fn owner(&self) -> u64 {
        self.owner
    }
}

/// A chain `F_s ⊂ ... ⊂ F_{d-1}` of faces with consecutive dimensions,
/// listed from the smallest face upwards.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialFlag {
    pub faces: Vec<Face>,
}

impl PartialFlag {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}

fn quantized_key(v: &DVector<f64>) -> Vec<i64> {
    v.iter().map(|x| (x * 1e9).round() as i64).collect()
}

fn canonical_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    quantized_key(a).cmp(&quantized_key(b)).then_with(|| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

fn polytope_id(dim: usize, vertices: &[UnitPoint]) -> u64 {
    let mut h = DefaultHasher::new();
    dim.hash(&mut h);
    for v in vertices {
        for x in v.coords().iter() {
            x.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// Maximizes `min_i <x, v_i>` over unit `x`: the normalized minimum-norm
/// point of `conv(V)`. Returns `(center, margin)`.
pub(crate) fn hemisphere_margin(points: &[DVector<f64>]) -> (Option<DVector<f64>>, f64) {
    let x = linalg::min_norm_point(points);
    let norm = x.norm();
    if norm <= 1e-300 {
        return (None, 0.0);
    }
    let c = x / norm;
    let margin = points.iter().map(|p| p.dot(&c)).fold(f64::INFINITY, f64::min);
    (Some(c), margin)
}

impl SphericalPolytope {
    /// Builds the polytope spanned by `points` on `S^d`: merges duplicates,
    /// drops non-extreme points and computes the cone facets and the margin.
    pub fn from_vertices(d: usize, points: &[UnitPoint], tol: &Tolerances) -> Result<Self> {
        tol.validate()?;
        if d < 1 {
            return Err(Error::UnsupportedDimension { dim: d, reason: "spheres of dimension at least 1 are required".into() });
        }
        let n = d + 1;
        let mut kept: Vec<DVector<f64>> = Vec::new();
        for p in points {
            if p.ambient_dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.ambient_dim() });
            }
            if !kept.iter().any(|q| (q - p.coords()).norm() <= tol.dedup) {
                kept.push(p.coords().clone());
            }
        }
        if kept.len() < n {
            return Err(Error::DegenerateDimension(format!("{} distinct points cannot span S^{d}", kept.len())));
        }

        let (center, margin) = hemisphere_margin(&kept);
        let center = match center {
            Some(c) if margin > tol.pred => c,
            _ => return Err(Error::NotInOpenHemisphere { margin: margin.max(0.0) }),
        };

        let refs: Vec<&DVector<f64>> = kept.iter().collect();
        let r = linalg::rank(&refs, n, 1e-10);
        if r < n {
            return Err(Error::DegenerateDimension(format!("points span a cone of dimension {r} in E^{n}")));
        }

        let hull = cone::cone_hull(&kept, tol.pred)?;

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

        let vertices: Vec<UnitPoint> = extreme.iter().map(|&i| UnitPoint::from_unit(kept[i].clone())).collect();
        let mut facets: Vec<(DVector<f64>, FixedBitSet)> = hull
            .normals
            .into_iter()
            .zip(hull.incidence)
            .map(|(normal, inc)| {
                let mut s = FixedBitSet::with_capacity(extreme.len());
                for (new, &old) in extreme.iter().enumerate() {
                    if inc.contains(old) {
                        s.insert(new);
                    }
                }
                (normal, s)
            })
            .collect();
        facets.sort_by(|a, b| canonical_cmp(&a.0, &b.0));

        let margin = vertices.iter().map(|v| v.dot_vec(&center)).fold(f64::INFINITY, f64::min);
        let (facet_normals, incidence): (Vec<_>, Vec<_>) =
            facets.into_iter().map(|(n, s)| (UnitPoint::from_unit(n), s)).unzip();
        let p = Self::from_parts(d, vertices, facet_normals, incidence, UnitPoint::from_unit(center), margin, *tol);
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor from raw coordinate rows, normalizing each.
    pub fn from_coords(d: usize, rows: &[Vec<f64>], tol: &Tolerances) -> Result<Self> {
        let pts = rows.iter().map(|r| UnitPoint::from_slice(r, tol)).collect::<Result<Vec<_>>>()?;
        Self::from_vertices(d, &pts, tol)
    }

    fn from_parts(
        dim: usize,
        vertices: Vec<UnitPoint>,
        facet_normals: Vec<UnitPoint>,
        incidence: Vec<FixedBitSet>,
        center: UnitPoint,
        margin: f64,
        tol: Tolerances,
    ) -> Self {
        let id = polytope_id(dim, &vertices);
        Self {
            dim,
            vertices,
            facet_normals,
            incidence,
            margin,
            center,
            tol,
            id,
            lattice: OnceLock::new(),
            polar: OnceLock::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.margin <= self.tol.pred {
            return Err(Error::NotInOpenHemisphere { margin: self.margin });
        }
        for (f, n) in self.facet_normals.iter().enumerate() {
            let on: Vec<&DVector<f64>> = self.incidence[f].ones().map(|i| self.vertices[i].coords()).collect();
            if linalg::rank(&on, self.dim + 1, 1e-10) != self.dim {
                return Err(Error::DegenerateDimension(format!("facet {f} is not spanned by its vertices")));
            }
            for (i, v) in self.vertices.iter().enumerate() {
                let s = n.dot(v);
                let tight = self.incidence[f].contains(i);
                if (tight && s.abs() > self.tol.pred) || (!tight && s >= -self.tol.pred) {
                    return Err(Error::DegenerateDimension(format!(
                        "vertex {i} has ambiguous position {s:e} relative to facet {f}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[UnitPoint] {
        &self.vertices
    }

    pub fn facet_normals(&self) -> &[UnitPoint] {
        &self.facet_normals
    }

    /// `incidence()[f]` is the vertex set of facet `f`.
    pub fn incidence(&self) -> &[FixedBitSet] {
        &self.incidence
    }

    pub fn hemisphere_margin(&self) -> f64 {
        self.margin
    }

    pub fn center(&self) -> &UnitPoint {
        &self.center
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Facets containing vertex `v`.
    pub fn vertex_facets(&self, v: usize) -> Vec<usize> {
        (0..self.incidence.len()).filter(|&f| self.incidence[f].contains(v)).collect()
    }

    /// Whether `p` lies in the closed polytope.
    pub fn contains(&self, p: &UnitPoint) -> bool {
        self.facet_normals.iter().all(|n| n.dot(p) <= self.tol.pred)
    }

    /// Whether `p` lies strictly inside the polytope.
    pub fn is_interior(&self, p: &UnitPoint) -> bool {
        self.facet_normals.iter().all(|n| n.dot(p) < -self.tol.pred)
    }

    pub fn face_lattice(&self) -> &FaceLattice {
        self.lattice.get_or_init(|| FaceLattice::from_incidence(self.vertices.len(), &self.incidence))
    }

    /// The face with the given vertex set, which must be a proper face.
    pub fn face(&self, vertices: &[usize]) -> Result<Face> {
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let lf = self
            .face_lattice()
            .find(&sorted)
            .ok_or_else(|| Error::InvalidFace(format!("{sorted:?} is not a proper face")))?;
        let mut sum = DVector::zeros(self.dim + 1);
        for &f in &lf.facets {
            sum += self.facet_normals[f].coords();
        }
        Ok(Face {
            owner: self.id,
            vertices: lf.vertices.clone(),
            facets: lf.facets.clone(),
            dim: lf.dim,
            normal: UnitPoint::from_unit(sum.normalize()),
        })
    }

    /// All proper faces, ordered by the lattice.
    pub fn faces(&self) -> Vec<Face> {
        self.face_lattice()
            .faces()
            .iter()
            .map(|lf| self.face(&lf.vertices).expect("lattice face"))
            .collect()
    }

    pub(crate) fn check_face(&self, f: &Face) -> Result<()> {
        if f.owner != self.id || self.face_lattice().find(&f.vertices).is_none() {
            return Err(Error::InvalidFace(format!("{:?} is not a proper face of this polytope", f.vertices)));
        }
        Ok(())
    }

    /// The polar polytope: its vertices are this polytope's facet normals
    /// (same order) and its facets correspond to this polytope's vertices
    /// (same order), so `polar(polar(P))` reproduces `P` index for index.
    pub fn polar(&self) -> &SphericalPolytope {
        self.polar.get_or_init(|| {
            let n = self.vertices.len();
            let m = self.facet_normals.len();
            let incidence: Vec<FixedBitSet> = (0..n)
                .map(|v| {
                    let mut s = FixedBitSet::with_capacity(m);
                    for f in 0..m {
                        if self.incidence[f].contains(v) {
                            s.insert(f);
                        }
                    }
                    s
                })
                .collect();
            let pts: Vec<DVector<f64>> = self.facet_normals.iter().map(|p| p.coords().clone()).collect();
            let (center, margin) = hemisphere_margin(&pts);
            let center = center.expect("polar of a full-dimensional cone is pointed");
            let q = Self::from_parts(
                self.dim,
                self.facet_normals.clone(),
                self.vertices.clone(),
                incidence,
                UnitPoint::from_unit(center),
                margin,
                self.tol,
            );
            Box::new(q)
        })
    }

    /// The smallest face containing the boundary point `q`.
    pub fn minimal_face_containing(&self, q: &UnitPoint) -> Result<Face> {
        if q.ambient_dim() != self.dim + 1 {
            return Err(Error::DimensionMismatch { expected: self.dim + 1, found: q.ambient_dim() });
        }
        let mut tight = Vec::new();
        for (f, n) in self.facet_normals.iter().enumerate() {
            let s = n.dot(q);
            if s > self.tol.pred {
                return Err(Error::NotOnBoundary);
            }
            if s >= -self.tol.pred {
                tight.push(f);
            }
        }
        if tight.is_empty() {
            return Err(Error::NotOnBoundary);
        }
        let mut meet = self.incidence[tight[0]].clone();
        for &f in &tight[1..] {
            meet.intersect_with(&self.incidence[f]);
        }
        let verts: Vec<usize> = meet.ones().collect();
        self.face(&verts)
    }

    /// The conjugate face in the polar: the facet normals of all facets
    /// containing `face`.
    pub fn conjugate_face(&self, face: &Face) -> Result<Face> {
        self.check_face(face)?;
        self.polar().face(&face.facets)
    }

    /// A full chain `F_2 ⊂ ... ⊂ F_{d-1}`, starting from the lexicographically
    /// first facet and descending through lexicographically first subfaces.
    /// Empty for `d = 2`.
    pub fn find_partial_flag(&self) -> PartialFlag {
        let lattice = self.face_lattice();
        let mut chain: Vec<usize> = Vec::new();
        if self.dim >= 3 {
            let top = lattice.faces_of_dim(self.dim - 1).iter().copied();
            let mut current = top.min_by(|&a, &b| lattice.faces()[a].vertices.cmp(&lattice.faces()[b].vertices));
            while let Some(c) = current {
                chain.push(c);
                if lattice.faces()[c].dim <= 2 {
                    break;
                }
                let below = lattice.faces()[c].vertices.clone();
                current = lattice
                    .faces_of_dim(lattice.faces()[c].dim - 1)
                    .iter()
                    .copied()
                    .filter(|&g| lattice.faces()[g].vertices.iter().all(|v| below.binary_search(v).is_ok()))
                    .min_by(|&a, &b| lattice.faces()[a].vertices.cmp(&lattice.faces()[b].vertices));
            }
        }
        chain.reverse();
        PartialFlag {
            faces: chain
                .into_iter()
                .map(|i| self.face(&lattice.faces()[i].vertices).expect("lattice face"))
                .collect(),
        }
    }

    /// Vertex bijection realizing a face-lattice isomorphism, if any.
    pub fn lattice_isomorphic(&self, other: &SphericalPolytope) -> Option<Vec<usize>> {
        lattice_isomorphic(self.face_lattice(), other.face_lattice())
    }
}

/// Checks two face lattices for isomorphism, returning a vertex bijection.
pub fn lattice_isomorphic(a: &FaceLattice, b: &FaceLattice) -> Option<Vec<usize>> {
    a.isomorphism(b)
}
