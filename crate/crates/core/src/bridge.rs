//! Transfer between `E^d` and `S^d` by gnomonic projection, and the
//! Euclidean illumination checker.

use nalgebra::{DVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclidean::EuclideanPolytope;
use crate::illumination::{verify_witness, IlluminationCertificate, VerifyOptions};
use crate::linalg;
use crate::planar;
use crate::polytope::SphericalPolytope;
use crate::sphere::{Tolerances, UnitPoint};
use crate::witness::{self, ConstructionTrace, WitnessConfig};

/// Unit directions in `E^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub directions: Vec<Vec<f64>>,
}

impl DirectionSet {
    pub fn new(directions: Vec<DVector<f64>>, tol: &Tolerances) -> Result<Self> {
        let mut out = Vec::with_capacity(directions.len());
        for d in directions {
            let norm = d.norm();
            if norm <= tol.unit {
                return Err(Error::ZeroVector { norm });
            }
            out.push((d / norm).iter().copied().collect());
        }
        Ok(Self { directions: out })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn vectors(&self) -> Vec<DVector<f64>> {
        self.directions.iter().map(|d| DVector::from_column_slice(d)).collect()
    }
}

/// Outcome of a successful Euclidean verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanCertificate {
    pub directions: Vec<Vec<f64>>,
    /// Direction covering each vertex, as a map from vertex index.
    #[serde(with = "crate::illumination::index_map")]
    pub assignment: Vec<usize>,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub fragile: bool,
}

/// Default embedding scale `0.5 / max |v|`.
pub fn default_scale(p: &EuclideanPolytope) -> f64 {
    0.5 / p.max_vertex_norm().max(f64::MIN_POSITIVE)
}

/// Inverse gnomonic map `x -> normalize(scale * x, 1)` onto the hemisphere
/// around `e_{d+1}`. Vertex order is preserved.
pub fn embed(p: &EuclideanPolytope, scale: f64) -> Result<SphericalPolytope> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::VerificationFailed(format!("embedding scale {scale} must be positive")));
    }
    let d = p.dim();
    let pts = p
        .vertices()
        .iter()
        .map(|v| UnitPoint::normalize(DVector::from_fn(d + 1, |k, _| if k < d { scale * v[k] } else { 1.0 }), p.tol()))
        .collect::<Result<Vec<_>>>()?;
    SphericalPolytope::from_vertices(d, &pts, p.tol())
}

/// Gnomonic coordinates of `v` in the tangent frame at `c`.
pub fn gnomonic(v: &UnitPoint, c: &UnitPoint, frame: &[DVector<f64>]) -> DVector<f64> {
    let s = v.dot(c);
    DVector::from_iterator(frame.len(), frame.iter().map(|f| v.dot_vec(f) / s))
}

/// Central projection of `P` to the tangent hyperplane at `c`, expressed in
/// the reproducible tangent frame at `c`.
pub fn project(poly: &SphericalPolytope, c: &UnitPoint) -> Result<EuclideanPolytope> {
    let tol = poly.tol();
    for (i, v) in poly.vertices().iter().enumerate() {
        if v.dot(c) <= tol.pred {
            return Err(Error::VertexOnOrBeyondEquator { vertex: i });
        }
    }
    let frame = linalg::tangent_frame(c.coords());
    let pts: Vec<DVector<f64>> = poly.vertices().iter().map(|v| gnomonic(v, c, &frame)).collect();
    EuclideanPolytope::from_vertices(&pts, tol)
}

/// Directions of travel, in the tangent frame at `c`, of projected arcs
/// leaving each light towards the body: the light `p` maps to `-p`.
pub fn ideal_directions(lights: &[UnitPoint], c: &UnitPoint, tol: &Tolerances) -> Result<DirectionSet> {
    let frame = linalg::tangent_frame(c.coords());
    let mut dirs = Vec::with_capacity(lights.len());
    for (i, p) in lights.iter().enumerate() {
        let value = p.dot(c);
        if value.abs() > tol.pred {
            return Err(Error::LightOffGreatsphere { light: i, value });
        }
        dirs.push(-DVector::from_iterator(frame.len(), frame.iter().map(|f| p.dot_vec(f))));
    }
    DirectionSet::new(dirs, tol)
}

/// Whether direction `v` illuminates the relative interior of `face`:
/// `<v, n> < 0` for every facet containing it. Margin is `-max <v, n>`.
pub fn euclidean_illuminates(p: &EuclideanPolytope, v: &DVector<f64>, face: &[usize]) -> Result<(bool, f64)> {
    let facets = p.facets_of_face(face)?;
    let margin = facet_margin(p, v, &facets);
    Ok((margin > p.tol().pred, margin))
}

fn facet_margin(p: &EuclideanPolytope, v: &DVector<f64>, facets: &[usize]) -> f64 {
    -facets.iter().map(|&f| p.facet_normals()[f].dot(v)).fold(f64::NEG_INFINITY, f64::max)
}

/// Checks that every vertex is illuminated by some direction.
pub fn euclidean_verify(p: &EuclideanPolytope, dirs: &DirectionSet) -> Result<EuclideanCertificate> {
    let vs = dirs.vectors();
    if let Some(v) = vs.iter().find(|v| v.len() != p.dim()) {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: v.len() });
    }
    let mut assignment = Vec::new();
    let mut margins = Vec::new();
    for vertex in 0..p.vertices().len() {
        let facets = p.vertex_facets(vertex);
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (i, v) in vs.iter().enumerate() {
            let m = facet_margin(p, v, &facets);
            if m > best.1 {
                best = (i, m);
            }
        }
        if best.1 <= p.tol().pred {
            return Err(Error::UncoveredVertex { vertex, best_margin: best.1 });
        }
        assignment.push(best.0);
        margins.push(best.1);
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EuclideanCertificate {
        directions: dirs.directions.clone(),
        assignment,
        margins,
        min_margin,
        fragile: min_margin < p.tol().fragile_threshold(),
    })
}

/// Output of the combinatorial illumination pipeline.
#[derive(Clone, Debug)]
pub struct CombinatorialIllumination {
    /// A polytope combinatorially equivalent to the input.
    pub polytope: EuclideanPolytope,
    pub directions: DirectionSet,
    /// Vertex bijection input -> output realizing the lattice isomorphism.
    pub vertex_map: Vec<usize>,
    pub certificate: EuclideanCertificate,
    /// Spherical witness certificate (absent for planar inputs).
    pub spherical: Option<IlluminationCertificate>,
    pub trace: Option<ConstructionTrace>,
}

/// Finds a combinatorially equivalent copy of `p` illuminated by `d + 1`
/// directions: embed, build a spherical witness, project from the witness
/// normal and read off the light directions. Planar inputs are lit directly
/// by three directions, which fails for parallelograms.
pub fn combinatorial_illuminator(p: &EuclideanPolytope) -> Result<CombinatorialIllumination> {
    combinatorial_illuminator_with(p, &WitnessConfig::default())
}

pub fn combinatorial_illuminator_with(p: &EuclideanPolytope, config: &WitnessConfig) -> Result<CombinatorialIllumination> {
    let tol = *p.tol();
    match p.dim() {
        0 | 1 => Err(Error::UnsupportedDimension { dim: p.dim(), reason: "illumination pipeline needs d >= 2".into() }),
        2 => {
            let pts: Vec<Vector2<f64>> = p.vertices().iter().map(|v| Vector2::new(v[0], v[1])).collect();
            let order = planar::order_ccw(&pts);
            let polygon: Vec<Vector2<f64>> = order.iter().map(|&i| pts[i]).collect();
            let levi = planar::levi_directions(&polygon, &tol)?;
            let dirs = DirectionSet::new(
                levi.directions.iter().map(|u| DVector::from_vec(vec![u.x, u.y])).collect(),
                &tol,
            )?;
            let certificate = euclidean_verify(p, &dirs)?;
            Ok(CombinatorialIllumination {
                polytope: p.clone(),
                directions: dirs,
                vertex_map: (0..p.vertices().len()).collect(),
                certificate,
                spherical: None,
                trace: None,
            })
        }
        _ => {
            let s = embed(p, default_scale(p))?;
            let (w, trace) = witness::construct_witness_with(&s, config)?;
            let spherical = verify_witness(&s, &w, VerifyOptions::default())?;
            let projected = project(&s, &w.normal)?;
            let dirs = ideal_directions(&w.lights, &w.normal, &tol)?;
            let vertex_map = p
                .face_lattice()
                .isomorphism(projected.face_lattice())
                .ok_or_else(|| Error::VerificationFailed("projected polytope changed combinatorial type".into()))?;
            let certificate = euclidean_verify(&projected, &dirs)?;
            Ok(CombinatorialIllumination {
                polytope: projected,
                directions: dirs,
                vertex_map,
                certificate,
                spherical: Some(spherical),
                trace: Some(trace),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::k_subsets;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn up(v: &[f64]) -> UnitPoint {
        UnitPoint::from_slice(v, &tol()).unwrap()
    }

    fn cube_directions() -> Vec<DVector<f64>> {
        (0..8)
            .map(|s| {
                let c = |b: usize| if (s >> b) & 1 == 1 { -1.0 } else { 1.0 };
                -DVector::from_vec(vec![c(0), c(1), c(2)]).normalize()
            })
            .collect()
    }

    #[test]
    fn embed_cube() {
        let cube = fixtures::cube3();
        let s = embed(&cube, 0.5).unwrap();
        for (v, e) in s.vertices().iter().zip(cube.vertices()) {
            let expect = DVector::from_vec(vec![0.5 * e[0], 0.5 * e[1], 0.5 * e[2], 1.0]).normalize();
            assert!((v.coords() - expect).norm() < 1e-15);
        }
        assert!(cube.face_lattice().isomorphism(s.face_lattice()).is_some());
        assert!((default_scale(&cube) - 0.5 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let cube = fixtures::cube3();
        let s = embed(&cube, 0.5).unwrap();
        let back = project(&s, &UnitPoint::basis(4, 3)).unwrap();
        for (a, b) in back.vertices().iter().zip(cube.vertices()) {
            assert!((a / 0.5 - b).norm() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = fixtures::random_euclidean(3, 15, &mut rng).unwrap();
        let scale = default_scale(&p);
        let back = project(&embed(&p, scale).unwrap(), &UnitPoint::basis(4, 3)).unwrap();
        assert!(p.face_lattice().isomorphism(back.face_lattice()).is_some());
        for (a, b) in back.vertices().iter().zip(p.vertices()) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn project_examples() {
        let oct = fixtures::simplex(2);
        let tri = project(&oct, &up(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(tri.vertices().len(), 3);
        assert!(tri.face_lattice().isomorphism(oct.face_lattice()).is_some());
        assert!(matches!(
            project(&oct, &UnitPoint::basis(3, 0).antipode()),
            Err(Error::VertexOnOrBeyondEquator { .. })
        ));
    }

    #[test]
    fn ideal_direction_examples() {
        let e3 = UnitPoint::basis(3, 2);
        let d = ideal_directions(&[UnitPoint::basis(3, 0)], &e3, &tol()).unwrap();
        assert_eq!(d.directions[0], vec![-1.0, 0.0]);
        let off = up(&[1.0, 0.0, 0.1]);
        let off = UnitPoint::from_unit(off.coords().clone());
        assert!(matches!(
            ideal_directions(&[off], &e3, &tol()),
            Err(Error::LightOffGreatsphere { light: 0, .. })
        ));
    }

    #[test]
    fn octant_witness_directions_light_the_triangle() {
        let oct = fixtures::simplex(2);
        let c = up(&[1.0, 1.0, 1.0]);
        let lights: Vec<UnitPoint> =
            [[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]].iter().map(|l| up(l)).collect();
        let tri = project(&oct, &c).unwrap();
        let dirs = ideal_directions(&lights, &c, &tol()).unwrap();
        assert!(euclidean_verify(&tri, &dirs).is_ok());
    }

    #[test]
    fn cube_single_directions() {
        let cube = fixtures::cube3();
        let corner = cube.vertices().iter().position(|v| v.iter().all(|&x| x > 0.0)).unwrap();
        let v = -DVector::from_vec(vec![1.0, 1.0, 1.0]).normalize();
        let (ok, m) = euclidean_illuminates(&cube, &v, &[corner]).unwrap();
        assert!(ok);
        assert!((m - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let other = cube.vertices().iter().position(|v| v[0] > 0.0 && v[1] > 0.0 && v[2] < 0.0).unwrap();
        assert!(!euclidean_illuminates(&cube, &v, &[other]).unwrap().0);
        let down = DVector::from_vec(vec![0.0, 0.0, -1.0]);
        assert!(!euclidean_illuminates(&cube, &down, &[corner]).unwrap().0);
    }

    #[test]
    fn cube_needs_all_eight() {
        let cube = fixtures::cube3();
        let all = DirectionSet::new(cube_directions(), &tol()).unwrap();
        assert!(euclidean_verify(&cube, &all).is_ok());
        for subset in k_subsets(8, 7) {
            let dirs = DirectionSet::new(subset.iter().map(|&i| cube_directions()[i].clone()).collect(), &tol()).unwrap();
            assert!(matches!(euclidean_verify(&cube, &dirs), Err(Error::UncoveredVertex { .. })));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let v = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let lit = (0..8).filter(|&k| euclidean_illuminates(&cube, &v, &[k]).unwrap().0).count();
            assert!(lit <= 1);
        }
    }

    #[test]
    fn tetrahedron_from_vertices_to_opposite_faces() {
        let tet = fixtures::tetrahedron();
        let c = tet.centroid();
        let dirs: Vec<DVector<f64>> = tet.vertices().iter().map(|v| (&c - v).normalize()).collect();
        assert!(euclidean_verify(&tet, &DirectionSet::new(dirs, &tol()).unwrap()).is_ok());
    }

    #[test]
    fn combinatorial_cube_and_dodecahedron() {
        for p in [fixtures::cube3(), fixtures::dodecahedron()] {
            let out = combinatorial_illuminator(&p).unwrap();
            assert_eq!(out.directions.len(), 4);
            assert!(p.face_lattice().isomorphism(out.polytope.face_lattice()).is_some());
            assert!(out.certificate.min_margin > p.tol().pred);
        }
    }

    #[test]
    fn planar_inputs() {
        let pent = EuclideanPolytope::from_rows(
            &(0..5).map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 5.0;
                vec![t.cos(), t.sin()]
            }).collect::<Vec<_>>(),
            &tol(),
        )
        .unwrap();
        assert_eq!(combinatorial_illuminator(&pent).unwrap().directions.len(), 3);
        let square = EuclideanPolytope::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            &tol(),
        )
        .unwrap();
        assert!(matches!(combinatorial_illuminator(&square), Err(Error::ParallelogramError)));
    }
}
