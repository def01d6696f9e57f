//! Koebe (midscribed) realizations of 3-polytopes and four illuminating
//! directions for them.
//!
//! A realization is normalized by the hyperbolic isometry taking a point of
//! one face's ideal polygon to the center of the ball, so that this face's
//! plane passes through the origin. Every other face then has an outer normal
//! `n` with `<n, m> < 0`, where `m` is that face's outer normal, so `m` lights
//! all vertices off the face and three tilted planar directions light the
//! face itself.

pub mod graph;
pub mod mobius;
pub mod packing;
pub mod realization;

use nalgebra::{DVector, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bridge::{euclidean_verify, DirectionSet, EuclideanCertificate};
use crate::error::{Error, Result};
use crate::euclidean::EuclideanPolytope;
use crate::planar;
use crate::sphere::Tolerances;

pub use graph::PolyhedralGraph;
pub use mobius::{CircleOnSphere, MobiusMap};
pub use realization::{KoebeRealization, Residuals, TANGENCY_TOL};

/// Klein distance below which a quadrilateral's normalization point counts
/// as the diagonal intersection.
const DIAGONAL_RADIUS: f64 = 1e-3;
const DIAGONAL_OFFSET: f64 = 1e-2;
const PLANE_TOL: f64 = 1e-9;
const RELINT_TOL: f64 = 1e-6;

/// Midscribed realization of `g`, centered so that the tangency points have
/// their conformal barycenter at the origin.
pub fn midscribe(g: &PolyhedralGraph, tol: &Tolerances) -> Result<KoebeRealization> {
    let pattern = packing::solve(g, 0)?;
    let centering = realization::center_tangency(&pattern.tangency)?;
    let tangency = pattern.tangency.iter().map(|t| centering.apply_point(t).normalize()).collect();
    let k = KoebeRealization::from_tangency(g.clone(), tangency, pattern.report, tol)?;
    k.check()?;
    Ok(k)
}

/// Moves the Klein-model point `p` of face `j`'s hyperbolic plane to the
/// center of the ball.
pub fn poincare_normalize(k: &KoebeRealization, j: usize, p: &Vector3<f64>) -> Result<(MobiusMap, KoebeRealization)> {
    let c = &k.face_circles[j];
    let residual = c.residual(p).abs().max(p.norm() - 1.0);
    if residual > PLANE_TOL || p.norm() >= 1.0 {
        return Err(Error::PointNotOnFacePlane { residual });
    }
    let distance = k.relint_distance(j, p);
    if distance <= RELINT_TOL {
        return Err(Error::PointNotInRelint { distance });
    }
    let m = MobiusMap::boost_to_origin(p)?;
    let out = k.transform(&m)?;
    out.check()?;
    Ok((m, out))
}

/// Klein-model centroid of face `j`'s tangency points. For quadrilaterals
/// close to the intersection of the diagonals `q1q3` and `q2q4`, the point
/// is moved towards `q1`. Returns the point and whether it was moved.
pub fn choose_normalization_point(k: &KoebeRealization, j: usize) -> (Vector3<f64>, bool) {
    let q = k.face_tangency(j);
    let centroid = q.iter().sum::<Vector3<f64>>() / q.len() as f64;
    if q.len() != 4 {
        return (centroid, false);
    }
    let x = chord_intersection(&q[0], &q[2], &q[1], &q[3]);
    if (centroid - x).norm() < DIAGONAL_RADIUS {
        (offset_towards(&centroid, &q[0], DIAGONAL_OFFSET), true)
    } else {
        (centroid, false)
    }
}

fn offset_towards(p: &Vector3<f64>, q: &Vector3<f64>, step: f64) -> Vector3<f64> {
    p + (q - p).normalize() * step
}

/// Intersection of the coplanar lines `ab` and `cd` (least squares).
pub fn chord_intersection(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, d: &Vector3<f64>) -> Vector3<f64> {
    let (u, v, w) = (b - a, d - c, c - a);
    let (uu, uv, vv, uw, vw) = (u.dot(&u), u.dot(&v), v.dot(&v), u.dot(&w), v.dot(&w));
    let det = uu * vv - uv * uv;
    let s = (uw * vv - vw * uv) / det;
    a + u * s
}

/// The four directions `{m, m_k - εm}` for face `j` of a normalized
/// realization, together with the certificate they pass.
#[derive(Clone, Debug, Serialize)]
pub struct FourDirections {
    pub directions: DirectionSet,
    pub epsilon: f64,
    pub certificate: EuclideanCertificate,
}

pub fn four_directions(k: &KoebeRealization, j: usize, tol: &Tolerances) -> Result<FourDirections> {
    let polytope = realization_polytope(k, tol)?;
    four_directions_for(k, &polytope, j, tol)
}

fn four_directions_for(k: &KoebeRealization, polytope: &EuclideanPolytope, j: usize, tol: &Tolerances) -> Result<FourDirections> {
    let m = k.face_circles[j].normal;
    let e = if m.x.abs() < 0.6 { Vector3::x() } else { Vector3::y() };
    let u = (e - m * m.dot(&e)).normalize();
    let w = m.cross(&u);
    let pts: Vec<Vector2<f64>> = k.graph.faces()[j].iter().map(|&v| {
        let x = k.vertices[v];
        Vector2::new(x.dot(&u), x.dot(&w))
    }).collect();
    let order = planar::order_ccw(&pts);
    let polygon: Vec<Vector2<f64>> = order.iter().map(|&i| pts[i]).collect();
    if planar::is_parallelogram(&polygon, tol) {
        return Err(Error::ParallelogramFace { face: j });
    }
    let levi = match planar::levi_directions(&polygon, tol) {
        Err(Error::ParallelogramError) => return Err(Error::ParallelogramFace { face: j }),
        other => other?,
    };
    let planar_dirs: Vec<Vector3<f64>> = levi.directions.iter().map(|d| u * d.x + w * d.y).collect();
    let mut epsilon = 0.5;
    for _ in 0..40 {
        let mut dirs = vec![to_dvector(&m)];
        dirs.extend(planar_dirs.iter().map(|d| to_dvector(&(d - m * epsilon))));
        let set = DirectionSet::new(dirs, tol)?;
        if let Ok(certificate) = euclidean_verify(polytope, &set) {
            if !certificate.fragile {
                return Ok(FourDirections { directions: set, epsilon, certificate });
            }
        }
        epsilon /= 2.0;
    }
    Err(Error::VerificationFailed(format!("no tilt ε >= {epsilon:e} lights face {j}")))
}

fn to_dvector(v: &Vector3<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

/// The realization's vertices as a Euclidean polytope; every vertex must be
/// extreme and the face lattice must match the graph.
pub fn realization_polytope(k: &KoebeRealization, tol: &Tolerances) -> Result<EuclideanPolytope> {
    let pts: Vec<DVector<f64>> = k.vertices.iter().map(to_dvector).collect();
    let p = EuclideanPolytope::from_vertices(&pts, tol)?;
    if p.vertices().len() != pts.len() || k.graph.face_lattice().isomorphism(p.face_lattice()).is_none() {
        return Err(Error::VerificationFailed("realization is not a polytope of the given combinatorial type".into()));
    }
    Ok(p)
}

/// Default face: the largest non-quadrilateral, else the largest face; ties
/// go to the lowest index.
pub fn choose_face(g: &PolyhedralGraph) -> usize {
    let key = |f: usize| {
        let len = g.faces()[f].len();
        (len != 4, len)
    };
    (0..g.faces().len()).fold(0, |best, f| if key(f) > key(best) { f } else { best })
}

/// Result of [`koebe_pipeline`].
#[derive(Clone, Debug, Serialize)]
pub struct KoebeIllumination {
    /// The normalized realization.
    pub realization: KoebeRealization,
    /// Residuals of the centered realization before normalization.
    pub midscribe_residuals: Residuals,
    pub face: usize,
    pub point: Vector3<f64>,
    pub offset_branch: bool,
    /// Seeds of the random re-choices of the point, if any were needed.
    pub perturbation_seeds: Vec<u64>,
    pub mobius: MobiusMap,
    #[serde(skip)]
    pub polytope: EuclideanPolytope,
    pub directions: FourDirections,
    /// Vertex bijection from the graph to `polytope`.
    pub lattice_isomorphism: Vec<usize>,
}

/// Koebe realization of `g` with four verified illuminating directions.
pub fn koebe_pipeline(g: &PolyhedralGraph, seed: u64, tol: &Tolerances) -> Result<KoebeIllumination> {
    let k = midscribe(g, tol)?;
    let j = choose_face(g);
    let (first, offset_branch) = choose_normalization_point(&k, j);
    let q = k.face_tangency(j);
    let centroid = q.iter().sum::<Vector3<f64>>() / q.len() as f64;

    let mut candidates: Vec<(Vector3<f64>, bool, Option<u64>)> = vec![(first, offset_branch, None)];
    if !offset_branch {
        candidates.push((offset_towards(&centroid, &q[0], DIAGONAL_OFFSET), true, None));
    }
    for attempt in 0..8u64 {
        let s = seed.wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let weights: Vec<f64> = (0..q.len()).map(|_| rng.random_range(0.5..1.5)).collect();
        let total: f64 = weights.iter().sum();
        let p = q.iter().zip(&weights).map(|(x, w)| x * *w).sum::<Vector3<f64>>() / total;
        candidates.push((p, false, Some(s)));
    }

    let mut seeds = Vec::new();
    let mut last_err = None;
    for (p, offset, s) in candidates {
        seeds.extend(s);
        let attempt = poincare_normalize(&k, j, &p).and_then(|(mobius, normalized)| {
            let polytope = realization_polytope(&normalized, tol)?;
            let directions = four_directions_for(&normalized, &polytope, j, tol)?;
            let lattice_isomorphism = g
                .face_lattice()
                .isomorphism(polytope.face_lattice())
                .ok_or_else(|| Error::VerificationFailed("normalized realization changed combinatorial type".into()))?;
            Ok((mobius, normalized, polytope, directions, lattice_isomorphism))
        });
        match attempt {
            Ok((mobius, realization, polytope, directions, lattice_isomorphism)) => {
                return Ok(KoebeIllumination {
                    midscribe_residuals: k.residuals,
                    realization,
                    face: j,
                    point: p,
                    offset_branch: offset,
                    perturbation_seeds: seeds,
                    mobius,
                    polytope,
                    directions,
                    lattice_isomorphism,
                });
            }
            Err(e @ (Error::ParallelogramFace { .. } | Error::VerificationFailed(_) | Error::PointNotInRelint { .. })) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one candidate was tried"))
}

/// [`koebe_pipeline`] on the graph of a 3-polytope; the isomorphism is
/// checked against the input's face lattice.
pub fn koebe_from_polytope(p: &EuclideanPolytope, seed: u64) -> Result<KoebeIllumination> {
    let g = PolyhedralGraph::from_polytope(p)?;
    let out = koebe_pipeline(&g, seed, p.tol())?;
    if p.face_lattice().isomorphism(out.polytope.face_lattice()).is_none() {
        return Err(Error::VerificationFailed("Koebe realization is not combinatorially equivalent to the input".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use graph::tests::cube_graph;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn midscribed_cube_is_symmetric() {
        let k = midscribe(&cube_graph(), &tol()).unwrap();
        assert!(k.residuals.max() < 1e-9, "{:?}", k.residuals);
        for v in &k.vertices {
            assert!((v.norm() - 1.5f64.sqrt()).abs() < 1e-8, "{}", v.norm());
        }
        for e in k.graph.edges() {
            let (a, b) = (k.vertices[e.a], k.vertices[e.b]);
            let d = (b - a).normalize();
            assert!((a.cross(&d).norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn midscribed_tetrahedron_and_dodecahedron() {
        for p in [fixtures::tetrahedron(), fixtures::dodecahedron()] {
            let g = PolyhedralGraph::from_polytope(&p).unwrap();
            let k = midscribe(&g, &tol()).unwrap();
            assert!(k.residuals.max() < TANGENCY_TOL);
            // Symmetric inputs center to equal vertex norms.
            let r0 = k.vertices[0].norm();
            assert!(k.vertices.iter().all(|v| (v.norm() - r0).abs() < 1e-8));
            assert!(realization_polytope(&k, &tol()).is_ok());
        }
    }

    #[test]
    fn normalization_point_branches() {
        let cube = midscribe(&cube_graph(), &tol()).unwrap();
        let (p, moved) = choose_normalization_point(&cube, 0);
        assert!(moved);
        let q = cube.face_tangency(0);
        let x = chord_intersection(&q[0], &q[2], &q[1], &q[3]);
        assert!((p - x).norm() > 5e-3);
        let tet = midscribe(&PolyhedralGraph::from_polytope(&fixtures::tetrahedron()).unwrap(), &tol()).unwrap();
        assert!(!choose_normalization_point(&tet, 0).1);
        let dodeca = midscribe(&PolyhedralGraph::from_polytope(&fixtures::dodecahedron()).unwrap(), &tol()).unwrap();
        assert!(!choose_normalization_point(&dodeca, 0).1);
    }

    #[test]
    fn normalize_moves_face_plane_to_origin() {
        let cube = midscribe(&cube_graph(), &tol()).unwrap();
        let q = cube.face_tangency(2);
        let centroid = q.iter().sum::<Vector3<f64>>() / 4.0;
        let (m, out) = poincare_normalize(&cube, 2, &centroid).unwrap();
        assert!(out.face_circles[2].offset.abs() < 1e-9);
        assert!(m.is_proper_orthochronous(1e-9));
        assert!(out.residuals.max() < TANGENCY_TOL);
        assert!(cube.graph.face_lattice().isomorphism(realization_polytope(&out, &tol()).unwrap().face_lattice()).is_some());

        let outside = Vector3::new(2.0, 0.0, 0.0);
        assert!(matches!(poincare_normalize(&cube, 2, &outside), Err(Error::PointNotOnFacePlane { .. })));
        assert!(matches!(poincare_normalize(&cube, 2, &Vector3::zeros()), Err(Error::PointNotOnFacePlane { .. })));
        // A tangency point is an ideal vertex, not in the relative interior.
        let near = q[0] * (1.0 - 1e-12) + centroid * 1e-12;
        assert!(poincare_normalize(&cube, 2, &near).is_err());
    }

    #[test]
    fn identity_when_point_is_the_origin() {
        let cube = midscribe(&cube_graph(), &tol()).unwrap();
        let (_, out) = poincare_normalize(&cube, 0, &choose_normalization_point(&cube, 0).0).unwrap();
        let (m, again) = poincare_normalize(&out, 0, &Vector3::zeros()).unwrap();
        assert_eq!(m, MobiusMap::identity());
        for (a, b) in out.vertices.iter().zip(&again.vertices) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn parallelogram_face_until_normalized() {
        let cube = midscribe(&cube_graph(), &tol()).unwrap();
        assert!(matches!(four_directions(&cube, 0, &tol()), Err(Error::ParallelogramFace { face: 0 })));
        // Normalizing at the diagonal intersection leaves a rhombus.
        let q = cube.face_tangency(0);
        let x = chord_intersection(&q[0], &q[2], &q[1], &q[3]);
        let (_, rhombus) = poincare_normalize(&cube, 0, &x).unwrap();
        assert!(matches!(four_directions(&rhombus, 0, &tol()), Err(Error::ParallelogramFace { .. })));
        let (p, _) = choose_normalization_point(&cube, 0);
        let (_, normalized) = poincare_normalize(&cube, 0, &p).unwrap();
        let four = four_directions(&normalized, 0, &tol()).unwrap();
        assert_eq!(four.directions.len(), 4);
        assert!(four.certificate.min_margin > tol().pred);
    }

    #[test]
    fn pipeline_on_standard_polytopes() {
        for p in [fixtures::tetrahedron(), fixtures::cube3(), fixtures::dodecahedron()] {
            let out = koebe_from_polytope(&p, 0).unwrap();
            assert_eq!(out.directions.directions.len(), 4);
            assert!(out.realization.residuals.max() < TANGENCY_TOL);
            assert!(out.midscribe_residuals.max() < TANGENCY_TOL);
        }
    }

    #[test]
    fn pipeline_on_random_polytopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..4 {
            let p = fixtures::random_euclidean(3, 20, &mut rng).unwrap();
            let out = koebe_from_polytope(&p, 1).unwrap();
            assert!(out.directions.certificate.min_margin > tol().pred);
        }
    }

    #[test]
    fn rhombus_exactly_at_diagonal_intersection() {
        let cube = midscribe(&cube_graph(), &tol()).unwrap();
        let q = cube.face_tangency(0);
        let x = chord_intersection(&q[0], &q[2], &q[1], &q[3]);
        let m = cube.face_circles[0].normal;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for delta in [0.0, 1e-6, 1e-4, 1e-2, 5e-2] {
            for _ in 0..4 {
                let r = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let dir = (r - m * m.dot(&r)).normalize();
                let (_, k) = poincare_normalize(&cube, 0, &(x + dir * delta)).unwrap();
                let rhombus = matches!(four_directions(&k, 0, &tol()), Err(Error::ParallelogramFace { .. }));
                assert_eq!(rhombus, delta == 0.0, "delta = {delta}");
            }
        }
    }

    #[test]
    fn mobius_preserves_all_inversive_distances() {
        let g = PolyhedralGraph::from_polytope(&fixtures::dodecahedron()).unwrap();
        let k = midscribe(&g, &tol()).unwrap();
        let (p, _) = choose_normalization_point(&k, 3);
        let (_, out) = poincare_normalize(&k, 3, &p).unwrap();
        let all = |r: &KoebeRealization| -> Vec<CircleOnSphere> {
            r.vertex_circles.iter().chain(&r.face_circles).copied().collect()
        };
        let (a, b) = (all(&k), all(&out));
        for i in 0..a.len() {
            for j in 0..i {
                assert!((a[i].inversive(&a[j]) - b[i].inversive(&b[j])).abs() < 1e-8);
            }
        }
    }
}
