//! Spherical illumination: the direct arc predicate, the conjugate-face
//! criterion, witness verification and the hemisphere-cover form.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{Face, SphericalPolytope};
use crate::sphere::{Hemisphere, Tolerances, UnitPoint};
use crate::witness::{self, ConstructionTrace, WitnessConfig};

/// A greatsphere normal `h` (the body lies in `H_h`) and lights on `h^⊥`.
#[derive(Clone, Debug, PartialEq)]
pub struct IlluminationWitness {
    pub normal: UnitPoint,
    pub lights: Vec<UnitPoint>,
}

/// Verification options. `strict` checks every proper face instead of only
/// the vertices; `lenient` accepts lights anywhere in the closed hemisphere
/// `<h, p> >= 0` outside the body.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub strict: bool,
    pub lenient: bool,
}

/// Outcome of a successful verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IlluminationCertificate {
    pub greatsphere_normal: Vec<f64>,
    pub lights: Vec<Vec<f64>>,
    /// `assignment[v]` is the light covering vertex `v`; serialized as a
    /// map from vertex index to light index.
    #[serde(with = "index_map")]
    pub assignment: Vec<usize>,
    /// Conjugate-face margin of the assigned light at each vertex.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub fragile: bool,
    pub tolerances: Tolerances,
    pub options: VerifyOptions,
    /// Number of proper faces checked in strict mode.
    pub faces_checked: usize,
}

pub(crate) mod index_map {
    use std::collections::BTreeMap;

    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
        v.iter().copied().enumerate().collect::<BTreeMap<usize, usize>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        let map = BTreeMap::<usize, usize>::deserialize(d)?;
        if map.keys().copied().ne(0..map.len()) {
            return Err(D::Error::custom("assignment keys must be 0..n"));
        }
        Ok(map.into_values().collect())
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = (a + PI).rem_euclid(TAU) - PI;
    if x <= -PI {
        x += TAU;
    }
    x
}

/// Whether `q ∈ bd poly` is illuminated from `p ∉ poly`, evaluated on the great
/// circle through `p` and `q`: the arc from `q` towards `p` must stay out of
/// the interior while the circle as a whole enters it.
pub fn illuminates_point_primal(poly: &SphericalPolytope, p: &UnitPoint, q: &UnitPoint) -> Result<bool> {
    let tol = poly.tol();
    let n = poly.dim() + 1;
    for x in [p, q] {
        if x.ambient_dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.ambient_dim() });
        }
    }
    if poly.contains(p) {
        return Err(Error::PointInsideBody);
    }
    let c = p.dot(q);
    if c <= -1.0 + tol.pred {
        return Err(Error::AntipodalPair);
    }
    if !poly.contains(q) || poly.is_interior(q) {
        return Err(Error::NotOnBoundary);
    }

    // Orthonormal frame (q, e2) of the plane, with p at angle in (0, π).
    let perp: DVector<f64> = p.coords() - q.coords() * c;
    let e2 = perp.normalize();

    // Each facet allows a closed half-circle [β - π/2, β + π/2].
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for normal in poly.facet_normals() {
        let a = normal.dot(q);
        let b = normal.coords().dot(&e2);
        if a.hypot(b) <= tol.pred {
            // The whole circle lies on this facet's greatsphere.
            return Ok(false);
        }
        let beta = wrap_angle(b.atan2(a) + PI);
        lo = lo.max(beta - FRAC_PI_2);
        hi = hi.min(beta + FRAC_PI_2);
    }
    Ok(hi <= tol.pred && lo < -tol.pred)
}

/// The conjugate-face criterion: `p` illuminates the relative interior of
/// `face` iff `<p, n> > τ` for every facet normal `n` of a facet containing
/// it. Returns the verdict and the margin `min <p, n>`.
pub fn illuminates_face_dual(poly: &SphericalPolytope, p: &UnitPoint, face: &Face) -> Result<(bool, f64)> {
    poly.check_face(face)?;
    let margin = dual_margin(poly, p, &face.facets);
    Ok((margin > poly.tol().pred, margin))
}

pub(crate) fn dual_margin(poly: &SphericalPolytope, p: &UnitPoint, facets: &[usize]) -> f64 {
    facets
        .iter()
        .map(|&f| poly.facet_normals()[f].dot(p))
        .fold(f64::INFINITY, f64::min)
}

/// Verifies that `W` illuminates `P`: the greatsphere misses the body, every
/// light sits on it, and every vertex (every face in strict mode) has a light
/// passing the conjugate-face criterion.
pub fn verify_witness(
    poly: &SphericalPolytope,
    wit: &IlluminationWitness,
    options: VerifyOptions,
) -> Result<IlluminationCertificate> {
    let tol = *poly.tol();
    let n = poly.dim() + 1;
    if wit.normal.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: wit.normal.ambient_dim() });
    }
    for (i, v) in poly.vertices().iter().enumerate() {
        let value = wit.normal.dot(v);
        if value <= tol.pred {
            return Err(Error::GreatsphereMeetsBody { vertex: i, value });
        }
    }
    for (i, p) in wit.lights.iter().enumerate() {
        if p.ambient_dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.ambient_dim() });
        }
        let value = wit.normal.dot(p);
        let on_sphere = if options.lenient { value >= -tol.pred } else { value.abs() <= tol.pred };
        if !on_sphere {
            return Err(Error::LightOffGreatsphere { light: i, value });
        }
        if poly.contains(p) {
            return Err(Error::PointInsideBody);
        }
    }

    let best = |facets: &[usize]| -> (usize, f64) {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (i, p) in wit.lights.iter().enumerate() {
            let m = dual_margin(poly, p, facets);
            if m > best.1 {
                best = (i, m);
            }
        }
        best
    };

    let mut assignment = Vec::with_capacity(poly.vertices().len());
    let mut margins = Vec::with_capacity(poly.vertices().len());
    for v in 0..poly.vertices().len() {
        let (light, margin) = best(&poly.vertex_facets(v));
        if margin <= tol.pred {
            return Err(Error::UncoveredVertex { vertex: v, best_margin: margin });
        }
        assignment.push(light);
        margins.push(margin);
    }

    let mut faces_checked = 0;
    if options.strict {
        for lf in poly.face_lattice().faces() {
            let (_, margin) = best(&lf.facets);
            if margin <= tol.pred {
                return Err(Error::UncoveredFace { face: lf.vertices.clone(), best_margin: margin });
            }
            faces_checked += 1;
        }
    }

    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(IlluminationCertificate {
        greatsphere_normal: wit.normal.to_vec(),
        lights: wit.lights.iter().map(|p| p.to_vec()).collect(),
        assignment,
        margins,
        min_margin,
        fragile: min_margin < tol.fragile_threshold(),
        tolerances: tol,
        options,
        faces_checked,
    })
}

/// Boundary sample used by the antipodal-light check: every vertex and the
/// normalized vertex centroid of every face of dimension at least one.
pub fn boundary_samples(poly: &SphericalPolytope) -> Vec<UnitPoint> {
    let mut out: Vec<UnitPoint> = poly.vertices().to_vec();
    for lf in poly.face_lattice().faces().iter().filter(|f| f.dim > 0) {
        let mut sum = DVector::zeros(poly.dim() + 1);
        for &v in &lf.vertices {
            sum += poly.vertices()[v].coords();
        }
        out.push(UnitPoint::from_unit(sum.normalize()));
    }
    out
}

/// Checks with the primal predicate that `-x` illuminates every sampled
/// boundary point, for `x` in the interior of `P`.
pub fn unrestricted_antipodal_light_check(poly: &SphericalPolytope, x: &UnitPoint) -> Result<bool> {
    if x.ambient_dim() != poly.dim() + 1 {
        return Err(Error::DimensionMismatch { expected: poly.dim() + 1, found: x.ambient_dim() });
    }
    if !poly.is_interior(x) {
        return Err(Error::NotInterior);
    }
    let light = x.antipode();
    for q in boundary_samples(poly) {
        if !illuminates_point_primal(poly, &light, &q)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An interior point `x` of `P` and `d + 1` open hemispheres whose boundaries
/// pass through `x`, such that every proper face of `P` lies inside one.
#[derive(Clone, Debug)]
pub struct SeparationCover {
    pub x: UnitPoint,
    pub hemispheres: Vec<Hemisphere>,
    /// Certificate of the underlying witness for the polar.
    pub certificate: IlluminationCertificate,
    pub trace: ConstructionTrace,
    /// For each proper face (lattice order), the covering hemisphere and the
    /// smallest `<p, v>` over the face's vertices.
    pub face_cover: Vec<(usize, f64)>,
}

/// Builds the hemisphere cover from a witness for the polar body.
pub fn separation_cover(poly: &SphericalPolytope) -> Result<SeparationCover> {
    separation_cover_with(poly, &WitnessConfig::default())
}

pub fn separation_cover_with(poly: &SphericalPolytope, config: &WitnessConfig) -> Result<SeparationCover> {
    if poly.dim() < 2 {
        return Err(Error::UnsupportedDimension { dim: poly.dim(), reason: "hemisphere covers need d >= 2".into() });
    }
    let tol = *poly.tol();
    let polar = poly.polar();
    let (wit, trace) = witness::construct_witness_with(polar, config)?;
    let certificate = verify_witness(polar, &wit, VerifyOptions::default())?;
    let x = wit.normal.antipode();
    if !poly.is_interior(&x) {
        return Err(Error::VerificationFailed("-h is not interior to the body".into()));
    }
    for (i, p) in wit.lights.iter().enumerate() {
        let value = p.dot(&x);
        if value.abs() > tol.pred {
            return Err(Error::LightOffGreatsphere { light: i, value });
        }
    }
    let mut face_cover = Vec::new();
    for lf in poly.face_lattice().faces() {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (i, p) in wit.lights.iter().enumerate() {
            let m = lf.vertices.iter().map(|&v| p.dot(&poly.vertices()[v])).fold(f64::INFINITY, f64::min);
            if m > best.1 {
                best = (i, m);
            }
        }
        if best.1 <= tol.pred {
            return Err(Error::UncoveredFace { face: lf.vertices.clone(), best_margin: best.1 });
        }
        face_cover.push(best);
    }
    Ok(SeparationCover {
        x,
        hemispheres: wit.lights.iter().cloned().map(Hemisphere::new).collect(),
        certificate,
        trace,
        face_cover,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn up(v: &[f64]) -> UnitPoint {
        UnitPoint::from_slice(v, &Tolerances::default()).unwrap()
    }

    fn oct_witness(k: usize) -> IlluminationWitness {
        let lights = [[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]];
        IlluminationWitness { normal: up(&[1.0, 1.0, 1.0]), lights: lights[..k].iter().map(|l| up(l)).collect() }
    }

    #[test]
    fn primal_examples() {
        let p = fixtures::simplex(2);
        let e1 = UnitPoint::basis(3, 0);
        assert!(illuminates_point_primal(&p, &up(&[0.0, -1.0, -1.0]), &e1).unwrap());
        assert!(!illuminates_point_primal(&p, &up(&[0.0, 1.0, -1.0]), &e1).unwrap());
        assert!(matches!(illuminates_point_primal(&p, &e1.antipode(), &e1), Err(Error::AntipodalPair)));
        assert!(matches!(
            illuminates_point_primal(&p, &up(&[1.0, 1.0, 1.0]), &e1),
            Err(Error::PointInsideBody)
        ));
    }

    #[test]
    fn dual_examples() {
        let p = fixtures::simplex(2);
        let (ok, m) = illuminates_face_dual(&p, &up(&[0.0, -1.0, -1.0]), &p.face(&[0]).unwrap()).unwrap();
        assert!(ok);
        assert!((m - FRAC_1_SQRT_2).abs() < 1e-14);
        let (ok, _) = illuminates_face_dual(&p, &up(&[-1.0, -1.0, 2.0]), &p.face(&[0, 1]).unwrap()).unwrap();
        assert!(!ok);
    }

    #[test]
    fn dual_agrees_with_primal_on_simplex_vertex() {
        let s3 = fixtures::simplex(3);
        let h = up(&[1.0, 1.0, 1.0, 1.0]);
        // A light on h^⊥ beyond the vertex e_4.
        let p = up(&[-1.0, -1.0, -1.0, 3.0]);
        assert!(h.dot(&p).abs() < 1e-15);
        let f = s3.face(&[3]).unwrap();
        let (dual, _) = illuminates_face_dual(&s3, &p, &f).unwrap();
        let primal = illuminates_point_primal(&s3, &p, &UnitPoint::basis(4, 3)).unwrap();
        assert_eq!(dual, primal);
        assert!(dual);
        let q = up(&[1.0, 1.0, 1.0, -3.0]);
        assert!(!illuminates_face_dual(&s3, &q, &f).unwrap().0);
        assert!(!illuminates_point_primal(&s3, &q, &UnitPoint::basis(4, 3)).unwrap());
    }

    #[test]
    fn verify_examples() {
        let p = fixtures::simplex(2);
        let cert = verify_witness(&p, &oct_witness(3), VerifyOptions::default()).unwrap();
        assert_eq!(cert.assignment, vec![0, 1, 2]);
        assert!(cert.min_margin >= 1.0 / 6f64.sqrt() - 1e-12);
        assert!(!cert.fragile);
        let strict = verify_witness(&p, &oct_witness(3), VerifyOptions { strict: true, lenient: false }).unwrap();
        assert_eq!(strict.faces_checked, 6);
        assert!(matches!(
            verify_witness(&p, &oct_witness(2), VerifyOptions::default()),
            Err(Error::UncoveredVertex { vertex: 2, .. })
        ));
        let bad = IlluminationWitness { normal: UnitPoint::basis(3, 0), lights: vec![] };
        assert!(matches!(
            verify_witness(&p, &bad, VerifyOptions::default()),
            Err(Error::GreatsphereMeetsBody { .. })
        ));
    }

    #[test]
    fn oct_witness_agrees_with_primal_on_face_midpoints() {
        let p = fixtures::simplex(2);
        let w = oct_witness(3);
        for q in boundary_samples(&p) {
            let lit = w.lights.iter().any(|l| illuminates_point_primal(&p, l, &q).unwrap());
            assert!(lit);
        }
    }

    #[test]
    fn lenient_mode_accepts_lights_inside_closed_hemisphere() {
        let p = fixtures::simplex(2);
        let mut w = oct_witness(3);
        w.lights[0] = up(&[2.0, -0.9, -0.9]);
        assert!(matches!(
            verify_witness(&p, &w, VerifyOptions::default()),
            Err(Error::LightOffGreatsphere { light: 0, .. })
        ));
        assert!(verify_witness(&p, &w, VerifyOptions { strict: false, lenient: true }).is_ok());
    }

    #[test]
    fn antipodal_light_examples() {
        let oct = fixtures::simplex(2);
        assert!(unrestricted_antipodal_light_check(&oct, &up(&[1.0, 1.0, 1.0])).unwrap());
        let s3 = fixtures::simplex(3);
        assert!(unrestricted_antipodal_light_check(&s3, &up(&[1.0, 1.0, 1.0, 1.0])).unwrap());
        assert!(matches!(
            unrestricted_antipodal_light_check(&oct, &UnitPoint::basis(3, 0)),
            Err(Error::NotInterior)
        ));
    }

    #[test]
    fn separation_cover_examples() {
        let oct = fixtures::simplex(2);
        let cover = separation_cover(&oct).unwrap();
        assert_eq!(cover.hemispheres.len(), 3);
        assert_eq!(cover.face_cover.len(), 6);
        let s3 = fixtures::simplex(3);
        let cover = separation_cover(&s3).unwrap();
        assert_eq!(cover.hemispheres.len(), 4);
        assert_eq!(cover.face_cover.len(), 14);
        for h in &cover.hemispheres {
            assert!(h.center.dot(&cover.x).abs() <= 1e-9);
        }
        let arc = SphericalPolytope::from_coords(1, &[vec![1.0, 0.2], vec![0.2, 1.0]], &Tolerances::default()).unwrap();
        assert!(matches!(separation_cover(&arc), Err(Error::UnsupportedDimension { .. })));
    }

    /// Random light on a greatsphere disjoint from `P` (tilted from the
    /// margin center) and random relint point of a random face.
    fn random_triple(poly: &SphericalPolytope, rng: &mut ChaCha8Rng) -> (UnitPoint, UnitPoint) {
        let n = poly.dim() + 1;
        let tilt = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)) * (0.3 * poly.hemisphere_margin());
        let h = (poly.center().coords() + tilt).normalize();
        let mut p = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        p -= &h * h.dot(&p);
        let p = UnitPoint::from_unit(p.normalize());
        let faces = poly.face_lattice().faces();
        let f = &faces[rng.random_range(0..faces.len())];
        let mut q = DVector::zeros(n);
        for &v in &f.vertices {
            q += poly.vertices()[v].coords() * rng.random_range(0.1..1.0);
        }
        (p, UnitPoint::from_unit(q.normalize()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn primal_matches_dual(seed in any::<u64>(), d in 2usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let poly = fixtures::random_polytope(d, d + 6, &mut rng).unwrap();
            for _ in 0..50 {
                let (p, q) = random_triple(&poly, &mut rng);
                if poly.contains(&p) {
                    continue;
                }
                let f = poly.minimal_face_containing(&q).unwrap();
                let (dual, margin) = illuminates_face_dual(&poly, &p, &f).unwrap();
                if margin.abs() > 10.0 * poly.tol().pred {
                    prop_assert_eq!(dual, illuminates_point_primal(&poly, &p, &q).unwrap());
                }
            }
        }

        #[test]
        fn dual_is_monotone(seed in any::<u64>(), d in 2usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let poly = fixtures::random_polytope(d, d + 6, &mut rng).unwrap();
            let (p, _) = random_triple(&poly, &mut rng);
            let faces = poly.faces();
            for f in &faces {
                let (lit, _) = illuminates_face_dual(&poly, &p, f).unwrap();
                if !lit {
                    continue;
                }
                for g in faces.iter().filter(|g| f.vertices.iter().all(|v| g.vertices.contains(v))) {
                    prop_assert!(illuminates_face_dual(&poly, &p, g).unwrap().0);
                }
            }
        }

        #[test]
        fn illumination_is_open(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let poly = fixtures::random_polytope(3, 9, &mut rng).unwrap();
            let (p, q) = random_triple(&poly, &mut rng);
            prop_assume!(!poly.contains(&p));
            let f = poly.minimal_face_containing(&q).unwrap();
            let (lit, m) = illuminates_face_dual(&poly, &p, &f).unwrap();
            prop_assume!(lit && m > 10.0 * poly.tol().pred);
            for _ in 0..20 {
                let mut dir = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
                dir -= p.coords() * p.coords().dot(&dir);
                let angle = rng.random_range(0.0..m / 4.0);
                let moved = p.coords() * angle.cos() + dir.normalize() * angle.sin();
                let moved = UnitPoint::from_unit(moved);
                prop_assert!(illuminates_point_primal(&poly, &moved, &q).unwrap());
            }
        }
    }
}
