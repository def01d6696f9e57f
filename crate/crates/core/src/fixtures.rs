//! Standard polytopes and random generators shared by tests, benchmarks and
//! the command line.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::euclidean::EuclideanPolytope;
use crate::linalg;
use crate::polytope::SphericalPolytope;
use crate::sphere::{Tolerances, UnitPoint};

/// The positive orthant simplex `conv(e_1, ..., e_{d+1})` in `S^d`.
pub fn simplex(d: usize) -> SphericalPolytope {
    let pts: Vec<UnitPoint> = (0..=d).map(|k| UnitPoint::basis(d + 1, k)).collect();
    SphericalPolytope::from_vertices(d, &pts, &Tolerances::default()).expect("orthant simplex is valid")
}

/// The cube `[-1/2, 1/2]^3` lifted to `S^3` around `e_4`.
pub fn embedded_cube() -> SphericalPolytope {
    let rows: Vec<Vec<f64>> = cube_rows(0.5).into_iter().map(|mut r| {
        r.push(1.0);
        r
    }).collect();
    SphericalPolytope::from_coords(3, &rows, &Tolerances::default()).expect("embedded cube is valid")
}

fn cube_rows(s: f64) -> Vec<Vec<f64>> {
    (0..8)
        .map(|k| (0..3).map(|b| if (k >> b) & 1 == 1 { s } else { -s }).collect())
        .collect()
}

/// The cube `[-1, 1]^3`.
pub fn cube3() -> EuclideanPolytope {
    EuclideanPolytope::from_rows(&cube_rows(1.0), &Tolerances::default()).expect("cube is valid")
}

/// A regular tetrahedron centred at the origin.
pub fn tetrahedron() -> EuclideanPolytope {
    let rows = vec![
        vec![1.0, 1.0, 1.0],
        vec![1.0, -1.0, -1.0],
        vec![-1.0, 1.0, -1.0],
        vec![-1.0, -1.0, 1.0],
    ];
    EuclideanPolytope::from_rows(&rows, &Tolerances::default()).expect("tetrahedron is valid")
}

/// The regular dodecahedron with vertices `(±1, ±1, ±1)` and cyclic
/// permutations of `(0, ±1/φ, ±φ)`.
pub fn dodecahedron() -> EuclideanPolytope {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut rows = cube_rows(1.0);
    for a in [-1.0, 1.0] {
        for b in [-1.0, 1.0] {
            let (x, y) = (a / phi, b * phi);
            rows.push(vec![0.0, x, y]);
            rows.push(vec![x, y, 0.0]);
            rows.push(vec![y, 0.0, x]);
        }
    }
    EuclideanPolytope::from_rows(&rows, &Tolerances::default()).expect("dodecahedron is valid")
}

/// `n` points on the sphere of tangent radius `0.85..1` around a random
/// centre of `S^d`, in general position with probability one.
pub fn random_polytope<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<SphericalPolytope> {
    let tol = Tolerances::default();
    let center = gaussian(d + 1, rng).normalize();
    let frame = linalg::tangent_frame(&center);
    let pts = (0..n)
        .map(|_| {
            let u = gaussian(d, rng).normalize();
            let r = rng.random_range(0.85..1.0);
            let mut x = center.clone();
            for (c, f) in u.iter().zip(&frame) {
                x.axpy(r * c, f, 1.0);
            }
            UnitPoint::normalize(x, &tol)
        })
        .collect::<Result<Vec<_>>>()?;
    SphericalPolytope::from_vertices(d, &pts, &tol)
}

/// Convex hull of `n` uniform points on the unit sphere of `E^d`.
pub fn random_euclidean<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<EuclideanPolytope> {
    let pts: Vec<DVector<f64>> = (0..n).map(|_| gaussian(d, rng).normalize()).collect();
    EuclideanPolytope::from_vertices(&pts, &Tolerances::default())
}

fn gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}
