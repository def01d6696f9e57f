//! Möbius transformations of `S^2` as Lorentz transformations of `R^{3,1}`.
//!
//! A point `x` of the sphere is the null ray of `(x, 1)`. The circle
//! `{x : <n, x> = o}` with cap `{<n, x> > o}` is the spacelike vector
//! `(n, o)`, and a point of the open ball in the Klein model is the timelike
//! ray of `(k, 1)`.

use nalgebra::{Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An oriented circle `S^2 ∩ {<normal, x> = offset}` bounding the cap
/// `{<normal, x> > offset}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleOnSphere {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl CircleOnSphere {
    pub fn new(normal: Vector3<f64>, offset: f64, pred: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0) || !offset.is_finite() {
            return Err(Error::ZeroVector { norm: len });
        }
        let c = Self { normal: normal / len, offset: offset / len };
        if c.offset.abs() >= 1.0 - pred {
            return Err(Error::VerificationFailed(format!("circle offset {} is degenerate", c.offset)));
        }
        Ok(c)
    }

    pub fn minkowski(&self) -> Vector4<f64> {
        Vector4::new(self.normal.x, self.normal.y, self.normal.z, self.offset)
    }

    /// Spherical radius of the circle.
    pub fn radius(&self) -> f64 {
        self.offset.clamp(-1.0, 1.0).acos()
    }

    /// Pole of the circle's plane: the apex of the tangent cone, `n / o`.
    pub fn pole(&self) -> Vector3<f64> {
        self.normal / self.offset
    }

    /// Signed residual of a sphere point against the circle.
    pub fn residual(&self, x: &Vector3<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }

    /// Inversive distance: `1` for coincident circles with equal caps, `0`
    /// for orthogonal circles, `-1` for externally tangent caps.
    pub fn inversive(&self, other: &CircleOnSphere) -> f64 {
        (self.normal.dot(&other.normal) - self.offset * other.offset)
            / ((1.0 - self.offset * self.offset) * (1.0 - other.offset * other.offset)).sqrt()
    }
}

/// Lorentz form `diag(1, 1, 1, -1)`.
pub fn lorentz(a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
    a.x * b.x + a.y * b.y + a.z * b.z - a.w * b.w
}

/// A time-orientation preserving Lorentz transformation of determinant `+1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub matrix: Matrix4<f64>,
}

impl MobiusMap {
    pub fn identity() -> Self {
        Self { matrix: Matrix4::identity() }
    }

    /// The hyperbolic translation taking the Klein-model point `k` to the
    /// center of the ball.
    pub fn boost_to_origin(k: &Vector3<f64>) -> Result<Self> {
        let speed = k.norm();
        if speed >= 1.0 || !speed.is_finite() {
            return Err(Error::VerificationFailed(format!("point of norm {speed} is not inside the ball")));
        }
        if speed == 0.0 {
            return Ok(Self::identity());
        }
        let u = k / speed;
        let gamma = 1.0 / (1.0 - speed * speed).sqrt();
        let sinh = gamma * speed;
        let mut m = Matrix4::identity();
        let spatial = Matrix4::from_fn(|r, c| if r < 3 && c < 3 { (gamma - 1.0) * u[r] * u[c] } else { 0.0 });
        m += spatial;
        for r in 0..3 {
            m[(r, 3)] = -sinh * u[r];
            m[(3, r)] = -sinh * u[r];
        }
        m[(3, 3)] = gamma;
        Ok(Self { matrix: m })
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &MobiusMap) -> Self {
        Self { matrix: self.matrix * first.matrix }
    }

    pub fn apply_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let y = self.matrix * Vector4::new(x.x, x.y, x.z, 1.0);
        Vector3::new(y.x, y.y, y.z) / y.w
    }

    /// Image of a Klein-model point of the open ball.
    pub fn apply_klein(&self, k: &Vector3<f64>) -> Vector3<f64> {
        self.apply_point(k)
    }

    pub fn apply_circle(&self, c: &CircleOnSphere) -> CircleOnSphere {
        let w = self.matrix * c.minkowski();
        let n = Vector3::new(w.x, w.y, w.z);
        let len = n.norm();
        CircleOnSphere { normal: n / len, offset: w.w / len }
    }

    /// Largest deviation of `M^T J M` from `J`.
    pub fn form_defect(&self) -> f64 {
        let j = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0));
        (self.matrix.transpose() * j * self.matrix - j).amax()
    }

    pub fn is_proper_orthochronous(&self, tol: f64) -> bool {
        self.form_defect() <= tol && (self.matrix.determinant() - 1.0).abs() <= tol && self.matrix[(3, 3)] >= 1.0 - tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(v: [f64; 3]) -> Vector3<f64> {
        Vector3::from(v).normalize()
    }

    #[test]
    fn boost_moves_point_to_origin() {
        let k = Vector3::new(0.3, -0.2, 0.5);
        let m = MobiusMap::boost_to_origin(&k).unwrap();
        assert!(m.apply_klein(&k).norm() < 1e-15);
        assert!(m.is_proper_orthochronous(1e-12));
        assert!(MobiusMap::boost_to_origin(&Vector3::new(1.0, 0.0, 0.0)).is_err());
        assert_eq!(MobiusMap::boost_to_origin(&Vector3::zeros()).unwrap(), MobiusMap::identity());
    }

    #[test]
    fn plane_through_point_moves_to_origin() {
        let c = CircleOnSphere::new(unit([1.0, 2.0, 2.0]), 0.4, 1e-9).unwrap();
        let k = c.normal * 0.4 + unit([2.0, -1.0, 0.0]) * 0.3;
        assert!(c.residual(&k).abs() < 1e-15);
        let m = MobiusMap::boost_to_origin(&k).unwrap();
        assert!(m.apply_circle(&c).offset.abs() < 1e-14);
    }

    #[test]
    fn inversive_distances() {
        let a = CircleOnSphere::new(Vector3::z(), 0.0, 1e-9).unwrap();
        let b = CircleOnSphere::new(Vector3::x(), 0.0, 1e-9).unwrap();
        assert!(a.inversive(&b).abs() < 1e-15);
        // Two caps of radius π/4 centered π/2 apart touch externally.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = CircleOnSphere::new(Vector3::x(), s, 1e-9).unwrap();
        let d = CircleOnSphere::new(Vector3::y(), s, 1e-9).unwrap();
        assert!((c.inversive(&d) + 1.0).abs() < 1e-12);
        assert!(CircleOnSphere::new(Vector3::x(), 1.0, 1e-9).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn maps_preserve_incidence_and_inversive_distance(
            k in prop::array::uniform3(-0.5f64..0.5),
            n1 in prop::array::uniform3(-1f64..1.0),
            n2 in prop::array::uniform3(-1f64..1.0),
            o1 in -0.9f64..0.9,
            o2 in -0.9f64..0.9,
            t in 0f64..6.28,
        ) {
            prop_assume!(Vector3::from(n1).norm() > 0.1 && Vector3::from(n2).norm() > 0.1);
            let m = MobiusMap::boost_to_origin(&Vector3::from(k)).unwrap();
            let c1 = CircleOnSphere::new(Vector3::from(n1).normalize(), o1, 1e-9).unwrap();
            let c2 = CircleOnSphere::new(Vector3::from(n2).normalize(), o2, 1e-9).unwrap();
            let (i1, i2) = (m.apply_circle(&c1), m.apply_circle(&c2));
            prop_assert!((c1.inversive(&c2) - i1.inversive(&i2)).abs() < 1e-9);
            // A point of c1 stays on the image circle and on the sphere.
            let e = if c1.normal.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            let u = (e - c1.normal * c1.normal.dot(&e)).normalize();
            let w = c1.normal.cross(&u);
            let r = (1.0 - c1.offset * c1.offset).sqrt();
            let x = c1.normal * c1.offset + (u * t.cos() + w * t.sin()) * r;
            let y = m.apply_point(&x);
            prop_assert!((y.norm() - 1.0).abs() < 1e-12);
            prop_assert!(i1.residual(&y).abs() < 1e-12);
            // Caps map to caps.
            let inside = c1.normal * (c1.offset + 1.0) / 2.0 + (u * t.cos() + w * t.sin()) * 1e-3;
            let inside = inside.normalize();
            if c1.residual(&inside) > 1e-6 {
                prop_assert!(i1.residual(&m.apply_point(&inside)) > 0.0);
            }
            prop_assert!(m.is_proper_orthochronous(1e-9));
        }
    }
}
