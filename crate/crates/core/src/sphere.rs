//! Elementary spherical geometry on `S^d`, realised as unit vectors of
//! `E^{d+1}`.
//!
//! Every predicate takes an explicit [`Tolerances`]; there are no hidden
//! global epsilons. Values are immutable once built.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Inner-product slacks used by all predicates (dimensionless).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Allowed deviation of a unit vector's norm from one.
    pub unit: f64,
    /// Band around zero inside which an inner product counts as zero.
    pub pred: f64,
    /// Distance below which two points are merged.
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { unit: 1e-12, pred: 1e-9, dedup: 1e-8 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("unit", self.unit), ("pred", self.pred), ("dedup", self.dedup)] {
            if !(v > 0.0 && v < 1e-3) {
                return Err(Error::InvalidTolerances(format!("{name} = {v} is outside (0, 1e-3)")));
            }
        }
        Ok(())
    }

    /// Threshold below which a verified margin is reported as fragile.
    pub fn fragile_threshold(&self) -> f64 {
        10.0 * self.pred
    }
}

/// A point of `S^d`: a unit vector of `E^{d+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitPoint(DVector<f64>);

impl UnitPoint {
    /// Normalizes `v`; fails when `|v|` does not exceed the unit tolerance.
    pub fn normalize(v: DVector<f64>, tol: &Tolerances) -> Result<Self> {
        let norm = v.norm();
        if !(norm > tol.unit) || !norm.is_finite() {
            return Err(Error::ZeroVector { norm });
        }
        Ok(Self(v / norm))
    }

    pub fn from_slice(v: &[f64], tol: &Tolerances) -> Result<Self> {
        Self::normalize(DVector::from_column_slice(v), tol)
    }

    /// Wraps a vector already known to be unit up to rounding. The vector is
    /// renormalized so the invariant holds to machine precision.
    pub(crate) fn from_unit(v: DVector<f64>) -> Self {
        let n = v.norm();
        debug_assert!(n > 0.0 && (n - 1.0).abs() < 1e-6, "not a unit vector: norm {n}");
        Self(v / n)
    }

    /// The `k`-th standard basis vector of `E^{n}`.
    pub fn basis(n: usize, k: usize) -> Self {
        Self(DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 }))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }

    /// Dimension of the ambient Euclidean space, `d + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    /// Dimension `d` of the sphere the point lives on.
    pub fn sphere_dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn dot(&self, other: &UnitPoint) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn dot_vec(&self, other: &DVector<f64>) -> f64 {
        self.0.dot(other)
    }

    pub fn antipode(&self) -> UnitPoint {
        UnitPoint(-&self.0)
    }

    /// Great-circle distance in radians.
    pub fn distance(&self, other: &UnitPoint) -> f64 {
        // atan2 form is accurate for nearly coincident points.
        let cross = (&self.0 - &other.0).norm();
        let sum = (&self.0 + &other.0).norm();
        2.0 * cross.atan2(sum)
    }
}

/// Returns `-p`. Exact: negation is an involution in floating point.
pub fn antipode(p: &UnitPoint) -> UnitPoint {
    p.antipode()
}

pub fn normalize(v: DVector<f64>, tol: &Tolerances) -> Result<UnitPoint> {
    UnitPoint::normalize(v, tol)
}

/// Point at arc fraction `t` along the shorter arc from `p` to `q`.
pub fn geodesic_point(p: &UnitPoint, q: &UnitPoint, t: f64, tol: &Tolerances) -> Result<UnitPoint> {
    if p.ambient_dim() != q.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: p.ambient_dim(), found: q.ambient_dim() });
    }
    let c = p.dot(q);
    if c <= -1.0 + tol.pred {
        return Err(Error::AntipodalPair);
    }
    if c >= 1.0 - tol.pred {
        return Err(Error::CoincidentPair);
    }
    let omega = p.distance(q);
    let s = omega.sin();
    let a = ((1.0 - t) * omega).sin() / s;
    let b = (t * omega).sin() / s;
    Ok(UnitPoint::from_unit(p.coords() * a + q.coords() * b))
}

/// Position of a point relative to an open hemisphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Inside,
    OnBoundary,
    Outside,
}

/// The open hemisphere `H_x = { y : <x, y> > 0 }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hemisphere {
    pub center: UnitPoint,
}

impl Hemisphere {
    pub fn new(center: UnitPoint) -> Self {
        Self { center }
    }

    pub fn side(&self, p: &UnitPoint, tol: &Tolerances) -> Side {
        side(self, p, tol)
    }

    pub fn boundary(&self) -> GreatSphere {
        GreatSphere::new(self.center.clone())
    }
}

pub fn side(h: &Hemisphere, p: &UnitPoint, tol: &Tolerances) -> Side {
    let s = h.center.dot(p);
    if s > tol.pred {
        Side::Inside
    } else if s >= -tol.pred {
        Side::OnBoundary
    } else {
        Side::Outside
    }
}

/// A `(d-1)`-dimensional greatsphere `{ y : <n, y> = 0 }`. The normal is
/// stored with its first non-negligible coordinate positive, so equal
/// greatspheres compare equal coordinate-wise.
#[derive(Clone, Debug, PartialEq)]
pub struct GreatSphere {
    normal: UnitPoint,
}

impl GreatSphere {
    pub fn new(normal: UnitPoint) -> Self {
        let lead = normal.coords().iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
        let normal = if lead < 0.0 { normal.antipode() } else { normal };
        Self { normal }
    }

    pub fn normal(&self) -> &UnitPoint {
        &self.normal
    }

    pub fn contains(&self, p: &UnitPoint, tol: &Tolerances) -> bool {
        self.normal.dot(p).abs() <= tol.pred
    }
}

/// Rotates `p` by `theta` inside the 2-plane spanned by the orthonormal pair
/// `(a, b)`, mapping `a` towards `b`; the orthogonal complement is fixed.
pub(crate) fn rotate_in_plane(p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>, theta: f64) -> DVector<f64> {
    let pa = p.dot(a);
    let pb = p.dot(b);
    let (s, c) = theta.sin_cos();
    let mut out = p.clone();
    out.axpy(pa * (c - 1.0) - pb * s, a, 1.0);
    out.axpy(pa * s + pb * (c - 1.0), b, 1.0);
    out
}

/// Rotation of `E^{d+1}` fixing the `(d-1)`-dimensional subspace spanned by
/// the orthonormal basis `w` pointwise, by angle `theta` in the complementary
/// 2-plane.
///
/// The complementary plane is spanned by `(a, b)` obtained by Gram-Schmidt on
/// the standard basis, oriented so that `det[a, b, w_1, ..]` is positive;
/// the rotation carries `a` towards `b`.
pub fn rotate_about_subsphere(p: &UnitPoint, w: &[UnitPoint], theta: f64, tol: &Tolerances) -> Result<UnitPoint> {
    let n = p.ambient_dim();
    if n < 2 || w.len() + 2 != n {
        return Err(Error::DegenerateBasis(format!(
            "expected {} basis vectors in dimension {n}, got {}",
            n.saturating_sub(2),
            w.len()
        )));
    }
    for (i, wi) in w.iter().enumerate() {
        if wi.ambient_dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: wi.ambient_dim() });
        }
        for (j, wj) in w.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            if (wi.dot(wj) - expect).abs() > tol.unit.max(1e-12) {
                return Err(Error::DegenerateBasis(format!("<w_{i}, w_{j}> = {}", wi.dot(wj))));
            }
        }
    }
    let ws: Vec<DVector<f64>> = w.iter().map(|x| x.coords().clone()).collect();
    let plane = linalg::complement_basis(&ws, n);
    if plane.len() != 2 {
        return Err(Error::DegenerateBasis("complement is not two-dimensional".into()));
    }
    let a = &plane[0];
    let mut b = plane[1].clone();
    let mut cols: Vec<&DVector<f64>> = vec![a, &b];
    cols.extend(ws.iter());
    if linalg::det_of_columns(&cols) < 0.0 {
        b = -b;
    }
    Ok(UnitPoint::from_unit(rotate_in_plane(p.coords(), a, &b, theta)))
}
