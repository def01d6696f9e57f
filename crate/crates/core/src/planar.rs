//! Convex polygons in the plane and the three-direction illumination of
//! non-parallelograms via their normal fans.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphere::Tolerances;

/// Three illuminating directions and the vertex groups they cover.
#[derive(Clone, Debug, Serialize)]
pub struct LeviDirections {
    pub directions: [Vector2<f64>; 3],
    /// Contiguous vertex index groups; group `k` is covered by direction `k`.
    pub groups: [Vec<usize>; 3],
    /// `cos(span / 2)` of the widest group: the smallest value of
    /// `-<u, n>` over covered vertices and their edge normals.
    pub margin: f64,
}

/// Indices of `points` sorted counterclockwise around their centroid.
pub fn order_ccw(points: &[Vector2<f64>]) -> Vec<usize> {
    let c = points.iter().fold(Vector2::zeros(), |a, p| a + p) / points.len().max(1) as f64;
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let angle = |i: usize| {
        let d = points[i] - c;
        d.y.atan2(d.x)
    };
    idx.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
    idx
}

/// Outer unit normals of the edges `v_i -> v_{i+1}` of a counterclockwise
/// polygon.
pub fn edge_normals(polygon: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let n = polygon.len();
    (0..n)
        .map(|i| {
            let e = polygon[(i + 1) % n] - polygon[i];
            Vector2::new(e.y, -e.x).normalize()
        })
        .collect()
}

/// Checks that the polygon is strictly convex and counterclockwise.
pub fn check_convex(polygon: &[Vector2<f64>], tol: &Tolerances) -> Result<()> {
    let n = polygon.len();
    if n < 3 {
        return Err(Error::NotConvex(format!("{n} vertices")));
    }
    let mut turning = 0.0;
    for i in 0..n {
        let a = polygon[(i + 1) % n] - polygon[i];
        let b = polygon[(i + 2) % n] - polygon[(i + 1) % n];
        let (la, lb) = (a.norm(), b.norm());
        if la <= tol.dedup || lb <= tol.dedup {
            return Err(Error::NotConvex(format!("repeated vertex near index {}", (i + 1) % n)));
        }
        let cross = a.perp(&b) / (la * lb);
        if cross <= tol.pred {
            return Err(Error::NotConvex(format!("vertex {} is reflex or flat", (i + 1) % n)));
        }
        turning += cross.atan2(a.dot(&b) / (la * lb));
    }
    if (turning - TAU).abs() > 1e-6 {
        return Err(Error::NotConvex(format!("total turning {turning} is not 2π")));
    }
    Ok(())
}

/// Whether the polygon is a parallelogram: four edges whose normals form
/// two antipodal pairs.
pub fn is_parallelogram(polygon: &[Vector2<f64>], tol: &Tolerances) -> bool {
    if polygon.len() != 4 {
        return false;
    }
    let n = edge_normals(polygon);
    (n[0] + n[2]).norm() <= tol.pred && (n[1] + n[3]).norm() <= tol.pred
}

/// Whether direction `u` illuminates vertex `k`: both incident edge normals
/// are strictly negative against `u`. Returns the margin `-max <u, n>`.
pub fn illuminates_vertex(normals: &[Vector2<f64>], u: &Vector2<f64>, k: usize) -> f64 {
    let n = normals.len();
    let prev = &normals[(k + n - 1) % n];
    let next = &normals[k];
    -(u.dot(prev).max(u.dot(next)))
}

/// Finds three directions illuminating a convex counterclockwise polygon.
///
/// The vertices are split into three contiguous groups whose normal arcs
/// each span less than `π`; each group is lit by the direction opposite the
/// midpoint of its arc. Among all such partitions the one with the smallest
/// widest span is chosen, ties going to the lexicographically first cut.
pub fn levi_directions(polygon: &[Vector2<f64>], tol: &Tolerances) -> Result<LeviDirections> {
    check_convex(polygon, tol)?;
    if is_parallelogram(polygon, tol) {
        return Err(Error::ParallelogramError);
    }
    let n = polygon.len();
    let normals = edge_normals(polygon);
    let angle: Vec<f64> = normals.iter().map(|v| v.y.atan2(v.x)).collect();
    // Exterior angle at vertex k, between edge normals k-1 and k.
    let ext: Vec<f64> = (0..n)
        .map(|k| (angle[k] - angle[(k + n - 1) % n]).rem_euclid(TAU))
        .collect();
    let span = |from: usize, to: usize| -> f64 {
        let mut s = 0.0;
        let mut k = from;
        while k != to {
            s += ext[k % n];
            k = (k + 1) % n;
        }
        s
    };

    let mut best: Option<(f64, [usize; 3])> = None;
    for c0 in 0..n {
        for c1 in c0 + 1..n {
            for c2 in c1 + 1..n {
                let widest = span(c0, c1).max(span(c1, c2)).max(span(c2, c0));
                if widest < PI && best.is_none_or(|(w, _)| widest < w) {
                    best = Some((widest, [c0, c1, c2]));
                }
            }
        }
    }
    let (widest, cuts) = best.ok_or(Error::ParallelogramError)?;

    let mut directions = [Vector2::zeros(); 3];
    let mut groups: [Vec<usize>; 3] = Default::default();
    for g in 0..3 {
        let (from, to) = (cuts[g], cuts[(g + 1) % 3]);
        let s = span(from, to);
        let start = angle[(from + n - 1) % n];
        let mid = start + s / 2.0;
        directions[g] = -Vector2::new(mid.cos(), mid.sin());
        let mut k = from;
        while k != to {
            groups[g].push(k);
            k = (k + 1) % n;
        }
    }
    Ok(LeviDirections { directions, groups, margin: (widest / 2.0).cos() })
}
