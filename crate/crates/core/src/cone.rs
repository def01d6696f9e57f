//! Facets of a pointed polyhedral cone `pos(V)` in `E^n`.
//!
//! The facet normals of `pos(V)` are the extreme rays of the polar cone
//! `{ y : <y, v> <= 0 for all v in V }`, which the double description method
//! enumerates by adding one constraint row at a time.

use fixedbitset::FixedBitSet;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Facets of a cone hull: unit outer normals and, per facet, the set of
/// generator indices lying on it.
#[derive(Clone, Debug)]
pub(crate) struct ConeHull {
    pub normals: Vec<DVector<f64>>,
    pub incidence: Vec<FixedBitSet>,
}

/// Largest acceptable condition number of the generators spanning a facet.
const MAX_FACET_CONDITION: f64 = 1e8;

struct Ray {
    dir: DVector<f64>,
    zeros: FixedBitSet,
}

/// Computes the facets of `pos(generators)`. The generators must span
/// `E^n` and lie in an open halfspace; `eps` is the incidence slack on unit
/// vectors.
pub(crate) fn cone_hull(generators: &[DVector<f64>], eps: f64) -> Result<ConeHull> {
    let m = generators.len();
    let n = generators.first().map_or(0, |g| g.len());
    if m < n || n < 2 {
        return Err(Error::DegenerateDimension(format!("{m} generators cannot span a cone in dimension {n}")));
    }

    let pivots = pivot_rows(generators, n)?;
    let mut a0 = DMatrix::zeros(n, n);
    for (i, &r) in pivots.iter().enumerate() {
        a0.row_mut(i).copy_from(&generators[r].transpose());
    }
    let inv = a0
        .try_inverse()
        .ok_or_else(|| Error::DegenerateDimension("pivot rows are singular".into()))?;

    let mut rays: Vec<Ray> = (0..n)
        .map(|j| {
            let dir = -inv.column(j).into_owned();
            let mut zeros = FixedBitSet::with_capacity(m);
            for (i, &r) in pivots.iter().enumerate() {
                if i != j {
                    zeros.insert(r);
                }
            }
            Ray { dir: dir.normalize(), zeros }
        })
        .collect();

    let mut in_pivots = FixedBitSet::with_capacity(m);
    for &r in &pivots {
        in_pivots.insert(r);
    }
    for row in (0..m).filter(|r| !in_pivots.contains(*r)) {
        rays = add_row(rays, generators, row, n, eps);
    }

    finish(rays, generators, n, eps)
}

/// Picks `n` linearly independent generators by greedy orthogonalization,
/// preferring the most independent candidate at each step.
fn pivot_rows(generators: &[DVector<f64>], n: usize) -> Result<Vec<usize>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for _ in 0..n {
        let mut best: Option<(usize, f64, DVector<f64>)> = None;
        for (i, g) in generators.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut w = g.clone();
            for b in &basis {
                let d = w.dot(b);
                w.axpy(-d, b, 1.0);
            }
            let r = w.norm();
            if best.as_ref().is_none_or(|(_, br, _)| r > *br) {
                best = Some((i, r, w));
            }
        }
        match best {
            Some((i, r, w)) if r > 1e-9 => {
                basis.push(w / r);
                chosen.push(i);
            }
            _ => return Err(Error::DegenerateDimension("generators do not span the ambient space".into())),
        }
    }
    Ok(chosen)
}

fn add_row(rays: Vec<Ray>, generators: &[DVector<f64>], row: usize, n: usize, eps: f64) -> Vec<Ray> {
    let a = &generators[row];
    let values: Vec<f64> = rays.iter().map(|r| r.dir.dot(a)).collect();
    let plus: Vec<usize> = (0..rays.len()).filter(|&i| values[i] > eps).collect();
    let minus: Vec<usize> = (0..rays.len()).filter(|&i| values[i] < -eps).collect();
    if plus.is_empty() {
        let mut rays = rays;
        for (r, &v) in rays.iter_mut().zip(&values) {
            if v.abs() <= eps {
                r.zeros.insert(row);
            }
        }
        return rays;
    }

    let mut created = Vec::new();
    for &p in &plus {
        for &q in &minus {
            let mut common = rays[p].zeros.clone();
            common.intersect_with(&rays[q].zeros);
            if common.count_ones(..) + 2 < n {
                continue;
            }
            let blocked = rays
                .iter()
                .enumerate()
                .any(|(k, r)| k != p && k != q && common.is_subset(&r.zeros));
            if blocked {
                continue;
            }
            let dir = &rays[q].dir * values[p] - &rays[p].dir * values[q];
            let mut zeros = common;
            zeros.insert(row);
            created.push(Ray { dir: dir.normalize(), zeros });
        }
    }

    let mut out: Vec<Ray> = rays
        .into_iter()
        .zip(values)
        .filter(|(_, v)| *v <= eps)
        .map(|(mut r, v)| {
            if v >= -eps {
                r.zeros.insert(row);
            }
            r
        })
        .collect();
    out.extend(created);
    out
}

fn finish(rays: Vec<Ray>, generators: &[DVector<f64>], n: usize, eps: f64) -> Result<ConeHull> {
    let m = generators.len();
    let mut interior = DVector::zeros(n);
    for g in generators {
        interior += g;
    }

    let mut normals: Vec<DVector<f64>> = Vec::new();
    let mut incidence: Vec<FixedBitSet> = Vec::new();
    for ray in rays {
        let mut inc = FixedBitSet::with_capacity(m);
        for (i, g) in generators.iter().enumerate() {
            if ray.dir.dot(g).abs() <= eps {
                inc.insert(i);
            }
        }
        if incidence.contains(&inc) {
            continue;
        }
        let rows: Vec<&DVector<f64>> = inc.ones().map(|i| &generators[i]).collect();
        if linalg::rank(&rows, n, 1e-10) != n - 1 {
            return Err(Error::DegenerateDimension(format!(
                "facet spanned by {} generators does not have rank {}",
                rows.len(),
                n - 1
            )));
        }
        let (mut normal, cond) = linalg::null_vector(&rows, n);
        if cond > MAX_FACET_CONDITION {
            return Err(Error::DegenerateDimension(format!("facet condition number {cond:e} exceeds 1e8")));
        }
        if normal.dot(&interior) > 0.0 {
            normal = -normal;
        }
        for (i, g) in generators.iter().enumerate() {
            let s = normal.dot(g);
            if s > eps {
                return Err(Error::DegenerateDimension(format!(
                    "generator {i} violates a refined facet by {s:e}"
                )));
            }
        }
        normals.push(normal);
        incidence.push(inc);
    }
    Ok(ConeHull { normals, incidence })
}
