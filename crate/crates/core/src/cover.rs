//! Brute-force set-cover oracle over quasi-uniform light grids on a
//! greatsphere.

use std::f64::consts::{PI, TAU};

use fixedbitset::FixedBitSet;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::illumination::{dual_margin, IlluminationWitness};
use crate::linalg;
use crate::polytope::SphericalPolytope;
use crate::sphere::UnitPoint;

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// `count` quasi-uniform unit vectors of `R^m`: equally spaced angles for
/// `m = 2`, a Fibonacci spiral for `m = 3`, and a Kronecker (R-sequence)
/// lattice pushed through Box-Muller for larger `m`.
pub fn sphere_grid(m: usize, count: usize) -> Vec<DVector<f64>> {
    match m {
        0 | 1 => Vec::new(),
        2 => (0..count)
            .map(|k| {
                let t = TAU * k as f64 / count as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    DVector::from_vec(vec![r * t.cos(), r * t.sin(), z])
                })
                .collect()
        }
        _ => {
            let pairs = m.div_ceil(2);
            let dim = 2 * pairs;
            // Generalized golden ratio: the positive root of x^(dim+1) = x + 1.
            let mut phi = 2.0f64;
            for _ in 0..64 {
                phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
            }
            let alpha: Vec<f64> = (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect();
            (0..count)
                .map(|k| {
                    let u: Vec<f64> = alpha.iter().map(|a| (0.5 + a * (k + 1) as f64).fract()).collect();
                    let mut g = Vec::with_capacity(dim);
                    for p in 0..pairs {
                        let r = (-2.0 * u[2 * p].max(1e-300).ln()).sqrt();
                        let t = TAU * u[2 * p + 1];
                        g.push(r * t.cos());
                        g.push(r * t.sin());
                    }
                    g.truncate(m);
                    DVector::from_vec(g).normalize()
                })
                .collect()
        }
    }
}

/// Candidate lights on the greatsphere `h^⊥`.
pub fn greatsphere_grid(h: &UnitPoint, count: usize) -> Vec<UnitPoint> {
    let frame = linalg::tangent_frame(h.coords());
    sphere_grid(frame.len(), count)
        .into_iter()
        .map(|g| {
            let mut x = DVector::zeros(h.ambient_dim());
            for (coef, f) in g.iter().zip(&frame) {
                x.axpy(*coef, f, 1.0);
            }
            UnitPoint::from_unit(x)
        })
        .collect()
}

/// Smallest cover of all vertices using at most `max_size` of the given
/// coverage sets, by iterative deepening. Returns indices into `sets`.
pub fn exact_cover(universe: usize, sets: &[FixedBitSet], max_size: usize) -> Option<Vec<usize>> {
    // Drop duplicate and dominated sets; keep the first representative.
    let mut kept: Vec<usize> = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        if s.count_ones(..) == 0 {
            continue;
        }
        let dominated = sets.iter().enumerate().any(|(j, t)| {
            j != i && s.is_subset(t) && (s != t || j < i)
        });
        if !dominated {
            kept.push(i);
        }
    }
    let largest = kept.iter().map(|&i| sets[i].count_ones(..)).max().unwrap_or(0);
    for k in 1..=max_size {
        let mut chosen = Vec::new();
        let covered = FixedBitSet::with_capacity(universe);
        if search(universe, sets, &kept, k, largest, &covered, &mut chosen) {
            return Some(chosen);
        }
    }
    None
}

fn search(
    universe: usize,
    sets: &[FixedBitSet],
    kept: &[usize],
    budget: usize,
    largest: usize,
    covered: &FixedBitSet,
    chosen: &mut Vec<usize>,
) -> bool {
    let missing = universe - covered.count_ones(..);
    if missing == 0 {
        return true;
    }
    if budget == 0 || budget * largest < missing {
        return false;
    }
    // Branch on the uncovered element with the fewest candidate sets.
    let mut pick: Option<(usize, usize)> = None;
    for e in (0..universe).filter(|&e| !covered.contains(e)) {
        let count = kept.iter().filter(|&&i| sets[i].contains(e)).count();
        if count == 0 {
            return false;
        }
        if pick.is_none_or(|(_, c)| count < c) {
            pick = Some((e, count));
        }
    }
    let (e, _) = pick.expect("an uncovered element exists");
    for &i in kept.iter().filter(|&&i| sets[i].contains(e)) {
        let mut next = covered.clone();
        next.union_with(&sets[i]);
        chosen.push(i);
        if search(universe, sets, kept, budget - 1, largest, &next, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Greedy cover: repeatedly takes the set covering most uncovered elements.
pub fn greedy_cover(universe: usize, sets: &[FixedBitSet]) -> Option<Vec<usize>> {
    let mut covered = FixedBitSet::with_capacity(universe);
    let mut chosen = Vec::new();
    while covered.count_ones(..) < universe {
        let (i, gain) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.difference(&covered).count()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))?;
        if gain == 0 {
            return None;
        }
        covered.union_with(&sets[i]);
        chosen.push(i);
    }
    Some(chosen)
}

/// Vertex-coverage sets of each candidate light under the conjugate-face
/// criterion.
pub fn coverage(poly: &SphericalPolytope, candidates: &[UnitPoint]) -> Vec<FixedBitSet> {
    let vertex_facets: Vec<Vec<usize>> = (0..poly.vertices().len()).map(|v| poly.vertex_facets(v)).collect();
    candidates
        .iter()
        .map(|p| {
            let mut s = FixedBitSet::with_capacity(vertex_facets.len());
            for (v, facets) in vertex_facets.iter().enumerate() {
                if dual_margin(poly, p, facets) > poly.tol().pred {
                    s.insert(v);
                }
            }
            s
        })
        .collect()
}

/// Smallest light set found on a `grid_size` grid of the greatsphere
/// bounding the margin hemisphere. Exact up to `d + 2` lights; beyond that
/// only the greedy size is reported inside [`Error::GridTooCoarse`].
pub fn exhaustive_upper_bound(poly: &SphericalPolytope, grid_size: usize) -> Result<(usize, IlluminationWitness)> {
    let h = poly.center().clone();
    let candidates = greatsphere_grid(&h, grid_size);
    let sets = coverage(poly, &candidates);
    let universe = poly.vertices().len();
    let max_size = poly.dim() + 2;
    match exact_cover(universe, &sets, max_size) {
        Some(chosen) => {
            let lights = chosen.iter().map(|&i| candidates[i].clone()).collect();
            Ok((chosen.len(), IlluminationWitness { normal: h, lights }))
        }
        None => Err(Error::GridTooCoarse { max_size, greedy: greedy_cover(universe, &sets).map(|c| c.len()) }),
    }
}
