//! Small dense linear-algebra helpers shared by the hull, projection and
//! construction code. Dimensions here are tiny (at most six), so everything
//! works on `DVector`/`DMatrix` and favours clarity over speed.

use nalgebra::{DMatrix, DVector};

/// Stacks vectors as the rows of a matrix, padding with zero rows up to
/// `min_rows` so that a full SVD exposes the complete right singular basis.
pub(crate) fn rows_matrix(rows: &[&DVector<f64>], ncols: usize, min_rows: usize) -> DMatrix<f64> {
    let nrows = rows.len().max(min_rows);
    let mut m = DMatrix::zeros(nrows, ncols);
    for (i, r) in rows.iter().enumerate() {
        m.row_mut(i).copy_from(&r.transpose());
    }
    m
}

/// Singular values of the matrix whose rows are `rows`, sorted descending.
pub(crate) fn singular_values(rows: &[&DVector<f64>], ncols: usize) -> Vec<f64> {
    if rows.is_empty() {
        return vec![0.0; ncols];
    }
    let m = rows_matrix(rows, ncols, 0);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with singular values compared relative to the largest one.
pub(crate) fn rank(rows: &[&DVector<f64>], ncols: usize, rel_tol: f64) -> usize {
    let s = singular_values(rows, ncols);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Unit vector spanning the (approximate) null space of the given rows,
/// together with the condition number `s_1 / s_{n-1}` of the rows.
pub(crate) fn null_vector(rows: &[&DVector<f64>], ncols: usize) -> (DVector<f64>, f64) {
    let m = rows_matrix(rows, ncols, ncols);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let smallest = *order.last().unwrap();
    let second = order[order.len().saturating_sub(2)];
    let cond = if s[second] > 0.0 { s[order[0]] / s[second] } else { f64::INFINITY };
    let v = v_t.row(smallest).transpose();
    (v.normalize(), cond)
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)` in
/// `R^n`, built by Gram-Schmidt over the standard basis taken in `order`.
pub(crate) fn complement_basis_ordered(
    vectors: &[DVector<f64>],
    n: usize,
    order: &[usize],
) -> Vec<DVector<f64>> {
    let mut span: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        if let Some(u) = orthogonalize(v, &span) {
            span.push(u);
        }
    }
    let mut out = Vec::new();
    for &i in order {
        if span.len() == n {
            break;
        }
        let e = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
        if let Some(u) = orthogonalize(&e, &span) {
            span.push(u.clone());
            out.push(u);
        }
    }
    out
}

pub(crate) fn complement_basis(vectors: &[DVector<f64>], n: usize) -> Vec<DVector<f64>> {
    let order: Vec<usize> = (0..n).collect();
    complement_basis_ordered(vectors, n, &order)
}

/// Tangent frame at `c`: Gram-Schmidt on the standard basis reordered by
/// increasing `|c_i|` (ties by index), so the frame is reproducible.
pub(crate) fn tangent_frame(c: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = c.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs()).then(a.cmp(&b)));
    complement_basis_ordered(std::slice::from_ref(c), n, &order)
}

fn orthogonalize(v: &DVector<f64>, basis: &[DVector<f64>]) -> Option<DVector<f64>> {
    let mut w = v.clone();
    // Two passes keep the result orthogonal to working precision.
    for _ in 0..2 {
        for b in basis {
            let d = w.dot(b);
            w.axpy(-d, b, 1.0);
        }
    }
    let norm = w.norm();
    if norm > 1e-8 * v.norm().max(1e-300) && norm > 1e-12 {
        Some(w / norm)
    } else {
        None
    }
}

/// Sign of the determinant of the square matrix whose columns are `cols`.
pub(crate) fn det_of_columns(cols: &[&DVector<f64>]) -> f64 {
    let n = cols.len();
    let mut m = DMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        m.column_mut(j).copy_from(c);
    }
    m.determinant()
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
/// Returns the point; its norm is zero when the hull contains the origin.
pub(crate) fn min_norm_point(points: &[DVector<f64>]) -> DVector<f64> {
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(1e-300);
    let start = (0..points.len())
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .expect("at least one point");
    let mut support = vec![start];
    let mut weights = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..1000 {
        let (j, best) = (0..points.len())
            .map(|j| (j, x.dot(&points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if x.norm_squared() - best <= 1e-14 * scale || support.contains(&j) {
            break;
        }
        support.push(j);
        weights.push(0.0);

        loop {
            let alpha = match affine_minimizer(points, &support) {
                Some(a) => a,
                None => {
                    support.pop();
                    weights.pop();
                    return x;
                }
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= 1e-15 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = (1.0 - theta) * *w + theta * a;
            }
            let mut k = 0;
            while k < support.len() {
                if weights[k] <= 1e-15 {
                    support.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            if support.len() <= 1 {
                if let Some(w) = weights.first_mut() {
                    *w = 1.0;
                }
                break;
            }
        }
        let total: f64 = weights.iter().sum();
        x = DVector::zeros(points[0].len());
        for (&i, &w) in support.iter().zip(&weights) {
            x.axpy(w / total, &points[i], 1.0);
        }
    }
    x
}

/// Barycentric weights of the minimum-norm point of the affine hull of the
/// support points.
fn affine_minimizer(points: &[DVector<f64>], support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            m[(a, b)] = points[support[a]].dot(&points[support[b]]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = m.lu().solve(&rhs)?;
    if sol.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Some(sol.iter().take(k).copied().collect())
}
