//! Construction of `(d + 1)`-point illuminating witnesses.
//!
//! On `S^2` the polygon is projected gnomonically from an interior center and
//! lit by three planar directions. For `d >= 3` a facet `F` is lit inside its
//! own greatsphere `H` by recursion; the lights are then pushed slightly to
//! the far side of `H` and a further light near `-p` (with `p` the centroid
//! of `F`) takes care of the rest of the boundary. All of them lie on the
//! greatsphere obtained by tilting `H` about the recursive greatsphere `G`.

use nalgebra::{DVector, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::illumination::{verify_witness, IlluminationWitness, VerifyOptions};
use crate::linalg;
use crate::planar;
use crate::polytope::SphericalPolytope;
use crate::sphere::UnitPoint;

/// Loop parameters of the construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WitnessConfig {
    pub seed: u64,
    pub theta0: f64,
    pub delta0: f64,
    pub max_retries: usize,
    /// Re-centering attempts for parallelogram images on `S^2`.
    pub max_recenter: usize,
    pub recenter_step: f64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self { seed: 0, theta0: 0.05, delta0: 0.05, max_retries: 40, max_recenter: 8, recenter_step: 1e-2 }
    }
}

/// What happened at one recursion level, outermost level first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub dim: usize,
    /// Facet chosen as the equator (index into this level's facet list).
    pub facet: Option<usize>,
    pub facet_vertices: Vec<usize>,
    /// Relative interior point `p` of the facet.
    pub relint_point: Vec<f64>,
    /// Normal of the sub-greatsphere `G` inside the equator.
    pub sub_greatsphere_normal: Vec<f64>,
    pub theta: f64,
    pub delta: f64,
    pub retries: usize,
    /// Projection center used on `S^2`.
    pub center: Vec<f64>,
    pub recenter_seeds: Vec<u64>,
    pub greatsphere_normal: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub config: Option<WitnessConfig>,
    pub levels: Vec<LevelTrace>,
}

pub fn construct_witness(poly: &SphericalPolytope) -> Result<(IlluminationWitness, ConstructionTrace)> {
    construct_witness_with(poly, &WitnessConfig::default())
}

pub fn construct_witness_with(
    poly: &SphericalPolytope,
    config: &WitnessConfig,
) -> Result<(IlluminationWitness, ConstructionTrace)> {
    if poly.dim() < 2 {
        return Err(Error::UnsupportedDimension { dim: poly.dim(), reason: "witnesses need d >= 2".into() });
    }
    let mut trace = ConstructionTrace { config: Some(*config), levels: Vec::new() };
    let w = build(poly, config, &mut trace)?;
    Ok((w, trace))
}

fn accept(poly: &SphericalPolytope, w: &IlluminationWitness) -> bool {
    verify_witness(poly, w, VerifyOptions::default()).is_ok_and(|c| !c.fragile)
}

fn build(poly: &SphericalPolytope, config: &WitnessConfig, trace: &mut ConstructionTrace) -> Result<IlluminationWitness> {
    if poly.dim() == 2 {
        return build_planar(poly, config, trace);
    }
    let n = poly.dim() + 1;
    let slot = trace.levels.len();
    trace.levels.push(LevelTrace { dim: poly.dim(), ..Default::default() });

    let (f, basis, sub) = choose_facet(poly)?;
    let n_f = poly.facet_normals()[f].coords().clone();
    let facet_vertices: Vec<usize> = poly.incidence()[f].ones().collect();
    let mut centroid = DVector::zeros(n);
    for &v in &facet_vertices {
        centroid += poly.vertices()[v].coords();
    }
    let p = centroid.normalize();

    let sub_w = build(&sub, config, trace)?;
    let lift = |x: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(n);
        for (c, b) in x.iter().zip(&basis) {
            out.axpy(*c, b, 1.0);
        }
        out
    };
    let g_h = lift(sub_w.normal.coords());
    let sub_lights: Vec<DVector<f64>> = sub_w.lights.iter().map(|s| lift(s.coords())).collect();

    {
        let level = &mut trace.levels[slot];
        level.facet = Some(f);
        level.facet_vertices = facet_vertices;
        level.relint_point = p.iter().copied().collect();
        level.sub_greatsphere_normal = g_h.iter().copied().collect();
    }

    // Split -p into its part along g_h and its part inside G.
    let pg = p.dot(&g_h);
    let p_in_g = &p - &g_h * pg;

    // The facet lights need delta small against the sub-witness margin while
    // their clearance from H grows like sin(theta) sin(delta), so the two
    // angles are searched independently.
    let mut theta = config.theta0;
    for retry in 0..=config.max_retries {
        let (s, c) = theta.sin_cos();
        let h_new = &n_f * (-c) + &g_h * s;
        // Image of g_h under the rotation carrying H onto the tilted sphere.
        let t = &g_h * c + &n_f * s;
        let x0 = UnitPoint::from_unit(&t * (-pg) - &p_in_g);
        let mut delta = config.delta0;
        for _ in 0..=config.max_retries {
            let (sd, cd) = delta.sin_cos();
            let mut lights = vec![x0.clone()];
            for si in &sub_lights {
                lights.push(UnitPoint::from_unit(si * cd + &t * sd));
            }
            let w = IlluminationWitness { normal: UnitPoint::from_unit(h_new.clone()), lights };
            if accept(poly, &w) {
                let level = &mut trace.levels[slot];
                level.theta = theta;
                level.delta = delta;
                level.retries = retry;
                level.greatsphere_normal = w.normal.to_vec();
                return Ok(w);
            }
            delta /= 2.0;
            if s * delta.sin() < poly.tol().fragile_threshold() {
                break;
            }
        }
        theta /= 2.0;
    }
    let level = &mut trace.levels[slot];
    level.theta = theta;
    level.delta = 0.0;
    level.retries = config.max_retries;
    Err(Error::ConstructionFailed { retries: config.max_retries, trace: Box::new(trace.clone()) })
}

/// Picks the facet whose own hemisphere margin (inside its greatsphere) is
/// largest. Returns the facet, an orthonormal basis of its greatsphere's
/// hyperplane and the facet as a polytope of one dimension less.
fn choose_facet(poly: &SphericalPolytope) -> Result<(usize, Vec<DVector<f64>>, SphericalPolytope)> {
    let n = poly.dim() + 1;
    let mut best: Option<(usize, Vec<DVector<f64>>, SphericalPolytope)> = None;
    let mut last_err = None;
    for (f, normal) in poly.facet_normals().iter().enumerate() {
        let basis = linalg::complement_basis(std::slice::from_ref(normal.coords()), n);
        let pts: Vec<UnitPoint> = poly.incidence()[f]
            .ones()
            .map(|v| {
                let x = poly.vertices()[v].coords();
                UnitPoint::from_unit(DVector::from_fn(n - 1, |k, _| basis[k].dot(x)))
            })
            .collect();
        match SphericalPolytope::from_vertices(poly.dim() - 1, &pts, poly.tol()) {
            Ok(sub) => {
                if best.as_ref().is_none_or(|(_, _, b)| sub.hemisphere_margin() > b.hemisphere_margin()) {
                    best = Some((f, basis, sub));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::DegenerateDimension("no usable facet".into())))
}

fn build_planar(poly: &SphericalPolytope, config: &WitnessConfig, trace: &mut ConstructionTrace) -> Result<IlluminationWitness> {
    let mut level = LevelTrace { dim: 2, ..Default::default() };
    let mut center = poly.center().coords().clone();
    let mut last_err = Error::ParallelogramError;
    for attempt in 0..=config.max_recenter {
        if attempt > 0 {
            let seed = config.seed.wrapping_add(attempt as u64);
            level.recenter_seeds.push(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut interior = DVector::zeros(3);
            for v in poly.vertices() {
                interior += v.coords() * rng.random_range(0.05..1.0);
            }
            let interior = interior.normalize();
            center = (poly.center().coords() + (interior - poly.center().coords()) * config.recenter_step).normalize();
        }
        match planar_lights(poly, &center) {
            Ok(w) if accept(poly, &w) => {
                level.center = center.iter().copied().collect();
                level.greatsphere_normal = w.normal.to_vec();
                level.retries = attempt;
                trace.levels.push(level);
                return Ok(w);
            }
            Ok(_) => last_err = Error::VerificationFailed("planar directions failed spherical verification".into()),
            Err(e @ Error::ParallelogramError) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    level.retries = config.max_recenter;
    trace.levels.push(level);
    match last_err {
        Error::ParallelogramError => Err(Error::ParallelogramError),
        _ => Err(Error::ConstructionFailed { retries: config.max_recenter, trace: Box::new(trace.clone()) }),
    }
}

/// Lights on `c^⊥` from the three planar directions of the gnomonic image
/// centered at `c`. A planar direction `u` corresponds to the light `-u`.
fn planar_lights(poly: &SphericalPolytope, c: &DVector<f64>) -> Result<IlluminationWitness> {
    let frame = linalg::tangent_frame(c);
    let pts: Vec<Vector2<f64>> = poly
        .vertices()
        .iter()
        .map(|v| {
            let s = v.dot_vec(c);
            Vector2::new(v.dot_vec(&frame[0]) / s, v.dot_vec(&frame[1]) / s)
        })
        .collect();
    let order = planar::order_ccw(&pts);
    let polygon: Vec<Vector2<f64>> = order.iter().map(|&i| pts[i]).collect();
    let levi = planar::levi_directions(&polygon, poly.tol())?;
    let lights = levi
        .directions
        .iter()
        .map(|u| UnitPoint::from_unit(-(&frame[0] * u.x + &frame[1] * u.y)))
        .collect();
    Ok(IlluminationWitness { normal: UnitPoint::from_unit(c.clone()), lights })
}
