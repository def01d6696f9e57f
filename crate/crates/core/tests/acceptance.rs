//! Acceptance gate: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::time::{Duration, Instant};

use illumination_core::bridge::{combinatorial_illuminator, euclidean_illuminates, euclidean_verify};
use illumination_core::cover::{exhaustive_upper_bound, k_subsets};
use illumination_core::illumination::{
    illuminates_face_dual, illuminates_point_primal, separation_cover, unrestricted_antipodal_light_check,
};
use illumination_core::koebe::{self, koebe_from_polytope, PolyhedralGraph, TANGENCY_TOL};
use illumination_core::{
    construct_witness, fixtures, verify_witness, DirectionSet, Error, EuclideanPolytope, IlluminationWitness,
    SphericalPolytope, Tolerances, UnitPoint, VerifyOptions,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Vertex sets of `P` and the recomputed `P**` agree within this distance.
const POLAR_TOL: f64 = 1e-8;
/// Primal and dual are compared only when the dual margin exceeds this.
const DUAL_MARGIN_FLOOR: f64 = 1e-8;
const TRIPLES_PER_DIM: usize = 5_000;
const POLAR_BUDGET: Duration = Duration::from_secs(60);
const PREDICATE_BUDGET: Duration = Duration::from_secs(120);
const WITNESS_BUDGET_S3: Duration = Duration::from_secs(10);
const WITNESS_BUDGET_S4: Duration = Duration::from_secs(60);
const GRID: usize = 2000;
const CUBE_DIRECTIONS: usize = 10_000;
const BRIDGE_BUDGET: Duration = Duration::from_secs(30);
const KOEBE_BUDGET: Duration = Duration::from_secs(120);
const KOEBE_MAX_FACES: usize = 64;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_polytope(d: usize, n: usize, rng: &mut ChaCha8Rng) -> SphericalPolytope {
    fixtures::random_polytope(d, n, rng).expect("random polytope")
}

/// `true` when the two point sets agree up to order within `tol`.
fn same_points(a: &[UnitPoint], b: &[UnitPoint], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| (x.coords() - y.coords()).amax() <= tol))
}

/// Indices of the points of `pts` orthogonal to every point of `of`.
fn orthogonal(pts: &[UnitPoint], of: &[&UnitPoint], tol: f64) -> Vec<usize> {
    (0..pts.len()).filter(|&i| of.iter().all(|x| pts[i].dot(x).abs() <= tol)).collect()
}

fn c1_duality() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut faces = 0;
    for d in 2..=4 {
        for i in 0..50 {
            let n = r.random_range(8..=40);
            let p = random_polytope(d, n, &mut r);
            let tol = *p.tol();
            // Recompute the polar of the polar from coordinates alone.
            let polar = SphericalPolytope::from_vertices(d, p.polar().vertices(), &tol).map_err(|e| format!("S^{d} #{i}: {e}"))?;
            let back = polar.polar();
            let again = SphericalPolytope::from_vertices(d, back.vertices(), &tol).map_err(|e| format!("S^{d} #{i}: {e}"))?;
            ensure(same_points(p.vertices(), again.vertices(), POLAR_TOL), || format!("S^{d} #{i}: P** != P"))?;

            let star = p.polar().vertices();
            for f in p.faces() {
                let fv: Vec<&UnitPoint> = f.vertices.iter().map(|&v| &p.vertices()[v]).collect();
                let hat = orthogonal(star, &fv, 10.0 * tol.pred);
                let conj = p.conjugate_face(&f).map_err(|e| e.to_string())?;
                ensure(hat == conj.vertices, || format!("S^{d} #{i}: conjugate of {:?} disagrees", f.vertices))?;
                let hv: Vec<&UnitPoint> = hat.iter().map(|&x| &star[x]).collect();
                let hathat = orthogonal(p.vertices(), &hv, 10.0 * tol.pred);
                ensure(hathat == f.vertices, || format!("S^{d} #{i}: double conjugate of {:?} is {hathat:?}", f.vertices))?;
                let back = p.polar().conjugate_face(&conj).map_err(|e| e.to_string())?;
                ensure(back.vertices == f.vertices, || format!("S^{d} #{i}: polar conjugate of {:?} disagrees", f.vertices))?;
                faces += 1;
            }
        }
    }
    let t = start.elapsed();
    ensure(t < POLAR_BUDGET, || format!("took {t:.1?}"))?;
    Ok(format!("150 polytopes, {faces} faces, {t:.1?}"))
}

fn c2_primal_dual() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let (mut compared, mut skipped) = (0usize, 0usize);
    for d in 2..=3 {
        let mut done = 0;
        while done < TRIPLES_PER_DIM {
            let p = random_polytope(d, r.random_range(d + 3..=d + 12), &mut r);
            for _ in 0..100 {
                let light = UnitPoint::normalize(gaussian(d + 1, &mut r), p.tol()).unwrap();
                if p.contains(&light) {
                    continue;
                }
                let faces = p.face_lattice().faces();
                let f = &faces[r.random_range(0..faces.len())];
                let mut q = DVector::zeros(d + 1);
                for &v in &f.vertices {
                    q += p.vertices()[v].coords() * r.random_range(0.1..1.0);
                }
                let q = UnitPoint::normalize(q, p.tol()).unwrap();
                done += 1;
                let face = p.minimal_face_containing(&q).map_err(|e| format!("boundary point: {e}"))?;
                let (dual, margin) = illuminates_face_dual(&p, &light, &face).map_err(|e| e.to_string())?;
                if margin.abs() <= DUAL_MARGIN_FLOOR {
                    skipped += 1;
                    continue;
                }
                let primal = illuminates_point_primal(&p, &light, &q).map_err(|e| e.to_string())?;
                ensure(primal == dual, || format!("S^{d}: primal {primal} vs dual {dual} (margin {margin:e})"))?;
                compared += 1;
            }
        }
    }
    let t = start.elapsed();
    ensure(t < PREDICATE_BUDGET, || format!("took {t:.1?}"))?;
    Ok(format!("{compared} agreements, {skipped} near-tangent skipped, 0 disagreements, {t:.1?}"))
}

/// Every `d`-subset of the lights must fail.
fn subsets_fail(p: &SphericalPolytope, w: &IlluminationWitness) -> bool {
    k_subsets(w.lights.len(), p.dim()).iter().all(|s| {
        let sub = IlluminationWitness { normal: w.normal.clone(), lights: s.iter().map(|&i| w.lights[i].clone()).collect() };
        verify_witness(p, &sub, VerifyOptions::default()).is_err()
    })
}

fn c3_witnesses() -> Outcome {
    let mut r = rng(3);
    let mut slowest = [Duration::ZERO; 2];
    for (d, count, budget) in [(3, 20, WITNESS_BUDGET_S3), (4, 10, WITNESS_BUDGET_S4)] {
        for i in 0..count {
            let p = random_polytope(d, r.random_range(d + 2..=d + 14), &mut r);
            let start = Instant::now();
            let (w, _) = construct_witness(&p).map_err(|e| format!("S^{d} #{i}: {e}"))?;
            verify_witness(&p, &w, VerifyOptions::default()).map_err(|e| format!("S^{d} #{i}: {e}"))?;
            let t = start.elapsed();
            ensure(w.lights.len() == d + 1, || format!("S^{d} #{i}: {} lights", w.lights.len()))?;
            ensure(t < budget, || format!("S^{d} #{i}: took {t:.1?}"))?;
            ensure(subsets_fail(&p, &w), || format!("S^{d} #{i}: a {d}-subset of the lights suffices"))?;
            slowest[d - 3] = slowest[d - 3].max(t);
        }
    }
    Ok(format!("20 in S^3 (slowest {:.1?}), 10 in S^4 (slowest {:.1?})", slowest[0], slowest[1]))
}

fn c4_polygons() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut sizes = Vec::new();
    for i in 0..50 {
        let p = random_polytope(2, r.random_range(3..=12), &mut r);
        let (w, _) = construct_witness(&p).map_err(|e| format!("#{i}: {e}"))?;
        ensure(w.lights.len() == 3, || format!("#{i}: witness has {} lights", w.lights.len()))?;
        verify_witness(&p, &w, VerifyOptions::default()).map_err(|e| format!("#{i}: {e}"))?;
        match exhaustive_upper_bound(&p, GRID) {
            Ok((size, _)) => {
                ensure(size >= 3, || format!("#{i}: grid cover with {size} lights"))?;
                sizes.push(size);
            }
            Err(Error::GridTooCoarse { .. }) => {}
            Err(e) => return Err(format!("#{i}: {e}")),
        }
    }
    Ok(format!("50 polygons, grid covers of sizes {:?}..{:?}, {:.1?}", sizes.iter().min(), sizes.iter().max(), start.elapsed()))
}

fn c5_cube() -> Outcome {
    let cube = fixtures::cube3();
    let mut r = rng(5);
    let mut most = 0;
    for _ in 0..CUBE_DIRECTIONS {
        let v = gaussian(3, &mut r).normalize();
        let mut lit = 0;
        for k in 0..cube.vertices().len() {
            if euclidean_illuminates(&cube, &v, &[k]).map_err(|e| e.to_string())?.0 {
                lit += 1;
            }
        }
        ensure(lit <= 1, || format!("direction {v:?} lights {lit} vertices"))?;
        most = most.max(lit);
    }
    let tol = Tolerances::default();
    let canonical: Vec<DVector<f64>> = cube.vertices().iter().map(|v| -v.normalize()).collect();
    let all = DirectionSet::new(canonical.clone(), &tol).unwrap();
    euclidean_verify(&cube, &all).map_err(|e| format!("canonical 8: {e}"))?;
    for s in k_subsets(8, 7) {
        let sub = DirectionSet::new(s.iter().map(|&i| canonical[i].clone()).collect(), &tol).unwrap();
        ensure(euclidean_verify(&cube, &sub).is_err(), || format!("7-subset {s:?} verifies"))?;
    }
    Ok(format!("{CUBE_DIRECTIONS} directions light at most {most} vertex, 8 verify, all 8 seven-subsets fail"))
}

fn random_3polytope(r: &mut ChaCha8Rng, max_vertices: usize) -> EuclideanPolytope {
    let n = r.random_range(8..=max_vertices);
    fixtures::random_euclidean(3, n, r).expect("random 3-polytope")
}

fn c6_bridge() -> Outcome {
    let mut r = rng(6);
    let mut inputs = vec![("cube".to_string(), fixtures::cube3()), ("dodecahedron".to_string(), fixtures::dodecahedron())];
    for i in 0..10 {
        inputs.push((format!("random #{i}"), random_3polytope(&mut r, 30)));
    }
    let mut slowest = Duration::ZERO;
    for (name, p) in &inputs {
        let start = Instant::now();
        let out = combinatorial_illuminator(p).map_err(|e| format!("{name}: {e}"))?;
        let t = start.elapsed();
        ensure(out.directions.len() == 4, || format!("{name}: {} directions", out.directions.len()))?;
        ensure(p.face_lattice().isomorphism(out.polytope.face_lattice()).is_some(), || format!("{name}: not isomorphic"))?;
        euclidean_verify(&out.polytope, &out.directions).map_err(|e| format!("{name}: {e}"))?;
        ensure(t < BRIDGE_BUDGET, || format!("{name}: took {t:.1?}"))?;
        slowest = slowest.max(t);
    }
    Ok(format!("{} polytopes lit by 4 directions, slowest {slowest:.1?}", inputs.len()))
}

fn c7_koebe() -> Outcome {
    let tol = Tolerances::default();
    let cube = fixtures::cube3();
    let g = PolyhedralGraph::from_polytope(&cube).map_err(|e| e.to_string())?;
    let raw = koebe::midscribe(&g, &tol).map_err(|e| e.to_string())?;
    let j = koebe::choose_face(&g);
    match koebe::four_directions(&raw, j, &tol) {
        Err(Error::ParallelogramFace { .. }) => {}
        other => return Err(format!("un-normalized cube: expected ParallelogramFace, got {:?}", other.map(|d| d.epsilon))),
    }

    let mut r = rng(7);
    let mut inputs = vec![
        ("tetrahedron".to_string(), fixtures::tetrahedron()),
        ("cube".to_string(), cube),
        ("dodecahedron".to_string(), fixtures::dodecahedron()),
    ];
    while inputs.len() < 13 {
        let p = random_3polytope(&mut r, 34);
        if p.face_lattice().n_facets() <= KOEBE_MAX_FACES {
            inputs.push((format!("random #{}", inputs.len() - 3), p));
        }
    }
    let mut slowest = Duration::ZERO;
    let mut worst = 0.0f64;
    for (i, (name, p)) in inputs.iter().enumerate() {
        let start = Instant::now();
        let out = koebe_from_polytope(p, i as u64).map_err(|e| format!("{name}: {e}"))?;
        let t = start.elapsed();
        let res = out.realization.residuals.edge_tangency;
        ensure(res < TANGENCY_TOL, || format!("{name}: edge tangency residual {res:e}"))?;
        ensure(p.face_lattice().isomorphism(out.polytope.face_lattice()).is_some(), || format!("{name}: not isomorphic"))?;
        ensure(out.directions.directions.len() == 4, || format!("{name}: {} directions", out.directions.directions.len()))?;
        euclidean_verify(&out.polytope, &out.directions.directions).map_err(|e| format!("{name}: {e}"))?;
        ensure(t < KOEBE_BUDGET, || format!("{name}: took {t:.1?}"))?;
        if name == "cube" {
            koebe::four_directions(&out.realization, out.face, &tol).map_err(|e| format!("normalized cube: {e}"))?;
        }
        slowest = slowest.max(t);
        worst = worst.max(res);
    }
    Ok(format!("13 graphs, worst edge residual {worst:.1e}, slowest {slowest:.1?}; raw cube face is a parallelogram"))
}

fn c8_separation() -> Outcome {
    let mut r = rng(8);
    let mut inputs = vec![fixtures::simplex(3)];
    for _ in 0..10 {
        let n = r.random_range(6..=16);
        inputs.push(random_polytope(3, n, &mut r));
    }
    for (i, p) in inputs.iter().enumerate() {
        let tol = p.tol();
        let cover = separation_cover(p).map_err(|e| format!("#{i}: {e}"))?;
        ensure(p.is_interior(&cover.x), || format!("#{i}: x is not interior"))?;
        ensure(cover.hemispheres.len() == p.dim() + 1, || format!("#{i}: {} hemispheres", cover.hemispheres.len()))?;
        for h in &cover.hemispheres {
            let v = h.center.dot(&cover.x);
            ensure(v.abs() <= tol.pred, || format!("#{i}: x is {v:e} off a hemisphere boundary"))?;
        }
        for f in p.face_lattice().faces() {
            let inside = cover.hemispheres.iter().any(|h| f.vertices.iter().all(|&v| h.center.dot(&p.vertices()[v]) > tol.pred));
            ensure(inside, || format!("#{i}: face {:?} is in no hemisphere", f.vertices))?;
        }
    }
    Ok("SIM_3 and 10 random polytopes covered".into())
}

fn c9_antipodal() -> Outcome {
    let mut r = rng(9);
    let mut count = 0;
    for d in 2..=3 {
        for i in 0..20 {
            let p = random_polytope(d, r.random_range(d + 3..=d + 12), &mut r);
            let sum = p.vertices().iter().fold(DVector::zeros(d + 1), |a, v| a + v.coords());
            let x = UnitPoint::normalize(sum, p.tol()).unwrap();
            let ok = unrestricted_antipodal_light_check(&p, &x).map_err(|e| format!("S^{d} #{i}: {e}"))?;
            ensure(ok, || format!("S^{d} #{i}: -x misses a boundary point"))?;
            count += 1;
        }
    }
    Ok(format!("{count} polytopes lit by the antipode of an interior point"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 polar involution and double conjugation", c1_duality),
        ("2 primal and dual predicates agree", c2_primal_dual),
        ("3 d + 1 lights suffice, d never do", c3_witnesses),
        ("4 spherical polygons need 3 lights", c4_polygons),
        ("5 cube needs 8 directions", c5_cube),
        ("6 combinatorial illumination with d + 1 directions", c6_bridge),
        ("7 Koebe realizations with 4 directions", c7_koebe),
        ("8 hemisphere separation cover", c8_separation),
        ("9 antipodal light", c9_antipodal),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{t:.1?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{t:.1?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
