//! The subcommands.

use std::path::Path;

use anyhow::Context;
use illumination_core::bridge::{self, euclidean_illuminates, euclidean_verify, CombinatorialIllumination};
use illumination_core::cover::exhaustive_upper_bound;
use illumination_core::io::{self, CirclesFile, WitnessFile};
use illumination_core::koebe::{self, KoebeIllumination, PolyhedralGraph};
use illumination_core::witness::construct_witness_with;
use illumination_core::{
    verify_witness, DirectionSet, Error, EuclideanCertificate, EuclideanPolytope, IlluminationWitness,
    SphericalPolytope, VerifyOptions, WitnessConfig,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{self, Input};
use crate::output::{invalid, json_artifact, Artifact, Report};
use crate::render;
use crate::{Command, RunConfig};

pub fn run(cfg: &RunConfig) -> anyhow::Result<Report> {
    match &cfg.command {
        Command::Faces { input } => faces(cfg, input),
        Command::Polar { input } => polar(cfg, input),
        Command::Witness { input } => witness(cfg, input),
        Command::Verify { input, witness } => verify(cfg, input, witness),
        Command::Bridge { input } => bridge(cfg, input),
        Command::Koebe { input } => koebe(cfg, input),
        Command::Render { input, witness } => render_cmd(cfg, input, witness.as_deref()),
    }
}

fn passed(artifacts: Vec<Artifact>, summary: String) -> Report {
    Report { artifacts, summary, passed: true }
}

fn off_comment(cfg: &RunConfig, what: &str) -> String {
    format!("{what}\nseed {}", cfg.seed)
}

fn witness_config(cfg: &RunConfig) -> WitnessConfig {
    WitnessConfig { seed: cfg.seed, ..WitnessConfig::default() }
}

fn faces(cfg: &RunConfig, path: &Path) -> anyhow::Result<Report> {
    let (kind, lattice, tol) = match input::load(path, cfg.tol.as_ref())? {
        Input::Spherical(s) => ("spherical", s.polytope.face_lattice().clone(), *s.polytope.tol()),
        Input::Euclidean(p) => ("euclidean", p.face_lattice().clone(), *p.tol()),
        Input::Graph(g) => ("graph", g.face_lattice(), cfg.tolerances()),
        Input::Circles(_) => return Err(invalid("faces needs a polytope or graph")),
    };
    let f_vector = lattice.f_vector();
    let body = json!({ "kind": kind, "f_vector": f_vector, "lattice": lattice, "tolerances": tol });
    let summary = format!("f-vector {f_vector:?}");
    Ok(passed(vec![Artifact::new("faces.json", json_artifact(cfg, "faces", &body)?)], summary))
}

fn polar(cfg: &RunConfig, path: &Path) -> anyhow::Result<Report> {
    let p = input::spherical(path, cfg.tol.as_ref())?;
    let mut value: Value = serde_json::from_str(&io::spolytope_json(p.polar(), true))?;
    value["seed"] = cfg.seed.into();
    let summary = format!("polar: {} vertices in S^{}", p.polar().vertices().len(), p.dim());
    Ok(passed(vec![Artifact::new("polar.json", io::to_json(&value))], summary))
}

#[derive(Serialize)]
struct GridBound {
    grid: usize,
    /// Smallest cover found on the grid, or `None` beyond the exact range.
    lights: Option<usize>,
    greedy: Option<usize>,
}

fn grid_bound(p: &SphericalPolytope, grid: usize) -> anyhow::Result<GridBound> {
    match exhaustive_upper_bound(p, grid) {
        Ok((size, _)) => Ok(GridBound { grid, lights: Some(size), greedy: None }),
        Err(Error::GridTooCoarse { greedy, .. }) => Ok(GridBound { grid, lights: None, greedy }),
        Err(e) => Err(e.into()),
    }
}

fn witness(cfg: &RunConfig, path: &Path) -> anyhow::Result<Report> {
    let p = input::spherical(path, cfg.tol.as_ref())?;
    let (w, trace) = construct_witness_with(&p, &witness_config(cfg))?;
    let options = VerifyOptions { strict: cfg.strict, lenient: false };
    let cert = verify_witness(&p, &w, options).context("verifying the constructed witness")?;
    let grid = cfg.grid.map(|n| grid_bound(&p, n)).transpose()?;
    let flat = witness_body(&w, json!({ "pass": true, "certificate": cert, "grid_bound": grid }))?;
    let mut artifacts = vec![
        Artifact::new("certificate.json", json_artifact(cfg, "witness", &flat)?),
        Artifact::new("trace.json", json_artifact(cfg, "witness", &trace)?),
    ];
    if cfg.render && p.dim() == 2 {
        artifacts.push(Artifact::new("witness.svg", render::spherical_svg(&p, Some(&w), cfg.seed)?));
    }
    let mut summary = format!("witness: {} lights, min margin {:e}", w.lights.len(), cert.min_margin);
    if cert.fragile {
        summary.push_str(" (fragile)");
    }
    Ok(passed(artifacts, summary))
}

/// The witness fields at top level, so the file can be passed to `verify`.
fn witness_body(w: &IlluminationWitness, extra: Value) -> anyhow::Result<Value> {
    let mut body = serde_json::to_value(WitnessFile::from_witness(w))?;
    if let (Value::Object(a), Value::Object(b)) = (&mut body, extra) {
        a.extend(b);
    }
    Ok(body)
}

fn verify(cfg: &RunConfig, path: &Path, witness_path: &Path) -> anyhow::Result<Report> {
    let text = input::read(witness_path)?;
    let ctx = || format!("parsing {}", witness_path.display());
    match input::load(path, cfg.tol.as_ref())? {
        Input::Spherical(s) => {
            let p = s.polytope;
            let file: WitnessFile = serde_json::from_str(&text).with_context(ctx)?;
            let w = file.to_witness(p.tol()).with_context(ctx)?;
            let cert = verify_witness(&p, &w, VerifyOptions { strict: cfg.strict, lenient: false })?;
            let summary = format!("verified: {} lights, min margin {:e}", w.lights.len(), cert.min_margin);
            let body = witness_body(&w, json!({ "pass": true, "certificate": cert }))?;
            Ok(passed(vec![Artifact::new("certificate.json", json_artifact(cfg, "verify", &body)?)], summary))
        }
        Input::Euclidean(p) => {
            let file: DirectionsFile = serde_json::from_str(&text).with_context(ctx)?;
            let dirs = DirectionSet::new(file.directions.iter().map(|d| nalgebra::DVector::from_column_slice(d)).collect(), p.tol())?;
            let cert = euclidean_certificate(cfg, &p, &dirs)?;
            let summary = format!("verified: {} directions, min margin {:e}", dirs.len(), cert.certificate.min_margin);
            Ok(passed(vec![Artifact::new("certificate.json", json_artifact(cfg, "verify", &cert)?)], summary))
        }
        _ => Err(invalid("verify needs a spherical polytope or an OFF polytope")),
    }
}

#[derive(serde::Deserialize)]
struct DirectionsFile {
    directions: Vec<Vec<f64>>,
}

/// A Euclidean certificate, with every proper face checked under `--strict`.
#[derive(Serialize)]
struct CheckedDirections {
    pass: bool,
    certificate: EuclideanCertificate,
    faces_checked: usize,
}

fn euclidean_certificate(cfg: &RunConfig, p: &EuclideanPolytope, dirs: &DirectionSet) -> anyhow::Result<CheckedDirections> {
    let certificate = euclidean_verify(p, dirs)?;
    let mut faces_checked = 0;
    if cfg.strict {
        for lf in p.face_lattice().faces() {
            let mut best = f64::NEG_INFINITY;
            for v in dirs.vectors() {
                best = best.max(euclidean_illuminates(p, &v, &lf.vertices)?.1);
            }
            if best <= p.tol().pred {
                return Err(Error::UncoveredFace { face: lf.vertices.clone(), best_margin: best }.into());
            }
            faces_checked += 1;
        }
    }
    Ok(CheckedDirections { pass: true, certificate, faces_checked })
}

fn directions_artifact(cfg: &RunConfig, command: &str, dirs: &DirectionSet) -> anyhow::Result<Artifact> {
    Ok(Artifact::new("directions.json", json_artifact(cfg, command, dirs)?))
}

fn bridge(cfg: &RunConfig, path: &Path) -> anyhow::Result<Report> {
    let p = input::euclidean(path, cfg.tol.as_ref())?;
    let out: CombinatorialIllumination = bridge::combinatorial_illuminator_with(&p, &witness_config(cfg))?;
    let checked = euclidean_certificate(cfg, &out.polytope, &out.directions)?;
    let body = json!({
        "pass": true,
        "dim": p.dim(),
        "certificate": checked.certificate,
        "faces_checked": checked.faces_checked,
        "vertex_map": out.vertex_map,
        "spherical_certificate": out.spherical,
        "trace": out.trace,
        "tolerances": p.tol(),
    });
    let mesh = io::euclidean_to_off(&out.polytope);
    let mut artifacts = vec![
        Artifact::new("certificate.json", json_artifact(cfg, "bridge", &body)?),
        directions_artifact(cfg, "bridge", &out.directions)?,
        Artifact::new("polytope.off", io::write_off(&mesh, Some(&off_comment(cfg, "illuminated copy")))),
    ];
    if cfg.render && p.dim() == 2 {
        artifacts.push(Artifact::new("polygon.svg", render::polygon_svg(&out.polytope, Some(&out.directions), cfg.seed)?));
    }
    let summary = format!(
        "bridge: {} directions light a copy of the {}-polytope, min margin {:e}",
        out.directions.len(),
        p.dim(),
        checked.certificate.min_margin
    );
    Ok(passed(artifacts, summary))
}

fn koebe(cfg: &RunConfig, path: &Path) -> anyhow::Result<Report> {
    let tol = cfg.tolerances();
    let out: KoebeIllumination = match input::load(path, cfg.tol.as_ref())? {
        Input::Graph(g) => koebe::koebe_pipeline(&g, cfg.seed, &tol)?,
        Input::Euclidean(p) if p.dim() == 3 => koebe::koebe_from_polytope(&p, cfg.seed)?,
        Input::Euclidean(p) => {
            return Err(Error::UnsupportedDimension { dim: p.dim(), reason: "Koebe realizations need d = 3".into() }.into())
        }
        _ => return Err(invalid("koebe needs a graph JSON or an OFF polytope")),
    };
    let checked = euclidean_certificate(cfg, &out.polytope, &out.directions.directions)?;
    let body = json!({
        "pass": true,
        "certificate": checked.certificate,
        "faces_checked": checked.faces_checked,
        "epsilon": out.directions.epsilon,
        "face": out.face,
        "point": out.point,
        "offset_branch": out.offset_branch,
        "perturbation_seeds": out.perturbation_seeds,
        "mobius": out.mobius,
        "residuals": out.realization.residuals,
        "midscribe_residuals": out.midscribe_residuals,
        "solver": out.realization.solver,
        "lattice_isomorphism": out.lattice_isomorphism,
        "tolerances": tol,
    });
    let mesh = io::realization_to_off(&out.realization);
    let circles = CirclesFile::new(&out.realization);
    let mut artifacts = vec![
        Artifact::new("certificate.json", json_artifact(cfg, "koebe", &body)?),
        directions_artifact(cfg, "koebe", &out.directions.directions)?,
        Artifact::new("polytope.off", io::write_off(&mesh, Some(&off_comment(cfg, "normalized Koebe realization")))),
        Artifact::new("circles.json", json_artifact(cfg, "koebe", &circles)?),
    ];
    if cfg.render {
        artifacts.push(Artifact::new("packing.svg", render::circles_svg(&circles, cfg.seed)));
    }
    let summary = format!(
        "koebe: residual {:e}, 4 directions, min margin {:e}",
        out.realization.residuals.max(),
        checked.certificate.min_margin
    );
    Ok(passed(artifacts, summary))
}

fn render_cmd(cfg: &RunConfig, path: &Path, overlay: Option<&Path>) -> anyhow::Result<Report> {
    let overlay_text = overlay.map(input::read).transpose()?;
    match input::load(path, cfg.tol.as_ref())? {
        Input::Spherical(s) if s.polytope.dim() == 2 => {
            let p = s.polytope;
            let w = match &overlay_text {
                Some(t) => Some(serde_json::from_str::<WitnessFile>(t)?.to_witness(p.tol())?),
                None => None,
            };
            let svg = render::spherical_svg(&p, w.as_ref(), cfg.seed)?;
            Ok(passed(vec![Artifact::new("render.svg", svg)], "rendered S^2 diagram".into()))
        }
        Input::Spherical(s) if s.polytope.dim() == 3 => {
            let p = s.polytope;
            let projected = bridge::project(&p, p.center())?;
            let mesh = io::euclidean_to_off(&projected);
            let off = io::write_off(&mesh, Some(&off_comment(cfg, "gnomonic projection")));
            Ok(passed(vec![Artifact::new("render.off", off)], "wrote gnomonic OFF mesh".into()))
        }
        Input::Spherical(s) => Err(Error::UnsupportedDimension {
            dim: s.polytope.dim(),
            reason: "renders exist for S^2 and S^3".into(),
        }
        .into()),
        Input::Circles(c) => Ok(passed(vec![Artifact::new("render.svg", render::circles_svg(&c, cfg.seed))], "rendered circle pattern".into())),
        Input::Euclidean(p) if p.dim() == 2 => {
            let dirs = match &overlay_text {
                Some(t) => {
                    let f: DirectionsFile = serde_json::from_str(t)?;
                    Some(DirectionSet::new(f.directions.iter().map(|d| nalgebra::DVector::from_column_slice(d)).collect(), p.tol())?)
                }
                None => None,
            };
            let svg = render::polygon_svg(&p, dirs.as_ref(), cfg.seed)?;
            Ok(passed(vec![Artifact::new("render.svg", svg)], "rendered polygon and normal fan".into()))
        }
        Input::Euclidean(p) if p.dim() == 3 => {
            let g = PolyhedralGraph::from_polytope(&p)?;
            let k = koebe::midscribe(&g, &cfg.tolerances())?;
            let svg = render::circles_svg(&CirclesFile::new(&k), cfg.seed);
            Ok(passed(vec![Artifact::new("render.svg", svg)], "rendered midscribed circle pattern".into()))
        }
        Input::Graph(g) => {
            let k = koebe::midscribe(&g, &cfg.tolerances())?;
            let svg = render::circles_svg(&CirclesFile::new(&k), cfg.seed);
            Ok(passed(vec![Artifact::new("render.svg", svg)], "rendered midscribed circle pattern".into()))
        }
        Input::Euclidean(p) => Err(Error::UnsupportedDimension { dim: p.dim(), reason: "renders exist for d = 2 and 3".into() }.into()),
    }
}
