//! File formats: `spolytope.json`, OFF meshes, witnesses, direction sets and
//! Koebe circle files.
//!
//! Numbers are written in their shortest round-trip decimal form, so every
//! double survives a write/read cycle bit for bit. Canonical polytope output
//! is the exception: it rounds coordinates to [`CANONICAL_DIGITS`]
//! significant digits so that recomputed data serializes identically.

use nalgebra::{DVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclidean::EuclideanPolytope;
use crate::illumination::IlluminationWitness;
use crate::planar;
use crate::koebe::{CircleOnSphere, KoebeRealization, Residuals};
use crate::polytope::SphericalPolytope;
use crate::sphere::{Tolerances, UnitPoint};

/// Coordinates below this magnitude are written as zero in canonical output.
pub const CANONICAL_ZERO: f64 = 1e-12;
pub const CANONICAL_DIGITS: i32 = 12;

/// `{"dim": d, "vertices": [[d + 1 reals]...], "tolerances": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SPolytopeFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// A loaded spherical polytope with `| |v| - 1 |` for each input row.
#[derive(Clone, Debug)]
pub struct LoadedSPolytope {
    pub polytope: SphericalPolytope,
    pub normalization_deltas: Vec<f64>,
}

pub fn parse_spolytope(text: &str, tol_override: Option<&Tolerances>) -> Result<LoadedSPolytope> {
    let file: SPolytopeFile = serde_json::from_str(text)?;
    let tol = tol_override.copied().or(file.tolerances).unwrap_or_default();
    tol.validate()?;
    let mut deltas = Vec::with_capacity(file.vertices.len());
    let mut pts = Vec::with_capacity(file.vertices.len());
    for row in &file.vertices {
        if row.len() != file.dim + 1 {
            return Err(Error::DimensionMismatch { expected: file.dim + 1, found: row.len() });
        }
        let v = DVector::from_column_slice(row);
        deltas.push((v.norm() - 1.0).abs());
        pts.push(UnitPoint::normalize(v, &tol)?);
    }
    let polytope = SphericalPolytope::from_vertices(file.dim, &pts, &tol)?;
    Ok(LoadedSPolytope { polytope, normalization_deltas: deltas })
}

/// Serializes the polytope's vertices. With `canonical`, coordinates are
/// rounded to [`CANONICAL_DIGITS`] significant digits and rows sorted.
pub fn spolytope_json(p: &SphericalPolytope, canonical: bool) -> String {
    let mut vertices: Vec<Vec<f64>> = p.vertices().iter().map(|v| v.to_vec()).collect();
    if canonical {
        for row in &mut vertices {
            for x in row.iter_mut() {
                *x = if x.abs() < CANONICAL_ZERO { 0.0 } else { round_significant(*x, CANONICAL_DIGITS) };
            }
        }
        vertices.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    }
    let tolerances = (*p.tol() != Tolerances::default()).then_some(*p.tol());
    to_json(&SPolytopeFile { dim: p.dim(), vertices, tolerances })
}

/// Rounds to `digits` significant decimal digits; `-0` becomes `0`.
pub fn round_significant(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", (digits - 1) as usize, x);
    let y: f64 = s.parse().expect("formatted float parses");
    if y == 0.0 {
        0.0
    } else {
        y
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Vertices and faces of an OFF file (`OFF` for 3-space, `nOFF` with an
/// explicit dimension otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct OffMesh {
    pub vertices: Vec<Vec<f64>>,
    pub faces: Vec<Vec<usize>>,
}

pub fn parse_off(text: &str) -> Result<OffMesh> {
    // Tokens with their 1-based line numbers, comments stripped.
    let mut tokens = text.lines().enumerate().flat_map(|(i, line)| {
        let content = line.split('#').next().unwrap_or("");
        content.split_whitespace().map(move |t| (i + 1, t)).collect::<Vec<_>>()
    });
    let last_line = text.lines().count().max(1);
    let mut next = |what: &str| -> Result<(usize, &str)> {
        tokens.next().ok_or_else(|| Error::Parse { line: last_line, message: format!("unexpected end of file, expected {what}") })
    };
    fn num<T: std::str::FromStr>(tok: (usize, &str), what: &str) -> Result<T> {
        tok.1.parse().map_err(|_| Error::Parse { line: tok.0, message: format!("expected {what}, found {:?}", tok.1) })
    }

    let (line, header) = next("header")?;
    let dim = match header {
        "OFF" => 3,
        "nOFF" => num::<usize>(next("dimension")?, "dimension")?,
        other => return Err(Error::Parse { line, message: format!("expected OFF or nOFF header, found {other:?}") }),
    };
    if dim == 0 {
        return Err(Error::Parse { line, message: "dimension must be positive".into() });
    }
    let nv: usize = num(next("vertex count")?, "vertex count")?;
    let nf: usize = num(next("face count")?, "face count")?;
    let _edges: usize = num(next("edge count")?, "edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut row = Vec::with_capacity(dim);
        for _ in 0..dim {
            let x: f64 = num(next("coordinate")?, "coordinate")?;
            row.push(x);
        }
        vertices.push(row);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, tok) = next("face size")?;
        let k: usize = num((line, tok), "face size")?;
        let mut face = Vec::with_capacity(k);
        for _ in 0..k {
            let t = next("vertex index")?;
            let i: usize = num(t, "vertex index")?;
            if i >= nv {
                return Err(Error::Parse { line: t.0, message: format!("vertex index {i} out of range") });
            }
            face.push(i);
        }
        faces.push(face);
    }
    Ok(OffMesh { vertices, faces })
}

pub fn write_off(mesh: &OffMesh, comment: Option<&str>) -> String {
    let dim = mesh.vertices.first().map_or(3, |v| v.len());
    let mut out = String::new();
    if dim == 3 {
        out.push_str("OFF\n");
    } else {
        out.push_str(&format!("nOFF\n{dim}\n"));
    }
    if let Some(c) = comment {
        for line in c.lines() {
            out.push_str(&format!("# {line}\n"));
        }
    }
    let sides: usize = mesh.faces.iter().map(|f| f.len()).sum();
    // A polygon's single face lists each edge once; closed surfaces twice.
    let edges = if dim == 2 { sides } else { sides / 2 };
    out.push_str(&format!("{} {} {}\n", mesh.vertices.len(), mesh.faces.len(), edges));
    for v in &mesh.vertices {
        out.push_str(&v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    for f in &mesh.faces {
        out.push_str(&format!("{} {}\n", f.len(), f.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")));
    }
    out
}

/// Shortest round-trip decimal form; `-0` is written as `0`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:?}")
    }
}

pub fn euclidean_from_off(mesh: &OffMesh, tol: &Tolerances) -> Result<EuclideanPolytope> {
    EuclideanPolytope::from_rows(&mesh.vertices, tol)
}

/// OFF mesh of a polytope. Polygons get their counterclockwise boundary
/// and 3-polytopes their facets as faces; higher dimensions get none.
pub fn euclidean_to_off(p: &EuclideanPolytope) -> OffMesh {
    let faces = match p.dim() {
        2 => {
            let pts: Vec<Vector2<f64>> = p.vertices().iter().map(|v| Vector2::new(v[0], v[1])).collect();
            vec![planar::order_ccw(&pts)]
        }
        _ => p.facet_cycles().unwrap_or_default(),
    };
    OffMesh { vertices: p.vertices().iter().map(|v| v.iter().copied().collect()).collect(), faces }
}

/// Witness input: the greatsphere normal and the lights. Certificate files
/// carry the same fields and are accepted as well.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub greatsphere_normal: Vec<f64>,
    pub lights: Vec<Vec<f64>>,
}

impl WitnessFile {
    pub fn from_witness(w: &IlluminationWitness) -> Self {
        Self { greatsphere_normal: w.normal.to_vec(), lights: w.lights.iter().map(|p| p.to_vec()).collect() }
    }

    /// Normalizes the stored vectors; they must already be unit within
    /// `tol.pred`.
    pub fn to_witness(&self, tol: &Tolerances) -> Result<IlluminationWitness> {
        let unit = |v: &[f64]| -> Result<UnitPoint> {
            let x = DVector::from_column_slice(v);
            let norm = x.norm();
            if (norm - 1.0).abs() > tol.pred {
                return Err(Error::ZeroVector { norm });
            }
            UnitPoint::normalize(x, tol)
        };
        Ok(IlluminationWitness {
            normal: unit(&self.greatsphere_normal)?,
            lights: self.lights.iter().map(|l| unit(l)).collect::<Result<Vec<_>>>()?,
        })
    }
}

/// `{"face_circles": [...], "vertex_circles": [...], "residuals": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirclesFile {
    pub face_circles: Vec<CircleOnSphere>,
    pub vertex_circles: Vec<CircleOnSphere>,
    pub residuals: Residuals,
}

impl CirclesFile {
    pub fn new(k: &KoebeRealization) -> Self {
        Self { face_circles: k.face_circles.clone(), vertex_circles: k.vertex_circles.clone(), residuals: k.residuals }
    }
}

/// OFF mesh of a Koebe realization with the graph's face cycles.
pub fn realization_to_off(k: &KoebeRealization) -> OffMesh {
    OffMesh {
        vertices: k.vertices.iter().map(|v| vec![v.x, v.y, v.z]).collect(),
        faces: k.graph.faces().to_vec(),
    }
}
