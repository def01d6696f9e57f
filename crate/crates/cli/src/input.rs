//! Input files: `spolytope.json`, graph JSON, circle JSON and OFF meshes,
//! told apart by content.

use std::fs;
use std::path::Path;

use anyhow::Context;
use illumination_core::io::{self, CirclesFile, LoadedSPolytope};
use illumination_core::koebe::PolyhedralGraph;
use illumination_core::{EuclideanPolytope, SphericalPolytope, Tolerances};
use serde_json::Value;

use crate::output::invalid;

pub enum Input {
    Spherical(LoadedSPolytope),
    Euclidean(EuclideanPolytope),
    Graph(PolyhedralGraph),
    Circles(CirclesFile),
}

impl Input {
    fn kind(&self) -> &'static str {
        match self {
            Input::Spherical(_) => "a spherical polytope",
            Input::Euclidean(_) => "an OFF polytope",
            Input::Graph(_) => "a graph",
            Input::Circles(_) => "a circle file",
        }
    }
}

pub fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load(path: &Path, tol: Option<&Tolerances>) -> anyhow::Result<Input> {
    let text = read(path)?;
    let ctx = || format!("parsing {}", path.display());
    if !text.trim_start().starts_with('{') {
        let mesh = io::parse_off(&text).with_context(ctx)?;
        let p = io::euclidean_from_off(&mesh, &tol.copied().unwrap_or_default()).with_context(ctx)?;
        return Ok(Input::Euclidean(p));
    }
    let value: Value = serde_json::from_str(&text).with_context(ctx)?;
    if value.get("vertices").is_some() {
        Ok(Input::Spherical(io::parse_spolytope(&text, tol).with_context(ctx)?))
    } else if value.get("face_circles").is_some() {
        Ok(Input::Circles(serde_json::from_value(value).with_context(ctx)?))
    } else if let Some(faces) = value.get("faces") {
        // Parsed apart from validation so graph defects are reported as such.
        let faces: Vec<Vec<usize>> = serde_json::from_value(faces.clone()).with_context(ctx)?;
        Ok(Input::Graph(PolyhedralGraph::from_faces(faces).with_context(ctx)?))
    } else {
        Err(invalid(format!("{}: expected a spolytope, graph or circle JSON object", path.display())))
    }
}

pub fn spherical(path: &Path, tol: Option<&Tolerances>) -> anyhow::Result<SphericalPolytope> {
    match load(path, tol)? {
        Input::Spherical(s) => Ok(s.polytope),
        other => Err(invalid(format!("{}: expected a spherical polytope, found {}", path.display(), other.kind()))),
    }
}

pub fn euclidean(path: &Path, tol: Option<&Tolerances>) -> anyhow::Result<EuclideanPolytope> {
    match load(path, tol)? {
        Input::Euclidean(p) => Ok(p),
        other => Err(invalid(format!("{}: expected an OFF polytope, found {}", path.display(), other.kind()))),
    }
}
