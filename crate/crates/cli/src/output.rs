//! Artifacts, their serialization and exit codes.

use std::fmt;
use std::fs;

use anyhow::Context;
use illumination_core::{io, Error};
use serde::Serialize;
use serde_json::Value;

use crate::RunConfig;

/// One emitted file.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: &str, contents: String) -> Self {
        Self { name: name.into(), contents }
    }
}

/// Outcome of a subcommand. The first artifact is printed when no output
/// directory is given.
#[derive(Clone, Debug)]
pub struct Report {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
    pub passed: bool,
}

/// Input that parses but is not acceptable for the command.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

pub fn invalid(message: impl Into<String>) -> anyhow::Error {
    InvalidInput(message.into()).into()
}

/// Serializes `body`, which must be a JSON object, with the command and
/// seed added.
pub fn json_artifact<T: Serialize>(cfg: &RunConfig, command: &str, body: &T) -> anyhow::Result<String> {
    let mut value = serde_json::to_value(body)?;
    let Value::Object(map) = &mut value else {
        anyhow::bail!("artifact body for {command} is not a JSON object");
    };
    map.insert("command".into(), command.into());
    map.insert("seed".into(), cfg.seed.into());
    Ok(io::to_json(&value))
}

pub fn emit(cfg: &RunConfig, report: &Report) -> anyhow::Result<()> {
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for a in &report.artifacts {
                let path = dir.join(&a.name);
                fs::write(&path, &a.contents).with_context(|| format!("writing {}", path.display()))?;
            }
            println!("{}", report.summary);
        }
        None => {
            if let Some(a) = report.artifacts.first() {
                print!("{}", a.contents);
            }
            eprintln!("{}", report.summary);
        }
    }
    Ok(())
}

/// 1 for certificate failures, 2 for parse and I/O errors, 3 for invalid
/// input.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return classify(err);
        }
        if cause.is::<InvalidInput>() {
            return 3;
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    2
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::Io(_) => 2,
        Error::UncoveredVertex { .. }
        | Error::UncoveredFace { .. }
        | Error::GreatsphereMeetsBody { .. }
        | Error::PointInsideBody
        | Error::ConstructionFailed { .. }
        | Error::SolverDiverged { .. }
        | Error::VerificationFailed(_)
        | Error::GridTooCoarse { .. }
        | Error::ParallelogramFace { .. }
        | Error::PointNotOnFacePlane { .. }
        | Error::PointNotInRelint { .. }
        | Error::VertexOnOrBeyondEquator { .. } => 1,
        _ => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::UncoveredVertex { vertex: 0, best_margin: -1.0 }.into()), 1);
        assert_eq!(exit_code(&Error::Parse { line: 3, message: "x".into() }.into()), 2);
        assert_eq!(exit_code(&Error::NotInOpenHemisphere { margin: 0.0 }.into()), 3);
        assert_eq!(exit_code(&invalid("no")), 3);
        let io = anyhow::Error::from(std::io::Error::other("gone")).context("reading input");
        assert_eq!(exit_code(&io), 2);
        let wrapped = anyhow::Error::from(Error::NotPolyhedralGraph("cut".into())).context("koebe");
        assert_eq!(exit_code(&wrapped), 3);
    }
}
