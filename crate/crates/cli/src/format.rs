//! Newline-delimited JSON interchange files: a single self-describing header
//! record followed by one record per draw or mixture.

use std::fs;
use std::path::Path;

use dpmix::{CompletionConfig, MixtureDensity, ModelConfig, PosteriorDraw};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_VERSION: &str = "1";
pub const FAMILY: &str = "normal-nig";

#[derive(Debug, Serialize, Deserialize)]
pub struct DrawsHeader {
    pub format_version: String,
    pub kind: String,
    pub family: String,
    pub model: ModelConfig,
    pub n: usize,
    pub t: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MixturesHeader {
    pub format_version: String,
    pub kind: String,
    pub family: String,
    pub eps: f64,
    pub ups: f64,
    pub seed: u64,
    pub n: usize,
    pub t: usize,
    pub model: ModelConfig,
}

pub struct DrawsFile {
    pub header: DrawsHeader,
    pub draws: Vec<PosteriorDraw>,
}

pub fn render_draws_file(model: &ModelConfig, n: usize, draws: &[PosteriorDraw]) -> String {
    let header = DrawsHeader {
        format_version: FORMAT_VERSION.to_string(),
        kind: "draws".to_string(),
        family: FAMILY.to_string(),
        model: model.clone(),
        n,
        t: draws.len(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for draw in draws {
        out.push_str(&serde_json::to_string(draw).expect("draw serializes"));
        out.push('\n');
    }
    out
}

pub fn render_mixtures_file(
    draws_header: &DrawsHeader,
    config: &CompletionConfig,
    mixtures: &[MixtureDensity],
) -> String {
    let header = MixturesHeader {
        format_version: FORMAT_VERSION.to_string(),
        kind: "mixtures".to_string(),
        family: FAMILY.to_string(),
        eps: config.eps,
        ups: config.ups,
        seed: config.seed,
        n: draws_header.n,
        t: mixtures.len(),
        model: draws_header.model.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for mix in mixtures {
        out.push_str(&serde_json::to_string(mix).expect("mixture serializes"));
        out.push('\n');
    }
    out
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let content = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(content.lines().map(|l| l.to_string()).collect())
}

fn check_header(kind: &str, format_version: &str, family: &str, path: &Path) -> Result<(), CliError> {
    if format_version != FORMAT_VERSION {
        return Err(CliError::usage(format!(
            "{}: unsupported format version {format_version:?} (expected {FORMAT_VERSION:?})",
            path.display()
        )));
    }
    if family != FAMILY {
        return Err(CliError::usage(format!(
            "{}: unrecognized model family {family:?} (expected {FAMILY:?})",
            path.display()
        )));
    }
    let _ = kind;
    Ok(())
}

pub fn read_draws_file(path: &Path) -> Result<DrawsFile, CliError> {
    let lines = read_lines(path)?;
    let first = lines
        .first()
        .ok_or_else(|| CliError::usage(format!("{}: empty file", path.display())))?;
    let header: DrawsHeader = serde_json::from_str(first)
        .map_err(|e| CliError::usage(format!("{}: malformed header: {e}", path.display())))?;
    if header.kind != "draws" {
        return Err(CliError::usage(format!(
            "{}: expected a draws file, found kind {:?}",
            path.display(),
            header.kind
        )));
    }
    check_header(&header.kind, &header.format_version, &header.family, path)?;
    let mut draws = Vec::with_capacity(header.t);
    for (i, line) in lines[1..].iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let draw: PosteriorDraw = serde_json::from_str(line).map_err(|e| {
            CliError::usage(format!("{}: malformed draw record {}: {e}", path.display(), i + 1))
        })?;
        draws.push(draw);
    }
    if draws.len() != header.t {
        return Err(CliError::usage(format!(
            "{}: header promises {} draws, found {}",
            path.display(),
            header.t,
            draws.len()
        )));
    }
    Ok(DrawsFile { header, draws })
}

pub fn read_mixtures_file(path: &Path) -> Result<Vec<MixtureDensity>, CliError> {
    let lines = read_lines(path)?;
    let first = lines
        .first()
        .ok_or_else(|| CliError::usage(format!("{}: empty file", path.display())))?;
    let header: MixturesHeader = serde_json::from_str(first)
        .map_err(|e| CliError::usage(format!("{}: malformed header: {e}", path.display())))?;
    if header.kind != "mixtures" {
        return Err(CliError::usage(format!(
            "{}: expected a mixtures file, found kind {:?}",
            path.display(),
            header.kind
        )));
    }
    check_header(&header.kind, &header.format_version, &header.family, path)?;
    let mut mixtures = Vec::with_capacity(header.t);
    for (i, line) in lines[1..].iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mix: MixtureDensity = serde_json::from_str(line).map_err(|e| {
            CliError::usage(format!(
                "{}: malformed mixture record {}: {e}",
                path.display(),
                i + 1
            ))
        })?;
        mixtures.push(mix);
    }
    if mixtures.len() != header.t {
        return Err(CliError::usage(format!(
            "{}: header promises {} mixtures, found {}",
            path.display(),
            header.t,
            mixtures.len()
        )));
    }
    Ok(mixtures)
}

/// The `kind` field of a file's header record, for dispatching.
pub fn peek_kind(path: &Path) -> Result<String, CliError> {
    let content = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let first = content
        .lines()
        .next()
        .ok_or_else(|| CliError::usage(format!("{}: empty file", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(first)
        .map_err(|e| CliError::usage(format!("{}: malformed header: {e}", path.display())))?;
    value
        .get("kind")
        .and_then(|k| k.as_str())
        .map(|s| s.to_string())
        .ok_or_else(|| CliError::usage(format!("{}: header has no kind field", path.display())))
}

/// Reads numeric input data: one value per line, `#` starts a comment,
/// blank lines ignored.
pub fn read_data(path: &Path) -> Result<Vec<f64>, CliError> {
    let content = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut data = Vec::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| {
            CliError::usage(format!(
                "{}: line {}: not a number: {line:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        data.push(value);
    }
    if data.is_empty() {
        return Err(CliError::usage(format!(
            "{}: no numeric values found",
            path.display()
        )));
    }
    Ok(data)
}
