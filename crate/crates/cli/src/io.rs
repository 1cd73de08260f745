use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use esid_core::prob::{Channel, Distribution, WiretapChannel};
use esid_core::{Error, Result};
use serde::Serialize;
use serde_json::Value;

/// Provenance record attached to every output artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub config: Value,
    pub seed: u64,
    pub version: &'static str,
    pub duration_seconds: f64,
}

pub struct Run {
    command: String,
    inputs: Vec<PathBuf>,
    config: Value,
    seed: u64,
    started: Instant,
}

impl Run {
    pub fn start(command: &str, config: impl Serialize, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            seed,
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn manifest(&self) -> RunManifest {
        RunManifest {
            command: self.command.clone(),
            inputs: self.inputs.clone(),
            config: self.config.clone(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            duration_seconds: self.started.elapsed().as_secs_f64(),
        }
    }

    /// Writes `{ "manifest": ..., "result": ... }` to `out` or stdout.
    pub fn emit(&self, result: impl Serialize, out: Option<&Path>) -> Result<()> {
        let doc = serde_json::json!({
            "manifest": self.manifest(),
            "result": serde_json::to_value(result)?,
        });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        write_output(out, text.as_bytes())
    }
}

/// Writes to `out` atomically (temp file in the same directory, then
/// rename), or to stdout when `out` is `None`.
pub fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
        Some(path) => write_atomic(path, bytes),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_wiretap(path: &Path) -> Result<WiretapChannel> {
    let v = read_json(path)?;
    if v.get("legit").is_none() {
        return Err(Error::InvalidInput(format!(
            "{} is not a wiretap file (missing \"legit\")",
            path.display()
        )));
    }
    Ok(serde_json::from_value(v)?)
}

/// A channel file, or the legitimate channel of a wiretap file.
pub fn load_channel(path: &Path) -> Result<Channel> {
    let v = read_json(path)?;
    if v.get("legit").is_some() {
        let w: WiretapChannel = serde_json::from_value(v)?;
        return Ok(w.legit().clone());
    }
    Ok(serde_json::from_value(v)?)
}

/// The eavesdropper channel of a wiretap file, or a plain channel file.
pub fn load_eaves(path: &Path) -> Result<Channel> {
    let v = read_json(path)?;
    if v.get("legit").is_some() {
        let w: WiretapChannel = serde_json::from_value(v)?;
        return Ok(w.eaves().clone());
    }
    Ok(serde_json::from_value(v)?)
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_value(read_json(path)?)?)
}

/// Parses `"0.5,0.5"`, or reads a JSON array of numbers from a file.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let inline: std::result::Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match inline {
        Ok(v) => Ok(v),
        Err(_) => {
            let v = read_json(Path::new(text))?;
            Ok(serde_json::from_value(v)?)
        }
    }
}

pub fn distribution_on(alphabet: &esid_core::prob::Alphabet, text: &str) -> Result<Distribution> {
    Distribution::new(alphabet.clone(), parse_vector(text)?)
}
