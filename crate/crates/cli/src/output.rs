//! Output files and the run manifest.
//!
//! Every command records each file it writes; the manifest lists them all
//! with SHA-256 digests. Numeric CSV columns carry 12 significant digits, so
//! identical configurations reproduce identical digests.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Serialize)]
struct ManifestFile {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct StageRecord {
    name: String,
    seconds: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool_version: &'static str,
    command: String,
    config: &'a RunConfig,
    stages: Vec<StageRecord>,
    files: Vec<ManifestFile>,
}

/// Collects written files and per-stage wall times for one command.
pub struct RunRecorder {
    output_dir: PathBuf,
    command: String,
    files: Vec<ManifestFile>,
    stages: Vec<StageRecord>,
    stage_start: Instant,
    stage_name: String,
}

impl RunRecorder {
    pub fn new(output_dir: &Path, command: &str) -> std::io::Result<Self> {
        std::fs::create_dir_all(output_dir)?;
        Ok(RunRecorder {
            output_dir: output_dir.to_path_buf(),
            command: command.to_string(),
            files: Vec::new(),
            stages: Vec::new(),
            stage_start: Instant::now(),
            stage_name: "setup".to_string(),
        })
    }

    /// Close the current stage and open a new one.
    pub fn stage(&mut self, name: &str) {
        let elapsed = self.stage_start.elapsed().as_secs_f64();
        self.stages.push(StageRecord {
            name: std::mem::replace(&mut self.stage_name, name.to_string()),
            seconds: elapsed,
        });
        self.stage_start = Instant::now();
    }

    fn register(&mut self, path: &Path, bytes: &[u8]) {
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.files.push(ManifestFile {
            path: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            sha256: hex,
        });
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.output_dir.join(name);
        std::fs::write(&path, bytes)?;
        self.register(&path, bytes);
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Write a CSV with 12-significant-digit numeric cells.
    pub fn write_csv(
        &mut self,
        name: &str,
        header: &str,
        rows: impl Iterator<Item = Vec<CsvCell>>,
    ) -> std::io::Result<PathBuf> {
        let mut buf = Vec::new();
        writeln!(buf, "{header}")?;
        for row in rows {
            let mut first = true;
            for cell in row {
                if !first {
                    write!(buf, ",")?;
                }
                first = false;
                match cell {
                    CsvCell::Float(v) => write!(buf, "{v:.11e}")?,
                    CsvCell::Int(v) => write!(buf, "{v}")?,
                    CsvCell::Text(s) => write!(buf, "{s}")?,
                    CsvCell::Bool(b) => write!(buf, "{b}")?,
                }
            }
            writeln!(buf)?;
        }
        self.write_bytes(name, &buf)
    }

    /// Write the manifest and finish.
    pub fn finish(mut self, config: &RunConfig) -> std::io::Result<()> {
        self.stage("finish");
        let manifest = Manifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: self.command.clone(),
            config,
            stages: self.stages,
            files: self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(self.output_dir.join("manifest.json"), text)
    }
}

pub enum CsvCell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}
