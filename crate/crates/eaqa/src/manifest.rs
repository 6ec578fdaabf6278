//! Run manifest written next to every artifact set.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::io;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub seed: Option<u64>,
    /// RFC 3339; taken from `SOURCE_DATE_EPOCH` when set.
    pub timestamp: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub parameters: serde_json::Value,
}

pub fn timestamp() -> String {
    let from_env = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    from_env
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Collects inputs and outputs for one subcommand run.
#[derive(Debug, Default)]
pub struct RunRecord {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl RunRecord {
    pub fn input(&mut self, p: &Path) {
        if !self.inputs.iter().any(|x| x == p) {
            self.inputs.push(p.to_path_buf());
        }
    }

    /// Writes an output file atomically and records it.
    pub fn write(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        io::write_atomic(&path, contents.as_bytes())?;
        self.outputs.push(path);
        Ok(())
    }

    fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
        let mut out = Vec::new();
        for p in paths {
            if p.is_dir() {
                continue;
            }
            out.push(FileDigest {
                path: p.display().to_string(),
                sha256: io::file_digest(p)?,
            });
        }
        Ok(out)
    }

    pub fn finish(
        self,
        dir: &Path,
        subcommand: &str,
        seed: Option<u64>,
        parameters: serde_json::Value,
    ) -> Result<Manifest> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            seed,
            timestamp: timestamp(),
            inputs: Self::digests(&self.inputs)?,
            outputs: Self::digests(&self.outputs)?,
            parameters,
        };
        io::write_atomic(&dir.join(MANIFEST_FILE), io::to_pretty_json(&manifest).as_bytes())?;
        Ok(manifest)
    }
}
