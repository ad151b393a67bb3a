use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] wirref_core::Error),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FileRecord {
    pub role: String,
    /// File name only, so manifests do not depend on where a run happens.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub config: Value,
    pub arguments: Value,
    pub seeds: Value,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

/// Inputs read and outputs produced by one stage. Outputs stay in memory
/// until the stage has succeeded.
#[derive(Default)]
pub struct Stage {
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<(String, Vec<u8>)>,
    pub summary: serde_json::Map<String, Value>,
    pub warnings: Vec<String>,
    /// Printed to stdout after the run directory is in place.
    pub message: String,
}

impl Stage {
    pub fn read(&mut self, role: &str, path: &Path) -> CliResult<String> {
        let bytes = std::fs::read(path).map_err(|e| {
            CliError::Data(wirref_core::Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        })?;
        self.inputs.push(FileRecord {
            role: role.into(),
            file: path
                .file_name()
                .map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
            sha256: sha256_hex(&bytes),
        });
        String::from_utf8(bytes).map_err(|_| {
            CliError::Data(wirref_core::Error::Invalid(format!(
                "{} is not UTF-8",
                path.display()
            )))
        })
    }

    pub fn write(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.outputs.push((name.into(), contents.into()));
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(
            key.into(),
            serde_json::to_value(value).expect("summary value serializes"),
        );
    }

    /// Records warnings in the manifest. The library has already logged its
    /// own, so only the stage's own warnings need `log::warn!` at the call site.
    pub fn warn(&mut self, warnings: impl IntoIterator<Item = String>) {
        self.warnings.extend(warnings);
    }
}

/// Settings that identify a run: everything except where it is written.
#[derive(Serialize)]
pub struct RunIdentity<'a> {
    pub command: &'a str,
    pub config: Value,
    pub arguments: Value,
    pub seeds: Value,
}

impl RunIdentity<'_> {
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("run identity serializes"))
    }
}

pub fn default_run_dir(output_dir: &Path, command: &str, hash: &str) -> PathBuf {
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
    output_dir.join(format!("{stamp}-{command}-{}", &hash[..12]))
}

/// Writes all outputs and the manifest into a staging directory next to
/// `run_dir` and renames it into place. The staging directory is removed
/// on any failure.
pub fn commit(run_dir: &Path, identity: &RunIdentity, stage: Stage) -> CliResult<Manifest> {
    if run_dir.exists() {
        return Err(CliError::Usage(format!(
            "run directory {} already exists",
            run_dir.display()
        )));
    }
    let parent = run_dir
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = run_dir
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("invalid run directory {}", run_dir.display())))?;
    let staging = parent.join(format!(
        ".{}.partial-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let internal = |what: &str, p: &Path, e: std::io::Error| {
        CliError::Internal(format!("{what} {}: {e}", p.display()))
    };
    std::fs::create_dir_all(parent).map_err(|e| internal("cannot create", parent, e))?;
    let result = (|| {
        std::fs::create_dir(&staging).map_err(|e| internal("cannot create", &staging, e))?;
        let mut outputs = Vec::new();
        for (file, bytes) in &stage.outputs {
            let path = staging.join(file);
            std::fs::write(&path, bytes).map_err(|e| internal("cannot write", &path, e))?;
            outputs.push(FileRecord {
                role: "output".into(),
                file: file.clone(),
                sha256: sha256_hex(bytes),
            });
        }
        let manifest = Manifest {
            tool: "wirref",
            version: env!("CARGO_PKG_VERSION"),
            command: identity.command.into(),
            config_hash: identity.hash(),
            config: identity.config.clone(),
            arguments: identity.arguments.clone(),
            seeds: identity.seeds.clone(),
            inputs: stage.inputs.clone(),
            outputs,
            summary: Value::Object(stage.summary.clone()),
            warnings: stage.warnings.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = staging.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| internal("cannot write", &path, e))?;
        std::fs::rename(&staging, run_dir)
            .map_err(|e| internal("cannot move staging directory to", run_dir, e))?;
        Ok(manifest)
    })();
    if result.is_err() && staging.exists() {
        let _ = std::fs::remove_dir_all(&staging);
    }
    result
}
