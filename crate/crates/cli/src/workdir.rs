//! Work-directory layout, manifests and the run lock.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Written next to every stage's artifacts as `manifests/<stage>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub inputs: Vec<InputDigest>,
    pub config_hash: String,
    pub seed: u64,
    pub counts: BTreeMap<String, u64>,
    /// Seconds.
    pub wall_time: f64,
}

pub fn file_sha256(path: &Path) -> io::Result<String> {
    let mut hasher = Sha256::new();
    let mut f = File::open(path)?;
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex(&hasher.finalize()))
}

/// Digest of `path`, recorded under `label`.
pub fn digest(label: impl Into<String>, path: &Path) -> io::Result<InputDigest> {
    Ok(InputDigest {
        path: label.into(),
        sha256: file_sha256(path)?,
    })
}

/// Writes `bytes` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

#[derive(Debug)]
struct Lock(PathBuf);

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

/// An open, locked work directory.
#[derive(Debug)]
pub struct WorkDir {
    root: PathBuf,
    _lock: Lock,
}

pub const LOCK_FILE: &str = ".clarq.lock";

impl WorkDir {
    pub fn open(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        for sub in ["records", "stages", "manifests"] {
            fs::create_dir_all(root.join(sub))?;
        }
        let lock_path = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Err(CliError::Locked { path: lock_path }),
            Err(e) => return Err(e.into()),
        }
        Ok(WorkDir {
            root: root.to_path_buf(),
            _lock: Lock(lock_path),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn records_dir(&self) -> PathBuf {
        self.root.join("records")
    }

    pub fn records_file(&self, domain: &str) -> PathBuf {
        self.records_dir().join(format!("{domain}.jsonl"))
    }

    pub fn stages_dir(&self) -> PathBuf {
        self.root.join("stages")
    }

    pub fn stage_file(&self, name: &str) -> PathBuf {
        self.stages_dir().join(format!("{name}.jsonl"))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn manifest_file(&self, stage: &str) -> PathBuf {
        self.root.join("manifests").join(format!("{stage}.json"))
    }

    pub fn write_manifest(&self, m: &Manifest) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(m).map_err(clarq_core::Error::from)?;
        text.push('\n');
        write_atomic(&self.manifest_file(&m.stage), text.as_bytes())?;
        Ok(())
    }

    pub fn read_manifest(&self, stage: &str) -> CliResult<Option<Manifest>> {
        let path = self.manifest_file(stage);
        if !path.is_file() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        let m = serde_json::from_str(&text).map_err(clarq_core::Error::from)?;
        Ok(Some(m))
    }

    /// Checks that `artifact` at `path` exists, that the stage which
    /// produces it left a manifest, and that the manifest's config hash is
    /// `config_hash` (unless `allow_mixed`).
    pub fn require(
        &self,
        producer: &str,
        artifact: &str,
        path: &Path,
        config_hash: &str,
        allow_mixed: bool,
    ) -> CliResult<Manifest> {
        let missing = || CliError::MissingArtifact {
            artifact: artifact.to_string(),
            path: path.to_path_buf(),
        };
        if !path.exists() {
            return Err(missing());
        }
        let manifest = self.read_manifest(producer)?.ok_or_else(missing)?;
        if manifest.config_hash != config_hash {
            if !allow_mixed {
                return Err(CliError::MixedArtifacts {
                    artifact: artifact.to_string(),
                    expected: config_hash.to_string(),
                    found: manifest.config_hash,
                });
            }
            log::warn!("using `{artifact}` from config {} (mixed run allowed)", manifest.config_hash);
        }
        Ok(manifest)
    }
}
