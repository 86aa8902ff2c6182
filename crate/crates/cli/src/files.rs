//! Input checks, digests and output writing shared by the subcommands.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};
use thiserror::Error;

use semshift_core::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation: missing inputs, inconsistent flags.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn runtime(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{context}: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("input file {} does not exist", path.display())));
    }
    Ok(())
}

pub fn require_dir(path: &Path) -> Result<()> {
    if !path.is_dir() {
        return Err(CliError::Usage(format!("input directory {} does not exist", path.display())));
    }
    Ok(())
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::runtime(path.display(), e))
}

pub fn sha256(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| CliError::runtime(path.display(), e))?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf).map_err(|e| CliError::runtime(path.display(), e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Records the digest of an input file under its path as given.
pub fn record_input(manifest: &mut RunManifest, path: &Path) -> Result<()> {
    manifest.inputs.insert(path.display().to_string(), sha256(path)?);
    Ok(())
}

/// Method id of a score or label file: the file name up to its first dot.
pub fn method_id(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
    name.split('.').next().unwrap_or_default().to_owned()
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        if path.exists() && !path.is_dir() {
            return Err(CliError::Usage(format!("--out {} is not a directory", path.display())));
        }
        fs::create_dir_all(path).map_err(|e| CliError::runtime(path.display(), e))?;
        Ok(Self(path.to_owned()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    /// Writes `name` through a buffered writer; partial files are not left
    /// behind on error.
    pub fn write(&self, name: &str, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<PathBuf> {
        let path = self.path(name);
        let tmp = self.path(&format!(".{name}.tmp"));
        let run = || -> io::Result<()> {
            let mut w = BufWriter::new(File::create(&tmp)?);
            f(&mut w)?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
            fs::rename(&tmp, &path)
        };
        run().map_err(|e| {
            let _ = fs::remove_file(&tmp);
            CliError::runtime(path.display(), e)
        })?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_json<T: serde::Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
            writeln!(w)
        })
    }

    /// Stamps and writes `<command>.manifest.json`.
    pub fn write_manifest(&self, mut manifest: RunManifest) -> Result<PathBuf> {
        manifest.created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let name = format!("{}.manifest.json", manifest.command);
        self.write_json(&name, &manifest)
    }
}
