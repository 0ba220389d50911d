//! Run directories: config copy, per-run snapshot CSVs and step logs, reports,
//! and a manifest of SHA-256 checksums.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sdrd_core::grid::{Grid, RangeTag};
use sdrd_core::io::{read_snapshots, write_snapshots};
use sdrd_core::solver::{StepRecord, Trajectory};

use crate::error::{io_error, CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const REPORTS_FILE: &str = "reports.json";
pub const STEPS_FILE: &str = "diagnostics.jsonl";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const MANIFEST_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub label: String,
    pub dir: String,
    pub r: f64,
    pub dt: f64,
    pub initial_energy: f64,
    pub steps: usize,
    /// `ok`, or the error that stopped the run early.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub command: String,
    pub name: String,
    pub seed: u64,
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    pub runs: Vec<RunEntry>,
    /// Relative path -> SHA-256 of every other file in the directory.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, name: &str, seed: u64, config_hash: String) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("sdrd-cli".into(), env!("CARGO_PKG_VERSION").into());
        versions.insert("sdrd-core".into(), sdrd_core::VERSION.into());
        Self {
            format: MANIFEST_FORMAT,
            command: command.into(),
            name: name.into(),
            seed,
            config_hash,
            versions,
            runs: Vec::new(),
            files: BTreeMap::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Creates `dir`, clearing it first if it holds an earlier run.
pub fn prepare_out_dir(dir: &Path) -> CliResult<()> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
        if entries.next().is_some() {
            if !dir.join(MANIFEST_FILE).exists() {
                return Err(CliError::Usage(format!(
                    "{} is not empty and holds no earlier run",
                    dir.display()
                )));
            }
            fs::remove_dir_all(dir).map_err(|e| io_error(dir, e))?;
        }
    }
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(path, text + "\n")
}

/// Writes snapshots and the step log of one trajectory into `out/label`.
pub fn write_run(out: &Path, label: &str, traj: &Trajectory, status: &str) -> CliResult<RunEntry> {
    let dir = out.join(label);
    write_snapshots(&dir.join(SNAPSHOT_DIR), &traj.snapshots).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut log = String::new();
    for s in &traj.steps {
        log.push_str(&serde_json::to_string(s).map_err(|e| CliError::Runtime(e.to_string()))?);
        log.push('\n');
    }
    write_file(&dir.join(STEPS_FILE), log)?;
    Ok(RunEntry {
        label: label.into(),
        dir: label.into(),
        r: traj.r,
        dt: traj.dt,
        initial_energy: traj.initial_energy,
        steps: traj.steps.len(),
        status: status.into(),
    })
}

pub fn read_run(out: &Path, entry: &RunEntry, grid: &Grid, range: RangeTag) -> CliResult<Trajectory> {
    let dir = out.join(&entry.dir);
    let snapshots =
        read_snapshots(&dir.join(SNAPSHOT_DIR), grid, range).map_err(|e| CliError::Integrity(e.to_string()))?;
    let path = dir.join(STEPS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))?;
    let steps = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str::<StepRecord>)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))?;
    if snapshots.is_empty() {
        return Err(CliError::Integrity(format!("run `{}` has no snapshots", entry.label)));
    }
    Ok(Trajectory {
        grid: *grid,
        r: entry.r,
        dt: entry.dt,
        initial_energy: entry.initial_energy,
        snapshots,
        steps,
    })
}

fn relative_files(out: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(out).sort_by_file_name() {
        let entry = entry.map_err(|e| CliError::Runtime(e.to_string()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(out)
            .expect("walk stays below its root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        if rel != MANIFEST_FILE {
            files.push((rel, entry.path().to_path_buf()));
        }
    }
    Ok(files)
}

/// Hashes every file under `out` into the manifest, writes it and returns the
/// manifest hash.
pub fn finalize(out: &Path, mut manifest: Manifest) -> CliResult<String> {
    manifest.files.clear();
    for (rel, path) in relative_files(out)? {
        let bytes = fs::read(&path).map_err(|e| io_error(&path, e))?;
        manifest.files.insert(rel, sha256_hex(&bytes));
    }
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    manifest_hash(out)
}

pub fn manifest_hash(out: &Path) -> CliResult<String> {
    let path = out.join(MANIFEST_FILE);
    let bytes = fs::read(&path).map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub fn read_manifest(out: &Path) -> CliResult<Manifest> {
    let path = out.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))
}

/// Reads the manifest and checks that the directory matches it file for file.
pub fn verify(out: &Path) -> CliResult<Manifest> {
    let manifest = read_manifest(out)?;
    let present = relative_files(out)?;
    for (rel, expected) in &manifest.files {
        let path = out.join(rel);
        let bytes = fs::read(&path).map_err(|_| CliError::Integrity(format!("{rel} is listed but missing")))?;
        let got = sha256_hex(&bytes);
        if &got != expected {
            return Err(CliError::Integrity(format!(
                "checksum mismatch for {rel}: manifest {expected}, file {got}"
            )));
        }
    }
    if let Some((rel, _)) = present.iter().find(|(rel, _)| !manifest.files.contains_key(rel)) {
        return Err(CliError::Integrity(format!("{rel} is not listed in the manifest")));
    }
    Ok(manifest)
}
