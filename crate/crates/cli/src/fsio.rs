use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lvef_core::dataset::is_mask_sequence_dir;
use lvef_core::VideoResult;
use serde::{Deserialize, Serialize};

/// Writes through a temp file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// `root` itself when it holds frames, else its sequence subdirectories in
/// name order.
pub fn sequence_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    if is_mask_sequence_dir(root) {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .with_context(|| format!("reading {}", root.display()))?
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.is_dir() && is_mask_sequence_dir(p))
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        bail!("no mask sequences under {}", root.display());
    }
    Ok(dirs)
}

/// A `predict` output: one result, or a batch.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum ResultFile {
    Batch { results: Vec<VideoResult> },
    Single(Box<VideoResult>),
}
