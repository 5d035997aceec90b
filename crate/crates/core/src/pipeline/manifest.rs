use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifacts: Vec<ManifestEntry>,
}

/// sha256 of a file, or of a directory as the sorted list of
/// `relative path NUL file hash` lines.
pub fn hash_path(path: &Path) -> io::Result<String> {
    if path.is_dir() {
        let mut files = Vec::new();
        collect_files(path, path, &mut files)?;
        files.sort();
        let mut h = Sha256::new();
        for rel in files {
            h.update(rel.as_bytes());
            h.update([0]);
            h.update(hash_path(&path.join(&rel))?.as_bytes());
            h.update(b"\n");
        }
        Ok(hex::encode(h.finalize()))
    } else {
        Ok(hex::encode(Sha256::digest(fs::read(path)?)))
    }
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("walked below root");
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}
