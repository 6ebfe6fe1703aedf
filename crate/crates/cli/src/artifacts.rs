//! Output directory handling: files are staged in memory, written through a
//! temp file and renamed into place, and the manifest goes last.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "pucci-lab manifest v1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub command: String,
    pub config_sha256: String,
    pub code_version: String,
    pub seed: Option<u64>,
    pub status: String,
    pub exit_code: i32,
    pub files: Vec<FileEntry>,
    /// Wall-clock milliseconds per phase; the only non-reproducible field.
    pub timings_ms: Vec<(String, u128)>,
}

#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        let name = name.into();
        debug_assert!(name != MANIFEST && !name.contains('/'));
        self.files.retain(|(n, _)| *n != name);
        self.files.push((name, bytes.into()));
    }

    /// Writes every staged file, then the manifest. Files named by an earlier
    /// manifest in `dir` but not produced now are removed first.
    pub fn commit(self, dir: &Path, mut manifest: Manifest) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let keep: Vec<&str> = self.files.iter().map(|(n, _)| n.as_str()).collect();
        if let Ok(old) = fs::read(dir.join(MANIFEST)) {
            if let Ok(old) = serde_json::from_slice::<Manifest>(&old) {
                for f in old.files.iter().filter(|f| !keep.contains(&f.name.as_str()) && !f.name.contains('/')) {
                    let _ = fs::remove_file(dir.join(&f.name));
                }
            }
        }
        manifest.files.clear();
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            if let Err(e) = write_atomic(dir, name, bytes) {
                for w in &written {
                    let _ = fs::remove_file(dir.join(w));
                }
                return Err(e);
            }
            written.push(name.clone());
            manifest.files.push(FileEntry { name: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        }
        let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        write_atomic(dir, MANIFEST, &json)?;
        Ok(dir.join(MANIFEST))
    }
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}
