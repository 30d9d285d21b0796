use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";
pub const INCOMPLETE: &str = "INCOMPLETE";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub status: String,
    pub name: String,
    /// Config entries in file order.
    pub config: Vec<(String, String)>,
    pub mode: String,
    pub files: Vec<FileEntry>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    /// Pretty JSON with sorted object keys and a trailing newline.
    pub fn to_bytes(&self) -> Vec<u8> {
        let value = serde_json::to_value(self).expect("manifest serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text.into_bytes()
    }
}

/// Writes files under an output directory and records their hashes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: BTreeMap<String, FileEntry>,
}

impl OutputDir {
    /// Creates the directory and drops the incomplete marker.
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        // a manifest from an earlier run would describe other files
        if root.join(MANIFEST).exists() {
            fs::remove_file(root.join(MANIFEST))?;
        }
        fs::write(root.join(INCOMPLETE), "run in progress or failed\n")?;
        Ok(OutputDir { root: root.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// `rel` uses `/` separators.
    pub fn write(&mut self, rel: &str, contents: &[u8]) -> io::Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.files.insert(
            rel.to_string(),
            FileEntry { path: rel.to_string(), sha256: sha256_hex(contents), bytes: contents.len() as u64 },
        );
        Ok(())
    }

    pub fn entries(&self) -> Vec<FileEntry> {
        self.files.values().cloned().collect()
    }

    /// Writes the manifest, removes the marker and returns the manifest hash.
    pub fn finish(self, mut manifest: Manifest) -> io::Result<String> {
        manifest.files = self.entries();
        let bytes = manifest.to_bytes();
        fs::write(self.root.join(MANIFEST), &bytes)?;
        fs::remove_file(self.root.join(INCOMPLETE))?;
        Ok(sha256_hex(&bytes))
    }
}

pub fn read_manifest(dir: &Path) -> io::Result<(Manifest, String)> {
    let bytes = fs::read(dir.join(MANIFEST))?;
    let manifest = serde_json::from_slice(&bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    Ok((manifest, sha256_hex(&bytes)))
}

/// Files whose content no longer matches the manifest.
pub fn verify_files(dir: &Path, manifest: &Manifest) -> Vec<String> {
    manifest
        .files
        .iter()
        .filter(|f| match fs::read(dir.join(&f.path)) {
            Ok(bytes) => sha256_hex(&bytes) != f.sha256 || bytes.len() as u64 != f.bytes,
            Err(_) => true,
        })
        .map(|f| f.path.clone())
        .collect()
}
