use super::{HarnessError, Result};
use crate::geometry::Point;
use crate::regression::DcObjective;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const MANIFEST_FORMAT: &str = "frida-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Longitude samples of the objective grid (2° steps over [−180°, 180°]).
pub const GRID_LON: usize = 181;
/// Latitude samples of the objective grid (2° steps over [−90°, 90°]).
pub const GRID_LAT: usize = 91;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the artifact directory, with `/` separators.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub files: Vec<ManifestEntry>,
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Collects written files and turns them into a manifest.
#[derive(Debug, Default)]
pub(crate) struct ArtifactWriter {
    entries: Vec<ManifestEntry>,
}

impl ArtifactWriter {
    pub fn write(&mut self, root: &Path, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.entries.push(ManifestEntry {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes the manifest last and returns it.
    pub fn finish(mut self, root: &Path) -> Result<Manifest> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            format: MANIFEST_FORMAT.into(),
            files: self.entries,
        };
        std::fs::write(root.join(MANIFEST_FILE), to_json_bytes(&manifest)?)?;
        Ok(manifest)
    }
}

/// Re-reads every file listed in `dir/manifest.json` and compares hashes
/// and sizes.
pub fn verify_manifest(dir: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(HarnessError::Manifest(format!(
            "unsupported manifest format '{}'",
            manifest.format
        )));
    }
    for e in &manifest.files {
        let bytes = std::fs::read(dir.join(&e.path))?;
        if bytes.len() as u64 != e.bytes || sha256_hex(&bytes) != e.sha256 {
            return Err(HarnessError::Manifest(format!("{} does not match its hash", e.path)));
        }
    }
    Ok(manifest)
}

fn lonlat_point(lon_deg: f64, lat_deg: f64) -> Point {
    let (lon, lat) = (lon_deg.to_radians(), lat_deg.to_radians());
    Point::from_raw(vec![lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()])
}

/// f(·, x) on the 181 × 91 longitude–latitude grid, one row per node,
/// latitude-major.
pub fn write_objective_grid(obj: &DcObjective) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lon_deg", "lat_deg", "f"])?;
    for j in 0..GRID_LAT {
        let lat = -90.0 + 2.0 * j as f64;
        for i in 0..GRID_LON {
            let lon = -180.0 + 2.0 * i as f64;
            let f = obj.value(&lonlat_point(lon, lat))?;
            w.write_record([format!("{lon:.1}"), format!("{lat:.1}"), format!("{f:.16e}")])?;
        }
    }
    w.flush()?;
    w.into_inner()
        .map_err(|e| HarnessError::Io(e.into_error()))
}
