//! File plumbing: atomic writes and the raw grid format.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use czkit::solver::{GridFunction, Role};
use czkit::{SpaceTimeGrid, SpatialGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const GRID_FORMAT: &str = "czkit-grid";
const LAYOUT: &str = "node-major, lattice row-major, complex as (re, im), little-endian f64";

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    // Temporary files are created private; results are ordinary outputs.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Grid metadata stored next to a raw binary file as `<file>.json`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub format: String,
    pub layout: String,
    pub role: Role,
    pub dim: usize,
    pub extent: f64,
    pub points: usize,
    pub nodes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

pub fn sidecar_path(bin: &Path) -> PathBuf {
    let mut s = bin.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_grid_function(
    path: &Path,
    u: &GridFunction,
    lambda: Option<f64>,
    config: Option<serde_json::Value>,
) -> Result<()> {
    let mut bytes = Vec::with_capacity(u.values().len() * 16);
    for z in u.values() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    let g = u.grid();
    let meta = Sidecar {
        format: GRID_FORMAT.into(),
        layout: LAYOUT.into(),
        role: u.role(),
        dim: g.space().dim(),
        extent: g.space().extent(),
        points: g.space().points(),
        nodes: g.nodes().to_vec(),
        lambda,
        config,
    };
    write_atomic(path, &bytes)?;
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    write_atomic(&sidecar_path(path), text.as_bytes())
}

pub fn read_grid_function(path: &Path) -> Result<GridFunction> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).with_context(|| format!("reading {}", side.display()))?;
    let meta: Sidecar = serde_json::from_str(&text).with_context(|| format!("parsing {}", side.display()))?;
    if meta.format != GRID_FORMAT {
        bail!("{}: unknown format `{}`", side.display(), meta.format);
    }
    let grid = SpaceTimeGrid::new(SpatialGrid::new(meta.dim, meta.extent, meta.points)?, meta.nodes)?;
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let want = grid.node_count() * grid.space().len() * 16;
    if bytes.len() != want {
        bail!("{}: expected {want} bytes for the declared grid, found {}", path.display(), bytes.len());
    }
    let floats: Vec<f64> =
        bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let values = floats.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    Ok(GridFunction::new(grid, values, meta.role)?)
}
