//! Self-contained scenario bundles on disk.
//!
//! ```text
//! <root>/scene.xml
//! <root>/config.json
//! <root>/paths/<link>.csv
//! <root>/coverage/<grid>.csv
//! <root>/coverage/<grid>.ppm
//! <root>/channels/<link>.bin
//! <root>/channels/<link>.json
//! <root>/manifest.csv
//! ```
//!
//! The manifest lists every other file with its role, link or grid id and
//! SHA-256 digest, sorted by path.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{read_channel_tensor, write_channel_tensor, ChannelMeta, ChannelTensor};
use crate::coverage::{read_coverage_csv, write_coverage_csv, CoverageCell};
use crate::ray::{read_path_csv, write_path_csv, PathRow};

pub const MANIFEST: &str = "manifest.csv";
pub const MANIFEST_HEADER: [&str; 4] = ["path", "role", "link_or_grid_id", "sha256"];
const OUTPUT_DIRS: [&str; 3] = ["paths", "coverage", "channels"];

#[derive(Debug, Error)]
pub enum PackageError {
    #[error("package root {0} exists and is not empty")]
    PackageExists(PathBuf),
    #[error("incomplete package: missing {0}")]
    Incomplete(String),
    #[error("corrupt package file {file}: {reason}")]
    Corrupt { file: String, reason: String },
    #[error("package file {0} is not listed in the manifest")]
    Unlisted(String),
    #[error("invalid identifier `{0}`")]
    InvalidId(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    Scene,
    Config,
    Paths,
    CoverageGrid,
    CoverageImage,
    ChannelTensor,
    ChannelMeta,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Scene => "scene",
            Role::Config => "config",
            Role::Paths => "paths",
            Role::CoverageGrid => "coverage_grid",
            Role::CoverageImage => "coverage_image",
            Role::ChannelTensor => "channel_tensor",
            Role::ChannelMeta => "channel_meta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Role::Scene,
            Role::Config,
            Role::Paths,
            Role::CoverageGrid,
            Role::CoverageImage,
            Role::ChannelTensor,
            Role::ChannelMeta,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkOutput {
    pub id: String,
    pub paths: Vec<PathRow>,
    pub tensor: ChannelTensor,
    pub meta: ChannelMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub id: String,
    pub cells: Vec<CoverageCell>,
    pub image: Vec<u8>,
}

/// Everything a package stores, in its parsed form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioResults {
    pub scene_xml: String,
    pub config_json: String,
    pub links: Vec<LinkOutput>,
    pub grids: Vec<GridOutput>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub role: Role,
    pub id: String,
    pub sha256: String,
}

/// A package on disk and its manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPackage {
    pub root: PathBuf,
    pub manifest: Vec<ManifestEntry>,
}

/// Link and grid ids become file names, so they are limited to ASCII
/// letters, digits, `_`, `-`, `.` and `@`, and may not start with `.`.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.' | b'@'))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PackageError + '_ {
    move |source| PackageError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serialises the results into (relative path, role, id, bytes), sorted by path.
fn render(results: &ScenarioResults) -> Result<Vec<(String, Role, String, Vec<u8>)>, PackageError> {
    let mut files = vec![
        ("scene.xml".to_string(), Role::Scene, String::new(), results.scene_xml.clone().into_bytes()),
        ("config.json".to_string(), Role::Config, String::new(), results.config_json.clone().into_bytes()),
    ];
    let csv_err = |file: &str| {
        let file = file.to_string();
        move |e: csv::Error| PackageError::Corrupt {
            file,
            reason: e.to_string(),
        }
    };
    for l in &results.links {
        if !is_valid_id(&l.id) {
            return Err(PackageError::InvalidId(l.id.clone()));
        }
        let name = format!("paths/{}.csv", l.id);
        let mut buf = Vec::new();
        write_path_csv(&l.paths, &mut buf).map_err(csv_err(&name))?;
        files.push((name, Role::Paths, l.id.clone(), buf));
        files.push((format!("channels/{}.bin", l.id), Role::ChannelTensor, l.id.clone(), write_channel_tensor(&l.tensor)));
        let mut meta = serde_json::to_vec_pretty(&l.meta).expect("channel metadata serialises");
        meta.push(b'\n');
        files.push((format!("channels/{}.json", l.id), Role::ChannelMeta, l.id.clone(), meta));
    }
    for g in &results.grids {
        if !is_valid_id(&g.id) {
            return Err(PackageError::InvalidId(g.id.clone()));
        }
        let name = format!("coverage/{}.csv", g.id);
        let mut buf = Vec::new();
        write_coverage_csv(&g.cells, &mut buf).map_err(csv_err(&name))?;
        files.push((name, Role::CoverageGrid, g.id.clone(), buf));
        files.push((format!("coverage/{}.ppm", g.id), Role::CoverageImage, g.id.clone(), g.image.clone()));
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));
    for w in files.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(PackageError::InvalidId(w[0].2.clone()));
        }
    }
    Ok(files)
}

fn manifest_bytes(entries: &[ManifestEntry]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MANIFEST_HEADER).expect("in-memory write");
    for e in entries {
        w.write_record([e.path.as_str(), e.role.as_str(), e.id.as_str(), e.sha256.as_str()])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

fn dir_is_empty(root: &Path) -> Result<bool, PackageError> {
    Ok(fs::read_dir(root).map_err(io_err(root))?.next().is_none())
}

/// Writes the package under `root`, which must be absent or an empty
/// directory. On failure everything written so far is removed.
pub fn write_package(results: &ScenarioResults, root: &Path) -> Result<ScenarioPackage, PackageError> {
    let created_root = if root.exists() {
        if !root.is_dir() || !dir_is_empty(root)? {
            return Err(PackageError::PackageExists(root.to_path_buf()));
        }
        false
    } else {
        true
    };
    let files = render(results)?;
    let result = write_files(root, &files);
    if result.is_err() {
        cleanup(root, created_root);
    }
    result
}

fn write_files(root: &Path, files: &[(String, Role, String, Vec<u8>)]) -> Result<ScenarioPackage, PackageError> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    for d in OUTPUT_DIRS {
        let p = root.join(d);
        fs::create_dir(&p).map_err(io_err(&p))?;
    }
    let mut manifest = Vec::with_capacity(files.len());
    for (rel, role, id, bytes) in files {
        let p = root.join(rel);
        fs::write(&p, bytes).map_err(io_err(&p))?;
        manifest.push(ManifestEntry {
            path: rel.clone(),
            role: *role,
            id: id.clone(),
            sha256: sha256_hex(bytes),
        });
    }
    let p = root.join(MANIFEST);
    fs::write(&p, manifest_bytes(&manifest)).map_err(io_err(&p))?;
    Ok(ScenarioPackage {
        root: root.to_path_buf(),
        manifest,
    })
}

fn cleanup(root: &Path, created_root: bool) {
    if created_root {
        let _ = fs::remove_dir_all(root);
        return;
    }
    if let Ok(entries) = fs::read_dir(root) {
        for e in entries.flatten() {
            let p = e.path();
            let _ = if p.is_dir() { fs::remove_dir_all(&p) } else { fs::remove_file(&p) };
        }
    }
}

fn read_manifest(root: &Path) -> Result<Vec<ManifestEntry>, PackageError> {
    let p = root.join(MANIFEST);
    if !p.is_file() {
        return Err(PackageError::Incomplete(MANIFEST.into()));
    }
    let bytes = fs::read(&p).map_err(io_err(&p))?;
    let corrupt = |reason: String| PackageError::Corrupt {
        file: MANIFEST.into(),
        reason,
    };
    let mut rd = csv::Reader::from_reader(bytes.as_slice());
    let header = rd.headers().map_err(|e| corrupt(e.to_string()))?.clone();
    if header.iter().ne(MANIFEST_HEADER.iter().copied()) {
        return Err(corrupt("unexpected header".into()));
    }
    let mut out: Vec<ManifestEntry> = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| corrupt(e.to_string()))?;
        let role = Role::parse(&rec[1]).ok_or_else(|| corrupt(format!("unknown role `{}`", &rec[1])))?;
        let path = rec[0].to_string();
        if path.starts_with('/') || path.split('/').any(|c| c.is_empty() || c == "." || c == "..") {
            return Err(corrupt(format!("path `{path}` escapes the package")));
        }
        out.push(ManifestEntry {
            path,
            role,
            id: rec[2].to_string(),
            sha256: rec[3].to_string(),
        });
    }
    if out.windows(2).any(|w| w[0].path >= w[1].path) {
        return Err(corrupt("rows are not sorted by unique path".into()));
    }
    Ok(out)
}

fn files_on_disk(root: &Path) -> Result<BTreeSet<String>, PackageError> {
    let mut out = BTreeSet::new();
    let mut stack = vec![(root.to_path_buf(), String::new())];
    while let Some((dir, prefix)) = stack.pop() {
        for e in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let e = e.map_err(io_err(&dir))?;
            let name = e.file_name().to_string_lossy().into_owned();
            let rel = if prefix.is_empty() { name } else { format!("{prefix}/{name}") };
            if e.path().is_dir() {
                stack.push((e.path(), rel));
            } else {
                out.insert(rel);
            }
        }
    }
    out.remove(MANIFEST);
    Ok(out)
}

/// Reads and fully validates a package: every listed file must exist and
/// match its digest, every file on disk must be listed, and every payload
/// must parse.
pub fn read_package(root: &Path) -> Result<(ScenarioPackage, ScenarioResults), PackageError> {
    let manifest = read_manifest(root)?;
    let mut contents: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for e in &manifest {
        let p = root.join(&e.path);
        if !p.is_file() {
            return Err(PackageError::Incomplete(e.path.clone()));
        }
        let bytes = fs::read(&p).map_err(io_err(&p))?;
        if sha256_hex(&bytes) != e.sha256 {
            return Err(PackageError::Corrupt {
                file: e.path.clone(),
                reason: "SHA-256 digest mismatch".into(),
            });
        }
        contents.insert(e.path.clone(), bytes);
    }
    let listed: BTreeSet<String> = manifest.iter().map(|e| e.path.clone()).collect();
    if let Some(extra) = files_on_disk(root)?.difference(&listed).next() {
        return Err(PackageError::Unlisted(extra.clone()));
    }

    let corrupt = |file: &str, reason: String| PackageError::Corrupt {
        file: file.to_string(),
        reason,
    };
    let text = |file: &str| -> Result<String, PackageError> {
        String::from_utf8(contents[file].clone()).map_err(|_| corrupt(file, "not UTF-8".into()))
    };
    let single = |role: Role| -> Result<String, PackageError> {
        let hits: Vec<_> = manifest.iter().filter(|e| e.role == role).collect();
        match hits.as_slice() {
            [one] => text(&one.path),
            [] => Err(PackageError::Incomplete(format!("{} entry", role.as_str()))),
            _ => Err(corrupt(MANIFEST, format!("several {} entries", role.as_str()))),
        }
    };
    let mut results = ScenarioResults {
        scene_xml: single(Role::Scene)?,
        config_json: single(Role::Config)?,
        ..Default::default()
    };

    let by_role = |role: Role| -> BTreeMap<&str, &str> {
        manifest
            .iter()
            .filter(|e| e.role == role)
            .map(|e| (e.id.as_str(), e.path.as_str()))
            .collect()
    };
    let (paths, tensors, metas) = (by_role(Role::Paths), by_role(Role::ChannelTensor), by_role(Role::ChannelMeta));
    for (&id, &file) in &paths {
        let missing = |what: &str| PackageError::Incomplete(format!("{what} for link {id}"));
        let tfile = *tensors.get(id).ok_or_else(|| missing("channel tensor"))?;
        let mfile = *metas.get(id).ok_or_else(|| missing("channel metadata"))?;
        results.links.push(LinkOutput {
            id: id.to_string(),
            paths: read_path_csv(contents[file].as_slice()).map_err(|e| corrupt(file, e))?,
            tensor: read_channel_tensor(&contents[tfile]).map_err(|e| corrupt(tfile, e))?,
            meta: serde_json::from_slice(&contents[mfile]).map_err(|e| corrupt(mfile, e.to_string()))?,
        });
    }
    if let Some((id, _)) = tensors.iter().chain(metas.iter()).find(|(id, _)| !paths.contains_key(*id)) {
        return Err(PackageError::Incomplete(format!("path table for link {id}")));
    }
    let (grids, images) = (by_role(Role::CoverageGrid), by_role(Role::CoverageImage));
    for (&id, &file) in &grids {
        let ifile = *images
            .get(id)
            .ok_or_else(|| PackageError::Incomplete(format!("coverage image for grid {id}")))?;
        results.grids.push(GridOutput {
            id: id.to_string(),
            cells: read_coverage_csv(contents[file].as_slice()).map_err(|e| corrupt(file, e))?,
            image: contents[ifile].clone(),
        });
    }
    if let Some(id) = images.keys().find(|id| !grids.contains_key(*id)) {
        return Err(PackageError::Incomplete(format!("coverage table for grid {id}")));
    }
    Ok((
        ScenarioPackage {
            root: root.to_path_buf(),
            manifest,
        },
        results,
    ))
}
