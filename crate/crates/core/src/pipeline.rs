//! Deterministic batch augmentation over a directory tree.
//!
//! Inputs are ordered by their byte-wise relative path and each input draws
//! from its own random stream derived from `(seed, file_index)`, so outputs
//! and manifest contents do not depend on the number of workers. Results are
//! gathered in input order and written through a single manifest writer.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::codec::{self, OutputFormat};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::policy::{flatten_into, PolicySpec};
use crate::rng::{mix_seed, SeededRng};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputFile {
    pub index: usize,
    pub path: PathBuf,
    /// Path below the input root, `/`-separated.
    pub relative: String,
}

/// Result of walking an input tree. Entries that could not be read during
/// the walk are kept aside so they can be reported as skips.
#[derive(Debug, Default)]
pub struct Listing {
    pub files: Vec<InputFile>,
    pub unreadable: Vec<(PathBuf, String)>,
}

fn is_image(path: &Path) -> bool {
    OutputFormat::from_path(path).is_some()
}

fn relative_key(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Recursively lists `*.png`, `*.jpg` and `*.jpeg` under `dir`, sorted by
/// relative path bytes, and numbers them in that order.
pub fn scan_inputs(dir: &Path) -> Result<Listing> {
    let mut found = Vec::new();
    let mut unreadable = Vec::new();
    for entry in WalkDir::new(dir).follow_links(true) {
        match entry {
            Ok(entry) => {
                if entry.file_type().is_file() && is_image(entry.path()) {
                    let relative = relative_key(dir, entry.path());
                    found.push((relative, entry.into_path()));
                }
            }
            Err(err) if err.depth() == 0 => {
                return Err(Error::Listing {
                    path: dir.to_path_buf(),
                    reason: err.to_string(),
                });
            }
            Err(err) => {
                let path = err.path().map(Path::to_path_buf).unwrap_or_default();
                unreadable.push((path, err.to_string()));
            }
        }
    }
    found.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
    let files = found
        .into_iter()
        .enumerate()
        .map(|(index, (relative, path))| InputFile {
            index,
            path,
            relative,
        })
        .collect();
    Ok(Listing { files, unreadable })
}

pub fn enumerate_inputs(dir: &Path) -> Result<Vec<InputFile>> {
    Ok(scan_inputs(dir)?.files)
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub policy: PolicySpec,
    pub seed: u64,
    pub workers: usize,
    pub output_format: OutputFormat,
    /// Defaults to `<output_dir>/manifest.jsonl`.
    pub manifest_path: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(input_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, policy: PolicySpec) -> Self {
        Self {
            input_dir: input_dir.into(),
            output_dir: output_dir.into(),
            policy,
            seed: 0,
            workers: 1,
            output_format: OutputFormat::Png,
            manifest_path: None,
        }
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.manifest_path
            .clone()
            .unwrap_or_else(|| self.output_dir.join(MANIFEST_FILE))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.input_dir.is_dir() {
            return Err(Error::Listing {
                path: self.input_dir.clone(),
                reason: "not a directory".into(),
            });
        }
        if self.workers < 1 {
            return Err(Error::param("workers", "at least one worker is required"));
        }
        self.policy.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    Skipped,
}

/// One manifest line: an emitted image, or a skipped input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub input_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_index: Option<usize>,
    pub policy: String,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal: Option<usize>,
    /// Uniform draws behind the branch decision, for replay.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub draws: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub elapsed_ms: f64,
}

impl ManifestRecord {
    fn skipped(input_path: String, file_index: Option<usize>, policy: &str, reason: String) -> Self {
        Self {
            input_path,
            file_index,
            policy: policy.to_string(),
            status: RecordStatus::Skipped,
            stream_seed: None,
            branch: None,
            ordinal: None,
            draws: Vec::new(),
            params: BTreeMap::new(),
            output_path: None,
            output_sha256: None,
            reason: Some(reason),
            elapsed_ms: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub processed: usize,
    pub emitted: usize,
    pub skipped: usize,
    pub wall_time: Duration,
    pub manifest_path: PathBuf,
}

impl RunSummary {
    /// Process exit code: nonzero iff any input was skipped.
    pub fn exit_code(&self) -> i32 {
        if self.skipped > 0 {
            1
        } else {
            0
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn output_relative(input: &InputFile, branch: &str, ordinal: usize, format: OutputFormat) -> String {
    let rel = Path::new(&input.relative);
    let stem = rel
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = format!("{stem}__{branch}{ordinal}.{}", format.extension());
    match input.relative.rfind('/') {
        Some(cut) => format!("{}/{name}", &input.relative[..cut]),
        None => name,
    }
}

fn process_one(config: &PipelineConfig, input: &InputFile) -> Vec<ManifestRecord> {
    let start = Instant::now();
    let policy_tag = config.policy.kind().tag();
    let skip = |reason: String| {
        vec![ManifestRecord::skipped(
            input.relative.clone(),
            Some(input.index),
            policy_tag,
            reason,
        )]
    };

    let img = match codec::load(&input.path).and_then(|img| {
        config.policy.check_input(&img)?;
        Ok(img)
    }) {
        Ok(img) => img,
        Err(e) => return skip(e.to_string()),
    };
    let stream_seed = mix_seed(config.seed, input.index as u64);
    let mut rng = SeededRng::new(stream_seed);
    let plan = config.policy.plan(&mut rng);
    let outputs = match config.policy.realize(&img, &plan.filters, Exec::default()) {
        Ok(outputs) => outputs,
        Err(e) => return skip(e.to_string()),
    };

    let mut pending = Vec::with_capacity(outputs.len());
    for (ordinal, out) in outputs.iter().enumerate() {
        let rel = output_relative(input, out.branch, ordinal, config.output_format);
        let bytes = match codec::encode(&out.image, config.output_format) {
            Ok(bytes) => bytes,
            Err(e) => return skip(e.to_string()),
        };
        let target = config.output_dir.join(&rel);
        let written = target
            .parent()
            .map_or(Ok(()), fs::create_dir_all)
            .and_then(|_| fs::write(&target, &bytes));
        if let Err(e) = written {
            return skip(Error::io(&target, e).to_string());
        }
        let mut params = BTreeMap::new();
        if out.filters.len() == 1 {
            params = out.filters[0].params();
        } else {
            for (i, f) in out.filters.iter().enumerate() {
                let value = serde_json::to_value(f).expect("filter specs serialize");
                flatten_into(&format!("patch{i}"), &value, &mut params);
            }
        }
        pending.push((ordinal, out.branch, params, rel, sha256_hex(&bytes)));
    }

    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    pending
        .into_iter()
        .map(|(ordinal, branch, params, rel, digest)| ManifestRecord {
            input_path: input.relative.clone(),
            file_index: Some(input.index),
            policy: policy_tag.to_string(),
            status: RecordStatus::Ok,
            stream_seed: Some(stream_seed),
            branch: Some(branch.to_string()),
            ordinal: Some(ordinal),
            draws: plan.draws.clone(),
            params,
            output_path: Some(rel),
            output_sha256: Some(digest),
            reason: None,
            elapsed_ms,
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn process_all(config: &PipelineConfig, files: &[InputFile]) -> Result<Vec<Vec<ManifestRecord>>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    Ok(pool.install(|| files.par_iter().map(|f| process_one(config, f)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn process_all(config: &PipelineConfig, files: &[InputFile]) -> Result<Vec<Vec<ManifestRecord>>> {
    Ok(files.iter().map(|f| process_one(config, f)).collect())
}

/// Runs the policy over every input and writes outputs plus a JSON-lines
/// manifest. Per-file failures become `skipped` records.
pub fn run(config: &PipelineConfig) -> Result<RunSummary> {
    let start = Instant::now();
    config.validate()?;
    let listing = scan_inputs(&config.input_dir)?;
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;

    let per_file = process_all(config, &listing.files)?;

    let manifest_path = config.manifest_path();
    if let Some(parent) = manifest_path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut writer = BufWriter::new(file);
    let (mut processed, mut emitted, mut skipped) = (0, 0, 0);
    let policy_tag = config.policy.kind().tag();
    let walk_skips = listing.unreadable.into_iter().map(|(path, reason)| {
        vec![ManifestRecord::skipped(
            path.to_string_lossy().into_owned(),
            None,
            policy_tag,
            reason,
        )]
    });
    for records in per_file.into_iter().chain(walk_skips) {
        if records.first().is_some_and(|r| r.status == RecordStatus::Skipped) {
            skipped += 1;
        } else {
            processed += 1;
            emitted += records.len();
        }
        for record in &records {
            let line = serde_json::to_string(record).expect("manifest records serialize");
            writeln!(writer, "{line}").map_err(|e| Error::io(&manifest_path, e))?;
        }
    }
    writer.flush().map_err(|e| Error::io(&manifest_path, e))?;

    Ok(RunSummary {
        processed,
        emitted,
        skipped,
        wall_time: start.elapsed(),
        manifest_path,
    })
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| Error::Manifest {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}
