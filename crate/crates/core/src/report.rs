//! Summaries of an augmentation manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::codec;
use crate::error::Result;
use crate::metrics::{self, MetricsReport};
use crate::pipeline::{read_manifest, ManifestRecord, RecordStatus};

#[derive(Debug, Clone, Default, Serialize)]
pub struct BranchMetrics {
    pub images: usize,
    pub mean_total_variation: f64,
    /// Mean `TV(output) / TV(input)`; needs the input root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_tv_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_edge_preservation: Option<f64>,
    /// Mean over lossy pairs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_psnr_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestReport {
    pub records: usize,
    pub emitted: usize,
    pub skipped: usize,
    pub branches: BTreeMap<String, usize>,
    pub policies: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, BranchMetrics>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unreadable_outputs: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Where `output_path` entries resolve; metrics are skipped when `None`.
    pub output_root: Option<PathBuf>,
    /// Where `input_path` entries resolve; enables pairwise metrics.
    pub input_root: Option<PathBuf>,
    pub edge_threshold: f64,
}

#[derive(Default)]
struct Accumulator {
    images: usize,
    tv: f64,
    ratio: (f64, usize),
    edges: (f64, usize),
    psnr: (f64, usize),
}

fn mean((sum, n): (f64, usize)) -> Option<f64> {
    (n > 0).then(|| sum / n as f64)
}

pub fn summarize(records: &[ManifestRecord], options: &ReportOptions) -> ManifestReport {
    let mut branches = BTreeMap::new();
    let mut policies = BTreeMap::new();
    let (mut emitted, mut skipped) = (0, 0);
    let mut acc: BTreeMap<String, Accumulator> = BTreeMap::new();
    let mut unreadable_outputs = Vec::new();

    for record in records {
        *policies.entry(record.policy.clone()).or_insert(0) += 1;
        match record.status {
            RecordStatus::Skipped => {
                skipped += 1;
                continue;
            }
            RecordStatus::Ok => emitted += 1,
        }
        let branch = record.branch.clone().unwrap_or_else(|| "unknown".into());
        *branches.entry(branch.clone()).or_insert(0) += 1;

        let (Some(root), Some(rel)) = (&options.output_root, &record.output_path) else {
            continue;
        };
        let Ok(after) = codec::load(&root.join(rel)) else {
            unreadable_outputs.push(rel.clone());
            continue;
        };
        let slot = acc.entry(branch).or_default();
        slot.images += 1;
        let tv_after = metrics::total_variation(&after);
        slot.tv += tv_after;

        let before = options
            .input_root
            .as_ref()
            .and_then(|root| codec::load(&root.join(&record.input_path)).ok());
        if let Some(before) = before {
            let tv_before = metrics::total_variation(&before);
            if tv_before > 0.0 {
                slot.ratio.0 += tv_after / tv_before;
                slot.ratio.1 += 1;
            }
            if let Ok(pair) = MetricsReport::compare(&before, &after, options.edge_threshold) {
                if let Some(e) = pair.edge_preservation {
                    slot.edges.0 += e;
                    slot.edges.1 += 1;
                }
                if let Some(p) = pair.psnr_db {
                    slot.psnr.0 += p;
                    slot.psnr.1 += 1;
                }
            }
        }
    }

    let metrics = acc
        .into_iter()
        .map(|(branch, a)| {
            let m = BranchMetrics {
                images: a.images,
                mean_total_variation: a.tv / a.images.max(1) as f64,
                mean_tv_ratio: mean(a.ratio),
                mean_edge_preservation: mean(a.edges),
                mean_psnr_db: mean(a.psnr),
            };
            (branch, m)
        })
        .collect();

    ManifestReport {
        records: records.len(),
        emitted,
        skipped,
        branches,
        policies,
        metrics,
        unreadable_outputs,
    }
}

pub fn report_manifest(manifest: &Path, options: &ReportOptions) -> Result<ManifestReport> {
    let records = read_manifest(manifest)?;
    Ok(summarize(&records, options))
}
