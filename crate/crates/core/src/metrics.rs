//! Texture and edge measurements used by tests and `report`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{PlaneImage, MAX_INTENSITY};

/// Gradient magnitude above which a pixel counts as a strong edge; three
/// times the default conduction coefficient.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 60.0;

/// Sum of absolute forward differences over all channels, no wrap-around.
pub fn total_variation(img: &PlaneImage) -> f64 {
    let w = img.width();
    img.planes()
        .map(|plane| {
            let mut tv = 0.0;
            for (y, row) in plane.chunks_exact(w).enumerate() {
                tv += row.windows(2).map(|p| (p[1] - p[0]).abs()).sum::<f64>();
                if let Some(below) = plane.get((y + 1) * w..(y + 2) * w) {
                    tv += row.iter().zip(below).map(|(a, b)| (b - a).abs()).sum::<f64>();
                }
            }
            tv
        })
        .sum()
}

/// Forward-difference gradient magnitudes of one channel; differences that
/// would leave the image are zero.
pub fn gradient_magnitude(img: &PlaneImage, channel: usize) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let plane = img.plane(channel);
    let mut out = Vec::with_capacity(plane.len());
    for y in 0..h {
        for x in 0..w {
            let v = plane[y * w + x];
            let gx = if x + 1 < w { plane[y * w + x + 1] - v } else { 0.0 };
            let gy = if y + 1 < h { plane[(y + 1) * w + x] - v } else { 0.0 };
            out.push(gx.hypot(gy));
        }
    }
    out
}

/// Sum of squared gradient magnitudes over all channels.
pub fn gradient_energy(img: &PlaneImage) -> f64 {
    (0..img.channels())
        .map(|c| gradient_magnitude(img, c).iter().map(|g| g * g).sum::<f64>())
        .sum()
}

/// Mean of `min(1, after / before)` gradient ratios over the pixels whose
/// `before` gradient reaches `threshold`.
pub fn edge_preservation(before: &PlaneImage, after: &PlaneImage, threshold: f64) -> Result<f64> {
    before.require_same_shape(after)?;
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::param("threshold", format!("must be positive, got {threshold}")));
    }
    let (mut total, mut count) = (0.0, 0usize);
    for c in 0..before.channels() {
        let gb = gradient_magnitude(before, c);
        let ga = gradient_magnitude(after, c);
        for (b, a) in gb.iter().zip(&ga) {
            if *b >= threshold {
                total += (a / b).min(1.0);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyEdgeSet { threshold });
    }
    Ok(total / count as f64)
}

pub fn mean_squared_error(a: &PlaneImage, b: &PlaneImage) -> Result<f64> {
    a.require_same_shape(b)?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.data().len() as f64)
}

/// Peak signal-to-noise ratio in dB; `f64::INFINITY` for identical images.
pub fn psnr(a: &PlaneImage, b: &PlaneImage) -> Result<f64> {
    let mse = mean_squared_error(a, b)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (MAX_INTENSITY * MAX_INTENSITY / mse).log10())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total_variation: f64,
    pub gradient_energy: f64,
    pub mean_intensity: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_preservation: Option<f64>,
    /// `None` also stands for a lossless pair, since JSON has no infinity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr_db: Option<f64>,
}

impl MetricsReport {
    pub fn of(img: &PlaneImage) -> Self {
        Self {
            total_variation: total_variation(img),
            gradient_energy: gradient_energy(img),
            mean_intensity: (0..img.channels())
                .map(|c| img.channel_sum(c) / img.area() as f64)
                .collect(),
            edge_preservation: None,
            psnr_db: None,
        }
    }

    /// Metrics of `after`, plus pairwise scores against `before`. Edge
    /// preservation stays empty when `before` has no strong edges.
    pub fn compare(before: &PlaneImage, after: &PlaneImage, threshold: f64) -> Result<Self> {
        let mut report = Self::of(after);
        report.edge_preservation = match edge_preservation(before, after, threshold) {
            Ok(v) => Some(v),
            Err(Error::EmptyEdgeSet { .. }) => None,
            Err(e) => return Err(e),
        };
        report.psnr_db = Some(psnr(before, after)?).filter(|v| v.is_finite());
        Ok(report)
    }
}
