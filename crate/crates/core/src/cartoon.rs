//! Cartoonization: bilateral palette reduction masked by an adaptive-threshold
//! edge map computed on the median-filtered luma.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{for_each_row, Exec};
use crate::raster::{BoundaryMode, PlaneImage, MAX_INTENSITY};
use crate::smoothing::{bilateral_with, median_filter_with, BilateralSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartoonSpec {
    pub bilateral_passes: u32,
    pub bilateral: BilateralSpec,
    /// 3 gives a 7×7 median window.
    pub median_radius: usize,
    /// 4 gives a 9×9 threshold block.
    pub thresh_block_radius: usize,
    pub thresh_offset: f64,
}

impl Default for CartoonSpec {
    fn default() -> Self {
        Self {
            bilateral_passes: 4,
            bilateral: BilateralSpec::default(),
            median_radius: 3,
            thresh_block_radius: 4,
            thresh_offset: 2.0,
        }
    }
}

impl CartoonSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bilateral_passes < 1 {
            return Err(Error::param("passes", "at least one bilateral pass is required"));
        }
        if !self.thresh_offset.is_finite() {
            return Err(Error::param("offset", "must be finite"));
        }
        Ok(())
    }
}

pub fn adaptive_threshold(img: &PlaneImage, block_radius: usize, offset: f64) -> Result<PlaneImage> {
    adaptive_threshold_with(img, block_radius, offset, Exec::default())
}

/// Binary mask: 255 where a pixel exceeds its local box mean minus `offset`,
/// 0 elsewhere. The box is `(2r+1)²` with replicate boundary.
pub fn adaptive_threshold_with(
    img: &PlaneImage,
    block_radius: usize,
    offset: f64,
    exec: Exec,
) -> Result<PlaneImage> {
    img.require_channels(1)?;
    let r = block_radius as isize;
    let count = ((2 * block_radius + 1) * (2 * block_radius + 1)) as f64;
    let (w, h) = (img.width(), img.height());
    let edge = BoundaryMode::Replicate;
    let mut col_sums = vec![0.0; img.area()];
    Ok(img.map_planes(|src, dst| {
        for_each_row(exec, &mut col_sums, w, |y, out| {
            out.fill(0.0);
            for dy in -r..=r {
                let sy = edge.resolve(y as isize + dy, h);
                for (o, v) in out.iter_mut().zip(&src[sy * w..(sy + 1) * w]) {
                    *o += v;
                }
            }
        });
        let col_sums = &col_sums[..];
        for_each_row(exec, dst, w, |y, out| {
            let sums = &col_sums[y * w..(y + 1) * w];
            for (x, o) in out.iter_mut().enumerate() {
                let total: f64 = (-r..=r)
                    .map(|dx| sums[edge.resolve(x as isize + dx, w)])
                    .sum();
                let mean = total / count;
                *o = if src[y * w + x] > mean - offset {
                    MAX_INTENSITY
                } else {
                    0.0
                };
            }
        });
    }))
}

/// Edge mask of an RGB image: luma, median, then adaptive threshold.
pub fn edge_mask(img: &PlaneImage, spec: &CartoonSpec, exec: Exec) -> Result<PlaneImage> {
    let gray = img.to_grayscale()?;
    let smoothed = median_filter_with(&gray, spec.median_radius, exec)?;
    adaptive_threshold_with(&smoothed, spec.thresh_block_radius, spec.thresh_offset, exec)
}

/// `bilateral_passes` rounds of bilateral filtering.
pub fn palette(img: &PlaneImage, spec: &CartoonSpec, exec: Exec) -> PlaneImage {
    let mut color = bilateral_with(img, &spec.bilateral, exec);
    for _ in 1..spec.bilateral_passes {
        color = bilateral_with(&color, &spec.bilateral, exec);
    }
    color
}

pub fn cartoonize(img: &PlaneImage, spec: &CartoonSpec) -> Result<PlaneImage> {
    cartoonize_with(img, spec, Exec::default())
}

pub fn cartoonize_with(img: &PlaneImage, spec: &CartoonSpec, exec: Exec) -> Result<PlaneImage> {
    img.require_channels(3)?;
    spec.validate()?;
    let mask = edge_mask(img, spec, exec)?;
    let color = palette(img, spec, exec);
    let keep = mask.plane(0);
    let mut data = color.into_data();
    for plane in data.chunks_exact_mut(img.area()) {
        for (v, &m) in plane.iter_mut().zip(keep) {
            if m == 0.0 {
                *v = 0.0;
            }
        }
    }
    Ok(PlaneImage::from_raw(img.width(), img.height(), 3, data))
}
