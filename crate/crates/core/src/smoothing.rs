//! Gaussian blur, bilateral filter and median filter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{for_each_row, Exec};
use crate::raster::{BoundaryMode, PlaneImage};

pub const DEFAULT_SIGMA_SPATIAL: f64 = 5.0;
pub const DEFAULT_SIGMA_RANGE: f64 = 50.0;

/// Gaussian kernel of half-width `radius`.
///
/// A bare radius maps to `sigma = radius / 3`, which keeps about 99.7% of the
/// continuous kernel mass inside the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    radius: usize,
    sigma: f64,
}

impl GaussianSpec {
    pub fn new(radius: usize, sigma: f64) -> Result<Self> {
        if radius < 1 {
            return Err(Error::param("radius", "kernel radius must be at least 1"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(Self { radius, sigma })
    }

    pub fn from_radius(radius: usize) -> Result<Self> {
        Self::new(radius, radius as f64 / 3.0)
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Normalized, symmetric 1-D kernel of length `2 * radius + 1`.
pub fn gaussian_kernel(spec: &GaussianSpec) -> Vec<f64> {
    let r = spec.radius as isize;
    let denom = 2.0 * spec.sigma * spec.sigma;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= total);
    k
}

/// Separable blur: horizontal pass, then vertical, replicate boundary.
pub fn gaussian_blur(img: &PlaneImage, spec: &GaussianSpec) -> PlaneImage {
    gaussian_blur_with(img, spec, Exec::default())
}

pub fn gaussian_blur_with(img: &PlaneImage, spec: &GaussianSpec, exec: Exec) -> PlaneImage {
    let kernel = gaussian_kernel(spec);
    let r = spec.radius as isize;
    let (w, h) = (img.width(), img.height());
    let edge = BoundaryMode::Replicate;
    let mut tmp = vec![0.0; img.area()];
    img.map_planes(|src, dst| {
        for_each_row(exec, &mut tmp, w, |y, out| {
            let row = &src[y * w..(y + 1) * w];
            for (x, o) in out.iter_mut().enumerate() {
                *o = kernel
                    .iter()
                    .enumerate()
                    .map(|(i, k)| k * row[edge.resolve(x as isize + i as isize - r, w)])
                    .sum();
            }
        });
        let tmp = &tmp[..];
        for_each_row(exec, dst, w, |y, out| {
            out.fill(0.0);
            for (i, k) in kernel.iter().enumerate() {
                let sy = edge.resolve(y as isize + i as isize - r, h);
                let row = &tmp[sy * w..(sy + 1) * w];
                for (o, v) in out.iter_mut().zip(row) {
                    *o += k * v;
                }
            }
        });
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilateralSpec {
    sigma_spatial: f64,
    sigma_range: f64,
}

impl BilateralSpec {
    pub fn new(sigma_spatial: f64, sigma_range: f64) -> Result<Self> {
        for (name, v) in [("sigma_s", sigma_spatial), ("sigma_r", sigma_range)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self {
            sigma_spatial,
            sigma_range,
        })
    }

    pub fn sigma_spatial(&self) -> f64 {
        self.sigma_spatial
    }

    pub fn sigma_range(&self) -> f64 {
        self.sigma_range
    }

    /// `ceil(3 * sigma_spatial)`, at least 1.
    pub fn window_radius(&self) -> usize {
        ((3.0 * self.sigma_spatial).ceil() as usize).max(1)
    }

    /// The Gaussian blur this filter degenerates to as `sigma_range` grows.
    pub fn spatial_gaussian(&self) -> GaussianSpec {
        GaussianSpec {
            radius: self.window_radius(),
            sigma: self.sigma_spatial,
        }
    }
}

impl Default for BilateralSpec {
    fn default() -> Self {
        Self {
            sigma_spatial: DEFAULT_SIGMA_SPATIAL,
            sigma_range: DEFAULT_SIGMA_RANGE,
        }
    }
}

pub fn bilateral(img: &PlaneImage, spec: &BilateralSpec) -> PlaneImage {
    bilateral_with(img, spec, Exec::default())
}

/// Per-channel bilateral filter over a square window, replicate boundary.
pub fn bilateral_with(img: &PlaneImage, spec: &BilateralSpec, exec: Exec) -> PlaneImage {
    let r = spec.window_radius() as isize;
    let side = (2 * r + 1) as usize;
    let spatial_denom = 2.0 * spec.sigma_spatial * spec.sigma_spatial;
    let range_scale = -1.0 / (2.0 * spec.sigma_range * spec.sigma_range);
    let spatial: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx * dx + dy * dy) as f64))
        .map(|d2| (-d2 / spatial_denom).exp())
        .collect();
    let (w, h) = (img.width(), img.height());
    let edge = BoundaryMode::Replicate;
    img.map_planes(|src, dst| {
        for_each_row(exec, dst, w, |y, out| {
            for (x, o) in out.iter_mut().enumerate() {
                let center = src[y * w + x];
                let (mut acc, mut norm) = (0.0, 0.0);
                for (wy, weights) in spatial.chunks_exact(side).enumerate() {
                    let sy = edge.resolve(y as isize + wy as isize - r, h);
                    let row = &src[sy * w..(sy + 1) * w];
                    for (wx, ws) in weights.iter().enumerate() {
                        let v = row[edge.resolve(x as isize + wx as isize - r, w)];
                        let d = v - center;
                        let wt = ws * (d * d * range_scale).exp();
                        acc += wt * v;
                        norm += wt;
                    }
                }
                *o = acc / norm;
            }
        });
    })
}

pub fn median_filter(img: &PlaneImage, window_radius: usize) -> Result<PlaneImage> {
    median_filter_with(img, window_radius, Exec::default())
}

/// Median over the `(2r+1)²` replicate-padded window of a single-channel image.
pub fn median_filter_with(img: &PlaneImage, window_radius: usize, exec: Exec) -> Result<PlaneImage> {
    img.require_channels(1)?;
    let r = window_radius as isize;
    let count = (2 * window_radius + 1).pow(2);
    let (w, h) = (img.width(), img.height());
    let edge = BoundaryMode::Replicate;
    Ok(img.map_planes(|src, dst| {
        for_each_row(exec, dst, w, |y, out| {
            let mut window = Vec::with_capacity(count);
            for (x, o) in out.iter_mut().enumerate() {
                window.clear();
                for dy in -r..=r {
                    let sy = edge.resolve(y as isize + dy, h);
                    for dx in -r..=r {
                        window.push(src[sy * w + edge.resolve(x as isize + dx, w)]);
                    }
                }
                let (_, m, _) = window.select_nth_unstable_by(count / 2, f64::total_cmp);
                *o = *m;
            }
        });
    }))
}
