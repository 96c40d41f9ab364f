//! Planar floating-point raster shared by every filter.

use crate::error::{Error, Result};

/// Largest representable intensity; pixel values live on the byte scale.
pub const MAX_INTENSITY: f64 = 255.0;

/// ITU-R BT.601 luma weights for R, G, B.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Out-of-range read policy for neighborhood operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// Reads past the edge return the nearest in-range pixel (zero flux).
    #[default]
    Replicate,
}

impl BoundaryMode {
    #[inline]
    pub fn resolve(self, coord: isize, len: usize) -> usize {
        match self {
            BoundaryMode::Replicate => coord.clamp(0, len as isize - 1) as usize,
        }
    }
}

/// Multi-channel image stored one channel plane after another, each plane
/// row-major. Intensities are `f64` on the 0..=255 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl PlaneImage {
    /// Builds an image from planar data, validating geometry and range.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_geometry(width, height, channels)?;
        if data.len() != width * height * channels {
            return Err(Error::Geometry(format!(
                "{} samples supplied for a {width}x{height}x{channels} image",
                data.len()
            )));
        }
        if let Some(bad) = data
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > MAX_INTENSITY)
        {
            return Err(Error::Geometry(format!(
                "intensity {bad} outside [0, {MAX_INTENSITY}]"
            )));
        }
        Ok(Self::from_raw(width, height, channels, data))
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        check_geometry(width, height, channels)?;
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds an image by evaluating `f(channel, x, y)` for every sample.
    pub fn from_fn<F>(width: usize, height: usize, channels: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        check_geometry(width, height, channels)?;
        let mut data = Vec::with_capacity(width * height * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, x, y));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    /// Unchecked constructor for filter outputs whose inputs were validated.
    pub(crate) fn from_raw(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    /// Widens interleaved 8-bit samples (`RGBRGB...` or gray) to intensities.
    pub fn from_u8(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        check_geometry(width, height, channels)?;
        let area = width * height;
        if bytes.len() != area * channels {
            return Err(Error::Geometry(format!(
                "{} bytes supplied for a {width}x{height}x{channels} image",
                bytes.len()
            )));
        }
        let mut data = vec![0.0; area * channels];
        for (i, px) in bytes.chunks_exact(channels).enumerate() {
            for (c, &b) in px.iter().enumerate() {
                data[c * area + i] = f64::from(b);
            }
        }
        Ok(Self::from_raw(width, height, channels, data))
    }

    /// Interleaved bytes, rounding half away from zero and clamping to 0..=255.
    pub fn to_u8(&self) -> Vec<u8> {
        let area = self.area();
        let mut out = vec![0u8; area * self.channels];
        for c in 0..self.channels {
            for (i, &v) in self.plane(c).iter().enumerate() {
                out[i * self.channels + c] = quantize(v);
            }
        }
        out
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        let area = self.area();
        &self.data[channel * area..(channel + 1) * area]
    }

    pub fn planes(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.area())
    }

    #[inline]
    pub fn get(&self, channel: usize, x: usize, y: usize) -> f64 {
        self.data[channel * self.area() + y * self.width + x]
    }

    /// Value at `(x + dx, y + dy)` with out-of-range coordinates resolved by `mode`.
    #[inline]
    pub fn neighbor(
        &self,
        channel: usize,
        x: usize,
        y: usize,
        dx: isize,
        dy: isize,
        mode: BoundaryMode,
    ) -> f64 {
        let nx = mode.resolve(x as isize + dx, self.width);
        let ny = mode.resolve(y as isize + dy, self.height);
        self.get(channel, nx, ny)
    }

    pub fn require_channels(&self, expected: usize) -> Result<()> {
        if self.channels == expected {
            Ok(())
        } else {
            Err(Error::ChannelCount {
                expected,
                actual: self.channels,
            })
        }
    }

    pub fn require_same_shape(&self, other: &PlaneImage) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.shape(),
                right: other.shape(),
            })
        }
    }

    /// BT.601 luma of a 3-channel image.
    pub fn to_grayscale(&self) -> Result<PlaneImage> {
        self.require_channels(3)?;
        let (r, g, b) = (self.plane(0), self.plane(1), self.plane(2));
        let [wr, wg, wb] = LUMA_WEIGHTS;
        let data = r
            .iter()
            .zip(g)
            .zip(b)
            .map(|((&r, &g), &b)| wr * r + wg * g + wb * b)
            .collect();
        Ok(Self::from_raw(self.width, self.height, 1, data))
    }

    /// Replicates a single plane into three identical channels.
    pub fn gray_to_rgb(&self) -> Result<PlaneImage> {
        self.require_channels(1)?;
        Ok(Self::from_raw(
            self.width,
            self.height,
            3,
            self.data.repeat(3),
        ))
    }

    pub fn min_max(&self, channel: usize) -> (f64, f64) {
        self.plane(channel)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn channel_sum(&self, channel: usize) -> f64 {
        self.plane(channel).iter().sum()
    }

    /// Mirrors left to right.
    pub fn flip_horizontal(&self) -> PlaneImage {
        self.remap(self.width, self.height, |x, y| (self.width - 1 - x, y))
    }

    /// Mirrors top to bottom.
    pub fn flip_vertical(&self) -> PlaneImage {
        self.remap(self.width, self.height, |x, y| (x, self.height - 1 - y))
    }

    /// Rotates a quarter turn clockwise; width and height swap.
    pub fn rotate90(&self) -> PlaneImage {
        // output (x, y) comes from input (y, h - 1 - x)
        self.remap(self.height, self.width, |x, y| (y, self.height - 1 - x))
    }

    fn remap<F>(&self, width: usize, height: usize, src: F) -> PlaneImage
    where
        F: Fn(usize, usize) -> (usize, usize),
    {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.channels {
            for y in 0..height {
                for x in 0..width {
                    let (sx, sy) = src(x, y);
                    data.push(self.get(c, sx, sy));
                }
            }
        }
        Self::from_raw(width, height, self.channels, data)
    }

    /// Copies the `width`×`height` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<PlaneImage> {
        check_geometry(width, height, self.channels)?;
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::Geometry(format!(
                "crop {width}x{height}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height * self.channels);
        for plane in self.planes() {
            for y in y0..y0 + height {
                let row = y * self.width;
                data.extend_from_slice(&plane[row + x0..row + x0 + width]);
            }
        }
        Ok(Self::from_raw(width, height, self.channels, data))
    }

    /// Writes `patch` over this image with its top-left corner at `(x0, y0)`.
    pub fn paste(&mut self, x0: usize, y0: usize, patch: &PlaneImage) -> Result<()> {
        if patch.channels != self.channels
            || x0 + patch.width > self.width
            || y0 + patch.height > self.height
        {
            return Err(Error::Geometry(format!(
                "patch {}x{}x{} at +{x0}+{y0} does not fit {}x{}x{}",
                patch.width, patch.height, patch.channels, self.width, self.height, self.channels
            )));
        }
        let area = self.area();
        for c in 0..self.channels {
            let src = patch.plane(c);
            let dst = &mut self.data[c * area..(c + 1) * area];
            for (py, src_row) in src.chunks_exact(patch.width).enumerate() {
                let start = (y0 + py) * self.width + x0;
                dst[start..start + patch.width].copy_from_slice(src_row);
            }
        }
        Ok(())
    }

    /// Applies a plane-to-plane kernel to every channel.
    pub(crate) fn map_planes<F>(&self, mut f: F) -> PlaneImage
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let area = self.area();
        let mut data = vec![0.0; self.data.len()];
        for (src, dst) in self.data.chunks_exact(area).zip(data.chunks_exact_mut(area)) {
            f(src, dst);
        }
        Self::from_raw(self.width, self.height, self.channels, data)
    }
}

#[inline]
fn quantize(v: f64) -> u8 {
    // `as` saturates, and maps NaN to 0
    v.round().clamp(0.0, MAX_INTENSITY) as u8
}

fn check_geometry(width: usize, height: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Geometry(format!("empty image {width}x{height}")));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::Geometry(format!(
            "{channels} channels; only 1 or 3 are supported"
        )));
    }
    Ok(())
}
