//! PNG and JPEG decoding/encoding.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::PlaneImage;

pub const JPEG_QUALITY: u8 = 95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Png,
    Jpeg,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Png => "png",
            OutputFormat::Jpeg => "jpg",
        }
    }

    /// Guesses the format from a file extension (case-insensitive).
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(OutputFormat::Png),
            "jpg" | "jpeg" => Some(OutputFormat::Jpeg),
            _ => None,
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Png => "png",
            OutputFormat::Jpeg => "jpeg",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(OutputFormat::Png),
            "jpeg" | "jpg" => Ok(OutputFormat::Jpeg),
            other => Err(Error::param("format", format!("unknown format `{other}`"))),
        }
    }
}

/// Decodes an encoded PNG/JPEG buffer. Gray sources give one channel, color
/// sources three; alpha is discarded.
pub fn decode(bytes: &[u8], origin: &Path) -> Result<PlaneImage> {
    let decoded = image::load_from_memory(bytes).map_err(|e| Error::Decode {
        path: origin.to_path_buf(),
        reason: e.to_string(),
    })?;
    from_dynamic(decoded)
}

pub fn load(path: &Path) -> Result<PlaneImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

fn from_dynamic(img: DynamicImage) -> Result<PlaneImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if img.color().has_color() {
        PlaneImage::from_u8(w, h, 3, img.to_rgb8().as_raw())
    } else {
        PlaneImage::from_u8(w, h, 1, img.to_luma8().as_raw())
    }
}

pub fn encode(img: &PlaneImage, format: OutputFormat) -> Result<Vec<u8>> {
    let bytes = img.to_u8();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let color = if img.channels() == 3 {
        ExtendedColorType::Rgb8
    } else {
        ExtendedColorType::L8
    };
    let mut out = Vec::new();
    let result = match format {
        OutputFormat::Png => PngEncoder::new(&mut out).write_image(&bytes, w, h, color),
        OutputFormat::Jpeg => {
            JpegEncoder::new_with_quality(&mut out, JPEG_QUALITY).write_image(&bytes, w, h, color)
        }
    };
    result.map_err(|e| Error::Encode {
        path: Default::default(),
        reason: e.to_string(),
    })?;
    Ok(out)
}

pub fn save(img: &PlaneImage, path: &Path, format: OutputFormat) -> Result<()> {
    let bytes = encode(img, format).map_err(|e| match e {
        Error::Encode { reason, .. } => Error::Encode {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
