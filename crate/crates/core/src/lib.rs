//! Texture-suppressing image filters and the seeded augmentation policies
//! built on them.
//!
//! All filters work on [`PlaneImage`], a planar `f64` raster on the 0..=255
//! scale, and use replicate (zero-flux) boundaries. Kernels are row-parallel
//! when the `parallel` feature is on; every kernel reads only its input
//! buffer, so results are identical for any thread count.

pub mod cartoon;
pub mod codec;
pub mod diffusion;
mod error;
pub mod metrics;
mod par;
pub mod pipeline;
pub mod policy;
pub mod raster;
pub mod report;
pub mod rng;
pub mod smoothing;

pub use cartoon::{adaptive_threshold, cartoonize, CartoonSpec};
pub use codec::OutputFormat;
pub use diffusion::{conduction, diffuse, diffuse_step, ConductionFn, ConductionKind, DiffusionSpec};
pub use error::{Error, Result};
pub use metrics::{edge_preservation, psnr, total_variation, MetricsReport};
pub use par::Exec;
pub use pipeline::{enumerate_inputs, run, ManifestRecord, PipelineConfig, RunSummary};
pub use policy::{FilterSpec, MixPolicy, PolicyKind, PolicySpec};
pub use raster::{BoundaryMode, PlaneImage};
pub use rng::{SeededRng, UniformSource};
pub use smoothing::{bilateral, gaussian_blur, gaussian_kernel, median_filter, BilateralSpec, GaussianSpec};
