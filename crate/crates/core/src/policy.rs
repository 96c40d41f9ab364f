//! Stochastic augmentation policies.
//!
//! * `Double` emits the original plus one diffused copy of every image.
//! * `MoCoV2Mix` picks one branch per image: diffusion with a random
//!   iteration count, Gaussian blur with a random radius, or identity.
//! * `PatchJigsaw` cuts the image into a 3×3 grid and diffuses each patch
//!   independently with a coin flip.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cartoon::{cartoonize_with, CartoonSpec};
use crate::diffusion::{diffuse_with, DiffusionSpec};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::raster::PlaneImage;
use crate::rng::UniformSource;
use crate::smoothing::{bilateral_with, gaussian_blur_with, BilateralSpec, GaussianSpec};

pub const JIGSAW_GRID: usize = 3;

/// One fully parameterized filter invocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum FilterSpec {
    Identity,
    Diffusion(DiffusionSpec),
    Gaussian(GaussianSpec),
    Bilateral(BilateralSpec),
    Cartoon(CartoonSpec),
}

impl FilterSpec {
    pub fn branch(&self) -> &'static str {
        match self {
            FilterSpec::Identity => "identity",
            FilterSpec::Diffusion(_) => "diffusion",
            FilterSpec::Gaussian(_) => "gaussian",
            FilterSpec::Bilateral(_) => "bilateral",
            FilterSpec::Cartoon(_) => "cartoon",
        }
    }

    pub fn apply(&self, img: &PlaneImage) -> Result<PlaneImage> {
        self.apply_with(img, Exec::default())
    }

    pub fn apply_with(&self, img: &PlaneImage, exec: Exec) -> Result<PlaneImage> {
        Ok(match self {
            FilterSpec::Identity => img.clone(),
            FilterSpec::Diffusion(spec) => diffuse_with(img, spec, exec),
            FilterSpec::Gaussian(spec) => gaussian_blur_with(img, spec, exec),
            FilterSpec::Bilateral(spec) => bilateral_with(img, spec, exec),
            FilterSpec::Cartoon(spec) => cartoonize_with(img, spec, exec)?,
        })
    }

    /// Parameters flattened to dotted keys, e.g. `conduction.scale`.
    pub fn params(&self) -> BTreeMap<String, Value> {
        let mut out = BTreeMap::new();
        let value = serde_json::to_value(self).expect("filter specs serialize");
        flatten_into("", &value, &mut out);
        out
    }
}

pub(crate) fn flatten_into(prefix: &str, value: &Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

/// Inclusive integer range drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub lo: u32,
    pub hi: u32,
}

impl IntRange {
    pub fn new(lo: u32, hi: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::param("range", format!("empty range {lo}..={hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, v: u32) -> bool {
        (self.lo..=self.hi).contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixPolicy {
    pub p_diffusion: f64,
    pub p_gaussian: f64,
    /// Conduction and time step of the diffusion branch; its iteration count
    /// is replaced by a draw from `iterations`.
    pub diffusion: DiffusionSpec,
    pub iterations: IntRange,
    /// Gaussian half-width, with `sigma = radius / 3`.
    pub radius: IntRange,
}

impl Default for MixPolicy {
    fn default() -> Self {
        Self {
            p_diffusion: 0.5,
            p_gaussian: 0.25,
            diffusion: DiffusionSpec::default(),
            iterations: IntRange { lo: 10, hi: 20 },
            radius: IntRange { lo: 10, hi: 20 },
        }
    }
}

impl MixPolicy {
    pub fn p_identity(&self) -> f64 {
        1.0 - self.p_diffusion - self.p_gaussian
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Double,
    #[serde(rename = "mocov2")]
    MoCoV2Mix,
    PatchJigsaw,
}

impl PolicyKind {
    pub fn tag(self) -> &'static str {
        match self {
            PolicyKind::Double => "double",
            PolicyKind::MoCoV2Mix => "mocov2",
            PolicyKind::PatchJigsaw => "patch-jigsaw",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [PolicyKind::Double, PolicyKind::MoCoV2Mix, PolicyKind::PatchJigsaw]
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::param("policy", format!("unknown policy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PolicySpec {
    Double { diffusion: DiffusionSpec },
    MoCoV2Mix(MixPolicy),
    PatchJigsaw { diffusion: DiffusionSpec, p_filtered: f64 },
}

/// What a policy decided for one input: the filters to run and the raw
/// uniform draws behind each branch decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub filters: Vec<FilterSpec>,
    pub draws: Vec<f64>,
}

/// One emitted image with the branch that produced it.
#[derive(Debug, Clone)]
pub struct Augmented {
    pub image: PlaneImage,
    pub branch: &'static str,
    pub filters: Vec<FilterSpec>,
}

impl PolicySpec {
    /// The policy with its reference parameters.
    pub fn default_for(kind: PolicyKind) -> Self {
        match kind {
            PolicyKind::Double => PolicySpec::Double {
                diffusion: DiffusionSpec::default(),
            },
            PolicyKind::MoCoV2Mix => PolicySpec::MoCoV2Mix(MixPolicy::default()),
            PolicyKind::PatchJigsaw => PolicySpec::PatchJigsaw {
                diffusion: DiffusionSpec::default(),
                p_filtered: 0.5,
            },
        }
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicySpec::Double { .. } => PolicyKind::Double,
            PolicySpec::MoCoV2Mix(_) => PolicyKind::MoCoV2Mix,
            PolicySpec::PatchJigsaw { .. } => PolicyKind::PatchJigsaw,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &'static str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::param(name, format!("probability {p} outside [0, 1]")))
            }
        };
        match self {
            PolicySpec::Double { .. } => Ok(()),
            PolicySpec::MoCoV2Mix(mix) => {
                unit("p_diffusion", mix.p_diffusion)?;
                unit("p_gaussian", mix.p_gaussian)?;
                if mix.p_diffusion + mix.p_gaussian > 1.0 + 1e-12 {
                    return Err(Error::param(
                        "p_gaussian",
                        "branch probabilities exceed 1".to_string(),
                    ));
                }
                IntRange::new(mix.iterations.lo, mix.iterations.hi)?;
                IntRange::new(mix.radius.lo, mix.radius.hi)?;
                if mix.radius.lo < 1 {
                    return Err(Error::param("radius", "radius must be at least 1"));
                }
                Ok(())
            }
            PolicySpec::PatchJigsaw { p_filtered, .. } => unit("p_filtered", *p_filtered),
        }
    }

    /// Images emitted per input.
    pub fn outputs_per_input(&self) -> usize {
        match self {
            PolicySpec::Double { .. } => 2,
            _ => 1,
        }
    }

    pub fn sample(&self, rng: &mut impl UniformSource) -> Vec<FilterSpec> {
        self.plan(rng).filters
    }

    pub fn plan(&self, rng: &mut impl UniformSource) -> Plan {
        match self {
            PolicySpec::Double { diffusion } => Plan {
                filters: vec![FilterSpec::Identity, FilterSpec::Diffusion(*diffusion)],
                draws: Vec::new(),
            },
            PolicySpec::MoCoV2Mix(mix) => {
                let r = rng.unit();
                let filter = if r < mix.p_diffusion {
                    let iters = rng.int_inclusive(mix.iterations.lo, mix.iterations.hi);
                    FilterSpec::Diffusion(mix.diffusion.with_iterations(iters))
                } else if r < mix.p_diffusion + mix.p_gaussian {
                    let radius = rng.int_inclusive(mix.radius.lo, mix.radius.hi);
                    FilterSpec::Gaussian(
                        GaussianSpec::from_radius(radius as usize).expect("radius validated"),
                    )
                } else {
                    FilterSpec::Identity
                };
                Plan {
                    filters: vec![filter],
                    draws: vec![r],
                }
            }
            PolicySpec::PatchJigsaw {
                diffusion,
                p_filtered,
            } => {
                let draws: Vec<f64> = (0..JIGSAW_GRID * JIGSAW_GRID).map(|_| rng.unit()).collect();
                let filters = draws
                    .iter()
                    .map(|&r| {
                        if r < *p_filtered {
                            FilterSpec::Diffusion(*diffusion)
                        } else {
                            FilterSpec::Identity
                        }
                    })
                    .collect();
                Plan { filters, draws }
            }
        }
    }

    /// Fails for `PatchJigsaw` when the image cannot be cut into equal patches.
    pub fn check_input(&self, img: &PlaneImage) -> Result<()> {
        if let PolicySpec::PatchJigsaw { .. } = self {
            if !img.width().is_multiple_of(JIGSAW_GRID) || !img.height().is_multiple_of(JIGSAW_GRID) {
                return Err(Error::Sizing {
                    width: img.width(),
                    height: img.height(),
                    grid: JIGSAW_GRID,
                });
            }
        }
        Ok(())
    }

    pub fn apply(&self, img: &PlaneImage, rng: &mut impl UniformSource) -> Result<Vec<PlaneImage>> {
        self.check_input(img)?;
        let plan = self.plan(rng);
        Ok(self
            .realize(img, &plan.filters, Exec::default())?
            .into_iter()
            .map(|a| a.image)
            .collect())
    }

    /// Runs a previously sampled filter list.
    pub fn realize(
        &self,
        img: &PlaneImage,
        filters: &[FilterSpec],
        exec: Exec,
    ) -> Result<Vec<Augmented>> {
        match self {
            PolicySpec::PatchJigsaw { .. } => {
                self.check_input(img)?;
                if filters.len() != JIGSAW_GRID * JIGSAW_GRID {
                    return Err(Error::param(
                        "filters",
                        format!("expected {} patch filters, got {}", JIGSAW_GRID * JIGSAW_GRID, filters.len()),
                    ));
                }
                let (pw, ph) = (img.width() / JIGSAW_GRID, img.height() / JIGSAW_GRID);
                let mut out = img.clone();
                for (i, filter) in filters.iter().enumerate() {
                    if *filter == FilterSpec::Identity {
                        continue;
                    }
                    let (x0, y0) = ((i % JIGSAW_GRID) * pw, (i / JIGSAW_GRID) * ph);
                    let patch = img.crop(x0, y0, pw, ph)?;
                    out.paste(x0, y0, &filter.apply_with(&patch, exec)?)?;
                }
                Ok(vec![Augmented {
                    image: out,
                    branch: "patch",
                    filters: filters.to_vec(),
                }])
            }
            _ => filters
                .iter()
                .map(|f| {
                    Ok(Augmented {
                        image: f.apply_with(img, exec)?,
                        branch: f.branch(),
                        filters: vec![*f],
                    })
                })
                .collect(),
        }
    }
}
