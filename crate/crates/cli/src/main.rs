use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use texsup_core::codec::{self, OutputFormat};
use texsup_core::diffusion::{ConductionFn, ConductionKind, DiffusionSpec, DEFAULT_K, DEFAULT_TIME_STEP};
use texsup_core::metrics::DEFAULT_EDGE_THRESHOLD;
use texsup_core::policy::{IntRange, MixPolicy, PolicyKind, PolicySpec};
use texsup_core::report::{report_manifest, ReportOptions};
use texsup_core::smoothing::{DEFAULT_SIGMA_RANGE, DEFAULT_SIGMA_SPATIAL};
use texsup_core::{
    bilateral, cartoonize, diffuse, gaussian_blur, BilateralSpec, CartoonSpec, GaussianSpec, PipelineConfig,
};

#[derive(Parser)]
#[command(name = "texsup", version, about = "Texture-suppressing filters and dataset augmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Augment every PNG/JPEG below a directory with a seeded policy.
    Augment(AugmentArgs),
    /// Perona-Malik / robust anisotropic diffusion of one image.
    Diffuse {
        #[command(flatten)]
        io: SingleIo,
        #[command(flatten)]
        diffusion: DiffusionArgs,
    },
    /// Gaussian blur of one image; sigma is radius / 3.
    Blur {
        #[command(flatten)]
        io: SingleIo,
        #[arg(long, default_value_t = 15)]
        radius: usize,
    },
    /// Bilateral filter of one image.
    Bilateral {
        #[command(flatten)]
        io: SingleIo,
        #[command(flatten)]
        sigmas: BilateralArgs,
    },
    /// Cartoonize one RGB image.
    Cartoon {
        #[command(flatten)]
        io: SingleIo,
        #[command(flatten)]
        cartoon: CartoonArgs,
    },
    /// Branch histogram and metrics of an augmentation manifest, as JSON.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory holding the outputs; defaults to the manifest's directory.
        #[arg(long)]
        output_root: Option<PathBuf>,
        /// Original input directory, enables before/after metrics.
        #[arg(long)]
        input_root: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_EDGE_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Args)]
struct SingleIo {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DiffusionArgs {
    #[arg(long, default_value = "pm-exp", value_parser = ["pm-exp", "pm-rational", "tukey"])]
    method: String,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: f64,
    #[arg(long, default_value_t = 20)]
    iters: u32,
    #[arg(long, default_value_t = DEFAULT_TIME_STEP)]
    lambda: f64,
}

impl DiffusionArgs {
    fn spec(&self) -> Result<DiffusionSpec> {
        let kind: ConductionKind = self.method.parse()?;
        Ok(DiffusionSpec::new(
            ConductionFn::new(kind, self.k)?,
            self.iters,
            self.lambda,
        )?)
    }
}

#[derive(Args)]
struct BilateralArgs {
    #[arg(long = "sigma-s", default_value_t = DEFAULT_SIGMA_SPATIAL)]
    sigma_s: f64,
    #[arg(long = "sigma-r", default_value_t = DEFAULT_SIGMA_RANGE)]
    sigma_r: f64,
}

impl BilateralArgs {
    fn spec(&self) -> Result<BilateralSpec> {
        Ok(BilateralSpec::new(self.sigma_s, self.sigma_r)?)
    }
}

#[derive(Args)]
struct CartoonArgs {
    #[arg(long, default_value_t = 4)]
    passes: u32,
    #[command(flatten)]
    sigmas: BilateralArgs,
    #[arg(long, default_value_t = 3)]
    median_radius: usize,
    #[arg(long, default_value_t = 4)]
    block_radius: usize,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    offset: f64,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, value_parser = ["double", "mocov2", "patch-jigsaw"])]
    policy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "TEXSUP_WORKERS", default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "png", value_parser = ["png", "jpeg"])]
    format: String,
    /// Defaults to <out>/manifest.jsonl.
    #[arg(long)]
    manifest: Option<PathBuf>,

    /// Conduction coefficient of every diffusion branch.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: f64,
    #[arg(long, default_value = "pm-exp", value_parser = ["pm-exp", "pm-rational", "tukey"])]
    method: String,
    /// Diffusion iterations (double, patch-jigsaw).
    #[arg(long, default_value_t = 20)]
    iters: u32,
    #[arg(long, default_value_t = DEFAULT_TIME_STEP)]
    lambda: f64,
    /// mocov2: inclusive range of drawn diffusion iterations.
    #[arg(long, default_value_t = 10)]
    iters_min: u32,
    #[arg(long, default_value_t = 20)]
    iters_max: u32,
    /// mocov2: inclusive range of drawn Gaussian radii.
    #[arg(long, default_value_t = 10)]
    radius_min: u32,
    #[arg(long, default_value_t = 20)]
    radius_max: u32,
    #[arg(long, default_value_t = 0.5)]
    p_diffusion: f64,
    #[arg(long, default_value_t = 0.25)]
    p_gaussian: f64,
    /// patch-jigsaw: probability that a patch is diffused.
    #[arg(long, default_value_t = 0.5)]
    p_patch: f64,
}

impl AugmentArgs {
    fn policy(&self) -> Result<PolicySpec> {
        let diffusion = DiffusionSpec::new(
            ConductionFn::new(self.method.parse()?, self.k)?,
            self.iters,
            self.lambda,
        )?;
        let policy = match self.policy.parse::<PolicyKind>()? {
            PolicyKind::Double => PolicySpec::Double { diffusion },
            PolicyKind::MoCoV2Mix => PolicySpec::MoCoV2Mix(MixPolicy {
                p_diffusion: self.p_diffusion,
                p_gaussian: self.p_gaussian,
                diffusion,
                iterations: IntRange::new(self.iters_min, self.iters_max)?,
                radius: IntRange::new(self.radius_min, self.radius_max)?,
            }),
            PolicyKind::PatchJigsaw => PolicySpec::PatchJigsaw {
                diffusion,
                p_filtered: self.p_patch,
            },
        };
        policy.validate()?;
        Ok(policy)
    }
}

fn save_like_input(img: &texsup_core::PlaneImage, output: &Path) -> Result<()> {
    let format = OutputFormat::from_path(output).unwrap_or_default();
    codec::save(img, output, format)?;
    Ok(())
}

fn load(path: &Path) -> Result<texsup_core::PlaneImage> {
    codec::load(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Augment(args) => {
            let mut config = PipelineConfig::new(&args.input, &args.output, args.policy()?);
            config.seed = args.seed;
            config.workers = args.workers;
            config.output_format = args.format.parse()?;
            config.manifest_path = args.manifest.clone();
            let summary = texsup_core::run(&config)?;
            eprintln!(
                "processed {} inputs, emitted {} images, skipped {} in {:.2?}; manifest {}",
                summary.processed,
                summary.emitted,
                summary.skipped,
                summary.wall_time,
                summary.manifest_path.display()
            );
            return Ok(ExitCode::from(summary.exit_code() as u8));
        }
        Command::Diffuse { io, diffusion } => {
            let out = diffuse(&load(&io.input)?, &diffusion.spec()?);
            save_like_input(&out, &io.output)?;
        }
        Command::Blur { io, radius } => {
            let out = gaussian_blur(&load(&io.input)?, &GaussianSpec::from_radius(radius)?);
            save_like_input(&out, &io.output)?;
        }
        Command::Bilateral { io, sigmas } => {
            let out = bilateral(&load(&io.input)?, &sigmas.spec()?);
            save_like_input(&out, &io.output)?;
        }
        Command::Cartoon { io, cartoon } => {
            let spec = CartoonSpec {
                bilateral_passes: cartoon.passes,
                bilateral: cartoon.sigmas.spec()?,
                median_radius: cartoon.median_radius,
                thresh_block_radius: cartoon.block_radius,
                thresh_offset: cartoon.offset,
            };
            let mut img = load(&io.input)?;
            if img.channels() == 1 {
                img = img.gray_to_rgb()?;
            }
            save_like_input(&cartoonize(&img, &spec)?, &io.output)?;
        }
        Command::Report {
            manifest,
            output_root,
            input_root,
            threshold,
        } => {
            let output_root = output_root
                .or_else(|| manifest.parent().map(Path::to_path_buf));
            let options = ReportOptions {
                output_root,
                input_root,
                edge_threshold: threshold,
            };
            let report = report_manifest(&manifest, &options)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
