use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pano_core::projection::{DEFAULT_BLEND_BAND_FRAC, DEFAULT_BLUR_SIGMA_FRAC, DEFAULT_OUT_WIDTH, FG_HEIGHT_FRAC};
use pano_service::DEFAULT_PORT;

#[derive(Debug, Parser)]
#[command(name = "pano", version, about = "Panorama conversion, recentering and co-creation tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project flat frames onto 2:1 panorama canvases.
    Convert(ConvertArgs),
    /// Rotate panorama frames horizontally by a yaw angle.
    Recenter(RecenterArgs),
    /// Cross-fade the left and right edges of panorama frames.
    Blend(BlendArgs),
    /// Run the co-creation loop headlessly from an action script.
    Chain(ChainArgs),
    /// Join frame sequences end to end.
    Concat(ConcatArgs),
    /// Print the seam continuity score of panorama frames.
    Seam(SeamArgs),
    /// Serve the JSON API and the viewer bundle.
    Serve(ServeArgs),
    /// Measure single-core throughput of recentering and projection.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// A PNG file or a directory of PNG frames.
    pub input: PathBuf,
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_OUT_WIDTH)]
    pub width: u32,
    /// Background blur sigma as a fraction of the output height.
    #[arg(long, default_value_t = DEFAULT_BLUR_SIGMA_FRAC)]
    pub blur_frac: f64,
    /// Foreground height as a fraction of the output height.
    #[arg(long, default_value_t = FG_HEIGHT_FRAC)]
    pub fg_frac: f64,
    /// Seam blend band per side as a fraction of the output width.
    #[arg(long, default_value_t = DEFAULT_BLEND_BAND_FRAC)]
    pub band_frac: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RecenterArgs {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    /// Degrees; positive turns the view to the right.
    #[arg(long, allow_negative_numbers = true)]
    pub yaw: f64,
}

#[derive(Debug, Args)]
pub struct BlendArgs {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BLEND_BAND_FRAC)]
    pub band_frac: f64,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Initial text prompt.
    #[arg(long)]
    pub prompt: String,
    /// Optional initial image (PNG), projected onto the first canvas.
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub segments: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Action script; without one every segment reuses the prompt at yaw 0.
    #[arg(long)]
    pub yaw_script: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    pub width: u32,
    /// Segment length in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 24)]
    pub fps: u32,
    /// Directory for the final frames and report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ConcatArgs {
    /// Sequence directories, in order.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SeamArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Mock,
    Remote,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Session storage directory.
    #[arg(long, default_value = "pano-sessions")]
    pub root: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: IpAddr,
    /// 0 picks a free port.
    #[arg(long, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, value_enum, default_value_t = Backend::Mock)]
    pub backend: Backend,
    /// Seed for sessions that do not name one.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Canvas width for sessions that do not set projection params.
    #[arg(long, default_value_t = DEFAULT_OUT_WIDTH)]
    pub width: u32,
    #[arg(long, default_value_t = pano_service::DEFAULT_MAX_JOBS)]
    pub max_jobs: usize,
    /// Extra latency per mock generation, to make progress observable.
    #[arg(long, default_value_t = 0)]
    pub mock_latency_ms: u64,
    /// Viewer bundle served at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = DEFAULT_OUT_WIDTH)]
    pub width: u32,
    /// Minimum measuring time per operation.
    #[arg(long, default_value_t = 2.0)]
    pub seconds: f64,
    #[arg(long)]
    pub json: bool,
}
