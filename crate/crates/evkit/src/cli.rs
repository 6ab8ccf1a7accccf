//! The `evkit` command line.
//!
//! Exit codes: 0 success, 1 data or runtime error, 2 usage error.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evkit_core::{
    assemble_evrepsl, compute_evrep_streaming, compute_e_i, fit_camera_with, inject_noise,
    reconstruct_next, refine_integral_frames, simulate_sequence, CameraModel, NoiseConfig,
    SearchConfig, TemporalMode, TimingMode, TimingModel,
};

use crate::bench::{run_bench, synthetic_stream, BenchPath};
use crate::formats::ecam::{parse_camera_model, write_camera_model};
use crate::formats::evrp::EvrpTensor;
use crate::formats::evt1::write_binary_events;
use crate::formats::manifest::{load_frame, load_frames, load_pairs};
use crate::formats::pgm::{frame_to_pgm, write_pgm, Gray8};
use crate::formats::text::{write_text_events, ZeroPolarity};
use crate::formats::{load_events, read_file, write_file};
use crate::parallel::{compute_evrep_parallel, configured_threads, thread_pool, RayonCandidates};

#[derive(Debug, Parser)]
#[command(name = "evkit", version, about = "Event-camera representations and camera-model estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert events to EVT1, text, or an EVRP tensor (EvRep / EvRepSL).
    Convert(ConvertArgs),
    /// Generate events from a frame sequence by threshold crossing.
    Simulate(SimulateArgs),
    /// Fit thresholds and offset k from frame pairs and their events.
    Estimate(EstimateArgs),
    /// Reconstruct the next frame from a frame, events and a camera model.
    Reconstruct(ReconstructArgs),
    /// Render one tensor channel to an 8-bit PGM.
    Render(RenderArgs),
    /// Measure EvRep throughput.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Temporal {
    #[default]
    Literal,
    Conventional,
}

impl From<Temporal> for TemporalMode {
    fn from(t: Temporal) -> Self {
        match t {
            Temporal::Literal => TemporalMode::Literal,
            Temporal::Conventional => TemporalMode::Conventional,
        }
    }
}

#[derive(Debug, Args)]
struct EventInput {
    /// Sensor width (required for text input)
    #[arg(long)]
    width: Option<u16>,
    /// Sensor height (required for text input)
    #[arg(long)]
    height: Option<u16>,
    /// How polarity 0 in text input is read
    #[arg(long, value_enum, default_value_t = ZeroPolarity::Negative)]
    zero_polarity: ZeroPolarity,
}

impl EventInput {
    fn dims(&self) -> Result<Option<(u16, u16)>, CliError> {
        match (self.width, self.height) {
            (Some(w), Some(h)) => Ok(Some((w, h))),
            (None, None) => Ok(None),
            _ => Err(CliError::Usage("--width and --height go together".into())),
        }
    }
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Input events (EVT1 or text)
    input: PathBuf,
    /// Output path
    output: PathBuf,
    #[command(flatten)]
    events: EventInput,
    /// Write a 3-channel EvRep tensor
    #[arg(long, conflicts_with_all = ["evrepsl", "text"])]
    evrep: bool,
    /// Write a 5-channel EvRepSL tensor
    #[arg(long, requires_all = ["camera_model", "frames"], conflicts_with = "text")]
    evrepsl: bool,
    /// Write text events
    #[arg(long)]
    text: bool,
    /// ECAM camera model (EvRepSL)
    #[arg(long)]
    camera_model: Option<PathBuf>,
    /// Frames bounding the stream, `F0 F1` (EvRepSL)
    #[arg(long, num_args = 2, value_names = ["F0", "F1"])]
    frames: Option<Vec<PathBuf>>,
    #[arg(long, value_enum, default_value_t = Temporal::Literal)]
    temporal: Temporal,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Frame manifest (`<frame.pgm> <t_us>` per line)
    #[arg(long)]
    frames: PathBuf,
    /// Output EVT1 path
    #[arg(long)]
    output: PathBuf,
    /// ECAM camera model
    #[arg(long, conflicts_with_all = ["theta", "k"], required_unless_present = "theta")]
    camera_model: Option<PathBuf>,
    /// Uniform contrast threshold
    #[arg(long)]
    theta: Option<f64>,
    /// Intensity offset
    #[arg(long, default_value_t = 0.0, requires = "theta")]
    k: f64,
    #[arg(long, value_enum, default_value_t = Timing::Uniform)]
    timing: Timing,
    /// Timestamp jitter standard deviation (microseconds)
    #[arg(long, default_value_t = 0.0)]
    jitter_std: f64,
    /// Background activity (events per pixel per second)
    #[arg(long, default_value_t = 0.0)]
    ba_rate: f64,
    /// Probability of dropping an event
    #[arg(long, default_value_t = 0.0)]
    hole_prob: f64,
    /// Count dispersion
    #[arg(long, default_value_t = 0.0)]
    dispersion: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Timing {
    Uniform,
    LeadingEdge,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Pair manifest (`<f0> <t0> <f1> <t1> <events>` per line)
    #[arg(long)]
    pairs: PathBuf,
    /// Output ECAM path
    #[arg(long)]
    output: PathBuf,
    /// Fit report path (key=value)
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    k_min: f64,
    #[arg(long, default_value_t = 2.0)]
    k_max: f64,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long, default_value_t = 33)]
    grid_points: usize,
    #[arg(long, value_enum, default_value_t = ZeroPolarity::Negative)]
    zero_polarity: ZeroPolarity,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    /// Frame at the start of the interval (PGM)
    #[arg(long)]
    f0: PathBuf,
    /// Events over the interval (EVT1 or text)
    #[arg(long)]
    events: PathBuf,
    /// ECAM camera model
    #[arg(long)]
    model: PathBuf,
    /// Output PGM
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = ZeroPolarity::Negative)]
    zero_polarity: ZeroPolarity,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// EVRP tensor
    #[arg(long)]
    tensor: PathBuf,
    /// Channel index
    #[arg(long)]
    channel: usize,
    /// Output PGM
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Events to load (EVT1 or text)
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    events: Option<PathBuf>,
    /// Generate this many random events instead of loading a file
    #[arg(long)]
    synthetic: Option<usize>,
    #[command(flatten)]
    input: EventInput,
    #[arg(long, value_enum, default_value_t = BenchPath::Streaming)]
    path: BenchPath,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
    #[arg(long, value_enum, default_value_t = Temporal::Literal)]
    temporal: Temporal,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(crate::Error),
}

impl<E: Into<crate::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult = Result<(), CliError>;

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Command::Convert(a) => convert(a),
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Render(a) => render(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn convert(a: ConvertArgs) -> CliResult {
    let stream = load_events(&a.input, a.events.dims()?, a.events.zero_polarity)?;
    let mode = TemporalMode::from(a.temporal);
    let bytes = if a.evrepsl {
        let model = parse_camera_model(&read_file(a.camera_model.as_deref().expect("clap requires"))?)?;
        let frames = a.frames.as_deref().expect("clap requires");
        let f0 = load_frame(&frames[0], stream.t_start())?;
        let f1 = load_frame(&frames[1], stream.t_end())?;
        let evrep = compute_evrep_streaming(&stream, mode);
        let refined = refine_integral_frames(&f0, &f1, evrep.e_i(), &model)?;
        let sl = assemble_evrepsl(&evrep, &refined, model.theta())?;
        EvrpTensor::from_evrepsl(&sl).to_bytes()
    } else if a.evrep {
        let pool = thread_pool(configured_threads());
        EvrpTensor::from_evrep(&compute_evrep_parallel(&stream, mode, &pool)).to_bytes()
    } else if a.text {
        write_text_events(&stream).into_bytes()
    } else {
        write_binary_events(&stream)
    };
    write_file(&a.output, &bytes)?;
    println!(
        "events={} window=[{},{}] dims={}x{}",
        stream.len(),
        stream.t_start(),
        stream.t_end(),
        stream.width(),
        stream.height()
    );
    Ok(())
}

fn simulate(a: SimulateArgs) -> CliResult {
    let frames = load_frames(&a.frames)?;
    let first = frames
        .first()
        .ok_or_else(|| crate::Error::Invalid("frame manifest is empty".into()))?;
    let model = match (&a.camera_model, a.theta) {
        (Some(path), _) => parse_camera_model(&read_file(path)?)?,
        (None, Some(theta)) => CameraModel::uniform(first.width(), first.height(), theta, a.k)?,
        (None, None) => return Err(CliError::Usage("need --camera-model or --theta".into())),
    };
    let mode = match a.timing {
        Timing::Uniform => TimingMode::Uniform,
        Timing::LeadingEdge => TimingMode::LeadingEdge,
    };
    let timing = TimingModel::new(mode).with_jitter(a.jitter_std, a.seed);
    let mut stream = simulate_sequence(&frames, &model, &timing)?;
    let noise = NoiseConfig::builder(a.seed)
        .ba_rate(a.ba_rate)
        .hole_prob(a.hole_prob)
        .count_dispersion(a.dispersion)
        .build()?;
    stream = inject_noise(&stream, &noise);
    write_file(&a.output, &write_binary_events(&stream))?;
    println!(
        "events={} window=[{},{}] dims={}x{}",
        stream.len(),
        stream.t_start(),
        stream.t_end(),
        stream.width(),
        stream.height()
    );
    Ok(())
}

fn estimate(a: EstimateArgs) -> CliResult {
    let pairs = load_pairs(&a.pairs, a.zero_polarity)?;
    if pairs.is_empty() {
        return Err(crate::Error::Invalid("pair manifest is empty".into()).into());
    }
    if pairs.len() == 1 {
        eprintln!("warning: only one pair; held-out set equals the fit set");
    }
    let config = SearchConfig {
        k_min: a.k_min,
        k_max: a.k_max,
        tolerance: a.tolerance,
        grid_points: a.grid_points,
    };
    let candidates = RayonCandidates::new(thread_pool(configured_threads()));
    let fit = fit_camera_with(&pairs, &config, &candidates)?;
    if fit.search.boundary_hit {
        eprintln!(
            "warning: k_hat={} lies on the search boundary [{}, {}]",
            fit.model.k(),
            config.k_min,
            config.k_max
        );
    }
    write_file(&a.output, &write_camera_model(&fit.model))?;
    let report = format!(
        "k_hat={}\nmae_heldout={}\npixels_active={}\nclamp_count={}\n",
        fit.model.k(),
        fit.mae_heldout,
        fit.pixels_active,
        fit.clamp_count
    );
    if let Some(path) = &a.report {
        write_file(path, report.as_bytes())?;
    }
    print!("{report}");
    Ok(())
}

fn reconstruct(a: ReconstructArgs) -> CliResult {
    let model = parse_camera_model(&read_file(&a.model)?)?;
    let f0 = load_frame(&a.f0, 0)?;
    let stream = load_events(&a.events, Some(f0.dims()), a.zero_polarity)?;
    let f0 = f0.with_timestamp(stream.t_start());
    let e_i = compute_e_i(&stream);
    let r = reconstruct_next(&f0, &e_i, &model)?;
    write_file(&a.output, &frame_to_pgm(&r.frame))?;
    println!("clamped={}", r.clamped);
    Ok(())
}

/// Min-max normalization to 0..=255; a constant channel maps to 128.
fn normalize_channel(values: &[f32]) -> Vec<u8> {
    let (lo, hi) = values
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return vec![128; values.len()];
    }
    let span = (hi - lo) as f64;
    values
        .iter()
        .map(|&v| (((v - lo) as f64 / span) * 255.0).round() as u8)
        .collect()
}

fn render(a: RenderArgs) -> CliResult {
    let tensor = EvrpTensor::from_bytes(&read_file(&a.tensor)?)?;
    let channel = tensor.channels.get(a.channel).ok_or_else(|| {
        crate::Error::Invalid(format!(
            "channel {} out of range (tensor has {})",
            a.channel,
            tensor.channel_count()
        ))
    })?;
    let img = Gray8 {
        width: tensor.width,
        height: tensor.height,
        data: normalize_channel(channel),
    };
    write_file(&a.output, &write_pgm(&img))?;
    println!("channel={} dims={}x{}", a.channel, img.width, img.height);
    Ok(())
}

fn bench(a: BenchArgs) -> CliResult {
    let stream = match (&a.events, a.synthetic) {
        (Some(path), _) => load_events(path, a.input.dims()?, a.input.zero_polarity)?,
        (None, Some(n)) => {
            let (w, h) = a.input.dims()?.unwrap_or((128, 128));
            synthetic_stream(n, w, h, a.seed)
        }
        (None, None) => return Err(CliError::Usage("need --events or --synthetic".into())),
    };
    if a.repeat == 0 {
        return Err(CliError::Usage("--repeat must be at least 1".into()));
    }
    let report = run_bench(&stream, a.path, a.temporal.into(), a.repeat)?;
    print!("{report}");
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_constant_is_mid_gray() {
        assert_eq!(normalize_channel(&[3.0, 3.0]), vec![128, 128]);
        assert_eq!(normalize_channel(&[-1.0, 0.0, 1.0]), vec![0, 128, 255]);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
