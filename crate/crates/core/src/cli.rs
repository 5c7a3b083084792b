//! Command-line interface: `run`, `identify`, `eval` and `synth`.
//!
//! Exit codes: 0 on success, 2 on I/O, input or configuration errors, 3 when
//! the segmentation/alignment backend fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::backends::{open_backend, Backend};
use crate::error::{Error, Result};
use crate::identify::{identify_target, CandidateRecord, IdentificationReport};
use crate::io::{read_frame_dir, read_mask_dir, write_mask, write_mask_dir};
use crate::metrics::{evaluate_sequence, EvalReport, SequenceScore};
use crate::propagate::{propagate_traced, StepStats};
use crate::synthgen::{generate, scenario};
use crate::types::{
    MaskSequence, PipelineConfig, VideoSequence, DEFAULT_BACKEND, DEFAULT_MEMORY_INTERVAL,
    DEFAULT_NUM_CANDIDATES, DEFAULT_WEIGHT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MASKS_DIR: &str = "masks";
pub const DEBUG_DIR: &str = "debug";
pub const KEY_MASK_FILE: &str = "key_mask.pgm";

#[derive(Debug, Parser)]
#[command(
    name = "findtrack",
    version,
    about = "Referring video object segmentation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment the referred object in every frame.
    Run(RunArgs),
    /// Select the key frame only and print the candidate diagnostics.
    Identify(IdentifyArgs),
    /// Score predicted masks against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic scene.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Directory of numbered PPM frames.
    #[arg(long)]
    pub frames: PathBuf,
    /// Referring expression.
    #[arg(long)]
    pub text: String,
    /// Number of candidate key frames.
    #[arg(long = "n", default_value_t = DEFAULT_NUM_CANDIDATES)]
    pub num_candidates: usize,
    /// Confidence weight.
    #[arg(long, default_value_t = DEFAULT_WEIGHT)]
    pub w1: f64,
    /// Alignment weight.
    #[arg(long, default_value_t = DEFAULT_WEIGHT)]
    pub w2: f64,
    /// Write to tracker memory every this many frames.
    #[arg(long = "mem-interval", default_value_t = DEFAULT_MEMORY_INTERVAL)]
    pub memory_interval: usize,
    /// Consolidate evicted memory into long-term prototypes.
    #[arg(long = "long-term")]
    pub long_term: bool,
    /// builtin:color, stdio:<command> or tcp:<host>:<port>.
    #[arg(long, env = "FINDTRACK_BACKEND", default_value = DEFAULT_BACKEND)]
    pub backend: String,
}

impl InputArgs {
    pub fn config(&self) -> PipelineConfig {
        PipelineConfig {
            num_candidates: self.num_candidates,
            w1: self.w1,
            w2: self.w2,
            memory_interval: self.memory_interval,
            long_term_enabled: self.long_term,
            backend: self.backend.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output directory for masks/ and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-frame tracker statistics to debug/.
    #[arg(long)]
    pub debug: bool,
}

#[derive(Debug, Clone, Args)]
pub struct IdentifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Directory to write key_mask.pgm into.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_ms: f64,
    pub identify_ms: f64,
    pub propagate_ms: f64,
    pub write_ms: f64,
}

/// Everything needed to reproduce a run from the same frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub frames: PathBuf,
    pub text: String,
    pub num_frames: usize,
    pub width: usize,
    pub height: usize,
    pub config: PipelineConfig,
    pub key_frame: Option<usize>,
    pub candidates: Vec<CandidateRecord>,
    pub empty_target: bool,
    pub timings: Timings,
    pub masks: PathBuf,
    pub debug: Option<PathBuf>,
}

pub struct RunOutput {
    pub manifest: RunManifest,
    pub masks: MaskSequence,
    pub steps: Vec<StepStats>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Identification plus propagation on an in-memory video.
///
/// When every candidate mask is empty the result is all-empty masks with
/// `empty_target` set. Paths in the returned manifest are left empty.
pub fn run_pipeline(
    video: &VideoSequence,
    config: &PipelineConfig,
    backend: &dyn Backend,
) -> Result<RunOutput> {
    config.validate()?;
    let mut timings = Timings::default();
    let t = Instant::now();
    let identified = identify_target(video, config, backend, backend);
    timings.identify_ms = ms(t);

    let t = Instant::now();
    let (key_frame, candidates, masks, steps) = match identified {
        Ok(id) => {
            let (masks, steps) = propagate_traced(video, id.key_frame, &id.key_mask, config)?;
            (Some(id.key_frame), id.diagnostics, masks, steps)
        }
        Err(Error::AllCandidatesEmpty) => {
            // Re-score for diagnostics: selection failed, scoring did not.
            let set = crate::identify::score_candidates(video, config, backend, backend)?;
            let empty = MaskSequence::empty(video.len(), video.width(), video.height());
            (None, set.records(), empty, Vec::new())
        }
        Err(e) => return Err(e),
    };
    timings.propagate_ms = ms(t);

    Ok(RunOutput {
        manifest: RunManifest {
            frames: PathBuf::new(),
            text: video.expression().to_string(),
            num_frames: video.len(),
            width: video.width(),
            height: video.height(),
            config: config.clone(),
            empty_target: key_frame.is_none(),
            key_frame,
            candidates,
            timings,
            masks: PathBuf::new(),
            debug: None,
        },
        masks,
        steps,
    })
}

fn absolute(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Scratch directory inside `out`, removed on drop unless committed.
struct Staging {
    dir: PathBuf,
}

impl Staging {
    fn new(out: &Path) -> Result<Self> {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let dir = out.join(format!(".staging-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        fs::create_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    /// Moves each staged entry over its counterpart in `out`.
    fn commit(self, out: &Path, names: &[&str]) -> Result<()> {
        for name in names {
            let (from, to) = (self.dir.join(name), out.join(name));
            if !from.exists() {
                continue;
            }
            if to.is_dir() {
                fs::remove_dir_all(&to).map_err(|e| Error::io(&to, e))?;
            } else if to.exists() {
                fs::remove_file(&to).map_err(|e| Error::io(&to, e))?;
            }
            fs::rename(&from, &to).map_err(|e| Error::io(&to, e))?;
        }
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.dir);
    }
}

pub fn cmd_run(args: &RunArgs) -> Result<RunManifest> {
    let config = args.input.config();
    config.validate()?;
    let t = Instant::now();
    let video = read_frame_dir(&args.input.frames, &args.input.text)?;
    let load_ms = ms(t);
    let backend = open_backend(&config.backend)?;
    let mut output = run_pipeline(&video, &config, backend.as_ref())?;

    let t = Instant::now();
    let staging = Staging::new(&args.out)?;
    write_mask_dir(&output.masks, &staging.dir.join(MASKS_DIR))?;
    let out = absolute(&args.out);
    let m = &mut output.manifest;
    m.frames = absolute(&args.input.frames);
    m.masks = out.join(MASKS_DIR);
    if args.debug {
        let dir = staging.dir.join(DEBUG_DIR);
        fs::create_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        for step in &output.steps {
            let name = format!("{:05}.json", step.frame);
            write_json(&dir.join(name), step)?;
        }
        m.debug = Some(out.join(DEBUG_DIR));
    }
    m.timings.load_ms = load_ms;
    m.timings.write_ms = ms(t);
    write_json(&staging.dir.join(MANIFEST_FILE), m)?;
    let mut names = vec![MASKS_DIR, MANIFEST_FILE];
    if args.debug {
        names.push(DEBUG_DIR);
    }
    staging.commit(&args.out, &names)?;
    Ok(output.manifest)
}

/// Re-runs the pipeline recorded in a manifest and returns its masks.
pub fn replay_manifest(path: &Path) -> Result<MaskSequence> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let manifest: RunManifest = serde_json::from_slice(&bytes)?;
    let video = read_frame_dir(&manifest.frames, &manifest.text)?;
    let backend = open_backend(&manifest.config.backend)?;
    Ok(run_pipeline(&video, &manifest.config, backend.as_ref())?.masks)
}

pub fn cmd_identify(args: &IdentifyArgs) -> Result<IdentificationReport> {
    let config = args.input.config();
    config.validate()?;
    let video = read_frame_dir(&args.input.frames, &args.input.text)?;
    let backend = open_backend(&config.backend)?;
    let id = identify_target(&video, &config, backend.as_ref(), backend.as_ref())?;
    if let Some(out) = &args.out {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        write_mask(&id.key_mask, &out.join(KEY_MASK_FILE))?;
    }
    Ok(id.report())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    let pred = read_mask_dir(&args.pred)?;
    let gt = read_mask_dir(&args.gt)?;
    let name = absolute(&args.gt)
        .parent()
        .and_then(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let scores = evaluate_sequence(&pred, &gt)?;
    Ok(EvalReport::new(vec![SequenceScore { name, scores }]))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let spec = scenario(&args.scenario, args.seed)?;
    generate(&spec)?.write(&args.out, Some(&args.scenario))
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_backend() {
        EXIT_BACKEND
    } else {
        EXIT_INPUT
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => {
            let m = cmd_run(args)?;
            if m.empty_target {
                eprintln!("no candidate frame contained the target; wrote empty masks");
            }
            Ok(())
        }
        Command::Identify(args) => match cmd_identify(args) {
            Ok(report) => print_json(&report),
            Err(e) => Err(e),
        },
        Command::Eval(args) => print_json(&cmd_eval(args)?),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("findtrack: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults_match_pipeline_defaults() {
        let cli = Cli::try_parse_from([
            "findtrack",
            "run",
            "--frames",
            "f",
            "--text",
            "the red circle",
            "--out",
            "o",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else {
            panic!("expected run");
        };
        let expected = PipelineConfig {
            backend: args.input.backend.clone(),
            ..Default::default()
        };
        assert_eq!(args.input.config(), expected);
    }

    #[test]
    fn exit_codes_partition_errors() {
        assert_eq!(exit_code(&Error::Protocol("x".into())), EXIT_BACKEND);
        let wrapped = Error::AtFrame {
            frame: 3,
            source: Box::new(Error::BackendTimeout(std::time::Duration::from_secs(1))),
        };
        assert_eq!(exit_code(&wrapped), EXIT_BACKEND);
        assert_eq!(exit_code(&Error::UnknownScenario("x".into())), EXIT_INPUT);
        assert_eq!(exit_code(&Error::ExpressionParse("x".into())), EXIT_INPUT);
    }
}
