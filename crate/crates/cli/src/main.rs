use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use sonify_core::analysis::{aggregate_report, ReportFormat};
use sonify_core::fsutil::write_atomic;
use sonify_core::session::{self, ResponseLog, ScoreSheet, SCHEMA_VERSION};
use sonify_core::synth::{self, HrirSet, Method};
use sonify_core::StimulusConfig;

#[derive(Debug, Parser)]
#[command(name = "sonify", version, about = "Spatial-audio data sonification and listening-study tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render one stimulus to a WAV file.
    Render {
        /// Comma-separated data values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<f64>,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Build a counterbalanced participant bundle.
    SessionNew {
        #[arg(long)]
        participant: String,
        #[arg(long)]
        index: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a response log against a bundle's answer key.
    SessionScore {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Participant group label carried into the analysis tables.
        #[arg(long, default_value = "unspecified")]
        group: String,
    },
    /// Aggregate score sheets into report tables.
    Analyze {
        #[arg(long, value_delimiter = ',', required = true)]
        scores: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
    },
    /// Print the angle grid and response lengths of an HRIR directory.
    HrirInspect {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Measure the interaural delay of a WAV and compare it to the head model.
    VerifyItd {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        expect_angle: f64,
        #[arg(long, default_value_t = 1.0)]
        tolerance_samples: f64,
        /// Cross-correlation search window.
        #[arg(long, default_value_t = 1.0)]
        max_lag_ms: f64,
        /// Supplies head-model parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<StimulusConfig> {
    match path {
        Some(p) => Ok(StimulusConfig::load(p)?),
        None => Ok(StimulusConfig::default()),
    }
}

fn render(values: &[f64], method: Method, out: &Path, config: Option<&Path>) -> Result<()> {
    let config = load_config(config)?;
    let hrirs = config.load_hrirs()?;
    let buf = synth::render_stimulus(values, method, &config, hrirs.as_ref())?;
    synth::encode_wav(&buf, out)?;
    eprintln!(
        "wrote {} ({} frames, {:.3} s)",
        out.display(),
        buf.frames(),
        buf.duration_secs()
    );
    Ok(())
}

fn session_new(participant: &str, index: u32, seed: u64, out: &Path, config: Option<&Path>) -> Result<()> {
    let config = load_config(config)?;
    let hrirs = config.load_hrirs()?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let bundle = session::build_session(participant, index, seed, &config, hrirs.as_ref(), out)?;
    eprintln!(
        "session {}: {} trials, {} stimuli in {}",
        bundle.manifest.session_id,
        bundle.manifest.trials().count(),
        bundle.audio_files.len(),
        out.display()
    );
    Ok(())
}

fn session_score(bundle: &Path, responses: &Path, out: &Path, group: &str) -> Result<()> {
    let (manifest, key) = session::load_bundle(bundle)?;
    let log: ResponseLog = session::read_json(responses)?;
    let scores = session::score_responses(&manifest, &key, &log)?;
    let sheet = ScoreSheet {
        schema_version: SCHEMA_VERSION,
        session_id: manifest.session_id.clone(),
        participant_id: manifest.participant_id.clone(),
        participant_group: group.to_string(),
        scores,
    };
    let mut text = serde_json::to_string_pretty(&sheet)?;
    text.push('\n');
    write_atomic(out, text.as_bytes()).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn analyze(scores: &[PathBuf], out: &Path, format: ReportFormat) -> Result<()> {
    let sheets = scores
        .iter()
        .map(|p| session::read_json::<ScoreSheet>(p))
        .collect::<Result<Vec<_>, _>>()?;
    let report = aggregate_report(&sheets)?;
    write_atomic(out, report.render(format).as_bytes()).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn hrir_inspect(dir: &Path) -> Result<()> {
    let set = HrirSet::load_dir(dir)?;
    println!("sample_rate\t{}", set.sample_rate());
    println!("entries\t{}", set.entries().len());
    println!("angle_deg\tleft_len\tright_len");
    for (angle, pair) in set.entries() {
        println!("{angle}\t{}\t{}", pair.left.len(), pair.right.len());
    }
    Ok(())
}

fn verify_itd(wav: &Path, angle: f64, tolerance: f64, max_lag_ms: f64, config: Option<&Path>) -> Result<()> {
    let config = load_config(config)?;
    let buf = synth::decode_wav(wav)?;
    let sr = f64::from(buf.sample_rate());
    let measured = synth::measure_itd(&buf, max_lag_ms)?;
    let expected = synth::woodworth_itd(angle, &config.spatial)?;
    let diff_samples = (measured - expected) * sr;
    let pass = diff_samples.abs() <= tolerance;
    println!(
        "{}",
        serde_json::json!({
            "measured_itd_s": measured,
            "expected_itd_s": expected,
            "difference_samples": diff_samples,
            "tolerance_samples": tolerance,
            "pass": pass,
        })
    );
    if !pass {
        bail!(
            "measured ITD {:.1} us differs from the model's {:.1} us by {:.2} samples (tolerance {tolerance})",
            measured * 1e6,
            expected * 1e6,
            diff_samples
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Render {
            values,
            method,
            out,
            config,
        } => render(&values, method, &out, config.as_deref()),
        Command::SessionNew {
            participant,
            index,
            seed,
            out,
            config,
        } => session_new(&participant, index, seed, &out, config.as_deref()),
        Command::SessionScore {
            bundle,
            responses,
            out,
            group,
        } => session_score(&bundle, &responses, &out, &group),
        Command::Analyze { scores, out, format } => analyze(&scores, &out, format),
        Command::HrirInspect { dir } => hrir_inspect(&dir),
        Command::VerifyItd {
            wav,
            expect_angle,
            tolerance_samples,
            max_lag_ms,
            config,
        } => verify_itd(&wav, expect_angle, tolerance_samples, max_lag_ms, config.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
