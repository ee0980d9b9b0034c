use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use baenet::bench::run_bench;
use baenet::bwsim::{fluctuate, lowpass, Schedule};
use baenet::dsp::{read_wav, write_raw_f32, write_wav};
use baenet::metrics::{evaluate, Metric};
use baenet::model::count_complexity;
use baenet::weights_io::{self, generate_test_weights};
use baenet::{Engine, Error, Exec, ModelConfig, ModelWeights, Variant, WeightsError};

#[derive(Parser)]
#[command(name = "baenet", version, about = "Streaming speech bandwidth extension")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extend a whole WAV file offline.
    Extend {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        /// Defaults to the variant stored in the weight file.
        #[arg(long)]
        variant: Option<Variant>,
    },
    /// Raw little-endian f32 PCM at 48 kHz from stdin to stdout.
    Stream {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        variant: Option<Variant>,
    },
    /// Band-limit a WAV file with a fixed cutoff or a schedule file.
    #[command(group(ArgGroup::new("band").required(true).args(["cutoff", "schedule"])))]
    Degrade {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Cutoff in Hz.
        #[arg(long)]
        cutoff: Option<f64>,
        /// Lines of `start_seconds cutoff_hz`.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Compare a processed file against its reference.
    Eval {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        degraded: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "lsd,segsnr,mrstft,wav")]
        metrics: Vec<Metric>,
        /// Print one JSON object instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Measure the real-time factor on seeded noise.
    Bench {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        seconds: f64,
        #[arg(long)]
        variant: Option<Variant>,
    },
    /// Print parameter and MAC counts of a configuration.
    Count {
        #[arg(long, default_value = "full")]
        variant: Variant,
    },
    /// Write deterministic pseudo-random weights (for testing the pipeline).
    GenWeights {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "full")]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Failure classes, mapped onto the process exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Format(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Format(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Format(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) | Error::Weights(WeightsError::Io(_)) | Error::Wav(hound::Error::IoError(_)) => {
                Failure::Io(msg)
            }
            Error::InvalidArgument(_) => Failure::Usage(msg),
            _ => Failure::Format(msg),
        }
    }
}

impl From<WeightsError> for Failure {
    fn from(e: WeightsError) -> Self {
        Error::from(e).into()
    }
}

fn with_path(path: &Path) -> impl FnOnce(Failure) -> Failure + '_ {
    move |f| match f {
        Failure::Usage(m) => Failure::Usage(m),
        Failure::Io(m) => Failure::Io(format!("{}: {m}", path.display())),
        Failure::Format(m) => Failure::Format(format!("{}: {m}", path.display())),
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Extend {
            input,
            output,
            weights,
            variant,
        } => {
            let engine = load_engine(&weights, variant)?;
            let (wave, format) = read_wav(&input).map_err(Failure::from).map_err(with_path(&input))?;
            let out = engine.extend(&wave)?;
            write_wav(&output, &out, format).map_err(Failure::from).map_err(with_path(&output))
        }
        Command::Stream { weights, variant } => stream(&weights, variant),
        Command::Degrade {
            input,
            output,
            cutoff,
            schedule,
        } => {
            let (wave, format) = read_wav(&input).map_err(Failure::from).map_err(with_path(&input))?;
            let out = match (cutoff, schedule) {
                (Some(c), _) => lowpass(&wave, c)?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    let schedule = Schedule::parse(&text).map_err(Failure::from).map_err(with_path(&path))?;
                    fluctuate(&wave, &schedule).map_err(|e| match e {
                        Error::InvalidArgument(m) => Failure::Format(format!("{}: {m}", path.display())),
                        other => other.into(),
                    })?
                }
                (None, None) => unreachable!("clap requires one of the two"),
            };
            write_wav(&output, &out, format).map_err(Failure::from).map_err(with_path(&output))
        }
        Command::Eval {
            reference,
            degraded,
            metrics,
            json,
        } => {
            let (r, _) = read_wav(&reference).map_err(Failure::from).map_err(with_path(&reference))?;
            let (d, _) = read_wav(&degraded).map_err(Failure::from).map_err(with_path(&degraded))?;
            if r.len() != d.len() {
                return Err(Failure::Format(format!(
                    "reference has {} samples, degraded has {}",
                    r.len(),
                    d.len()
                )));
            }
            let values = evaluate(&r, &d, &metrics, Exec::default())?;
            let stdout = io::stdout();
            let mut out = stdout.lock();
            if json {
                let map: serde_json::Map<String, serde_json::Value> =
                    values.iter().map(|(m, v)| (m.name().to_string(), (*v).into())).collect();
                writeln!(out, "{}", serde_json::Value::Object(map)).map_err(io_failure)?;
            } else {
                for (m, v) in values {
                    writeln!(out, "{}={v:.6}", m.name()).map_err(io_failure)?;
                }
            }
            Ok(())
        }
        Command::Bench {
            weights,
            seconds,
            variant,
        } => {
            if !(seconds > 0.0 && seconds.is_finite()) {
                return Err(Failure::Usage(format!("--seconds must be positive, got {seconds}")));
            }
            let engine = load_engine(&weights, variant)?;
            let r = run_bench(&engine, seconds, 0)?;
            println!("variant={}", engine.model().variant());
            println!("params={}", r.params);
            println!("macs_per_second={:.0}", r.macs_per_second);
            println!("audio_seconds={:.3}", r.audio_seconds);
            println!("elapsed_seconds={:.3}", r.elapsed_seconds);
            println!("rtf={:.4}", r.rtf);
            Ok(())
        }
        Command::Count { variant } => {
            let c = count_complexity(&ModelConfig::for_variant(variant));
            println!("variant={variant}");
            println!("params={}", c.params);
            println!("macs_per_frame={}", c.macs_per_frame);
            println!("macs_per_second={:.0}", c.macs_per_second);
            Ok(())
        }
        Command::GenWeights { output, variant, seed } => {
            let config = ModelConfig::for_variant(variant);
            let w = generate_test_weights(&config, seed);
            weights_io::save(&output, &w, &config)
                .map_err(Failure::from)
                .map_err(with_path(&output))
        }
    }
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Io(e.to_string())
}

fn load_engine(path: &Path, variant: Option<Variant>) -> Result<Engine, Failure> {
    let (weights, stored): (ModelWeights, ModelConfig) =
        weights_io::load(path).map_err(Failure::from).map_err(with_path(path))?;
    let config = match variant {
        Some(v) => stored.with_variant(v),
        None => stored,
    };
    Engine::from_weights(&config, &weights)
        .map_err(Failure::from)
        .map_err(with_path(path))
}

fn stream(weights: &Path, variant: Option<Variant>) -> Outcome {
    let engine = load_engine(weights, variant)?;
    let mut proc = engine.stream()?;
    let sr = engine.model().config().sample_rate;
    eprintln!(
        "latency: {} samples ({:.1} ms)",
        proc.latency(),
        proc.latency() as f64 * 1000.0 / sr as f64
    );

    let hop = engine.model().config().hop();
    let mut stdin = io::stdin().lock();
    let mut stdout = BufWriter::new(io::stdout().lock());
    let mut bytes = vec![0u8; 4 * hop];
    let mut filled = 0;
    let mut input = Vec::with_capacity(hop);
    let mut output = vec![0.0; hop];
    let mut out32 = Vec::with_capacity(hop);
    loop {
        let n = match stdin.read(&mut bytes[filled..]) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(io_failure(e)),
        };
        filled += n;
        let whole = filled / 4 * 4;
        input.clear();
        input.extend(
            bytes[..whole]
                .chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap()))),
        );
        bytes.copy_within(whole..filled, 0);
        filled -= whole;
        let out = &mut output[..input.len()];
        proc.process_into(&input, out)?;
        out32.clear();
        out32.extend(out.iter().map(|&v| v as f32));
        write_raw_f32(&mut stdout, &out32)?;
    }
    if filled != 0 {
        return Err(Failure::Format(format!("stdin ended with {filled} stray bytes")));
    }
    stdout.flush().map_err(io_failure)
}
