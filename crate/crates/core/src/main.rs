use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};

use decaylab::error::{Error, Result};
use decaylab::fractional::analyze_fractional;
use decaylab::mode_analysis::analyze;
use decaylab::propagator::envelope;
use decaylab::sim::{
    self, DampingSource, Format, InitialData, RunConfig, SpectrumConfig, EXIT_USAGE,
};
use decaylab::spectrum::Tail;

/// Decay rates, resonance and certified constants for damped wave equations
#[derive(Parser)]
#[command(name = "decaylab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decay rate, resonance and per-mode data of a system
    Analyze(Common),
    /// Evolve initial data and report energies by region
    Simulate(Common),
    /// Norm envelope N(t) = ‖S(t)‖ on the time grid
    Envelope(Common),
    /// Certify the decay bound and check it together with the lemma suite
    Verify(VerifyArgs),
    /// Case analysis for f(s) = a·s^θ
    Fractional(FractionalArgs),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated eigenvalues, used instead of the config spectrum
    #[arg(long)]
    eigenvalues: Option<String>,
    /// Spectrum behaviour beyond the listed eigenvalues: none or power
    #[arg(long)]
    tail: Option<String>,
    /// Damping as DSL text, used instead of the config damping
    #[arg(long)]
    damping: Option<String>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    n_times: Option<usize>,
    /// Random initial-data trials for the lemma checks
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// `auto` or a value >= 2
    #[arg(long = "K")]
    k: Option<String>,
    /// Tolerance override NAME=VALUE (bound, resonance); repeatable
    #[arg(long)]
    tol: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Replace the certified constant (testing the failure path)
    #[arg(long, hide = true)]
    constant_override: Option<f64>,
}

#[derive(Args)]
struct FractionalArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    theta: f64,
    /// Smallest eigenvalue of an unbounded spectrum {s0, …}
    #[arg(long, conflicts_with = "spectrum_config")]
    s0: Option<f64>,
    /// JSON file holding a spectrum object as in the run configuration
    #[arg(long)]
    spectrum_config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad eigenvalue {x:?}: {e}")))
        })
        .collect()
}

fn parse_tail(text: &str) -> Result<Tail> {
    match text {
        "none" => Ok(Tail::None),
        "power" => Ok(Tail::Power),
        _ => Err(Error::Config(format!(
            "tail must be none or power, got {text:?}"
        ))),
    }
}

fn build_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::from_path(path)?,
        None => {
            let (Some(eig), Some(damping)) = (&c.eigenvalues, &c.damping) else {
                return Err(Error::Config(
                    "either --config or both --eigenvalues and --damping are required".into(),
                ));
            };
            RunConfig::new(
                SpectrumConfig::List {
                    values: parse_list(eig)?,
                    tail: Tail::None,
                },
                DampingSource::Text(damping.clone()),
            )
        }
    };
    if let Some(eig) = &c.eigenvalues {
        cfg.spectrum = SpectrumConfig::List {
            values: parse_list(eig)?,
            tail: Tail::None,
        };
    }
    if let Some(tail) = &c.tail {
        let tail = parse_tail(tail)?;
        match &mut cfg.spectrum {
            SpectrumConfig::List { tail: t, .. } | SpectrumConfig::Grid { tail: t, .. } => {
                *t = tail
            }
            SpectrumConfig::Laplacian1d { tail: t, .. }
            | SpectrumConfig::Bilaplacian1d { tail: t, .. } => *t = Some(tail),
        }
    }
    if let Some(d) = &c.damping {
        cfg.damping = DampingSource::Text(d.clone());
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(t) = c.t_max {
        cfg.time_grid.t_max = t;
    }
    if let Some(n) = c.n_times {
        cfg.time_grid.n_points = n;
    }
    if let Some(n) = c.trials {
        cfg.initial_data = InitialData::RandomTrials(n);
    }
    if let Some(e) = c.epsilon {
        cfg.epsilon = Some(e);
    }
    match c.k.as_deref() {
        None => {}
        Some("auto") => cfg.k = None,
        Some(v) => {
            let k = v
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("--K expects auto or a number, got {v:?}")))?;
            cfg.k = Some(k);
        }
    }
    for item in &c.tol {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--tol expects NAME=VALUE, got {item:?}")))?;
        let value = value
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad tolerance value in {item:?}")))?;
        cfg.tolerances.set(name, value)?;
    }
    Ok(cfg)
}

fn configure_threads() {
    if let Some(n) = std::env::var("DECAYLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Analyze(c) => {
            let cfg = build_config(&c)?;
            let report = analyze(&cfg.system()?, &cfg.analysis_options())?;
            sim::emit_report(&report, c.out.as_deref(), c.format)?;
        }
        Command::Simulate(c) => {
            let traj = sim::simulate(&build_config(&c)?)?;
            sim::emit_report(&traj, c.out.as_deref(), c.format)?;
        }
        Command::Envelope(c) => {
            let cfg = build_config(&c)?;
            let points = envelope(&cfg.system()?, &cfg.time_grid.times()?);
            sim::emit_report(&points, c.out.as_deref(), c.format)?;
        }
        Command::Verify(v) => {
            if v.common.format == Format::Csv {
                return Err(Error::Config("verify writes JSON only".into()));
            }
            let cert = sim::run_verify(&build_config(&v.common)?, v.constant_override)?;
            sim::emit_json(&cert, v.common.out.as_deref())?;
            if let Some(msg) = &cert.first_failure {
                eprintln!("verify failed: {msg}");
            }
            return Ok(cert.exit_code());
        }
        Command::Fractional(f) => {
            let spec = match (&f.spectrum_config, f.s0) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?;
                    let sc: SpectrumConfig = serde_json::from_str(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    sc.build()?
                }
                (None, Some(s0)) => decaylab::make_spectrum(&[s0])?.with_tail(Tail::Power),
                (None, None) => {
                    return Err(Error::Config(
                        "fractional needs --s0 or --spectrum-config".into(),
                    ))
                }
            };
            let fa = analyze_fractional(f.a, f.theta, &spec)?;
            sim::emit_json(&fa, f.out.as_deref())?;
        }
    }
    Ok(sim::EXIT_PASS)
}

fn main() {
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        let _ = e.print();
        process::exit(if e.use_stderr() { EXIT_USAGE } else { 0 })
    });
    configure_threads();
    match run(cli) {
        Ok(code) => process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(EXIT_USAGE);
        }
    }
}
