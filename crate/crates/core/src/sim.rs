//! Run configuration, trajectory simulation, certification runs and report
//! output shared by the `decaylab` binary.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::damping::{parse_damping, DampingSpec};
use crate::error::{Error, Result};
use crate::lyapunov::{self, CertifiedBound, LemmaOutcome};
use crate::mode_analysis::{analyze, AnalysisOptions, DampedSystem, DecayReport, RESONANCE_RTOL};
use crate::partition::{self, PartitionParams, Region};
use crate::propagator::{envelope, propagate_scaled, write_envelope_csv, EnvelopePoint};
use crate::spectrum::{self, GridScale, SpectrumSpec, Tail};

/// Exit status of a `verify` run whose bounds all hold.
pub const EXIT_PASS: i32 = 0;
/// Exit status for malformed input or I/O failure.
pub const EXIT_USAGE: i32 = 1;
/// Exit status of a `verify` run with a violated bound.
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpectrumConfig {
    List {
        values: Vec<f64>,
        #[serde(default)]
        tail: Tail,
    },
    Grid {
        min: f64,
        max: f64,
        n: usize,
        #[serde(default)]
        scale: GridScale,
        #[serde(default)]
        tail: Tail,
    },
    /// Dirichlet Laplacian on `[0, length]`; unbounded unless `tail` says otherwise.
    Laplacian1d {
        length: f64,
        n_modes: usize,
        tail: Option<Tail>,
    },
    Bilaplacian1d {
        length: f64,
        n_modes: usize,
        tail: Option<Tail>,
    },
}

impl SpectrumConfig {
    pub fn build(&self) -> Result<SpectrumSpec> {
        Ok(match self {
            SpectrumConfig::List { values, tail } => {
                spectrum::make_spectrum(values)?.with_tail(*tail)
            }
            SpectrumConfig::Grid {
                min,
                max,
                n,
                scale,
                tail,
            } => spectrum::grid(*min, *max, *n, *scale)?.with_tail(*tail),
            SpectrumConfig::Laplacian1d {
                length,
                n_modes,
                tail,
            } => {
                let spec = spectrum::laplacian_1d(*length, *n_modes)?;
                match tail {
                    Some(t) => spec.with_tail(*t),
                    None => spec,
                }
            }
            SpectrumConfig::Bilaplacian1d {
                length,
                n_modes,
                tail,
            } => {
                let spec = spectrum::bilaplacian_1d(*length, *n_modes)?;
                match tail {
                    Some(t) => spec.with_tail(*t),
                    None => spec,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DampingConfig {
    Constant { a: f64 },
    Power { a: f64, theta: f64 },
    Expr { text: String },
}

/// Damping given either as DSL text or as a tagged object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DampingSource {
    Text(String),
    Tagged(DampingConfig),
}

impl DampingSource {
    /// Text of the shapes `a`, `a*s^θ`, … becomes the closed-form family,
    /// so that it may be combined with an unbounded tail.
    pub fn build(&self) -> Result<DampingSpec> {
        Ok(match self {
            DampingSource::Text(text) => parse_damping(text)?.recognize_family(),
            DampingSource::Tagged(DampingConfig::Constant { a }) => DampingSpec::constant(*a)?,
            DampingSource::Tagged(DampingConfig::Power { a, theta }) => {
                DampingSpec::power(*a, *theta)?
            }
            DampingSource::Tagged(DampingConfig::Expr { text }) => parse_damping(text)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    #[default]
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_points: usize,
    pub spacing: Spacing,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_max: 60.0,
            n_points: 2000,
            spacing: Spacing::Log,
        }
    }
}

/// Smallest positive time of a log grid, relative to `t_max`.
const LOG_GRID_SPAN: f64 = 1e-6;

impl TimeGrid {
    /// Grid starting at `t = 0`. A log grid puts its remaining points
    /// geometrically on `[1e-6·t_max, t_max]`.
    pub fn times(&self) -> Result<Vec<f64>> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) || self.n_points < 2 {
            return Err(Error::Config(format!(
                "time grid needs t_max > 0 and n_points >= 2, got t_max = {}, n_points = {}",
                self.t_max, self.n_points
            )));
        }
        let n = self.n_points;
        Ok(match self.spacing {
            Spacing::Linear => (0..n)
                .map(|i| self.t_max * i as f64 / (n - 1) as f64)
                .collect(),
            Spacing::Log => {
                let lo = self.t_max * LOG_GRID_SPAN;
                std::iter::once(0.0)
                    .chain((0..n - 1).map(|i| {
                        if n == 2 {
                            self.t_max
                        } else {
                            lo * (self.t_max / lo).powf(i as f64 / (n - 2) as f64)
                        }
                    }))
                    .collect()
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative slack on every upper bound check.
    pub bound: f64,
    /// Relative tolerance of the resonance test.
    pub resonance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            bound: 1e-10,
            resonance: RESONANCE_RTOL,
        }
    }
}

impl Tolerances {
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance {name} must be >= 0, got {value}"
            )));
        }
        match name {
            "bound" => self.bound = value,
            "resonance" => self.resonance = value,
            _ => {
                return Err(Error::Config(format!(
                    "unknown tolerance {name:?} (expected bound or resonance)"
                )))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    RandomTrials(usize),
    /// `(mode index, u, v)`; unlisted modes start at rest.
    Explicit(Vec<(usize, f64, f64)>),
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::RandomTrials(32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spectrum: SpectrumConfig,
    pub damping: DampingSource,
    #[serde(default)]
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub initial_data: InitialData,
    #[serde(default, rename = "K")]
    pub k: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

impl RunConfig {
    pub fn new(spectrum: SpectrumConfig, damping: DampingSource) -> Self {
        Self {
            spectrum,
            damping,
            time_grid: TimeGrid::default(),
            seed: 0,
            tolerances: Tolerances::default(),
            initial_data: InitialData::default(),
            k: None,
            epsilon: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn system(&self) -> Result<DampedSystem> {
        Ok(DampedSystem::new(
            self.spectrum.build()?,
            self.damping.build()?,
        )?)
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            resonance_tol: self.tolerances.resonance,
            k: self.k,
            epsilon: self.epsilon,
        }
    }

    pub fn n_trials(&self) -> usize {
        match &self.initial_data {
            InitialData::RandomTrials(n) => *n,
            InitialData::Explicit(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub regions: Vec<Region>,
    /// `states[k][i] = (u, v)` of mode `i` at `times[k]`.
    pub states: Vec<Vec<(f64, f64)>>,
    #[serde(rename = "E")]
    pub energy: Vec<f64>,
    /// Energy carried by each region, indexed by region number.
    #[serde(rename = "E_region")]
    pub region_energy: Vec<[f64; 4]>,
    #[serde(rename = "N")]
    pub envelope: Vec<f64>,
}

fn initial_states(config: &RunConfig, n_modes: usize) -> Result<Vec<(f64, f64)>> {
    match &config.initial_data {
        InitialData::RandomTrials(_) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            Ok((0..n_modes)
                .map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
                .collect())
        }
        InitialData::Explicit(entries) => {
            let mut states = vec![(0.0, 0.0); n_modes];
            for &(i, u, v) in entries {
                if i >= n_modes {
                    return Err(Error::Config(format!(
                        "initial data names mode {i}, but the spectrum has {n_modes} modes"
                    )));
                }
                if !(u.is_finite() && v.is_finite()) {
                    return Err(Error::Config(format!(
                        "initial data for mode {i} is not finite"
                    )));
                }
                states[i] = (u, v);
            }
            Ok(states)
        }
    }
}

/// Evolves the configured initial data on the configured time grid.
pub fn simulate(config: &RunConfig) -> Result<Trajectory> {
    let system = config.system()?;
    let times = config.time_grid.times()?;
    let opts = config.analysis_options();
    let resonant = system.resonance(opts.resonance_tol).is_some();
    let params = partition::resolve_params(&system, resonant, &opts)?;
    let regions = partition::assign_regions(&system, &params)
        .regions()
        .to_vec();
    let init = initial_states(config, system.eigenvalues().len())?;

    // per mode, per time
    let columns: Vec<Vec<(f64, f64)>> = system
        .modes()
        .zip(&init)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|((s, f), &(u0, v0))| {
            let r = s.sqrt();
            times
                .iter()
                .map(|&t| {
                    let p = propagate_scaled(s, f, t).unscaled();
                    let z = p.apply([r * u0, v0]);
                    (z[0] / r, z[1])
                })
                .collect()
        })
        .collect();

    let eig = system.eigenvalues();
    let mut states = Vec::with_capacity(times.len());
    let mut energy = Vec::with_capacity(times.len());
    let mut region_energy = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let row: Vec<(f64, f64)> = columns.iter().map(|c| c[k]).collect();
        let mut by_region = [0.0; 4];
        let mut total = 0.0;
        for ((&(u, v), &s), region) in row.iter().zip(eig).zip(&regions) {
            let e = s * u * u + v * v;
            by_region[region.index()] += e;
            total += e;
        }
        states.push(row);
        energy.push(total);
        region_energy.push(by_region);
    }
    let envelope = envelope(&system, &times).into_iter().map(|p| p.n).collect();
    Ok(Trajectory {
        times,
        eigenvalues: eig.to_vec(),
        regions,
        states,
        energy,
        region_energy,
        envelope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    /// `max_t N(t) / bound(t)`.
    pub worst_ratio: f64,
    pub worst_t: f64,
    pub n_times: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub pass: bool,
    pub first_failure: Option<String>,
    pub seed: u64,
    pub damping: String,
    pub n_modes: usize,
    pub m_star: f64,
    pub resonant: bool,
    pub s_star: Option<f64>,
    #[serde(with = "crate::serde_ext::inf_as_null")]
    pub ell: f64,
    pub params: PartitionParams,
    pub bound: CertifiedBound,
    pub envelope: EnvelopeCheck,
    pub lemmas: Vec<LemmaOutcome>,
}

impl Certificate {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_VIOLATION
        }
    }
}

/// Compares `N(t)` against the certified bound on every grid point.
pub fn check_envelope(
    points: &[EnvelopePoint],
    bound: &CertifiedBound,
    rel_tol: f64,
) -> EnvelopeCheck {
    let (worst_log, worst_t) = points
        .iter()
        .map(|p| (p.log_n - bound.log_bound(p.t), p.t))
        .fold(
            (f64::NEG_INFINITY, 0.0),
            |acc, x| if x.0 > acc.0 { x } else { acc },
        );
    let worst_ratio = worst_log.exp();
    EnvelopeCheck {
        worst_ratio,
        worst_t,
        n_times: points.len(),
        pass: worst_ratio <= 1.0 + rel_tol,
    }
}

/// Certificate, envelope check and lemma suite for one configuration.
///
/// `constant_override` replaces `C_norm`, to exercise the failure path.
pub fn run_verify(config: &RunConfig, constant_override: Option<f64>) -> Result<Certificate> {
    let system = config.system()?;
    let times = config.time_grid.times()?;
    let opts = config.analysis_options();
    let report = analyze(&system, &opts)?;
    let mut bound = lyapunov::certify(&system, &opts)?;
    if let Some(c) = constant_override {
        bound.c_norm = c;
        bound.c_energy = c * c;
    }
    let params = PartitionParams::new(bound.k_used, bound.eps_used)?;
    let rel_tol = config.tolerances.bound;

    let env = check_envelope(&envelope(&system, &times), &bound, rel_tol);
    let mut first_failure = (!env.pass).then(|| {
        format!(
            "envelope: N({}) exceeds the certified bound by a factor {}",
            env.worst_t, env.worst_ratio
        )
    });

    let trials = config.n_trials();
    let lemmas: Vec<LemmaOutcome> = Region::ALL
        .iter()
        .map(|&r| lyapunov::verify_lemma(&system, &params, r, trials, &times, config.seed, rel_tol))
        .collect();
    if first_failure.is_none() {
        first_failure = lemmas.iter().find(|l| !l.pass).map(|l| {
            format!(
                "lemma for region {}: worst ratio {} exceeds {}",
                l.region.index(),
                l.worst_ratio,
                l.constant
            )
        });
    }

    Ok(Certificate {
        pass: first_failure.is_none(),
        first_failure,
        seed: config.seed,
        damping: system.damping().canonical_text(),
        n_modes: system.eigenvalues().len(),
        m_star: report.m_star,
        resonant: report.resonant,
        s_star: report.s_star,
        ell: report.ell,
        params,
        bound,
        envelope: env,
        lemmas,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Reports that have a tabular form.
pub trait CsvTable {
    fn write_csv(&self, w: &mut dyn Write) -> io::Result<()>;
}

impl CsvTable for Trajectory {
    /// Columns `t,E,E0,E1,E2,E3,N`.
    fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "t,E,E0,E1,E2,E3,N")?;
        for (k, t) in self.times.iter().enumerate() {
            let r = self.region_energy[k];
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, self.energy[k], r[0], r[1], r[2], r[3], self.envelope[k]
            )?;
        }
        Ok(())
    }
}

impl CsvTable for DecayReport {
    /// One row per eigenvalue.
    fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(
            w,
            "s,f_s,phi_s,lambda_plus_re,lambda_plus_im,lambda_minus_re,lambda_minus_im,damping_class,region"
        )?;
        for m in &self.modes {
            let class = serde_json::to_value(m.damping_class)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            let region = m.region.map(|r| r.index().to_string()).unwrap_or_default();
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{class},{region}",
                m.s,
                m.f_s,
                m.phi_s,
                m.lambda_plus.re,
                m.lambda_plus.im,
                m.lambda_minus.re,
                m.lambda_minus.im
            )?;
        }
        Ok(())
    }
}

impl CsvTable for Vec<EnvelopePoint> {
    /// Columns `t,N,argmax_s`.
    fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        write_envelope_csv(w, self)
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            Error::Io {
                path: p.to_path_buf(),
                source,
            }
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_err(path: Option<&Path>) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}

/// Pretty JSON to `path`, or stdout when `path` is `None`.
pub fn emit_json<T: Serialize + ?Sized>(report: &T, path: Option<&Path>) -> Result<()> {
    let mut w = open_out(path)?;
    serde_json::to_writer_pretty(&mut w, report)
        .map_err(io::Error::from)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

pub fn emit_report<T: Serialize + CsvTable>(
    report: &T,
    path: Option<&Path>,
    format: Format,
) -> Result<()> {
    match format {
        Format::Json => emit_json(report, path),
        Format::Csv => {
            let mut w = open_out(path)?;
            report
                .write_csv(&mut w)
                .and_then(|_| w.flush())
                .map_err(io_err(path))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pendulum() -> RunConfig {
        let mut cfg = RunConfig::new(
            SpectrumConfig::List {
                values: vec![1.0],
                tail: Tail::None,
            },
            DampingSource::Text("1".into()),
        );
        cfg.initial_data = InitialData::Explicit(vec![(0, 1.0, 0.0)]);
        cfg.time_grid = TimeGrid {
            t_max: 2.0,
            n_points: 3,
            spacing: Spacing::Linear,
        };
        cfg
    }

    #[test]
    fn config_parsing() {
        let cfg = RunConfig::from_json(
            r#"{"spectrum": {"type": "list", "values": [1, 4, 9]},
                "damping": "0.5*s^0.5", "seed": 3,
                "time_grid": {"t_max": 10, "n_points": 5, "spacing": "linear"},
                "tolerances": {"bound": 1e-9},
                "initial_data": {"explicit": [[0, 1.0, 0.0]]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(
            cfg.damping.build().unwrap(),
            DampingSpec::power(0.5, 0.5).unwrap()
        );
        assert_eq!(
            cfg.time_grid.times().unwrap(),
            vec![0.0, 2.5, 5.0, 7.5, 10.0]
        );

        let cfg = RunConfig::from_json(
            r#"{"spectrum": {"type": "laplacian1d", "length": 3.14159, "n_modes": 10},
                "damping": {"type": "power", "a": 1, "theta": 1}}"#,
        )
        .unwrap();
        assert!(cfg.system().unwrap().spec().is_unbounded());
        assert_eq!(cfg.time_grid, TimeGrid::default());

        for bad in [
            r#"{"spectrum": {"type": "list", "values": [1]}}"#,
            r#"{"spectrum": {"type": "cube"}, "damping": "1"}"#,
            r#"{"spectrum": {"type": "list", "values": [1]}, "damping": "1", "extra": 1}"#,
        ] {
            assert!(matches!(RunConfig::from_json(bad), Err(Error::Config(_))));
        }
        let cfg = RunConfig::from_json(
            r#"{"spectrum": {"type": "laplacian1d", "length": 1, "n_modes": 4},
                "damping": "1 + s"}"#,
        )
        .unwrap();
        assert!(matches!(cfg.system(), Err(Error::Spectrum(_))));
    }

    #[test]
    fn log_grid_shape() {
        let g = TimeGrid {
            t_max: 60.0,
            n_points: 2000,
            spacing: Spacing::Log,
        }
        .times()
        .unwrap();
        assert_eq!(g.len(), 2000);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 60e-6).abs() < 1e-18);
        assert!((g[1999] - 60.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let bad = TimeGrid {
            t_max: 0.0,
            ..TimeGrid::default()
        };
        assert!(bad.times().is_err());
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("bound", 1e-6).unwrap();
        assert_eq!(t.bound, 1e-6);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("bound", -1.0).is_err());
    }

    #[test]
    fn pendulum_energy() {
        let tr = simulate(&pendulum()).unwrap();
        // u = (1+t)e^{-t}, so E(t) = (1 + 2t + 2t²)e^{-2t}
        let e1 = tr.energy[1];
        let expect = 5.0 * (-2.0f64).exp();
        assert!((e1 - expect).abs() <= 1e-12 * expect, "{e1}");
        assert_eq!(tr.energy[0], 1.0);
    }

    #[test]
    fn zero_data_stays_at_rest() {
        let mut cfg = pendulum();
        cfg.initial_data = InitialData::Explicit(vec![]);
        let tr = simulate(&cfg).unwrap();
        assert!(tr.energy.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn underdamped_mode_matches_oracle() {
        let mut cfg = pendulum();
        cfg.spectrum = SpectrumConfig::List {
            values: vec![2.0],
            tail: Tail::None,
        };
        cfg.damping = DampingSource::Text("0.5".into());
        cfg.initial_data = InitialData::Explicit(vec![(0, 0.3, -0.7)]);
        cfg.time_grid = TimeGrid {
            t_max: 20.0,
            n_points: 41,
            spacing: Spacing::Linear,
        };
        let tr = simulate(&cfg).unwrap();
        let r = 2f64.sqrt();
        for (k, &t) in tr.times.iter().enumerate() {
            let p = crate::propagator::expm_oracle(2.0, 0.5, t).matrix;
            let z = p.apply([r * 0.3, -0.7]);
            let e = z[0] * z[0] + z[1] * z[1];
            assert!((tr.energy[k] - e).abs() <= 1e-10 * e.max(1e-300), "t={t}");
        }
    }

    #[test]
    fn energy_is_additive_and_nonincreasing() {
        let mut cfg = RunConfig::new(
            SpectrumConfig::Grid {
                min: 0.01,
                max: 100.0,
                n: 60,
                scale: GridScale::Log,
                tail: Tail::None,
            },
            DampingSource::Text("0.3 + 0.2*sqrt(s)".into()),
        );
        cfg.seed = 9;
        cfg.time_grid.n_points = 300;
        let tr = simulate(&cfg).unwrap();
        for (e, r) in tr.energy.iter().zip(&tr.region_energy) {
            let sum: f64 = r.iter().sum();
            assert!((e - sum).abs() <= 1e-12 * e);
        }
        for w in tr.energy.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn explicit_index_out_of_range() {
        let mut cfg = pendulum();
        cfg.initial_data = InitialData::Explicit(vec![(3, 1.0, 0.0)]);
        assert!(matches!(simulate(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn trajectory_csv_header() {
        let tr = simulate(&pendulum()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,E,E0,E1,E2,E3,N"));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn verify_subdamped_and_resonant() {
        let mut cfg = RunConfig::new(
            SpectrumConfig::List {
                values: vec![1.0, 4.0, 9.0],
                tail: Tail::None,
            },
            DampingSource::Text("0.5".into()),
        );
        cfg.time_grid.n_points = 400;
        let cert = run_verify(&cfg, None).unwrap();
        assert!(cert.pass, "{:?}", cert.first_failure);
        assert_eq!(cert.exit_code(), EXIT_PASS);
        assert!((cert.bound.sharp_subdamped_c.unwrap() - 3f64.sqrt()).abs() < 1e-15);

        let mut pend = pendulum();
        pend.time_grid = TimeGrid::default();
        pend.time_grid.n_points = 400;
        let cert = run_verify(&pend, None).unwrap();
        assert!(cert.pass && cert.resonant);
        assert_eq!(cert.bound.poly_factor, 1);

        let cert = run_verify(&pend, Some(0.5)).unwrap();
        assert!(!cert.pass);
        assert_eq!(cert.exit_code(), EXIT_VIOLATION);
        assert!(cert.first_failure.unwrap().starts_with("envelope"));
    }

    #[test]
    fn report_json_round_trip() {
        let cfg = pendulum();
        let sys = cfg.system().unwrap();
        let report = analyze(&sys, &cfg.analysis_options()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        emit_report(&report, Some(&path), Format::Json).unwrap();
        let back: DecayReport =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn unwritable_path_is_named() {
        let tr = simulate(&pendulum()).unwrap();
        let path = Path::new("/nonexistent-dir/out.csv");
        let err = emit_report(&tr, Some(path), Format::Csv).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
