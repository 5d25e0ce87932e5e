//! Command-line front end: `simulate`, `verify` and `decay`.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::catalog::{ModelId, ModelSpec};
use crate::engine::{
    integrate, verify_model, DecayFit, DiagnosticsRecord, IntegratorConfig, VerificationReport,
};
use crate::error::{Error, Result};
use crate::functionals::ModelParams;
use crate::grid::Grid;
use crate::state::{FieldName, State};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

pub const CSV_HEADER: &str = "t,energy,entropy,mech_energy,res_LdS,res_MdE,theta_min";

/// Step used when the config does not set `dt`, capped by the model's bound.
pub const DEFAULT_DT: f64 = 1e-3;
const DECAY_WINDOWS: usize = 8;

#[derive(Debug, Parser)]
#[command(
    name = "beamgeneric",
    version,
    about = "GENERIC beam models: simulate, verify, fit decay"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a model and write diagnostics as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the randomized structure checks.
    Verify {
        /// A model name, or `all`.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit the exponential decay rate of the mechanical energy.
    Decay {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Settings read from a `key = value` config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelId,
    pub n: usize,
    pub length: f64,
    /// `None` picks `min(DEFAULT_DT, stability bound)`.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub record_every: usize,
    pub params: ModelParams,
    pub seed: u64,
    pub mode: u32,
    pub amplitude: f64,
    /// Standard deviation of seeded noise added to the displacement fields.
    pub noise: f64,
    pub output: Option<PathBuf>,
}

const RUN_KEYS: [&str; 11] = [
    "model",
    "n",
    "length",
    "dt",
    "t_end",
    "record_every",
    "seed",
    "mode",
    "amplitude",
    "noise",
    "output",
];

fn parse_value<T: std::str::FromStr>(
    key: &str,
    raw: &str,
    problems: &mut Vec<String>,
) -> Option<T> {
    match raw.parse() {
        Ok(v) => Some(v),
        Err(_) => {
            problems.push(format!("cannot parse `{raw}` for key `{key}`"));
            None
        }
    }
}

impl RunConfig {
    pub fn defaults(model: ModelId) -> Self {
        RunConfig {
            model,
            n: 64,
            length: 1.0,
            dt: None,
            t_end: 10.0,
            record_every: 10,
            params: ModelParams::default(),
            seed: 0,
            mode: 1,
            amplitude: 0.1,
            noise: 0.0,
            output: None,
        }
    }

    /// Parses config text; every problem (unknown key, bad value, missing
    /// model) is collected into one validation error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut problems = Vec::new();
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!("line {}: expected `key = value`", lineno + 1));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if !RUN_KEYS.contains(&key) && !ModelParams::NAMES.contains(&key) {
                problems.push(format!("unknown key `{key}`"));
                continue;
            }
            if !seen.insert(key.to_string()) {
                problems.push(format!("duplicate key `{key}`"));
                continue;
            }
            entries.push((key.to_string(), value.to_string()));
        }

        let model = match entries.iter().find(|(k, _)| k == "model") {
            Some((_, v)) => match v.parse::<ModelId>() {
                Ok(id) => Some(id),
                Err(e) => {
                    problems.push(e.to_string());
                    None
                }
            },
            None => {
                problems.push("missing key `model`".into());
                None
            }
        };
        let mut cfg = RunConfig::defaults(model.unwrap_or(ModelId::TimoshenkoUndamped));

        for (key, raw) in &entries {
            let p = &mut problems;
            match key.as_str() {
                "model" => {}
                "n" => cfg.n = parse_value(key, raw, p).unwrap_or(cfg.n),
                "length" => cfg.length = parse_value(key, raw, p).unwrap_or(cfg.length),
                "dt" => cfg.dt = parse_value(key, raw, p).or(cfg.dt),
                "t_end" => cfg.t_end = parse_value(key, raw, p).unwrap_or(cfg.t_end),
                "record_every" => {
                    cfg.record_every = parse_value(key, raw, p).unwrap_or(cfg.record_every)
                }
                "seed" => cfg.seed = parse_value(key, raw, p).unwrap_or(cfg.seed),
                "mode" => cfg.mode = parse_value(key, raw, p).unwrap_or(cfg.mode),
                "amplitude" => cfg.amplitude = parse_value(key, raw, p).unwrap_or(cfg.amplitude),
                "noise" => cfg.noise = parse_value(key, raw, p).unwrap_or(cfg.noise),
                "output" => cfg.output = Some(PathBuf::from(raw)),
                name => {
                    if let Some(v) = parse_value::<f64>(key, raw, p) {
                        cfg.params.set(name, v)?;
                    }
                }
            }
        }
        if problems.is_empty() && model.is_some() {
            Ok(cfg)
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Precondition(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn build(&self) -> Result<ModelSpec> {
        let grid = Grid::new(self.n, self.length)?;
        ModelSpec::new(self.model, self.params.clone(), grid)
    }

    pub fn integrator(&self, model: &ModelSpec) -> Result<IntegratorConfig> {
        match self.dt {
            Some(dt) => IntegratorConfig::new(dt, self.t_end, self.record_every),
            None => IntegratorConfig::fitted(
                DEFAULT_DT.min(model.dt_bound()),
                self.t_end,
                self.record_every,
            ),
        }
    }

    /// Single-mode data plus seeded noise on the displacement fields.
    pub fn initial_state(&self, model: &ModelSpec) -> Result<State> {
        let mut z = model.default_initial_state(self.mode, self.amplitude)?;
        if self.noise != 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for name in [FieldName::Phi, FieldName::Psi, FieldName::Chi] {
                if let Ok(values) = z.field_mut(name) {
                    for v in values {
                        *v += self.noise * rng.sample::<f64, _>(StandardNormal);
                    }
                }
            }
        }
        Ok(z)
    }

    pub fn run(&self) -> Result<(ModelSpec, Vec<DiagnosticsRecord>)> {
        let model = self.build()?;
        let cfg = self.integrator(&model)?;
        let z0 = self.initial_state(&model)?;
        let records = integrate(&model, &z0, &cfg)?;
        Ok((model, records))
    }
}

pub fn write_csv<W: Write>(out: &mut W, records: &[DiagnosticsRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        write!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},",
            r.t, r.energy, r.entropy, r.mech_energy, r.res_lds, r.res_mde
        )?;
        match r.theta_min {
            Some(v) => writeln!(out, "{v:.16e}")?,
            None => writeln!(out)?,
        }
    }
    Ok(())
}

enum Failure {
    Model(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn simulate<W: Write>(config: &Path, out: &mut W) -> Result<(), Failure> {
    let cfg = RunConfig::from_file(config)?;
    let (_, records) = cfg.run()?;
    match &cfg.output {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path)?);
            write_csv(&mut file, &records)?;
            file.flush()?;
        }
        None => write_csv(out, &records)?,
    }
    Ok(())
}

fn verify<W: Write>(model: &str, trials: usize, seed: u64, out: &mut W) -> Result<bool, Failure> {
    let ids: Vec<ModelId> = if model.eq_ignore_ascii_case("all") {
        ModelId::ALL.to_vec()
    } else {
        vec![model.parse()?]
    };
    let grid = Grid::new(64, 1.0)?;
    let reports: Vec<Result<VerificationReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = ids
            .iter()
            .map(|&id| {
                let grid = grid.clone();
                s.spawn(move || verify_model(&ModelSpec::with_defaults(id, grid)?, trials, seed))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification thread panicked"))
            .collect()
    });
    let mut all = true;
    for report in reports {
        let report = report?;
        all &= report.passed();
        write!(out, "{report}")?;
    }
    writeln!(
        out,
        "{}",
        if all {
            "ALL PASS"
        } else {
            "SOME CHECKS FAILED"
        }
    )?;
    Ok(all)
}

fn decay<W: Write, E: Write>(config: &Path, out: &mut W, err: &mut E) -> Result<(), Failure> {
    let cfg = RunConfig::from_file(config)?;
    if !cfg.model.is_damped() {
        writeln!(
            err,
            "warning: {} is undamped; the fitted rate should be close to zero",
            cfg.model
        )?;
    }
    let (model, records) = cfg.run()?;
    let fit = DecayFit::from_records(&records, DECAY_WINDOWS)?;
    writeln!(out, "model {}", model.id())?;
    writeln!(out, "rate {:.6e}", fit.rate)?;
    let negative = fit.window_rates.iter().filter(|r| **r < 0.0).count();
    writeln!(
        out,
        "negative_windows {negative}/{} confidence {:.4}",
        fit.window_rates.len(),
        fit.confidence
    )?;
    let windows: Vec<String> = fit
        .window_rates
        .iter()
        .map(|r| format!("{r:.3e}"))
        .collect();
    writeln!(out, "window_rates {}", windows.join(" "))?;
    Ok(())
}

fn report_failure<E: Write>(err: &mut E, failure: Failure) -> i32 {
    match failure {
        Failure::Model(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            }
        }
        Failure::Io(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit status.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_VALIDATION;
            }
            let _ = write!(out, "{text}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Simulate { config } => simulate(&config, out).map(|_| true),
        Command::Verify {
            model,
            trials,
            seed,
        } => verify(&model, trials as usize, seed, out),
        Command::Decay { config } => decay(&config, out, err).map(|_| true),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VALIDATION,
        Err(f) => report_failure(err, f),
    }
}
