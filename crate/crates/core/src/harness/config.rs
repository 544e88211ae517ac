//! Experiment configuration and its INI-style text form.
//!
//! ```text
//! [problem]
//! ; `kind = file` reads `path = h2.txt` instead
//! kind = tfim
//! n = 6
//! coupling = 1.0
//! field = 1.0
//! boundary = open
//!
//! [ansatz]
//! kind = ra
//! reps = 4
//!
//! [noise]
//! lambda_cx = 1.0
//! shots = none
//! transient_scale = 0.5
//! reference_magnitude = auto
//! ; `zero`, or `file` with `trace_path = ...`
//! trace = synthetic
//! base_sigma = 0.01
//! spike_prob = 0.05
//! spike_mag = 1.0
//! spike_sign = positive
//!
//! [run]
//! scheme = qismet
//! seed = 7
//! iterations = 2000
//! budget = jobs
//! ```
//!
//! `[optimizer]`, `[controller]` and `[kalman]` override the defaults of
//! [`SpsaConfig`], [`ControllerConfig`] and [`KalmanConfig`]. Relative paths
//! resolve against the config file's directory.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::{Ini, Properties};

use crate::ansatz::{AnsatzKind, AnsatzSpec};
use crate::controller::{ControllerConfig, Policy};
use crate::device::{SpikeSign, SyntheticTraceParams};
use crate::error::{Error, Result};
use crate::filters::KalmanConfig;
use crate::hamiltonian::{tfim_1d, Boundary, PauliSum};
use crate::optimizer::{SpsaConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Baseline,
    Qismet,
    OnlyTransients,
    Blocking,
    Resampling,
    SecondOrder,
    Kalman,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Baseline,
        Scheme::Qismet,
        Scheme::OnlyTransients,
        Scheme::Blocking,
        Scheme::Resampling,
        Scheme::SecondOrder,
        Scheme::Kalman,
    ];

    pub fn policy(self) -> Policy {
        match self {
            Scheme::Qismet => Policy::Qismet,
            Scheme::OnlyTransients => Policy::OnlyTransients,
            _ => Policy::Baseline,
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            Scheme::Blocking => Variant::Blocking,
            Scheme::Resampling => Variant::Resampling,
            Scheme::SecondOrder => Variant::SecondOrder,
            _ => Variant::Plain,
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.to_string() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| Error::config(format!("unknown scheme {s:?}")))
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Scheme::Baseline => "baseline",
            Scheme::Qismet => "qismet",
            Scheme::OnlyTransients => "only_transients",
            Scheme::Blocking => "blocking",
            Scheme::Resampling => "resampling",
            Scheme::SecondOrder => "second_order",
            Scheme::Kalman => "kalman",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Tfim { n: usize, coupling: f64, field: f64, boundary: Boundary },
    File(PathBuf),
}

impl ProblemSpec {
    pub fn build(&self) -> Result<PauliSum> {
        match self {
            ProblemSpec::Tfim { n, coupling, field, boundary } => tfim_1d(*n, *coupling, *field, *boundary),
            ProblemSpec::File(path) => PauliSum::load(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceSpec {
    Zero,
    /// Generated per run; the length follows from the job budget.
    Synthetic { base_sigma: f64, spike_prob: f64, spike_mag: f64, spike_sign: SpikeSign },
    File(PathBuf),
}

impl TraceSpec {
    pub fn synthetic_params(&self, length: usize) -> Option<SyntheticTraceParams> {
        match *self {
            TraceSpec::Synthetic { base_sigma, spike_prob, spike_mag, spike_sign } => {
                Some(SyntheticTraceParams { base_sigma, spike_prob, spike_mag, spike_sign, length })
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub lambda_cx: f64,
    pub shots: Option<u32>,
    pub transient_scale: f64,
    /// `None` normalises by `|E0|`.
    pub reference_magnitude: Option<f64>,
    pub trace: TraceSpec,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { lambda_cx: 1.0, shots: None, transient_scale: 0.0, reference_magnitude: None, trace: TraceSpec::Zero }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    /// `iterations` counts accepted evaluations.
    Iterations,
    /// `iterations` counts jobs, retries included.
    Jobs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Zeros,
    /// Independent uniform draws from `[-scale, scale]`.
    Uniform(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub ansatz_kind: AnsatzKind,
    pub reps: usize,
    pub noise: NoiseSpec,
    /// Gains and variant settings; `iterations` and `variant` are derived
    /// from the run section and the scheme.
    pub optimizer: SpsaConfig,
    pub controller: ControllerConfig,
    pub kalman: KalmanConfig,
    pub scheme: Scheme,
    pub seed: u64,
    pub iterations: usize,
    pub budget: BudgetKind,
    pub init: InitSpec,
    pub final_window: usize,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Open-chain TFIM with `J = h = 1`, RA ansatz, no noise, plain SPSA.
    pub fn tfim(n: usize, reps: usize) -> Self {
        Self {
            problem: ProblemSpec::Tfim { n, coupling: 1.0, field: 1.0, boundary: Boundary::Open },
            ansatz_kind: AnsatzKind::Ra,
            reps,
            noise: NoiseSpec::default(),
            optimizer: SpsaConfig::default(),
            controller: ControllerConfig::default(),
            kalman: KalmanConfig::new(1.0, 0.1),
            scheme: Scheme::Baseline,
            seed: 0,
            iterations: 1000,
            budget: BudgetKind::Jobs,
            init: InitSpec::Uniform(0.1),
            final_window: 50,
            output: None,
        }
    }

    pub fn ansatz(&self, n: usize) -> Result<AnsatzSpec> {
        AnsatzSpec::new(self.ansatz_kind, n, self.reps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::config("iterations must be positive"));
        }
        if self.final_window == 0 {
            return Err(Error::config("final_window must be positive"));
        }
        if let ProblemSpec::File(path) = &self.problem {
            if !path.is_file() {
                return Err(Error::config(format!("hamiltonian file {} does not exist", path.display())));
            }
        }
        if let TraceSpec::File(path) = &self.noise.trace {
            if !path.is_file() {
                return Err(Error::config(format!("trace file {} does not exist", path.display())));
            }
        }
        if !(0.0..=0.5).contains(&self.noise.transient_scale) {
            return Err(Error::config(format!("transient_scale {} outside [0, 0.5]", self.noise.transient_scale)));
        }
        if !(self.noise.lambda_cx > 0.0 && self.noise.lambda_cx <= 1.0) {
            return Err(Error::config(format!("lambda_cx {} outside (0, 1]", self.noise.lambda_cx)));
        }
        if self.noise.shots == Some(0) {
            return Err(Error::config("shots must be positive"));
        }
        if let Some(p) = self.noise.trace.synthetic_params(1) {
            p.validate()?;
        }
        if let InitSpec::Uniform(scale) = self.init {
            if !(scale >= 0.0 && scale.is_finite()) {
                return Err(Error::config("init_scale must be finite and non-negative"));
            }
        }
        self.controller.validate()?;
        self.kalman.validate()?;
        SpsaConfig { iterations: 1, ..self.optimizer.clone() }.validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    /// Parse the INI text form; `base_dir` anchors relative paths.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let ini = Ini::load_from_str_noescape(text)
            .map_err(|e| Error::parse(None, e.line + 1, e.msg.to_string()))?;
        let resolve = |p: &str| match base_dir {
            Some(dir) if Path::new(p).is_relative() => dir.join(p),
            _ => PathBuf::from(p),
        };
        for name in ini.sections() {
            match name {
                None => {
                    if !ini.general_section().is_empty() {
                        return Err(Error::config("keys outside a section"));
                    }
                }
                Some(s) if SECTIONS.contains(&s) => {}
                Some(s) => return Err(Error::config(format!("unknown section [{s}]"))),
            }
        }
        let empty = Properties::new();
        let sec = |name: &'static str| Section { name, props: ini.section(Some(name)).unwrap_or(&empty) };

        let problem = sec("problem");
        problem.check_keys(&["kind", "n", "coupling", "field", "boundary", "path"])?;
        let problem_spec = match problem.get("kind").unwrap_or("tfim") {
            "tfim" => ProblemSpec::Tfim {
                n: problem.parse_or("n", 4)?,
                coupling: problem.parse_or("coupling", 1.0)?,
                field: problem.parse_or("field", 1.0)?,
                boundary: problem.parse_or("boundary", Boundary::Open)?,
            },
            "file" => ProblemSpec::File(resolve(problem.require("path")?)),
            other => return Err(Error::config(format!("[problem] kind must be tfim or file, got {other:?}"))),
        };

        let mut cfg = ExperimentConfig { problem: problem_spec, ..ExperimentConfig::tfim(4, 2) };

        let ansatz = sec("ansatz");
        ansatz.check_keys(&["kind", "reps"])?;
        cfg.ansatz_kind = ansatz.parse_or("kind", cfg.ansatz_kind)?;
        cfg.reps = ansatz.parse_or("reps", cfg.reps)?;

        let noise = sec("noise");
        noise.check_keys(&[
            "lambda_cx",
            "shots",
            "transient_scale",
            "reference_magnitude",
            "trace",
            "trace_path",
            "base_sigma",
            "spike_prob",
            "spike_mag",
            "spike_sign",
        ])?;
        cfg.noise.lambda_cx = noise.parse_or("lambda_cx", 1.0)?;
        cfg.noise.shots = match noise.get("shots") {
            None | Some("none") | Some("analytic") => None,
            Some(_) => Some(noise.parse_or("shots", 0u32)?),
        };
        cfg.noise.transient_scale = noise.parse_or("transient_scale", 0.0)?;
        cfg.noise.reference_magnitude = match noise.get("reference_magnitude") {
            None | Some("auto") => None,
            Some(_) => Some(noise.parse_or("reference_magnitude", 1.0)?),
        };
        cfg.noise.trace = match noise.get("trace").unwrap_or("zero") {
            "zero" => TraceSpec::Zero,
            "synthetic" => TraceSpec::Synthetic {
                base_sigma: noise.parse_or("base_sigma", 0.0)?,
                spike_prob: noise.parse_or("spike_prob", 0.0)?,
                spike_mag: noise.parse_or("spike_mag", 1.0)?,
                spike_sign: noise.parse_or("spike_sign", SpikeSign::Positive)?,
            },
            "file" => TraceSpec::File(resolve(noise.require("trace_path")?)),
            other => return Err(Error::config(format!("[noise] trace must be zero, synthetic or file, got {other:?}"))),
        };

        let opt = sec("optimizer");
        opt.check_keys(&[
            "a",
            "c",
            "stability",
            "alpha",
            "gamma",
            "resample_factor",
            "blocking_tolerance",
            "hessian_regularization",
            "hessian_smoothing",
        ])?;
        let o = &mut cfg.optimizer;
        o.a = opt.parse_or("a", o.a)?;
        o.c = opt.parse_or("c", o.c)?;
        if opt.get("stability").is_some() {
            o.big_a = Some(opt.parse_or("stability", 0.0)?);
        }
        o.alpha = opt.parse_or("alpha", o.alpha)?;
        o.gamma = opt.parse_or("gamma", o.gamma)?;
        o.resample_factor = opt.parse_or("resample_factor", o.resample_factor)?;
        o.blocking_tolerance = opt.parse_or("blocking_tolerance", o.blocking_tolerance)?;
        o.hessian_regularization = opt.parse_or("hessian_regularization", o.hessian_regularization)?;
        o.hessian_smoothing = opt.parse_or("hessian_smoothing", o.hessian_smoothing)?;

        let ctrl = sec("controller");
        ctrl.check_keys(&["tau", "target_skip_fraction", "retry_budget", "warmup_iterations", "calibration", "window"])?;
        let c = &mut cfg.controller;
        c.tau = ctrl.parse_or("tau", c.tau)?;
        c.target_skip_fraction = ctrl.parse_or("target_skip_fraction", c.target_skip_fraction)?;
        c.retry_budget = ctrl.parse_or("retry_budget", c.retry_budget)?;
        c.warmup_iterations = ctrl.parse_or("warmup_iterations", c.warmup_iterations)?;
        c.calibration = ctrl.parse_or("calibration", c.calibration)?;
        c.window = ctrl.parse_or("window", c.window)?;

        let kal = sec("kalman");
        kal.check_keys(&["transition", "measurement_variance", "process_variance", "x0", "p0"])?;
        let k = &mut cfg.kalman;
        k.transition = kal.parse_or("transition", k.transition)?;
        k.measurement_variance = kal.parse_or("measurement_variance", k.measurement_variance)?;
        k.process_variance = kal.parse_opt("process_variance")?;
        k.x0 = kal.parse_opt("x0")?;
        k.p0 = kal.parse_opt("p0")?;

        let run = sec("run");
        run.check_keys(&["scheme", "seed", "iterations", "budget", "init", "init_scale", "final_window", "output"])?;
        cfg.scheme = run.parse_or("scheme", cfg.scheme)?;
        cfg.seed = run.parse_or("seed", cfg.seed)?;
        cfg.iterations = run.parse_or("iterations", cfg.iterations)?;
        cfg.budget = match run.get("budget").unwrap_or("jobs") {
            "jobs" => BudgetKind::Jobs,
            "iterations" => BudgetKind::Iterations,
            other => return Err(Error::config(format!("[run] budget must be jobs or iterations, got {other:?}"))),
        };
        cfg.init = match run.get("init").unwrap_or("uniform") {
            "zeros" => InitSpec::Zeros,
            "uniform" => InitSpec::Uniform(run.parse_or("init_scale", 0.1)?),
            other => return Err(Error::config(format!("[run] init must be zeros or uniform, got {other:?}"))),
        };
        cfg.final_window = run.parse_or("final_window", cfg.final_window)?;
        cfg.output = run.get("output").map(resolve);

        if cfg.scheme == Scheme::Kalman && ini.section(Some("kalman")).is_none() {
            return Err(Error::config("scheme kalman needs a [kalman] section"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

const SECTIONS: [&str; 7] = ["problem", "ansatz", "noise", "optimizer", "controller", "kalman", "run"];

struct Section<'a> {
    name: &'static str,
    props: &'a Properties,
}

impl Section<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.props.get(key).map(str::trim)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::config(format!("[{}] is missing {key}", self.name)))
    }

    fn check_keys(&self, known: &[&str]) -> Result<()> {
        match self.props.iter().find(|(k, _)| !known.contains(k)) {
            Some((k, _)) => Err(Error::config(format!("unknown key {k:?} in [{}]", self.name))),
            None => Ok(()),
        }
    }

    fn parse_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.parse_opt(key)?.unwrap_or(default))
    }

    fn parse_opt<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse().map_err(|e| Error::config(format!("[{}] {key} = {v:?}: {e}", self.name))))
            .transpose()
    }
}
