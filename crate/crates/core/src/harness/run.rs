//! Single runs: setup from a config, execution and CSV export.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ansatz::AnsatzSpec;
use crate::controller::{qismet_loop, Budget, IterationRecord};
use crate::device::{gen_synthetic_trace, Device, NoiseConfig, TransientTrace};
use crate::error::{Error, Result};
use crate::filters::filter_series;
use crate::hamiltonian::PauliSum;
use crate::optimizer::{Spsa, SpsaConfig, TunerStep, Variant};

use super::config::{BudgetKind, ExperimentConfig, InitSpec, Scheme, TraceSpec};

pub const CSV_HEADER: [&str; 13] = [
    "iteration",
    "job_index",
    "scheme",
    "E_m",
    "E_mR_prev",
    "T_m",
    "E_p",
    "G_m",
    "G_p",
    "decision",
    "retries",
    "E_ideal",
    "committed_energy",
];

/// Independent random streams derived from one run seed. Schemes run with
/// the same seed see the same trace, start point and perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    pub trace: u64,
    pub device: u64,
    pub tuner: u64,
    pub init: u64,
}

impl SeedStreams {
    pub fn derive(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { trace: rng.random(), device: rng.random(), tuner: rng.random(), init: rng.random() }
    }
}

/// Everything a run needs besides its mutable state.
#[derive(Debug, Clone)]
pub struct Setup {
    pub hamiltonian: PauliSum,
    pub exact_ground_energy: f64,
    pub ansatz: AnsatzSpec,
    pub noise: NoiseConfig,
    pub theta0: Vec<f64>,
    pub spsa: SpsaConfig,
    pub seeds: SeedStreams,
}

fn evaluations_per_step(cfg: &SpsaConfig) -> usize {
    match cfg.variant {
        Variant::Plain => 2,
        Variant::Resampling => 2 * cfg.resample_factor,
        Variant::SecondOrder => 4,
        Variant::Blocking => 3,
    }
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let hamiltonian = cfg.problem.build()?;
        let exact_ground_energy = hamiltonian.exact_ground_energy()?;
        let ansatz = cfg.ansatz(hamiltonian.n())?;
        let seeds = SeedStreams::derive(cfg.seed);

        let trace_len = match cfg.budget {
            BudgetKind::Jobs => cfg.iterations,
            BudgetKind::Iterations => cfg.iterations * (cfg.controller.retry_budget + 1),
        };
        let trace = match &cfg.noise.trace {
            TraceSpec::Zero => TransientTrace::zeros(trace_len),
            TraceSpec::File(path) => TransientTrace::load(path)?,
            spec @ TraceSpec::Synthetic { .. } => {
                let params = spec.synthetic_params(trace_len).expect("synthetic spec");
                gen_synthetic_trace(&params, &mut ChaCha8Rng::seed_from_u64(seeds.trace))?
            }
        };
        let reference_magnitude = match cfg.noise.reference_magnitude {
            Some(m) => m,
            None if exact_ground_energy.abs() > 0.0 => exact_ground_energy.abs(),
            None => return Err(Error::config("reference_magnitude auto needs a nonzero ground energy")),
        };
        let noise = NoiseConfig {
            lambda_cx: cfg.noise.lambda_cx,
            shots: cfg.noise.shots,
            transient_scale: cfg.noise.transient_scale,
            reference_magnitude,
            trace,
        };
        noise.validate()?;

        let mut init_rng = ChaCha8Rng::seed_from_u64(seeds.init);
        let theta0 = match cfg.init {
            InitSpec::Zeros => vec![0.0; ansatz.param_count()],
            InitSpec::Uniform(scale) => {
                (0..ansatz.param_count()).map(|_| scale * init_rng.random_range(-1.0..=1.0)).collect()
            }
        };

        let mut spsa = SpsaConfig { variant: cfg.scheme.variant(), ..cfg.optimizer.clone() };
        spsa.iterations = (cfg.iterations / evaluations_per_step(&spsa)).max(1);
        spsa.validate()?;
        Ok(Self { hamiltonian, exact_ground_energy, ansatz, noise, theta0, spsa, seeds })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scheme: Scheme,
    pub seed: u64,
    /// Mean of the last `final_window` committed energies.
    pub final_energy: f64,
    pub best_energy: f64,
    pub exact_ground_energy: f64,
    /// Noise-free energy of the tuner's final parameters.
    pub final_ideal_energy: f64,
    /// `(E_ref − E0) / (E_scheme − E0)`; filled in by comparisons.
    pub improvement_ratio: Option<f64>,
    pub skip_count: usize,
    pub forced_accept_count: usize,
    pub total_jobs: usize,
}

impl RunSummary {
    pub fn skip_fraction(&self) -> f64 {
        if self.total_jobs == 0 {
            0.0
        } else {
            self.skip_count as f64 / self.total_jobs as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub summary: RunSummary,
    /// One record per job. For the Kalman scheme `committed_energy` holds
    /// the filtered estimate.
    pub records: Vec<IterationRecord>,
    pub steps: Vec<TunerStep>,
}

/// `(E_ref − E0) / (E − E0)`.
pub fn improvement_ratio(reference: f64, energy: f64, e0: f64) -> f64 {
    (reference - e0) / (energy - e0)
}

/// Execute one configured run.
pub fn run(cfg: &ExperimentConfig) -> Result<RunResult> {
    let setup = Setup::new(cfg)?;
    run_with(cfg, &setup)
}

/// Execute a run against a prepared setup.
pub fn run_with(cfg: &ExperimentConfig, setup: &Setup) -> Result<RunResult> {
    let mut device = Device::new(setup.noise.clone(), setup.seeds.device)?;
    let mut tuner = Spsa::new(setup.spsa.clone(), setup.theta0.clone(), ChaCha8Rng::seed_from_u64(setup.seeds.tuner))?;
    let budget = match cfg.budget {
        BudgetKind::Jobs => Budget::Jobs(cfg.iterations),
        BudgetKind::Iterations => Budget::Iterations(cfg.iterations),
    };
    let out = qismet_loop(
        &mut tuner,
        &mut device,
        &setup.hamiltonian,
        &setup.ansatz,
        &cfg.controller,
        cfg.scheme.policy(),
        budget,
    )?;
    let skip_count = out.skip_count();
    let forced_accept_count = out.forced_accept_count();
    let mut records = out.records;
    if cfg.scheme == Scheme::Kalman {
        let raw: Vec<f64> = records.iter().map(|r| r.committed_energy).collect();
        for (r, x) in records.iter_mut().zip(filter_series(&raw, &cfg.kalman)?) {
            r.committed_energy = x;
        }
    }
    let committed: Vec<f64> = records.iter().map(|r| r.committed_energy).collect();
    let window = cfg.final_window.min(committed.len());
    let tail = &committed[committed.len() - window..];
    let final_ideal_energy = setup.hamiltonian.expectation(&setup.ansatz.prepare(tuner.theta())?)?;
    let summary = RunSummary {
        scheme: cfg.scheme,
        seed: cfg.seed,
        final_energy: tail.iter().sum::<f64>() / window as f64,
        best_energy: committed.iter().copied().fold(f64::INFINITY, f64::min),
        exact_ground_energy: setup.exact_ground_energy,
        final_ideal_energy,
        improvement_ratio: None,
        skip_count,
        forced_accept_count,
        total_jobs: device.jobs_executed(),
    };
    Ok(RunResult { summary, records, steps: out.steps })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV fields for one record, in header order.
pub fn record_fields(record: &IterationRecord, scheme: Scheme) -> [String; 13] {
    [
        record.iteration.to_string(),
        record.job_index.to_string(),
        scheme.to_string(),
        record.e_m.to_string(),
        opt(record.e_mr_prev),
        opt(record.t_m),
        opt(record.e_p),
        opt(record.g_m),
        opt(record.g_p),
        record.decision.to_string(),
        record.retries.to_string(),
        record.e_ideal.to_string(),
        record.committed_energy.to_string(),
    ]
}

pub fn write_csv<W: Write>(writer: W, result: &RunResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in &result.records {
        w.write_record(record_fields(r, result.summary.scheme))?;
    }
    w.flush()?;
    Ok(())
}

/// Write through a sibling temporary file and rename into place.
pub fn write_atomically(path: &Path, contents: impl FnOnce(&mut std::fs::File) -> Result<()>) -> Result<()> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let mut file = std::fs::File::create(&tmp)?;
    contents(&mut file)?;
    file.sync_all()?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_csv_file(path: &Path, result: &RunResult) -> Result<()> {
    write_atomically(path, |f| write_csv(f, result))
}
