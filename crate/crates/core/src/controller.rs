//! Transient-aware acceptance control for a noisy tuning loop.
//!
//! Every job after the first carries, next to the circuit under evaluation,
//! a rerun of the last accepted circuit. Comparing that rerun with the
//! energy the accepted circuit produced earlier exposes the job's transient
//! shift `T_m`; subtracting it gives a prediction `E_p` of what the current
//! energy would have been without the shift. An evaluation is accepted when
//! the observed and predicted energy changes agree in direction, or when
//! both are small. Rejected evaluations are retried in fresh jobs up to the
//! retry budget, then accepted as measured.
//!
//! One controller iteration is one objective evaluation of the tuner: the
//! tuner is only told about accepted values.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::ansatz::AnsatzSpec;
use crate::device::Device;
use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::optimizer::{Spsa, TunerStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
    ForcedAccept,
}

impl Decision {
    pub fn is_accepted(self) -> bool {
        self != Decision::Reject
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
            Decision::ForcedAccept => "forced_accept",
        })
    }
}

/// One executed job as seen by the controller.
///
/// The rerun-derived fields are `None` for jobs without a rerun (the first
/// iteration, and every job of a run without transient control).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub job_index: usize,
    pub e_m: f64,
    pub e_mr_prev: Option<f64>,
    pub t_m: Option<f64>,
    pub e_p: Option<f64>,
    pub g_m: Option<f64>,
    pub g_p: Option<f64>,
    pub decision: Decision,
    pub retries: usize,
    /// Noise-free energy of the evaluated point.
    pub e_ideal: f64,
    /// Static damping applied to the evaluated circuit.
    pub damping: f64,
    /// Energy of the latest accepted evaluation after this job.
    pub committed_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calibration {
    FixedTau,
    QuantileAdaptive,
}

impl FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed_tau" | "fixed" => Ok(Calibration::FixedTau),
            "quantile_adaptive" | "quantile" => Ok(Calibration::QuantileAdaptive),
            other => Err(Error::config(format!("unknown calibration mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    /// Band half-width used in `FixedTau` mode.
    pub tau: f64,
    pub target_skip_fraction: f64,
    pub retry_budget: usize,
    /// Accepted iterations before quantile calibration starts; the band is
    /// unbounded until then.
    pub warmup_iterations: usize,
    pub calibration: Calibration,
    /// Sliding window of `|T_m|` values for quantile calibration.
    pub window: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            tau: 0.0,
            target_skip_fraction: 0.10,
            retry_budget: 5,
            warmup_iterations: 20,
            calibration: Calibration::QuantileAdaptive,
            window: 250,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau < 0.0 {
            return Err(Error::config("tau must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.target_skip_fraction) {
            return Err(Error::config("target_skip_fraction must lie in [0, 1]"));
        }
        if self.window == 0 {
            return Err(Error::config("calibration window must be positive"));
        }
        Ok(())
    }
}

/// `T_m = E_mR(prev) − E_m(prev)`.
pub fn estimate_transient(e_mr_prev: f64, e_m_prev: f64) -> f64 {
    e_mr_prev - e_m_prev
}

/// Returns `(E_p, G_m, G_p)`.
pub fn predict(e_m_cur: f64, t_m: f64, e_m_prev: f64) -> (f64, f64, f64) {
    let e_p = e_m_cur - t_m;
    (e_p, e_m_cur - e_m_prev, e_p - e_m_prev)
}

/// Accept when the observed and predicted changes point the same way (zero
/// matches either sign), or when both lie within `±tau`.
///
/// Since `G_m − G_p = T_m`, opposite signs with both inside the band imply
/// `|T_m| ≤ 2·tau`, and a rejection always implies `|T_m| > tau`.
pub fn decide(g_m: f64, g_p: f64, tau: f64) -> Decision {
    let same_direction = g_m * g_p >= 0.0;
    if same_direction || g_m.abs().max(g_p.abs()) <= tau {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

/// Magnitude-threshold skipping: reject iff `|T_m| > tau`.
pub fn only_transients_decide(t_m: f64, tau: f64) -> Decision {
    if t_m.abs() > tau {
        Decision::Reject
    } else {
        Decision::Accept
    }
}

/// Linearly interpolated empirical quantile of `values` at `q ∈ [0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// The `(1 − target)`-quantile of a `|T_m|` history; an empty history
/// yields the warmup band, which is unbounded.
pub fn calibrate_tau(history: &[f64], target_skip_fraction: f64) -> f64 {
    quantile(history, 1.0 - target_skip_fraction).unwrap_or(f64::INFINITY)
}

/// Sliding-window threshold source.
#[derive(Debug, Clone)]
pub struct TauCalibrator {
    cfg: ControllerConfig,
    history: VecDeque<f64>,
}

impl TauCalibrator {
    pub fn new(cfg: &ControllerConfig) -> Self {
        Self { cfg: cfg.clone(), history: VecDeque::with_capacity(cfg.window) }
    }

    pub fn observe(&mut self, t_m: f64) {
        if self.history.len() == self.cfg.window {
            self.history.pop_front();
        }
        self.history.push_back(t_m.abs());
    }

    /// Threshold for the next decision given the accepted-iteration count.
    pub fn tau(&self, accepted: usize) -> f64 {
        match self.cfg.calibration {
            Calibration::FixedTau => self.cfg.tau,
            Calibration::QuantileAdaptive if accepted < self.cfg.warmup_iterations => f64::INFINITY,
            Calibration::QuantileAdaptive => {
                let (a, b) = self.history.as_slices();
                let all: Vec<f64> = a.iter().chain(b).copied().collect();
                calibrate_tau(&all, self.cfg.target_skip_fraction)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// No rerun circuits; every evaluation is accepted.
    Baseline,
    Qismet,
    OnlyTransients,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Stop after this many accepted evaluations.
    Iterations(usize),
    /// Stop after this many jobs.
    Jobs(usize),
}

#[derive(Debug, Clone, Default)]
pub struct LoopOutput {
    pub records: Vec<IterationRecord>,
    pub steps: Vec<TunerStep>,
}

impl LoopOutput {
    pub fn skip_count(&self) -> usize {
        self.records.iter().filter(|r| r.decision == Decision::Reject).count()
    }

    pub fn forced_accept_count(&self) -> usize {
        self.records.iter().filter(|r| r.decision == Decision::ForcedAccept).count()
    }
}

struct Committed {
    circuit: crate::statevector::Circuit,
    e_m: f64,
}

/// Drive `tuner` against `device` until `budget` is spent.
pub fn qismet_loop(
    tuner: &mut Spsa,
    device: &mut Device,
    hamiltonian: &PauliSum,
    ansatz: &AnsatzSpec,
    cfg: &ControllerConfig,
    policy: Policy,
    budget: Budget,
) -> Result<LoopOutput> {
    cfg.validate()?;
    if hamiltonian.n() != ansatz.n() {
        return Err(Error::config(format!(
            "hamiltonian acts on {} qubits, ansatz on {}",
            hamiltonian.n(),
            ansatz.n()
        )));
    }
    if tuner.theta().len() != ansatz.param_count() {
        return Err(Error::config(format!(
            "tuner has {} parameters, ansatz takes {}",
            tuner.theta().len(),
            ansatz.param_count()
        )));
    }
    let start_job = device.jobs_executed();
    let done = |accepted: usize, device: &Device| match budget {
        Budget::Iterations(n) => accepted >= n,
        Budget::Jobs(n) => device.jobs_executed() - start_job >= n,
    };

    let mut out = LoopOutput::default();
    let mut calibrator = TauCalibrator::new(cfg);
    let mut committed: Option<Committed> = None;
    let mut accepted = 0;

    'outer: while !done(accepted, device) {
        let circuit = ansatz.build(tuner.ask())?;
        let mut retries = 0;
        loop {
            let prev = committed.as_ref().filter(|_| policy != Policy::Baseline);
            let record = match prev {
                None => {
                    let est = device.execute(&[(&circuit, hamiltonian)])?[0];
                    IterationRecord {
                        iteration: accepted,
                        job_index: est.job_index,
                        e_m: est.value,
                        e_mr_prev: None,
                        t_m: None,
                        e_p: None,
                        g_m: None,
                        g_p: None,
                        decision: Decision::Accept,
                        retries,
                        e_ideal: est.breakdown.ideal,
                        damping: est.breakdown.damping,
                        committed_energy: est.value,
                    }
                }
                Some(prev) => {
                    let ests = device.execute(&[(&circuit, hamiltonian), (&prev.circuit, hamiltonian)])?;
                    let (cur, rerun) = (ests[0], ests[1]);
                    let t_m = estimate_transient(rerun.value, prev.e_m);
                    let (e_p, g_m, g_p) = predict(cur.value, t_m, prev.e_m);
                    let tau = calibrator.tau(accepted);
                    calibrator.observe(t_m);
                    let mut decision = match policy {
                        Policy::OnlyTransients => only_transients_decide(t_m, tau),
                        _ => decide(g_m, g_p, tau),
                    };
                    if decision == Decision::Reject && retries >= cfg.retry_budget {
                        decision = Decision::ForcedAccept;
                    }
                    IterationRecord {
                        iteration: accepted,
                        job_index: cur.job_index,
                        e_m: cur.value,
                        e_mr_prev: Some(rerun.value),
                        t_m: Some(t_m),
                        e_p: Some(e_p),
                        g_m: Some(g_m),
                        g_p: Some(g_p),
                        decision,
                        retries,
                        e_ideal: cur.breakdown.ideal,
                        damping: cur.breakdown.damping,
                        committed_energy: if decision.is_accepted() { cur.value } else { prev.e_m },
                    }
                }
            };
            let decision = record.decision;
            let e_m = record.e_m;
            out.records.push(record);
            if decision.is_accepted() {
                accepted += 1;
                if let Some(step) = tuner.tell(e_m)? {
                    out.steps.push(step);
                }
                committed = Some(Committed { circuit, e_m });
                break;
            }
            retries += 1;
            if done(accepted, device) {
                break 'outer;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::AnsatzKind;
    use crate::device::{NoiseConfig, TraceSource, TransientTrace};
    use crate::hamiltonian::{tfim_1d, Boundary};
    use crate::optimizer::SpsaConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transient_and_prediction_examples() {
        assert!((estimate_transient(-0.70, -1.00) - 0.30).abs() < 1e-12);
        assert_eq!(estimate_transient(-0.4, -0.4), 0.0);
        let (e_p, g_m, g_p) = predict(-0.80, 0.30, -1.00);
        assert!((e_p + 1.10).abs() < 1e-12 && (g_m - 0.20).abs() < 1e-12 && (g_p + 0.10).abs() < 1e-12);
        let (_, g_m, g_p) = predict(-0.3, 0.0, -0.5);
        assert_eq!(g_m, g_p);
    }

    #[test]
    fn decision_examples() {
        assert_eq!(decide(0.20, 0.35, 0.05), Decision::Accept);
        assert_eq!(decide(0.20, -0.10, 0.05), Decision::Reject);
        assert_eq!(decide(0.02, -0.01, 0.05), Decision::Accept);
        assert_eq!(decide(0.0, -3.0, 0.0), Decision::Accept);
        assert_eq!(only_transients_decide(0.3, 0.5), Decision::Accept);
        assert_eq!(only_transients_decide(-0.6, 0.5), Decision::Reject);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(calibrate_tau(&[0.0; 10], 0.1), 0.0);
        assert_eq!(calibrate_tau(&[], 0.1), f64::INFINITY);
        let mut h = vec![0.1; 99];
        h.push(10.0);
        let tau = calibrate_tau(&h, 0.01);
        assert!(tau > 0.1 && tau < 10.0);
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), Some(2.0));
        assert_eq!(quantile(&[1.0, 2.0], 0.25), Some(1.25));
    }

    #[test]
    fn calibrator_window_and_warmup() {
        let cfg = ControllerConfig { window: 3, warmup_iterations: 2, target_skip_fraction: 0.0, ..Default::default() };
        let mut c = TauCalibrator::new(&cfg);
        for t in [5.0, -1.0, 2.0, 0.5] {
            c.observe(t);
        }
        assert_eq!(c.tau(1), f64::INFINITY);
        assert_eq!(c.tau(2), 2.0);
        let fixed = ControllerConfig { calibration: Calibration::FixedTau, tau: 0.7, ..cfg };
        assert_eq!(TauCalibrator::new(&fixed).tau(0), 0.7);
    }

    #[test]
    fn config_validation() {
        assert!(ControllerConfig { tau: -1.0, ..Default::default() }.validate().is_err());
        assert!(ControllerConfig { target_skip_fraction: 1.5, ..Default::default() }.validate().is_err());
        assert!(ControllerConfig::default().validate().is_ok());
    }

    fn small_run(trace: Vec<f64>, policy: Policy, budget: Budget) -> LoopOutput {
        let h = tfim_1d(3, 1.0, 1.0, Boundary::Open).unwrap();
        let ansatz = AnsatzSpec::new(AnsatzKind::Ra, 3, 1).unwrap();
        let noise = NoiseConfig {
            transient_scale: 0.5,
            trace: TransientTrace::new(trace, TraceSource::Synthetic).unwrap(),
            ..NoiseConfig::noiseless(0)
        };
        let mut device = Device::new(noise, 1).unwrap();
        let cfg = SpsaConfig { iterations: 100, ..Default::default() };
        let mut tuner = Spsa::new(cfg, vec![0.3; ansatz.param_count()], ChaCha8Rng::seed_from_u64(2)).unwrap();
        let ctrl = ControllerConfig { warmup_iterations: 0, calibration: Calibration::FixedTau, tau: 0.0, ..Default::default() };
        qismet_loop(&mut tuner, &mut device, &h, &ansatz, &ctrl, policy, budget).unwrap()
    }

    #[test]
    fn zero_trace_accepts_everything() {
        let out = small_run(vec![0.0; 40], Policy::Qismet, Budget::Iterations(30));
        assert_eq!(out.records.len(), 30);
        assert!(out.records.iter().all(|r| r.decision == Decision::Accept && r.retries == 0));
        assert_eq!(out.steps.len(), 15);
    }

    #[test]
    fn sustained_spike_forces_acceptance() {
        let mut trace = vec![0.0; 80];
        for t in &mut trace[10..18] {
            *t = 50.0;
        }
        let out = small_run(trace, Policy::OnlyTransients, Budget::Iterations(30));
        assert!(out.records.iter().all(|r| r.retries <= 5));
        let first_forced = out.records.iter().position(|r| r.decision == Decision::ForcedAccept).unwrap();
        assert_eq!(out.records[first_forced].job_index, 15);
        assert!(out
            .records
            .iter()
            .filter(|r| r.decision == Decision::ForcedAccept)
            .all(|r| r.retries == 5));
    }

    #[test]
    fn job_budget_counts_retries() {
        let mut trace = vec![0.0; 40];
        trace[5] = 50.0;
        let out = small_run(trace, Policy::OnlyTransients, Budget::Jobs(20));
        assert_eq!(out.records.len(), 20);
        assert_eq!(out.skip_count(), 1);
        assert_eq!(out.records.last().unwrap().job_index, 19);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let h = tfim_1d(4, 1.0, 1.0, Boundary::Open).unwrap();
        let ansatz = AnsatzSpec::new(AnsatzKind::Ra, 3, 1).unwrap();
        let mut device = Device::new(NoiseConfig::noiseless(10), 0).unwrap();
        let mut tuner = Spsa::new(SpsaConfig::default(), vec![0.0; 6], ChaCha8Rng::seed_from_u64(0)).unwrap();
        let r = qismet_loop(&mut tuner, &mut device, &h, &ansatz, &ControllerConfig::default(), Policy::Qismet, Budget::Jobs(4));
        assert!(r.is_err());
    }
}
