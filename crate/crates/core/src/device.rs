//! The virtual noisy backend.
//!
//! A job is a batch of (circuit, observable) requests executed back to back.
//! Every estimate in job `j` is
//!
//! ```text
//! value = λ^cx_depth · E_ideal + shot_delta + s · M · t(j)
//! ```
//!
//! where `λ` is the per-CX depolarizing survival factor, `s` the transient
//! scale, `M` the reference magnitude and `t` the transient trace. All
//! requests of one job share the same transient term.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::statevector::{sample_parity_mean, Circuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSource {
    File,
    Synthetic,
}

/// Dimensionless per-job transient offsets `t(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientTrace {
    offsets: Vec<f64>,
    source: TraceSource,
}

impl TransientTrace {
    pub fn new(offsets: Vec<f64>, source: TraceSource) -> Result<Self> {
        if let Some(j) = offsets.iter().position(|t| !t.is_finite()) {
            return Err(Error::config(format!("non-finite transient offset at job {j}")));
        }
        Ok(Self { offsets, source })
    }

    /// An all-zero trace of `len` jobs.
    pub fn zeros(len: usize) -> Self {
        Self { offsets: vec![0.0; len], source: TraceSource::Synthetic }
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn source(&self) -> TraceSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn get(&self, job: usize) -> Option<f64> {
        self.offsets.get(job).copied()
    }

    /// One offset per line, `#` comments allowed.
    pub fn parse(text: &str, path: Option<&Path>) -> Result<Self> {
        let mut offsets = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .replace('\u{2212}', "-")
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("not a number: {line:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(path, idx + 1, "non-finite offset"));
            }
            offsets.push(v);
        }
        if offsets.is_empty() {
            return Err(Error::Format("no offsets".into()));
        }
        Ok(Self { offsets, source: TraceSource::File })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path)?, Some(path))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# transient offsets, one per job\n");
        for t in &self.offsets {
            let _ = writeln!(out, "{t:?}");
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikeSign {
    Positive,
    Symmetric,
}

impl std::str::FromStr for SpikeSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "positive" => Ok(SpikeSign::Positive),
            "symmetric" => Ok(SpikeSign::Symmetric),
            other => Err(Error::config(format!("unknown spike sign {other:?}"))),
        }
    }
}

/// Gaussian background plus rare fixed-magnitude spikes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticTraceParams {
    pub base_sigma: f64,
    pub spike_prob: f64,
    pub spike_mag: f64,
    pub spike_sign: SpikeSign,
    pub length: usize,
}

impl SyntheticTraceParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.spike_prob) {
            return Err(Error::config(format!("spike_prob {} outside [0, 1]", self.spike_prob)));
        }
        if !(self.base_sigma >= 0.0 && self.base_sigma.is_finite()) {
            return Err(Error::config("base_sigma must be finite and non-negative"));
        }
        if !(self.spike_mag >= 0.0 && self.spike_mag.is_finite()) {
            return Err(Error::config("spike_mag must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Draw `t(j) = N(0, base_sigma) [± spike_mag with probability spike_prob]`.
///
/// Each job consumes the same number of random draws regardless of outcome,
/// so traces with different magnitudes but the same seed line up job by job.
pub fn gen_synthetic_trace<R: Rng + ?Sized>(params: &SyntheticTraceParams, rng: &mut R) -> Result<TransientTrace> {
    params.validate()?;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let offsets = (0..params.length)
        .map(|_| {
            let background = params.base_sigma * normal.sample(rng);
            let hit = rng.random::<f64>() < params.spike_prob;
            let negative = rng.random::<bool>();
            let spike = match (hit, params.spike_sign) {
                (false, _) => 0.0,
                (true, SpikeSign::Positive) => params.spike_mag,
                (true, SpikeSign::Symmetric) if negative => -params.spike_mag,
                (true, SpikeSign::Symmetric) => params.spike_mag,
            };
            background + spike
        })
        .collect();
    TransientTrace::new(offsets, TraceSource::Synthetic)
}

/// Static, shot and transient noise knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    /// Per-CX depolarizing survival factor in `(0, 1]`.
    pub lambda_cx: f64,
    /// `None` gives analytic expectations.
    pub shots: Option<u32>,
    /// Fraction `s ∈ [0, 0.5]` of the reference magnitude.
    pub transient_scale: f64,
    /// Normaliser `M` for transient offsets, usually `|E0|`.
    pub reference_magnitude: f64,
    pub trace: TransientTrace,
}

impl NoiseConfig {
    /// No static, shot or transient noise.
    pub fn noiseless(trace_len: usize) -> Self {
        Self {
            lambda_cx: 1.0,
            shots: None,
            transient_scale: 0.0,
            reference_magnitude: 1.0,
            trace: TransientTrace::zeros(trace_len),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_cx > 0.0 && self.lambda_cx <= 1.0) {
            return Err(Error::config(format!("lambda_cx {} outside (0, 1]", self.lambda_cx)));
        }
        if self.shots == Some(0) {
            return Err(Error::config("shots must be positive"));
        }
        if !(0.0..=0.5).contains(&self.transient_scale) {
            return Err(Error::config(format!(
                "transient_scale {} outside [0, 0.5]",
                self.transient_scale
            )));
        }
        if !(self.reference_magnitude > 0.0 && self.reference_magnitude.is_finite()) {
            return Err(Error::config("reference_magnitude must be positive"));
        }
        Ok(())
    }

    pub fn damping(&self, cx_depth: usize) -> f64 {
        self.lambda_cx.powi(cx_depth as i32)
    }
}

/// How an estimate decomposes; `value = ideal·damping + shot + transient`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakdown {
    pub ideal: f64,
    pub damping: f64,
    pub shot: f64,
    pub transient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    pub job_index: usize,
    pub breakdown: Breakdown,
}

/// Execute one job at a given index.
pub fn execute_job<R: Rng + ?Sized>(
    requests: &[(&Circuit, &PauliSum)],
    job_index: usize,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> Result<Vec<EnergyEstimate>> {
    if let Some(&(c, _)) = requests.first() {
        if requests.iter().any(|(other, _)| other.n() != c.n()) {
            return Err(Error::config("all requests in a job must share a qubit count"));
        }
    }
    let t = cfg.trace.get(job_index).ok_or_else(|| {
        Error::Run(format!(
            "transient trace exhausted at job {job_index} (length {}); supply a longer trace",
            cfg.trace.len()
        ))
    })?;
    let transient = cfg.transient_scale * cfg.reference_magnitude * t;
    requests
        .iter()
        .map(|&(circuit, observable)| {
            if observable.n() != circuit.n() {
                return Err(Error::config(format!(
                    "observable on {} qubits, circuit on {}",
                    observable.n(),
                    circuit.n()
                )));
            }
            let state = circuit.simulate();
            let damping = cfg.damping(circuit.cx_depth());
            let (ideal, shot) = match cfg.shots {
                None => (observable.expectation(&state)?, 0.0),
                Some(shots) => {
                    let mut ideal = 0.0;
                    let mut sampled = 0.0;
                    for (c, p) in observable.terms() {
                        let e = state.expectation(p)?;
                        ideal += c * e;
                        sampled += if p.is_identity() {
                            c * damping
                        } else {
                            c * sample_parity_mean(damping * e, shots, rng)?
                        };
                    }
                    (ideal, sampled - damping * ideal)
                }
            };
            Ok(EnergyEstimate {
                value: damping * ideal + shot + transient,
                job_index,
                breakdown: Breakdown { ideal, damping, shot, transient },
            })
        })
        .collect()
}

/// A single-run backend that owns its job clock and shot-noise stream.
#[derive(Debug, Clone)]
pub struct Device {
    cfg: NoiseConfig,
    clock: usize,
    rng: ChaCha8Rng,
}

impl Device {
    pub fn new(cfg: NoiseConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, clock: 0, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn config(&self) -> &NoiseConfig {
        &self.cfg
    }

    /// Jobs executed so far; also the index the next job will receive.
    pub fn jobs_executed(&self) -> usize {
        self.clock
    }

    pub fn execute(&mut self, requests: &[(&Circuit, &PauliSum)]) -> Result<Vec<EnergyEstimate>> {
        let out = execute_job(requests, self.clock, &self.cfg, &mut self.rng)?;
        self.clock += 1;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{AnsatzKind, AnsatzSpec};
    use crate::hamiltonian::{tfim_1d, Boundary};

    fn setup() -> (Circuit, PauliSum) {
        let spec = AnsatzSpec::new(AnsatzKind::Ra, 3, 2).unwrap();
        let params: Vec<f64> = (0..spec.param_count()).map(|i| 0.3 * i as f64 - 1.0).collect();
        (spec.build(&params).unwrap(), tfim_1d(3, 1.0, 1.0, Boundary::Open).unwrap())
    }

    fn cfg(trace: Vec<f64>, s: f64, m: f64) -> NoiseConfig {
        NoiseConfig {
            lambda_cx: 1.0,
            shots: None,
            transient_scale: s,
            reference_magnitude: m,
            trace: TransientTrace::new(trace, TraceSource::Synthetic).unwrap(),
        }
    }

    #[test]
    fn all_noise_off_is_ideal() {
        let (c, h) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = execute_job(&[(&c, &h)], 0, &cfg(vec![0.0], 0.3, 5.0), &mut rng).unwrap();
        let ideal = h.expectation(&c.simulate()).unwrap();
        assert_eq!(e[0].value, ideal);
    }

    #[test]
    fn additive_transient() {
        let (c, h) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = execute_job(&[(&c, &h)], 1, &cfg(vec![0.0, 0.3], 0.1, 5.0), &mut rng).unwrap();
        let ideal = h.expectation(&c.simulate()).unwrap();
        assert!((e[0].value - (ideal + 0.15)).abs() < 1e-12);
    }

    #[test]
    fn same_job_shares_transient() {
        let (c, h) = setup();
        let other = AnsatzSpec::new(AnsatzKind::Ra, 3, 1).unwrap().build(&[0.5; 6]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = execute_job(&[(&c, &h), (&other, &h)], 0, &cfg(vec![0.8], 0.5, 2.0), &mut rng).unwrap();
        assert_eq!(e[0].breakdown.transient, e[1].breakdown.transient);
        assert_ne!(e[0].value, e[1].value);
    }

    #[test]
    fn exhausted_trace_is_a_run_error() {
        let (c, h) = setup();
        let mut dev = Device::new(cfg(vec![0.0, 0.0], 0.1, 1.0), 0).unwrap();
        dev.execute(&[(&c, &h)]).unwrap();
        dev.execute(&[(&c, &h)]).unwrap();
        assert!(matches!(dev.execute(&[(&c, &h)]), Err(Error::Run(_))));
    }

    #[test]
    fn mismatched_requests_rejected() {
        let (c, h) = setup();
        let small = tfim_1d(2, 1.0, 1.0, Boundary::Open).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(execute_job(&[(&c, &small)], 0, &cfg(vec![0.0], 0.0, 1.0), &mut rng).is_err());
        let c2 = AnsatzSpec::new(AnsatzKind::Ra, 2, 1).unwrap().build(&[0.0; 4]).unwrap();
        assert!(execute_job(&[(&c, &h), (&c2, &small)], 0, &cfg(vec![0.0], 0.0, 1.0), &mut rng).is_err());
    }

    #[test]
    fn static_damping_ratio() {
        let (c, h) = setup();
        let mut noise = cfg(vec![0.0], 0.0, 1.0);
        noise.lambda_cx = 0.97;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = execute_job(&[(&c, &h)], 0, &noise, &mut rng).unwrap()[0];
        let ideal = h.expectation(&c.simulate()).unwrap();
        assert!((e.value / ideal - 0.97f64.powi(c.cx_depth() as i32)).abs() < 1e-12);
    }

    #[test]
    fn invalid_noise_configs() {
        let mut bad = NoiseConfig::noiseless(1);
        bad.lambda_cx = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = NoiseConfig::noiseless(1);
        bad.transient_scale = 0.6;
        assert!(bad.validate().is_err());
        let mut bad = NoiseConfig::noiseless(1);
        bad.shots = Some(0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn synthetic_trace_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let quiet = SyntheticTraceParams {
            base_sigma: 0.0,
            spike_prob: 0.0,
            spike_mag: 3.0,
            spike_sign: SpikeSign::Symmetric,
            length: 100,
        };
        assert!(gen_synthetic_trace(&quiet, &mut rng).unwrap().offsets().iter().all(|&t| t == 0.0));
        let always = SyntheticTraceParams { spike_prob: 1.0, spike_sign: SpikeSign::Positive, ..quiet };
        assert!(gen_synthetic_trace(&always, &mut rng).unwrap().offsets().iter().all(|&t| t == 3.0));
        let bad = SyntheticTraceParams { spike_prob: 1.5, ..quiet };
        assert!(gen_synthetic_trace(&bad, &mut rng).is_err());
    }

    #[test]
    fn synthetic_trace_is_seed_deterministic() {
        let p = SyntheticTraceParams {
            base_sigma: 0.1,
            spike_prob: 0.2,
            spike_mag: 1.0,
            spike_sign: SpikeSign::Symmetric,
            length: 500,
        };
        let a = gen_synthetic_trace(&p, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let b = gen_synthetic_trace(&p, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_text_format() {
        let t = TransientTrace::parse("0.0\n0.1\n\u{2212}0.2\n", None).unwrap();
        assert_eq!(t.offsets(), &[0.0, 0.1, -0.2]);
        assert!(matches!(TransientTrace::parse("", None), Err(Error::Format(m)) if m == "no offsets"));
        assert!(matches!(
            TransientTrace::parse("# header\n0.5\nfoo\n", None),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn trace_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.txt");
        let p = SyntheticTraceParams {
            base_sigma: 0.3,
            spike_prob: 0.1,
            spike_mag: 2.0,
            spike_sign: SpikeSign::Symmetric,
            length: 64,
        };
        let t = gen_synthetic_trace(&p, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        t.write(&path).unwrap();
        let back = TransientTrace::load(&path).unwrap();
        assert_eq!(back.offsets(), t.offsets());
        assert_eq!(back.source(), TraceSource::File);
    }
}
