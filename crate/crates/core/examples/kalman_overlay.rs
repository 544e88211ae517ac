//! Kalman-filtered baseline estimates next to the raw ones, over the
//! standard grid of transition coefficients and measurement variances.

use qismet::device::SpikeSign;
use qismet::filters::KalmanConfig;
use qismet::harness::{compare, Entry, ExperimentConfig, NoiseSpec, Scheme, TraceSpec};

fn main() -> qismet::Result<()> {
    let mut base = ExperimentConfig { iterations: 2000, ..ExperimentConfig::tfim(6, 4) };
    base.noise = NoiseSpec {
        transient_scale: 0.5,
        trace: TraceSpec::Synthetic { base_sigma: 0.01, spike_prob: 0.05, spike_mag: 1.0, spike_sign: SpikeSign::Positive },
        ..NoiseSpec::default()
    };
    let mut entries = vec![
        Entry::scheme(base.clone()),
        Entry::scheme(ExperimentConfig { scheme: Scheme::Qismet, ..base.clone() }),
    ];
    for k in KalmanConfig::grid() {
        let label = format!("kalman T={} MV={}", k.transition, k.measurement_variance);
        entries.push(Entry::new(label, ExperimentConfig { scheme: Scheme::Kalman, kalman: k, ..base.clone() }));
    }
    let seeds: Vec<u64> = (0..10).collect();
    let report = compare(&entries, &seeds, "baseline")?;
    for m in &report.medians {
        println!("{:<24} final {:>9.4}  ratio {:.3}", m.label, m.final_energy, m.improvement_ratio);
    }
    Ok(())
}
