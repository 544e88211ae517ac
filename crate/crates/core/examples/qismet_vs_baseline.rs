//! Median improvement of the transient-aware controller over plain SPSA,
//! alongside the magnitude-only skipper and the classical SPSA variants.

use qismet::device::SpikeSign;
use qismet::harness::{compare, Entry, ExperimentConfig, NoiseSpec, Scheme, TraceSpec};

fn main() -> qismet::Result<()> {
    let mut base = ExperimentConfig { iterations: 2000, ..ExperimentConfig::tfim(6, 4) };
    base.noise = NoiseSpec {
        transient_scale: 0.5,
        trace: TraceSpec::Synthetic { base_sigma: 0.01, spike_prob: 0.05, spike_mag: 1.0, spike_sign: SpikeSign::Positive },
        ..NoiseSpec::default()
    };
    let entries: Vec<Entry> = [
        Scheme::Baseline,
        Scheme::Qismet,
        Scheme::OnlyTransients,
        Scheme::Blocking,
        Scheme::Resampling,
        Scheme::SecondOrder,
    ]
    .into_iter()
    .map(|scheme| Entry::scheme(ExperimentConfig { scheme, ..base.clone() }))
    .collect();
    let seeds: Vec<u64> = (0..10).collect();
    let report = compare(&entries, &seeds, "baseline")?;
    println!("{:<16} {:>12} {:>8} {:>8}", "scheme", "final", "ratio", "skips");
    for m in &report.medians {
        println!("{:<16} {:>12.4} {:>8.3} {:>8.0}", m.label, m.final_energy, m.improvement_ratio, m.skip_count);
    }
    Ok(())
}
