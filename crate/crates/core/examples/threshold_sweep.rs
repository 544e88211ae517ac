//! Skip-rate targets under light and heavy spike traces.

use qismet::device::SpikeSign;
use qismet::harness::{median, sweep, ExperimentConfig, NoiseSpec, Scheme, SweepGrid, SweepKind, TraceSpec};

fn main() -> qismet::Result<()> {
    let targets = vec![0.01, 0.10, 0.25];
    for spike_prob in [0.01, 0.10] {
        let mut base = ExperimentConfig { iterations: 2000, scheme: Scheme::Qismet, ..ExperimentConfig::tfim(6, 4) };
        base.noise = NoiseSpec {
            transient_scale: 0.5,
            trace: TraceSpec::Synthetic { base_sigma: 0.01, spike_prob, spike_mag: 1.0, spike_sign: SpikeSign::Positive },
            ..NoiseSpec::default()
        };
        println!("spike_prob {spike_prob}");
        let mut finals = vec![Vec::new(); targets.len()];
        let mut skips = vec![Vec::new(); targets.len()];
        for seed in 0..5 {
            let cfg = ExperimentConfig { seed, ..base.clone() };
            let report = sweep(SweepKind::Threshold, &cfg, &SweepGrid::Values(targets.clone()))?;
            for (i, p) in report.points.iter().enumerate() {
                let s = &p.outcome.as_ref().map_err(|e| qismet::Error::Run(e.clone()))?.summary;
                finals[i].push(s.final_energy);
                skips[i].push(s.skip_fraction());
            }
        }
        for (i, t) in targets.iter().enumerate() {
            println!("  target {t:<5} median final {:>9.4}  skip fraction {:.3}", median(&finals[i]), median(&skips[i]));
        }
    }
    Ok(())
}
