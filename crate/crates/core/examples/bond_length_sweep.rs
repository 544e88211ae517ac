//! H2 dissociation curve under spikes, against the transient-free curve.

use std::path::PathBuf;

use qismet::device::SpikeSign;
use qismet::harness::{median, sweep, ExperimentConfig, NoiseSpec, Scheme, SweepGrid, SweepKind, TraceSpec};

fn main() -> qismet::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/h2");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    let grid = SweepGrid::Files(files.clone());
    let seeds = 0..10;

    let mut curves = Vec::new();
    let mut clean = vec![Vec::new(); files.len()];
    let mut bonds = Vec::new();
    for scheme in [Scheme::Baseline, Scheme::Qismet] {
        let mut noisy = vec![Vec::new(); files.len()];
        for seed in seeds.clone() {
            let mut cfg = ExperimentConfig { iterations: 1000, scheme, seed, ..ExperimentConfig::tfim(4, 3) };
            cfg.optimizer.a = 4.0;
            cfg.noise = NoiseSpec {
                transient_scale: 0.5,
                trace: TraceSpec::Synthetic { base_sigma: 0.01, spike_prob: 0.05, spike_mag: 1.0, spike_sign: SpikeSign::Positive },
                ..NoiseSpec::default()
            };
            let report = sweep(SweepKind::BondLength, &cfg, &grid)?;
            bonds = report.points.iter().map(|p| p.grid_value).collect();
            for (i, p) in report.points.iter().enumerate() {
                let err = |e: &String| qismet::Error::Run(e.clone());
                noisy[i].push(p.outcome.as_ref().map_err(err)?.summary.final_energy);
                if scheme == Scheme::Baseline {
                    clean[i].push(p.noise_free.as_ref().expect("bond sweeps carry a clean run").as_ref().map_err(err)?.final_energy);
                }
            }
        }
        curves.push(noisy.iter().map(|v| median(v)).collect::<Vec<_>>());
    }
    println!("{:>6} {:>10} {:>10} {:>10}", "bond", "noise-free", "baseline", "qismet");
    for i in 0..files.len() {
        println!("{:>6.3} {:>10.4} {:>10.4} {:>10.4}", bonds[i], median(&clean[i]), curves[0][i], curves[1][i]);
    }
    Ok(())
}
