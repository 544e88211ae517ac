use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qismet::device::{gen_synthetic_trace, SpikeSign, SyntheticTraceParams};
use qismet::harness::{
    compare, run, sweep, write_csv_file, Entry, ExperimentConfig, ProblemSpec, RunSummary, Scheme, SweepGrid,
    SweepKind,
};
use qismet::harness::run::write_atomically;
use qismet::Result;

#[derive(Parser)]
#[command(name = "qismet", version, about = "Transient-aware VQE tuning on a simulated noisy backend")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its per-job CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        scheme: Option<Scheme>,
    },
    /// Compare schemes over several seeds against a reference scheme.
    Compare {
        /// Base configuration(s); with one config, `--scheme` lists variants of it.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        scheme: Vec<Scheme>,
        /// First seed; `--seeds` consecutive seeds are run.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value = "baseline")]
        reference: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter; writes `<out>` (long CSV) and `<out>.summary.csv`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        kind: SweepKind,
        /// Comma-separated values, or Pauli-sum files for `bond_length`.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        scheme: Option<Scheme>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic transient trace.
    GenTrace {
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0.0)]
        base_sigma: f64,
        #[arg(long, default_value_t = 0.05)]
        spike_prob: f64,
        #[arg(long, default_value_t = 1.0)]
        spike_mag: f64,
        #[arg(long, default_value = "positive")]
        spike_sign: SpikeSign,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the exact ground energy of a configured problem or Pauli-sum file.
    ExactEnergy {
        #[arg(long, conflicts_with = "file")]
        config: Option<PathBuf>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

fn print_summary(s: &RunSummary) {
    println!(
        "{} seed={} final_energy={:.6} best_energy={:.6} exact={:.6} final_ideal={:.6} skips={} forced={} jobs={}",
        s.scheme,
        s.seed,
        s.final_energy,
        s.best_energy,
        s.exact_ground_energy,
        s.final_ideal_energy,
        s.skip_count,
        s.forced_accept_count,
        s.total_jobs
    );
}

fn load(path: &PathBuf, seed: Option<u64>, scheme: Option<Scheme>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(scheme) = scheme {
        cfg.scheme = scheme;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out, scheme } => {
            let cfg = load(&config, seed, scheme)?;
            let result = run(&cfg)?;
            if let Some(path) = out.or(cfg.output.clone()) {
                write_csv_file(&path, &result)?;
            } else {
                qismet::harness::write_csv(std::io::stdout().lock(), &result)?;
            }
            print_summary(&result.summary);
        }
        Command::Compare { config, scheme, seed, seeds, reference, out } => {
            let mut entries = Vec::new();
            for path in &config {
                let base = load(path, None, None)?;
                if scheme.is_empty() {
                    entries.push(Entry::scheme(base));
                } else {
                    for &s in &scheme {
                        entries.push(Entry::scheme(ExperimentConfig { scheme: s, ..base.clone() }));
                    }
                }
            }
            let seeds: Vec<u64> = (seed..seed + seeds).collect();
            let report = compare(&entries, &seeds, &reference)?;
            for m in &report.medians {
                println!(
                    "{:<16} median final_energy={:.6} ratio={:.3} skips={} jobs={}",
                    m.label, m.final_energy, m.improvement_ratio, m.skip_count, m.total_jobs
                );
            }
            if let Some(path) = out {
                write_atomically(&path, |f| report.write_csv(f))?;
            }
        }
        Command::Sweep { config, kind, grid, seed, scheme, out } => {
            let cfg = load(&config, seed, scheme)?;
            let grid = match kind {
                SweepKind::BondLength => SweepGrid::Files(grid.iter().map(PathBuf::from).collect()),
                _ => SweepGrid::Values(
                    grid.iter()
                        .map(|v| v.parse().map_err(|_| qismet::Error::Config(format!("bad grid value {v:?}"))))
                        .collect::<Result<_>>()?,
                ),
            };
            let report = sweep(kind, &cfg, &grid)?;
            write_atomically(&out, |f| report.write_long_csv(f))?;
            let mut summary_path = out.clone().into_os_string();
            summary_path.push(".summary.csv");
            write_atomically(&PathBuf::from(summary_path), |f| report.write_summary_csv(f))?;
            for p in &report.points {
                match &p.outcome {
                    Ok(r) => {
                        print!("grid_value={} ", p.grid_value);
                        print_summary(&r.summary);
                    }
                    Err(e) => eprintln!("grid_value={} failed: {e}", p.grid_value),
                }
            }
        }
        Command::GenTrace { length, base_sigma, spike_prob, spike_mag, spike_sign, seed, out } => {
            let params = SyntheticTraceParams { base_sigma, spike_prob, spike_mag, spike_sign, length };
            let trace = gen_synthetic_trace(&params, &mut ChaCha8Rng::seed_from_u64(seed))?;
            match out {
                Some(path) => trace.write(path)?,
                None => std::io::stdout().lock().write_all(trace.to_text().as_bytes())?,
            }
        }
        Command::ExactEnergy { config, file } => {
            let h = match (config, file) {
                (Some(c), _) => ExperimentConfig::load(c)?.problem.build()?,
                (None, Some(f)) => ProblemSpec::File(f).build()?,
                (None, None) => return Err(qismet::Error::Config("give --config or --file".into())),
            };
            println!("{:.12}", h.exact_ground_energy()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
