//! One-parameter sweeps emitted as long-format CSV.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, ProblemSpec, TraceSpec};
use super::run::{record_fields, run, RunResult, RunSummary, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Grid over `transient_scale`.
    NoiseMagnitude,
    /// Grid over `target_skip_fraction`.
    Threshold,
    /// Grid over Pauli-sum files; each point also gets a zero-transient run.
    BondLength,
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise_magnitude" => Ok(SweepKind::NoiseMagnitude),
            "threshold" => Ok(SweepKind::Threshold),
            "bond_length" => Ok(SweepKind::BondLength),
            other => Err(Error::config(format!("unknown sweep kind {other:?}"))),
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SweepKind::NoiseMagnitude => "noise_magnitude",
            SweepKind::Threshold => "threshold",
            SweepKind::BondLength => "bond_length",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    Values(Vec<f64>),
    Files(Vec<PathBuf>),
}

impl SweepGrid {
    fn len(&self) -> usize {
        match self {
            SweepGrid::Values(v) => v.len(),
            SweepGrid::Files(f) => f.len(),
        }
    }
}

#[derive(Debug)]
pub struct SweepPoint {
    pub grid_value: f64,
    pub outcome: std::result::Result<RunResult, String>,
    /// Zero-transient run at the same point (bond-length sweeps only).
    pub noise_free: Option<std::result::Result<RunSummary, String>>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
}

/// `bond length <x>` from a Pauli-sum file's leading comments.
pub fn bond_length_of(path: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(path).ok()?;
    text.lines().take_while(|l| l.trim_start().starts_with('#')).find_map(|l| {
        let rest = &l[l.find("bond length")? + "bond length".len()..];
        rest.split(|c: char| c.is_whitespace() || c == ',').find(|t| !t.is_empty())?.parse().ok()
    })
}

/// One run per grid point, sharing the base seed; failures are recorded
/// per point.
pub fn sweep(kind: SweepKind, base: &ExperimentConfig, grid: &SweepGrid) -> Result<SweepReport> {
    if grid.len() == 0 {
        return Err(Error::config("sweep grid is empty"));
    }
    let configs: Vec<(f64, ExperimentConfig)> = match (kind, grid) {
        (SweepKind::NoiseMagnitude, SweepGrid::Values(v)) => v
            .iter()
            .map(|&s| {
                let mut c = base.clone();
                c.noise.transient_scale = s;
                (s, c)
            })
            .collect(),
        (SweepKind::Threshold, SweepGrid::Values(v)) => v
            .iter()
            .map(|&t| {
                let mut c = base.clone();
                c.controller.target_skip_fraction = t;
                (t, c)
            })
            .collect(),
        (SweepKind::BondLength, SweepGrid::Files(files)) => files
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let c = ExperimentConfig { problem: ProblemSpec::File(f.clone()), ..base.clone() };
                (bond_length_of(f).unwrap_or(i as f64), c)
            })
            .collect(),
        (kind, _) => return Err(Error::config(format!("{kind} sweep given the wrong kind of grid"))),
    };
    let points = configs
        .par_iter()
        .map(|(value, cfg)| {
            let noise_free = (kind == SweepKind::BondLength).then(|| {
                let mut clean = cfg.clone();
                clean.noise.transient_scale = 0.0;
                clean.noise.trace = TraceSpec::Zero;
                run(&clean).map(|r| r.summary).map_err(|e| e.to_string())
            });
            SweepPoint { grid_value: *value, outcome: run(cfg).map_err(|e| e.to_string()), noise_free }
        })
        .collect();
    Ok(SweepReport { kind, points })
}

impl SweepReport {
    /// Every record of every successful run, prefixed by `grid_value`.
    pub fn write_long_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["grid_value"];
        header.extend(CSV_HEADER);
        w.write_record(&header)?;
        for p in &self.points {
            if let Ok(result) = &p.outcome {
                for r in &result.records {
                    let fields = record_fields(r, result.summary.scheme);
                    w.write_record(std::iter::once(p.grid_value.to_string()).chain(fields))?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// One row per grid point.
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "grid_value",
            "scheme",
            "final_energy",
            "best_energy",
            "exact_ground_energy",
            "final_ideal_energy",
            "skip_count",
            "skip_fraction",
            "forced_accept_count",
            "total_jobs",
            "noise_free_final_energy",
            "error",
        ])?;
        for p in &self.points {
            let noise_free = match &p.noise_free {
                Some(Ok(s)) => s.final_energy.to_string(),
                _ => String::new(),
            };
            let row = match &p.outcome {
                Ok(r) => {
                    let s = &r.summary;
                    [
                        p.grid_value.to_string(),
                        s.scheme.to_string(),
                        s.final_energy.to_string(),
                        s.best_energy.to_string(),
                        s.exact_ground_energy.to_string(),
                        s.final_ideal_energy.to_string(),
                        s.skip_count.to_string(),
                        s.skip_fraction().to_string(),
                        s.forced_accept_count.to_string(),
                        s.total_jobs.to_string(),
                        noise_free,
                        String::new(),
                    ]
                }
                Err(e) => {
                    let mut row: [String; 12] = Default::default();
                    row[0] = p.grid_value.to_string();
                    row[10] = noise_free;
                    row[11] = e.clone();
                    row
                }
            };
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::SpikeSign;
    use crate::harness::run::write_csv;

    fn noisy_base() -> ExperimentConfig {
        let mut c = ExperimentConfig { iterations: 60, ..ExperimentConfig::tfim(3, 1) };
        c.noise.trace = TraceSpec::Synthetic { base_sigma: 0.05, spike_prob: 0.1, spike_mag: 1.0, spike_sign: SpikeSign::Positive };
        c
    }

    #[test]
    fn zero_magnitude_matches_dedicated_run() {
        let report = sweep(SweepKind::NoiseMagnitude, &noisy_base(), &SweepGrid::Values(vec![0.0, 0.1, 0.25, 0.5])).unwrap();
        assert_eq!(report.points.len(), 4);
        let mut zero = noisy_base();
        zero.noise.trace = TraceSpec::Zero;
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&mut a, report.points[0].outcome.as_ref().unwrap()).unwrap();
        write_csv(&mut b, &run(&zero).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failures_are_recorded_per_point() {
        let report = sweep(SweepKind::NoiseMagnitude, &noisy_base(), &SweepGrid::Values(vec![0.1, 0.9])).unwrap();
        assert!(report.points[0].outcome.is_ok());
        assert!(report.points[1].outcome.as_ref().unwrap_err().contains("transient_scale"));
        let mut out = Vec::new();
        report.write_summary_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 3);
    }

    #[test]
    fn grid_errors() {
        assert!(sweep(SweepKind::Threshold, &noisy_base(), &SweepGrid::Values(vec![])).is_err());
        assert!(sweep(SweepKind::BondLength, &noisy_base(), &SweepGrid::Values(vec![1.0])).is_err());
    }

    #[test]
    fn bond_length_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.txt");
        std::fs::write(&p, "# H2, bond length 0.7350 angstrom\nn=2\n1.0 ZZ\n").unwrap();
        assert_eq!(bond_length_of(&p), Some(0.735));
        std::fs::write(&p, "1.0 ZZ\n").unwrap();
        assert_eq!(bond_length_of(&p), None);
    }
}
