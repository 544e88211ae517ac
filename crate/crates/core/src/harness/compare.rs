//! Multi-scheme, multi-seed comparisons against a reference scheme.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::run::{improvement_ratio, run_with, RunSummary, Setup};

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// A named configuration taking part in a comparison.
#[derive(Debug, Clone)]
pub struct Entry {
    pub label: String,
    pub config: ExperimentConfig,
}

impl Entry {
    pub fn new(label: impl Into<String>, config: ExperimentConfig) -> Self {
        Self { label: label.into(), config }
    }

    /// Labelled by scheme name.
    pub fn scheme(config: ExperimentConfig) -> Self {
        Self { label: config.scheme.to_string(), config }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianSummary {
    pub label: String,
    pub final_energy: f64,
    pub best_energy: f64,
    pub final_ideal_energy: f64,
    pub improvement_ratio: f64,
    pub skip_count: f64,
    pub forced_accept_count: f64,
    pub total_jobs: f64,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub reference: String,
    pub seeds: Vec<u64>,
    /// Per entry, per seed (in `seeds` order), with ratios filled in.
    pub runs: Vec<(String, Vec<RunSummary>)>,
    pub medians: Vec<MedianSummary>,
}

impl CompareReport {
    pub fn median(&self, label: &str) -> Option<&MedianSummary> {
        self.medians.iter().find(|m| m.label == label)
    }

    pub fn runs(&self, label: &str) -> Option<&[RunSummary]> {
        self.runs.iter().find(|(l, _)| l == label).map(|(_, r)| r.as_slice())
    }

    /// Long-format CSV: one row per entry and seed, then one `median` row
    /// per entry.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "label",
            "scheme",
            "seed",
            "final_energy",
            "best_energy",
            "exact_ground_energy",
            "final_ideal_energy",
            "improvement_ratio",
            "skip_count",
            "forced_accept_count",
            "total_jobs",
        ])?;
        for (label, runs) in &self.runs {
            for s in runs {
                w.write_record([
                    label.clone(),
                    s.scheme.to_string(),
                    s.seed.to_string(),
                    s.final_energy.to_string(),
                    s.best_energy.to_string(),
                    s.exact_ground_energy.to_string(),
                    s.final_ideal_energy.to_string(),
                    s.improvement_ratio.map(|r| r.to_string()).unwrap_or_default(),
                    s.skip_count.to_string(),
                    s.forced_accept_count.to_string(),
                    s.total_jobs.to_string(),
                ])?;
            }
        }
        for (m, (_, runs)) in self.medians.iter().zip(&self.runs) {
            w.write_record([
                m.label.clone(),
                runs[0].scheme.to_string(),
                "median".to_string(),
                m.final_energy.to_string(),
                m.best_energy.to_string(),
                runs[0].exact_ground_energy.to_string(),
                m.final_ideal_energy.to_string(),
                m.improvement_ratio.to_string(),
                m.skip_count.to_string(),
                m.forced_accept_count.to_string(),
                m.total_jobs.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run every entry on every seed and score it against `reference`.
pub fn compare(entries: &[Entry], seeds: &[u64], reference: &str) -> Result<CompareReport> {
    let first = entries.first().ok_or_else(|| Error::config("compare needs at least one configuration"))?;
    if seeds.is_empty() {
        return Err(Error::config("compare needs at least one seed"));
    }
    for e in entries {
        let c = &e.config;
        if c.problem != first.config.problem || c.ansatz_kind != first.config.ansatz_kind || c.reps != first.config.reps {
            return Err(Error::config(format!("entry {:?} does not share the problem of {:?}", e.label, first.label)));
        }
    }
    if !entries.iter().any(|e| e.label == reference) {
        return Err(Error::config(format!("reference {reference:?} is not among the compared entries")));
    }
    let mut labels: Vec<&str> = entries.iter().map(|e| e.label.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("compare labels must be unique"));
    }

    let jobs: Vec<(usize, u64)> = (0..entries.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let results: Vec<RunSummary> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let cfg = ExperimentConfig { seed, ..entries[i].config.clone() };
            let setup = Setup::new(&cfg)?;
            Ok(run_with(&cfg, &setup)?.summary)
        })
        .collect::<Result<_>>()?;

    let mut runs: Vec<(String, Vec<RunSummary>)> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.label.clone(), results[i * seeds.len()..(i + 1) * seeds.len()].to_vec()))
        .collect();
    let reference_finals: Vec<f64> =
        runs.iter().find(|(l, _)| l == reference).expect("checked").1.iter().map(|s| s.final_energy).collect();
    for (_, summaries) in &mut runs {
        for (s, &r) in summaries.iter_mut().zip(&reference_finals) {
            s.improvement_ratio = Some(improvement_ratio(r, s.final_energy, s.exact_ground_energy));
        }
    }
    let medians = runs
        .iter()
        .map(|(label, s)| {
            let col = |f: &dyn Fn(&RunSummary) -> f64| median(&s.iter().map(f).collect::<Vec<_>>());
            MedianSummary {
                label: label.clone(),
                final_energy: col(&|r| r.final_energy),
                best_energy: col(&|r| r.best_energy),
                final_ideal_energy: col(&|r| r.final_ideal_energy),
                improvement_ratio: col(&|r| r.improvement_ratio.unwrap_or(f64::NAN)),
                skip_count: col(&|r| r.skip_count as f64),
                forced_accept_count: col(&|r| r.forced_accept_count as f64),
                total_jobs: col(&|r| r.total_jobs as f64),
            }
        })
        .collect();
    Ok(CompareReport { reference: reference.to_string(), seeds: seeds.to_vec(), runs, medians })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Scheme;

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn self_comparison_has_unit_ratio() {
        let base = ExperimentConfig { iterations: 40, ..ExperimentConfig::tfim(3, 1) };
        let entries = [Entry::new("a", base.clone()), Entry::new("b", base)];
        let report = compare(&entries, &[0, 1, 2], "a").unwrap();
        for (_, runs) in &report.runs {
            assert!(runs.iter().all(|r| r.improvement_ratio == Some(1.0)));
        }
        assert_eq!(report.median("b").unwrap().improvement_ratio, 1.0);
    }

    #[test]
    fn seed_order_does_not_change_medians() {
        let base = ExperimentConfig { iterations: 40, ..ExperimentConfig::tfim(3, 1) };
        let entries = [
            Entry::scheme(base.clone()),
            Entry::scheme(ExperimentConfig { scheme: Scheme::Blocking, ..base }),
        ];
        let a = compare(&entries, &[0, 1, 2, 3], "baseline").unwrap();
        let b = compare(&entries, &[3, 1, 0, 2], "baseline").unwrap();
        assert_eq!(a.medians, b.medians);
    }

    #[test]
    fn mismatched_problems_rejected() {
        let a = ExperimentConfig::tfim(3, 1);
        let b = ExperimentConfig::tfim(4, 1);
        let err = compare(&[Entry::new("a", a.clone()), Entry::new("b", b)], &[0], "a");
        assert!(matches!(err, Err(Error::Config(_))));
        assert!(compare(&[Entry::new("a", a.clone())], &[], "a").is_err());
        assert!(compare(&[Entry::new("a", a)], &[0], "zzz").is_err());
    }
}
