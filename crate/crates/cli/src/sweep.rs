//! Monte-Carlo parameter sweeps and their CSV output.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use wpcn::instance::fmt_f64;
use wpcn::{sched, Algorithm, Realization, Schedule};

use crate::config::{Config, SweepVariable};
use crate::error::{is_infeasibility, CliError, ConfigError, Result};

pub const CSV_HEADER: [&str; 7] = [
    "sweep_var",
    "sweep_value",
    "algorithm",
    "seed",
    "schedule_len_s",
    "runtime_ns",
    "node_count",
];

/// A validated sweep: the config plus its parsed, ordered algorithm set.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub config: Config,
    /// Sorted and de-duplicated.
    pub algorithms: Vec<Algorithm>,
}

impl TryFrom<Config> for SweepSpec {
    type Error = ConfigError;

    fn try_from(config: Config) -> std::result::Result<Self, ConfigError> {
        config.check("")?;
        let mut algorithms = config.algorithms()?;
        algorithms.sort();
        algorithms.dedup();
        Ok(SweepSpec { config, algorithms })
    }
}

impl SweepSpec {
    pub fn variable(&self) -> SweepVariable {
        self.config.sweep_variable
    }

    pub fn realization_seed(&self, r: usize) -> u64 {
        self.config.seed.wrapping_add(r as u64)
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    pub realization_seed: u64,
    pub schedule_len_s: f64,
    pub runtime_ns: u64,
    pub node_count: Option<u64>,
}

/// One algorithm's schedule on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub schedule: Schedule,
    pub runtime_ns: u64,
}

/// Everything computed for one (sweep value, seed) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRecord {
    pub sweep_value: f64,
    pub seed: u64,
    pub realization: Realization,
    /// One run per algorithm in spec order, or the reason the realization
    /// was dropped.
    pub runs: std::result::Result<Vec<Run>, String>,
}

/// Mean over the feasible realizations of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    pub feasible: usize,
    pub infeasible: usize,
    /// NaN when no realization was feasible.
    pub mean_length_s: f64,
    pub mean_nodes: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub variable: SweepVariable,
    pub algorithms: Vec<Algorithm>,
    pub records: Vec<RealizationRecord>,
}

fn run_one(
    spec: &SweepSpec,
    realization: &Realization,
) -> std::result::Result<Vec<Run>, wpcn::Error> {
    let caps = spec.config.caps();
    spec.algorithms
        .iter()
        .map(|&alg| {
            let t0 = Instant::now();
            let schedule = sched::run(alg, &realization.users, &realization.sys, caps)?;
            let runtime_ns = u64::try_from(t0.elapsed().as_nanos()).unwrap_or(u64::MAX);
            Ok(Run {
                schedule,
                runtime_ns,
            })
        })
        .collect()
}

/// Run every algorithm on every realization of every sweep point.
///
/// Realizations are processed in parallel; the output order is fixed by
/// (sweep value, seed) regardless of completion order. A realization on
/// which any algorithm reports infeasibility is kept with its error and
/// left out of every mean.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    let jobs: Vec<(f64, u64)> = spec
        .config
        .values
        .iter()
        .flat_map(|&v| (0..spec.config.realizations).map(move |r| (v, r)))
        .map(|(v, r)| (v, spec.realization_seed(r)))
        .collect();
    let records = jobs
        .into_par_iter()
        .map(|(value, seed)| {
            let realization = spec.config.point(value).realization(seed)?;
            let runs = match run_one(spec, &realization) {
                Ok(runs) => Ok(runs),
                Err(e) if is_infeasibility(&e) => Err(e.to_string()),
                Err(e) => return Err(CliError::Core(e)),
            };
            Ok(RealizationRecord {
                sweep_value: value,
                seed,
                realization,
                runs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepOutcome {
        variable: spec.variable(),
        algorithms: spec.algorithms.clone(),
        records,
    })
}

impl SweepOutcome {
    /// Rows ordered by (sweep value, algorithm, seed).
    pub fn results(&self) -> Vec<SweepResult> {
        let mut rows: Vec<SweepResult> = self
            .records
            .iter()
            .filter_map(|rec| rec.runs.as_ref().ok().map(|runs| (rec, runs)))
            .flat_map(|(rec, runs)| {
                runs.iter().map(move |run| SweepResult {
                    sweep_value: rec.sweep_value,
                    algorithm: run.schedule.algorithm,
                    realization_seed: rec.seed,
                    schedule_len_s: run.schedule.total_length_s,
                    runtime_ns: run.runtime_ns,
                    node_count: run.schedule.nodes_evaluated,
                })
            })
            .collect();
        rows.sort_by(|a, b| {
            a.sweep_value
                .total_cmp(&b.sweep_value)
                .then(a.algorithm.cmp(&b.algorithm))
                .then(a.realization_seed.cmp(&b.realization_seed))
        });
        rows
    }

    pub fn summary(&self) -> Vec<PointSummary> {
        let mut values: Vec<f64> = self.records.iter().map(|r| r.sweep_value).collect();
        values.dedup();
        let mut out = Vec::new();
        for v in values {
            let at: Vec<&RealizationRecord> =
                self.records.iter().filter(|r| r.sweep_value == v).collect();
            let infeasible = at.iter().filter(|r| r.runs.is_err()).count();
            for (i, &alg) in self.algorithms.iter().enumerate() {
                let runs: Vec<&Run> = at
                    .iter()
                    .filter_map(|r| r.runs.as_ref().ok())
                    .map(|runs| &runs[i])
                    .collect();
                let n = runs.len();
                let mean_length_s =
                    runs.iter().map(|r| r.schedule.total_length_s).sum::<f64>() / n as f64;
                let mean_nodes = alg.is_search().then(|| {
                    runs.iter()
                        .map(|r| r.schedule.nodes_evaluated.unwrap_or(0) as f64)
                        .sum::<f64>()
                        / n as f64
                });
                out.push(PointSummary {
                    sweep_value: v,
                    algorithm: alg,
                    feasible: n,
                    infeasible,
                    mean_length_s,
                    mean_nodes,
                });
            }
        }
        out
    }

    /// Mean length of `alg` at `value`, if the point exists.
    pub fn mean_length(&self, value: f64, alg: Algorithm) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.sweep_value == value && s.algorithm == alg)
            .map(|s| s.mean_length_s)
    }

    pub fn infeasible_count(&self) -> usize {
        self.records.iter().filter(|r| r.runs.is_err()).count()
    }

    /// Human-readable table of [`SweepOutcome::summary`].
    pub fn summary_table(&self) -> String {
        let mut s = format!(
            "{:>12} {:>5} {:>24} {:>8} {:>10} {:>12}\n",
            self.variable.name(),
            "algo",
            "mean_length_s",
            "feasible",
            "infeasible",
            "mean_nodes"
        );
        for p in self.summary() {
            let nodes = p
                .mean_nodes
                .map_or(String::from("-"), |n| format!("{n:.1}"));
            s.push_str(&format!(
                "{:>12} {:>5} {:>24} {:>8} {:>10} {:>12}\n",
                format!("{}", p.sweep_value),
                p.algorithm.tag(),
                fmt_f64(p.mean_length_s),
                p.feasible,
                p.infeasible,
                nodes
            ));
        }
        s
    }
}

/// Write rows as CSV, in the order given.
pub fn write_csv<W: Write>(variable: SweepVariable, results: &[SweepResult], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for r in results {
        wtr.write_record([
            variable.name().to_string(),
            fmt_f64(r.sweep_value),
            r.algorithm.tag().to_string(),
            r.realization_seed.to_string(),
            fmt_f64(r.schedule_len_s),
            r.runtime_ns.to_string(),
            r.node_count.map_or(String::new(), |n| n.to_string()),
        ])?;
    }
    wtr.flush().map_err(|e| CliError::io("<csv output>", e))?;
    Ok(())
}

pub fn emit_csv(variable: SweepVariable, results: &[SweepResult], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(variable, results, std::io::BufWriter::new(f))
}
