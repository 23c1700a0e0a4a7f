//! Experiment harness: generate instances, time the escape computation
//! against the recomputation baseline, grade the detours, and ship it all as
//! CSV. Every row records the exact seed that produced it.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::generator::{generate, GenConfig, PRNG_ALGORITHM};
use crate::graph::{NodeId, WeightedGraph};
use crate::oracle::{optimal_recovery, stretch};
use crate::recovery::{compute_escapes_with, EscapePlan};
use crate::spt::{bucket_by_nca, build_spt};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub sweep: String,
    pub n: usize,
    pub degree: f64,
    pub trial: usize,
    pub seed: u64,
    pub mean_stretch: f64,
    pub max_stretch: f64,
    pub snfr_secs: f64,
    pub oracle_secs: f64,
}

/// Rows from one sweep, plus what seeded them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub prng: String,
    pub base_seed: u64,
    pub rows: Vec<TrialRow>,
}

/// Per-configuration aggregate over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub n: usize,
    pub degree: f64,
    pub trials: usize,
    pub mean_stretch: f64,
    pub worst_stretch: f64,
    pub mean_snfr_secs: f64,
    pub mean_oracle_secs: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOpts {
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for SweepOpts {
    fn default() -> Self {
        Self {
            trials: 5,
            base_seed: 24682,
        }
    }
}

// One generated instance: solve, grade, time. The timed fast section covers
// exactly what a deployment would rerun per destination: bucketing plus the
// escape computation, on an already built tree.
fn run_trial(sweep: &str, n: usize, degree: f64, trial: usize, seed: u64) -> Result<TrialRow> {
    let g = generate(&GenConfig::new(n, degree, seed))?;
    let t = build_spt(&g, 0)?;

    let started = Instant::now();
    let buckets = bucket_by_nca(&g, &t);
    let plan = compute_escapes_with(&g, &t, &buckets, |_| {})?;
    let snfr_secs = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let opt = optimal_recovery(&g, &t, false)?;
    let oracle_secs = started.elapsed().as_secs_f64();

    let report = stretch(&plan, &opt)?;
    Ok(TrialRow {
        sweep: sweep.to_string(),
        n,
        degree,
        trial,
        seed,
        mean_stretch: report.mean,
        max_stretch: report.max,
        snfr_secs,
        oracle_secs,
    })
}

fn run_sweep(sweep: &str, configs: &[(usize, f64)], opts: &SweepOpts) -> Result<ExperimentResult> {
    let mut master = ChaCha12Rng::seed_from_u64(opts.base_seed);
    let mut rows = Vec::with_capacity(configs.len() * opts.trials);
    for &(n, degree) in configs {
        for trial in 0..opts.trials {
            let seed = master.next_u64();
            rows.push(run_trial(sweep, n, degree, trial, seed)?);
        }
    }
    Ok(ExperimentResult {
        prng: PRNG_ALGORITHM.to_string(),
        base_seed: opts.base_seed,
        rows,
    })
}

/// Growing node counts at fixed degree.
pub fn sweep_nodes(ns: &[usize], degree: f64, opts: &SweepOpts) -> Result<ExperimentResult> {
    let configs: Vec<_> = ns.iter().map(|&n| (n, degree)).collect();
    run_sweep("nodes", &configs, opts)
}

/// Growing degree at fixed node count.
pub fn sweep_degree(degrees: &[f64], n: usize, opts: &SweepOpts) -> Result<ExperimentResult> {
    let configs: Vec<_> = degrees.iter().map(|&d| (n, d)).collect();
    run_sweep("degree", &configs, opts)
}

impl ExperimentResult {
    /// Groups rows by (n, degree) in first-seen order.
    pub fn aggregate(&self) -> Vec<Aggregate> {
        let mut order: Vec<(usize, f64)> = Vec::new();
        for r in &self.rows {
            if !order.contains(&(r.n, r.degree)) {
                order.push((r.n, r.degree));
            }
        }
        order
            .into_iter()
            .map(|(n, degree)| {
                let group: Vec<&TrialRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.n == n && r.degree == degree)
                    .collect();
                let k = group.len() as f64;
                let mean_snfr = group.iter().map(|r| r.snfr_secs).sum::<f64>() / k;
                let mean_oracle = group.iter().map(|r| r.oracle_secs).sum::<f64>() / k;
                Aggregate {
                    n,
                    degree,
                    trials: group.len(),
                    mean_stretch: group.iter().map(|r| r.mean_stretch).sum::<f64>() / k,
                    worst_stretch: group.iter().map(|r| r.max_stretch).fold(0.0, f64::max),
                    mean_snfr_secs: mean_snfr,
                    mean_oracle_secs: mean_oracle,
                    speedup: mean_oracle / mean_snfr,
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# prng={}", self.prng);
        let _ = writeln!(out, "# base_seed={}", self.base_seed);
        out.push_str("sweep,n,degree,trial,seed,mean_stretch,max_stretch,snfr_secs,oracle_secs\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.sweep,
                r.n,
                r.degree,
                r.trial,
                r.seed,
                r.mean_stretch,
                r.max_stretch,
                r.snfr_secs,
                r.oracle_secs
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut prng = PRNG_ALGORITHM.to_string();
        let mut base_seed = 0;
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with("sweep,") {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("prng=") {
                    prng = v.to_string();
                } else if let Some(v) = rest.strip_prefix("base_seed=") {
                    base_seed = v.parse().map_err(|_| Error::Parse {
                        line: i + 1,
                        column: 1,
                        msg: "bad base_seed".into(),
                    })?;
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(Error::Parse {
                    line: i + 1,
                    column: 1,
                    msg: format!("expected 9 fields, got {}", fields.len()),
                });
            }
            fn field<T: std::str::FromStr>(fields: &[&str], i: usize, line: usize) -> Result<T> {
                fields[i].parse().map_err(|_| Error::Parse {
                    line,
                    column: i + 1,
                    msg: format!("bad field {:?}", fields[i]),
                })
            }
            rows.push(TrialRow {
                sweep: fields[0].to_string(),
                n: field(&fields, 1, i + 1)?,
                degree: field(&fields, 2, i + 1)?,
                trial: field(&fields, 3, i + 1)?,
                seed: field(&fields, 4, i + 1)?,
                mean_stretch: field(&fields, 5, i + 1)?,
                max_stretch: field(&fields, 6, i + 1)?,
                snfr_secs: field(&fields, 7, i + 1)?,
                oracle_secs: field(&fields, 8, i + 1)?,
            });
        }
        Ok(Self {
            prng,
            base_seed,
            rows,
        })
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "n,degree,trials,mean_stretch,worst_stretch,mean_snfr_secs,mean_oracle_secs,speedup\n",
        );
        for a in self.aggregate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                a.n,
                a.degree,
                a.trials,
                a.mean_stretch,
                a.worst_stretch,
                a.mean_snfr_secs,
                a.mean_oracle_secs,
                a.speedup
            );
        }
        out
    }
}

/// Gnuplot script rendering mean stretch against n from a summary CSV.
pub fn gnuplot_script(summary_csv_path: &str, png_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 900,600\n\
         set output '{png_path}'\n\
         set xlabel 'nodes'\n\
         set ylabel 'mean stretch'\n\
         set yrange [1:*]\n\
         set key top right\n\
         plot '{summary_csv_path}' every ::1 using 1:4 with linespoints lw 2 title 'mean stretch', \\\n\
         \x20    '' every ::1 using 1:5 with linespoints lw 1 title 'worst stretch'\n"
    )
}

/// Escape plans for every possible destination of one graph, in node order.
pub fn all_destinations<'a>(
    g: &'a WeightedGraph,
) -> impl Iterator<Item = Result<(NodeId, EscapePlan)>> + 'a {
    (0..g.node_count()).map(move |s| {
        let t = build_spt(g, s)?;
        let buckets = bucket_by_nca(g, &t);
        let plan = compute_escapes_with(g, &t, &buckets, |_| {})?;
        Ok((s, plan))
    })
}
