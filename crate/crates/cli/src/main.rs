//! Command line front end: generate graphs, compute escape tables, compare
//! them against recomputed optima, replay failures, and run the sweeps.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use snfr_core::bench::{self, SweepOpts};
use snfr_core::generator::{generate, GenConfig};
use snfr_core::oracle::{self, optimal_recovery, ChildRecovery, OptimalRecovery};
use snfr_core::simnet::{self, FailureSchedule, Injection};
use snfr_core::spt::ShortestPathTree;
use snfr_core::{build_spt, compute_escapes, load_graph, save_graph, EscapePlan, WeightedGraph};

#[derive(Parser)]
#[command(
    name = "snfr",
    version,
    about = "Single-failure escape tables for tree routing"
)]
struct Cli {
    /// Base seed for anything randomized.
    #[arg(long, global = true, default_value_t = 24682)]
    seed: u64,
    /// Output file; bench treats it as a directory. Default: stdout / current dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Trials per configuration in bench sweeps.
    #[arg(long, global = true, default_value_t = 5)]
    trials: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random biconnected weighted graph file.
    Gen {
        /// Node count.
        #[arg(long)]
        n: usize,
        /// Target mean degree.
        #[arg(long, default_value_t = 15.0)]
        avg_degree: f64,
        /// Smallest edge weight, inclusive.
        #[arg(long, default_value_t = 100)]
        min_weight: u64,
        /// Largest edge weight, inclusive.
        #[arg(long, default_value_t = 1000)]
        max_weight: u64,
        /// Destination stamped into the file header.
        #[arg(long, default_value_t = 0)]
        dest: usize,
    },
    /// Compute the escape table of a graph file.
    Solve { graph: PathBuf },
    /// Recompute true optimal recovery costs, as CSV.
    Oracle { graph: PathBuf },
    /// Join an escape table against oracle output into per-child stretch rows.
    Stretch {
        graph: PathBuf,
        /// Escape table produced by `solve`.
        #[arg(long)]
        plan: PathBuf,
        /// CSV produced by `oracle`.
        #[arg(long)]
        oracle: PathBuf,
    },
    /// Replay a failure schedule and report per-message hop traces.
    Simulate {
        graph: PathBuf,
        /// Escape table produced by `solve`.
        #[arg(long)]
        plan: PathBuf,
        /// Failure schedule file, lines `node down_tick up_tick`.
        #[arg(long)]
        schedule: PathBuf,
        /// Injection as origin@tick, repeatable. Default: one message per
        /// node that is not the destination and is alive at tick 0.
        #[arg(long = "inject", value_name = "ORIGIN@TICK")]
        injections: Vec<String>,
    },
    /// Stretch and runtime sweeps; writes results, summary, and a plot script.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Escape tables for every destination of one graph, streamed.
    AllDest { graph: PathBuf },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Growing node count at fixed average degree.
    Nodes {
        /// Comma separated node counts.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "100,200,300,400,500,600,700,800,900,1000"
        )]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 15.0)]
        degree: f64,
    },
    /// Growing average degree at fixed node count.
    Degree {
        /// Comma separated mean degrees.
        #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25")]
        deg_list: Vec<f64>,
        #[arg(long, default_value_t = 300)]
        n: usize,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen {
            n,
            avg_degree,
            min_weight,
            max_weight,
            dest,
        } => {
            let cfg = GenConfig {
                n,
                avg_degree,
                weight_range: (min_weight, max_weight),
                seed: cli.seed,
            };
            let g = generate(&cfg)?;
            if dest >= n {
                bail!("destination {dest} out of range for {n} nodes");
            }
            emit(cli.out.as_deref(), &save_graph(&g, dest))
        }
        Command::Solve { graph } => {
            let (g, t) = load(&graph)?;
            let plan = compute_escapes(&g, &t)?;
            emit(cli.out.as_deref(), &plan.export(&g, &t))
        }
        Command::Oracle { graph } => {
            let (g, t) = load(&graph)?;
            let opt = optimal_recovery(&g, &t, false)?;
            emit(cli.out.as_deref(), &oracle_csv(&opt))
        }
        Command::Stretch {
            graph,
            plan,
            oracle,
        } => {
            let (g, t) = load(&graph)?;
            let plan = import_plan(&plan, &g, &t)?;
            let text = fs::read_to_string(&oracle)
                .with_context(|| format!("reading {}", oracle.display()))?;
            let opt = parse_oracle_csv(&text, &t)?;
            let report = oracle::stretch(&plan, &opt)?;
            eprintln!(
                "{} pairs, mean stretch {:.4}, max {:.4}",
                report.rows.len(),
                report.mean,
                report.max
            );
            emit(cli.out.as_deref(), &report.to_csv())
        }
        Command::Simulate {
            graph,
            plan,
            schedule,
            injections,
        } => {
            let (g, t) = load(&graph)?;
            let plan = import_plan(&plan, &g, &t)?;
            let text = fs::read_to_string(&schedule)
                .with_context(|| format!("reading {}", schedule.display()))?;
            let schedule = FailureSchedule::parse(&text, t.root, g.node_count())?;
            let injections = if injections.is_empty() {
                (0..g.node_count())
                    .filter(|&v| v != t.root && !schedule.is_down(v, 0))
                    .map(|origin| Injection { origin, tick: 0 })
                    .collect()
            } else {
                injections
                    .iter()
                    .map(|s| parse_injection(s))
                    .collect::<Result<Vec<_>>>()?
            };
            let traces = simnet::run(&g, &t, &plan, &schedule, &injections)?;
            let report = simnet::verify(&g, &t, &plan, &schedule, &traces);
            match &cli.out {
                Some(path) => {
                    write_file(path, &simnet::trace_log(&traces))?;
                    let verdicts = path.with_extension("verdicts.csv");
                    write_file(&verdicts, &report.to_csv())?;
                }
                None => {
                    print!("{}", simnet::trace_log(&traces));
                    eprint!("{}", report.to_csv());
                }
            }
            eprint!("{}", report.summary());
            if !report.all_pass() {
                bail!("verification failed");
            }
            Ok(())
        }
        Command::Bench(cmd) => {
            let opts = SweepOpts {
                trials: cli.trials,
                base_seed: cli.seed,
            };
            let (name, result) = match cmd {
                BenchCommand::Nodes { n_list, degree } => {
                    ("nodes", bench::sweep_nodes(&n_list, degree, &opts)?)
                }
                BenchCommand::Degree { deg_list, n } => {
                    ("degree", bench::sweep_degree(&deg_list, n, &opts)?)
                }
            };
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let results = dir.join(format!("{name}_results.csv"));
            let summary = dir.join(format!("{name}_summary.csv"));
            let script = dir.join(format!("{name}_stretch.gp"));
            write_file(&results, &result.to_csv())?;
            write_file(&summary, &result.summary_csv())?;
            write_file(
                &script,
                &bench::gnuplot_script(
                    &format!("{name}_summary.csv"),
                    &format!("{name}_stretch.png"),
                ),
            )?;
            print!("{}", result.summary_csv());
            eprintln!(
                "wrote {}, {}, {}",
                results.display(),
                summary.display(),
                script.display()
            );
            Ok(())
        }
        Command::AllDest { graph } => {
            let (g, _) = load(&graph)?;
            let mut out = String::new();
            for entry in bench::all_destinations(&g) {
                let (s, plan) = entry?;
                let t = build_spt(&g, s)?;
                out.push_str(&format!("# dest {s}\n"));
                out.push_str(&plan.export(&g, &t));
            }
            emit(cli.out.as_deref(), &out)
        }
    }
}

fn load(path: &Path) -> Result<(WeightedGraph, ShortestPathTree)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (g, dest) = load_graph(&text)?;
    let t = build_spt(&g, dest)?;
    Ok((g, t))
}

fn import_plan(path: &Path, g: &WeightedGraph, t: &ShortestPathTree) -> Result<EscapePlan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(EscapePlan::import(&text, g, t)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn oracle_csv(opt: &OptimalRecovery) -> String {
    let mut out = String::from("x,child,opt_cost\n");
    for (x, records) in opt.per_failed.iter().enumerate() {
        for r in records {
            out.push_str(&format!("{},{},{}\n", x, r.child, r.opt_cost));
        }
    }
    out
}

fn parse_oracle_csv(text: &str, t: &ShortestPathTree) -> Result<OptimalRecovery> {
    let mut per_failed = vec![Vec::new(); t.node_count()];
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |what: &str| {
            fields
                .next()
                .with_context(|| format!("oracle CSV line {}: missing {what}", i + 1))
        };
        let x: usize = next("x")?.trim().parse()?;
        let child: usize = next("child")?.trim().parse()?;
        let opt_cost: f64 = next("opt_cost")?.trim().parse()?;
        if x >= t.node_count() || child >= t.node_count() {
            bail!("oracle CSV line {}: node out of range", i + 1);
        }
        per_failed[x].push(ChildRecovery {
            child,
            opt_cost,
            opt_path: None,
        });
    }
    Ok(OptimalRecovery {
        root: t.root,
        per_failed,
    })
}

fn parse_injection(s: &str) -> Result<Injection> {
    let (origin, tick) = s
        .split_once('@')
        .with_context(|| format!("injection `{s}`: expected ORIGIN@TICK"))?;
    Ok(Injection {
        origin: origin.trim().parse().context("injection origin")?,
        tick: tick.trim().parse().context("injection tick")?,
    })
}
