//! Drives the installed binary through the full file pipeline:
//! gen, solve, oracle, stretch, simulate, all-dest, bench.

use std::path::Path;
use std::process::{Command, Output};

fn snfr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snfr"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn snfr")
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = snfr(dir, args);
    assert!(
        out.status.success(),
        "snfr {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn full_pipeline_on_temp_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    run_ok(
        dir,
        &[
            "gen",
            "--n",
            "30",
            "--avg-degree",
            "5",
            "--seed",
            "11",
            "--out",
            "g.txt",
        ],
    );
    let header = read(dir, "g.txt");
    let mut fields = header.lines().next().unwrap().split_whitespace();
    assert_eq!(fields.next(), Some("30"));
    assert_eq!(fields.next(), Some("75"));
    assert_eq!(fields.next(), Some("0"));

    run_ok(dir, &["solve", "g.txt", "--out", "plan.txt"]);
    let plan = read(dir, "plan.txt");
    assert_eq!(plan.lines().count(), 29, "one line per non-root node");

    run_ok(dir, &["oracle", "g.txt", "--out", "opt.csv"]);
    let opt = read(dir, "opt.csv");
    assert!(opt.starts_with("x,child,opt_cost\n"));

    run_ok(
        dir,
        &[
            "stretch", "g.txt", "--plan", "plan.txt", "--oracle", "opt.csv", "--out", "st.csv",
        ],
    );
    let st = read(dir, "st.csv");
    assert!(st.starts_with("x,child,opt_cost,alg_cost,stretch\n"));
    assert_eq!(st.lines().count(), opt.lines().count(), "one row per pair");
    for line in st.lines().skip(1) {
        let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(ratio >= 1.0);
    }

    // Fail a node with children so at least one detour really happens.
    let plan_victim = plan
        .lines()
        .find_map(|l| {
            let mut f = l.split_whitespace();
            let v = f.next().unwrap();
            (f.next() != Some("-")).then(|| v.to_string())
        })
        .unwrap();
    std::fs::write(dir.join("sched.txt"), format!("{plan_victim} 0 1000000\n")).unwrap();
    run_ok(
        dir,
        &[
            "simulate",
            "g.txt",
            "--plan",
            "plan.txt",
            "--schedule",
            "sched.txt",
            "--out",
            "trace.csv",
        ],
    );
    let trace = read(dir, "trace.csv");
    assert!(trace.starts_with("msg_id,tick,from,to,flag,p,q\n"));
    let verdicts = read(dir, "trace.verdicts.csv");
    assert!(verdicts.starts_with("check,result,violations\n"));
    assert!(verdicts.lines().skip(1).all(|l| l.contains(",pass,")));

    let all = run_ok(dir, &["all-dest", "g.txt"]);
    assert_eq!(all.matches("# dest ").count(), 30);

    run_ok(
        dir,
        &[
            "bench", "nodes", "--n-list", "40,60", "--trials", "1", "--seed", "5", "--out", "bench",
        ],
    );
    let summary = read(dir, "bench/nodes_summary.csv");
    assert_eq!(summary.lines().count(), 3, "header plus one row per n");
    assert!(read(dir, "bench/nodes_results.csv").contains("# prng=chacha12"));
    assert!(read(dir, "bench/nodes_stretch.gp").contains("nodes_summary.csv"));
}

#[test]
fn simulate_rejects_bad_injection_and_schedule() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    run_ok(
        dir,
        &["gen", "--n", "12", "--avg-degree", "4", "--out", "g.txt"],
    );
    run_ok(dir, &["solve", "g.txt", "--out", "plan.txt"]);
    std::fs::write(dir.join("sched.txt"), "1 0 10\n").unwrap();

    let out = snfr(
        dir,
        &[
            "simulate",
            "g.txt",
            "--plan",
            "plan.txt",
            "--schedule",
            "sched.txt",
            "--inject",
            "99@0",
        ],
    );
    assert!(!out.status.success());

    std::fs::write(dir.join("bad.txt"), "0 0 10\n").unwrap();
    let out = snfr(
        dir,
        &[
            "simulate",
            "g.txt",
            "--plan",
            "plan.txt",
            "--schedule",
            "bad.txt",
        ],
    );
    assert!(!out.status.success(), "destination may not fail");
}

#[test]
fn gen_is_deterministic_in_the_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let a = run_ok(
        dir,
        &["gen", "--n", "25", "--avg-degree", "4", "--seed", "9"],
    );
    let b = run_ok(
        dir,
        &["gen", "--n", "25", "--avg-degree", "4", "--seed", "9"],
    );
    let c = run_ok(
        dir,
        &["gen", "--n", "25", "--avg-degree", "4", "--seed", "10"],
    );
    assert_eq!(a, b);
    assert_ne!(a, c);
}
