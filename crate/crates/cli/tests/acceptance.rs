//! Acceptance run: criteria 1 to 11, one pass/fail line each.
//!
//! Uses the fast profile unless `HESSIANCONE_PROFILE=full`. The arrowhead
//! and cone criteria always run at full scale.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hessiancone::solver::SolveConfig;
use hessiancone_cli::commands;
use hessiancone_cli::config::{Profile, Settings};
use hessiancone_cli::output::Outcome;

const SEED: u64 = 42;

const RUNTIME_LEMMA: Duration = Duration::from_secs(120);
const RUNTIME_CONE: Duration = Duration::from_secs(60);
const RUNTIME_TRIVIAL: Duration = Duration::from_secs(60);
const RUNTIME_MANUFACTURED_FAST: Duration = Duration::from_secs(180);
const RUNTIME_MANUFACTURED_FULL: Duration = Duration::from_secs(1800);
const RUNTIME_SCALING: Duration = Duration::from_secs(1200);
const RUNTIME_DEGENERATE: Duration = Duration::from_secs(1200);

fn profile() -> Profile {
    match std::env::var("HESSIANCONE_PROFILE").as_deref() {
        Ok("full") => Profile::Full,
        _ => Profile::Fast,
    }
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn failures(outcome: &Outcome) -> Vec<String> {
    outcome
        .assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| format!("{} ({})", a.name, a.detail))
        .collect()
}

/// Passes when every assertion of `outcome` holds and the run beat `limit`.
fn judge(outcome: anyhow::Result<Outcome>, elapsed: Duration, limit: Duration) -> Verdict {
    match outcome {
        Err(e) => Verdict {
            passed: false,
            detail: format!("error: {e:#}"),
        },
        Ok(out) => {
            let failed = failures(&out);
            let in_time = elapsed <= limit;
            let mut detail = format!(
                "{} assertions, {} failed, {:.1} s (limit {} s)",
                out.assertions.len(),
                failed.len(),
                elapsed.as_secs_f64(),
                limit.as_secs()
            );
            if !failed.is_empty() {
                detail.push_str(&format!(": {}", failed.join("; ")));
            }
            Verdict {
                passed: failed.is_empty() && in_time && !out.assertions.is_empty(),
                detail,
            }
        }
    }
}

fn timed<F: FnOnce() -> anyhow::Result<Outcome>>(limit: Duration, f: F) -> Verdict {
    let start = Instant::now();
    let out = f();
    judge(out, start.elapsed(), limit)
}

fn lemma_settings(bounds: &[&str]) -> Settings {
    let mut s = Settings::defaults(Profile::Full);
    s.lemma_sweep.bounds = bounds.iter().map(|b| b.to_string()).collect();
    s.lemma_sweep.dims = (2..=8).collect();
    s.lemma_sweep.eps = vec![0.05, 0.2, 1.0];
    s.lemma_sweep.trials = 10_000;
    s.lemma_sweep.corner_fraction = 1.0;
    s
}

fn criterion_1() -> Verdict {
    let mut s = lemma_settings(&["strong"]);
    s.lemma_sweep.deflation_dims.clear();
    timed(RUNTIME_LEMMA, || commands::lemma_sweep(&s.lemma_sweep, SEED))
}

fn criterion_2() -> Verdict {
    let mut s = lemma_settings(&["weak", "distinct"]);
    s.lemma_sweep.deflation_dims.clear();
    timed(RUNTIME_LEMMA, || commands::lemma_sweep(&s.lemma_sweep, SEED))
}

fn criterion_3() -> Verdict {
    let mut s = lemma_settings(&[]);
    s.lemma_sweep.deflation_dims = (3..=8).collect();
    s.lemma_sweep.deflation_trials = 1_000;
    timed(RUNTIME_LEMMA, || commands::lemma_sweep(&s.lemma_sweep, SEED))
}

/// Keeps only the assertions whose name ends with one of `suffixes`.
fn select(outcome: anyhow::Result<Outcome>, suffixes: &[&str]) -> anyhow::Result<Outcome> {
    let mut out = outcome?;
    out.assertions.retain(|a| suffixes.iter().any(|s| a.name.ends_with(s)));
    Ok(out)
}

fn criterion_4() -> Verdict {
    let mut s = Settings::defaults(Profile::Full);
    s.cone_check.samples = 1_000;
    s.cone_check.ray_samples = 0;
    s.cone_check.gap_samples = 1_000;
    timed(RUNTIME_CONE, || {
        select(
            commands::cone_check(&s.cone_check, SEED),
            &[
                ":gradient_positive",
                ":concavity",
                ":euler_identity",
                ":fi_sum_bound",
                ":fd_gradient",
                ":subsolution_gap",
            ],
        )
    })
}

fn criterion_5() -> Verdict {
    let mut s = Settings::defaults(Profile::Full);
    s.cone_check.samples = 0;
    s.cone_check.ray_samples = 100;
    s.cone_check.gap_samples = 0;
    timed(RUNTIME_CONE, || select(commands::cone_check(&s.cone_check, SEED), &[":ray_intersect"]))
}

fn criterion_6() -> Verdict {
    let mut s = Settings::defaults(profile());
    s.solve.preset = "trivial".into();
    s.solve.kinds = vec!["ma".into()];
    s.solve.n = 2;
    s.solve.resolutions = vec![16];
    s.solve.chi = "identity".into();
    s.solver.tolerance = 1e-8;
    let config: SolveConfig = s.solver.into();
    timed(RUNTIME_TRIVIAL, || commands::solve(&s.solve, &config))
}

fn criterion_7() -> Verdict {
    let p = profile();
    let mut s = Settings::defaults(p);
    s.solve.preset = "manufactured".into();
    s.solve.resolutions = vec![16, 32];
    s.solve.order_range = [1.7, 2.3];
    s.solve.newton_reduction = 10.0;
    s.solve.kinds = match p {
        Profile::Fast => vec!["sigma1".into()],
        Profile::Full => vec!["ma".into(), "sigmaK:1".into()],
    };
    let limit = match p {
        Profile::Fast => RUNTIME_MANUFACTURED_FAST,
        Profile::Full => RUNTIME_MANUFACTURED_FULL,
    };
    let config: SolveConfig = s.solver.into();
    timed(limit, || commands::solve(&s.solve, &config))
}

fn criterion_8() -> Verdict {
    let mut s = Settings::defaults(profile());
    s.boundary_scaling.scales = vec![1.0, 2.0, 4.0, 8.0];
    s.boundary_scaling.max_ratio_spread = 10.0;
    let config: SolveConfig = s.solver.into();
    timed(RUNTIME_SCALING, || {
        select(commands::boundary_scaling(&s.boundary_scaling, &config), &["ratio_spread", "comparison"])
    })
}

fn criterion_9() -> Verdict {
    let mut s = Settings::defaults(profile());
    s.degenerate.eps = vec![1e-1, 1e-2, 1e-3];
    s.degenerate.min_strictness = 0.5;
    s.degenerate.max_laplacian_spread = 2.0;
    let config: SolveConfig = s.solver.into();
    timed(RUNTIME_DEGENERATE, || commands::degenerate(&s.degenerate, &config))
}

fn criterion_10() -> Verdict {
    let mut s = Settings::defaults(profile());
    s.solve.preset = "riemannian".into();
    s.solve.kinds = vec!["ma".into()];
    s.solve.real_dim = 2;
    s.solve.resolutions = vec![32, 64];
    s.solve.order_range = [1.7, 2.3];
    let config: SolveConfig = s.solver.into();
    timed(RUNTIME_MANUFACTURED_FAST, || {
        select(commands::solve(&s.solve, &config), &[":order", ":tangential", ":comparison"])
    })
}

/// Small configurations covering every subcommand.
const DETERMINISM_RUNS: [(&str, &str); 6] = [
    ("lemma-sweep", "[lemma_sweep]\ntrials = 300\ndeflation_trials = 100\n"),
    ("cone-check", "[cone_check]\nsamples = 100\nray_samples = 20\ngap_samples = 100\n"),
    (
        "solve",
        "[solve]\npreset = \"trivial\"\nkinds = [\"ma\"]\nresolutions = [8]\ndump = true\n",
    ),
    ("solve", "[solve]\nkinds = [\"ma\", \"sigma1\"]\nresolutions = [6, 8]\n"),
    ("boundary-scaling", "[boundary_scaling]\nresolution = 8\nscales = [0.0, 1.0, 2.0]\n"),
    ("degenerate", "[degenerate]\nresolution = 8\n"),
];

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .expect("output directory")
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn cli_run(cmd: &str, config: &Path, out: &Path, threads: &str) -> Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_hessiancone"))
        .args([cmd, "--seed", "7", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("HESSIANCONE_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    match status.status.code() {
        Some(c @ (0 | 1)) => Ok(c),
        other => Err(format!(
            "{cmd} exited with {other:?}: {}",
            String::from_utf8_lossy(&status.stderr)
        )),
    }
}

/// Runs each configuration twice (one and four workers) and compares every
/// output file byte for byte.
fn criterion_11() -> Verdict {
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut problems = Vec::new();
    let mut files = 0;
    for (i, (cmd, toml)) in DETERMINISM_RUNS.iter().enumerate() {
        let cfg = tmp.path().join(format!("run{i}.toml"));
        fs::write(&cfg, toml).unwrap();
        let (a, b) = (tmp.path().join(format!("a{i}")), tmp.path().join(format!("b{i}")));
        let codes = (cli_run(cmd, &cfg, &a, "1"), cli_run(cmd, &cfg, &b, "4"));
        match codes {
            (Ok(ca), Ok(cb)) if ca == cb => {}
            other => {
                problems.push(format!("{cmd}: exit codes {other:?}"));
                continue;
            }
        }
        let (da, db) = (read_dir(&a), read_dir(&b));
        files += da.len();
        if da.is_empty() || da != db {
            let differing: Vec<&String> = da.keys().filter(|k| da.get(*k) != db.get(*k)).collect();
            problems.push(format!("{cmd}: differing files {differing:?}"));
        }
    }
    Verdict {
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{} runs, {files} files identical", DETERMINISM_RUNS.len())
        } else {
            problems.join("; ")
        },
    }
}

#[test]
fn acceptance() {
    let p = profile();
    println!("acceptance profile: {p}");
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("strong concentration sweep", criterion_1),
        ("weak and distinct concentration sweeps", criterion_2),
        ("deflation of repeated diagonals", criterion_3),
        ("cone structure suite", criterion_4),
        ("ray intersection property", criterion_5),
        ("trivial solve", criterion_6),
        ("manufactured convergence", criterion_7),
        ("boundary estimate ratios", criterion_8),
        ("degenerate sweep", criterion_9),
        ("real-Hessian variant", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
