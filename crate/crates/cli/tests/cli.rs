use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> HashMap<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tenrec")).args(args).output().unwrap();
    assert!(out.status.success(), "tenrec {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').expect("key=value line");
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn fails(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_tenrec")).args(args).output().unwrap();
    assert!(!out.status.success(), "tenrec {args:?} should fail");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn num(r: &HashMap<String, String>, k: &str) -> f64 {
    r[k].parse().unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn synth_then_metrics_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    let x = path(dir.path(), "x.gten");
    let r = run(&["synth", "--dims", "12,10,4", "--rank", "3,3,2", "--seed", "5", "--out", &x]);
    assert_eq!(r["command"], "synth");
    assert_eq!(r["dims"], "12,10,4");
    let m = run(&["metrics", "--reference", &x, "--estimate", &x]);
    assert_eq!(num(&m, "psnr"), 100.0);
    assert_eq!(num(&m, "rse"), 0.0);
}

#[test]
fn approx_algorithms_agree_on_exact_rank_data() {
    let dir = tempfile::tempdir().unwrap();
    let report = path(dir.path(), "modes.csv");
    let common = ["--dims", "20,18,6", "--true-rank", "3,3,2", "--seed", "1"];
    for algo in ["sthosvd", "bki"] {
        let mut args = vec!["approx", "--algo", algo, "--rank", "3,3,2"];
        args.extend(common);
        let r = run(&args);
        assert!(num(&r, "rel_error") < 1e-8, "{algo}: {r:?}");
        assert_eq!(r["ranks"], "3,3,2");
    }
    let mut args = vec!["approx", "--algo", "blbp", "--eps", "1e-6", "--block", "2", "--report", &report];
    args.extend(common);
    let r = run(&args);
    assert!(num(&r, "rel_error") < 1e-5);
    assert!(num(&r, "estimated_rel_error") < 1e-5);
    let csv = std::fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("mode,rank,energy"));
    assert_eq!(csv.lines().count(), 4);

    let r = run(&["approx", "--algo", "blbp", "--eps", "0.1", "--dims", "30,30,8", "--noise", "0.02", "--seed", "2"]);
    let (est, err) = (num(&r, "estimated_rel_error"), num(&r, "rel_error"));
    assert!((est - err).abs() <= 1e-6 * err.max(1e-12), "{r:?}");
}

#[test]
fn complete_writes_record_and_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let res = path(dir.path(), "res.csv");
    let out = path(dir.path(), "l.gten");
    let r = run(&[
        "complete", "--dims", "16,16,4", "--true-rank", "2,2,2", "--sr", "0.7", "--nr", "0.1", "--penalty", "mcp:6",
        "--noise-penalty", "l1", "--structure", "entry", "--gamma-modes", "0,1,2", "--xi", "1.5", "--max-iters", "200",
        "--seed", "3", "--residuals", &res, "--out", &out,
    ]);
    assert_eq!(r["solver"], "gnrhtc");
    assert!(num(&r, "psnr") > 25.0, "{r:?}");
    let iters: usize = r["iterations"].parse().unwrap();
    let csv = std::fs::read_to_string(&res).unwrap();
    assert_eq!(csv.lines().count(), iters + 1);
    assert!(Path::new(&out).exists());
    let m = run(&["metrics", "--reference", &out, "--estimate", &out]);
    assert_eq!(num(&m, "rse"), 0.0);
}

#[test]
fn randomized_and_noise_free_modes_run() {
    let base = ["complete", "--dims", "16,16,4", "--true-rank", "2,2,2", "--sr", "0.6", "--max-iters", "30", "--seed", "4"];
    let mut args = base.to_vec();
    args.extend(["--randomized", "--sketch-rank", "6"]);
    let r = run(&args);
    assert_eq!(r["randomized"], "true");
    let mut args = base.to_vec();
    args.extend(["--noise-free", "--low-rank"]);
    let r = run(&args);
    assert_eq!(r["solver"], "gnhtc");
}

#[test]
fn onebit_beats_naive() {
    let r = run(&["onebit", "--dims", "24,24,4", "--true-rank", "3,3,2", "--sigma", "0.1", "--seed", "6"]);
    assert_eq!(r["solver"], "gnobhtc");
    assert!(num(&r, "psnr") > num(&r, "naive_psnr") + 3.0, "{r:?}");
    let r = run(&["onebit", "--dims", "12,12,3", "--true-rank", "2,2,2", "--robust", "--nr", "0.05", "--max-iters", "50", "--seed", "7"]);
    assert_eq!(r["solver"], "gnobrhtc");
    assert!(num(&r, "alpha") == num(&r, "theta"));
}

#[test]
fn bench_reports_speedup() {
    let r = run(&["bench", "--dims", "40,40,6", "--true-rank", "4,4,2", "--noise", "0.01", "--rank", "8,8", "--seed", "1"]);
    assert!(num(&r, "speedup") > 0.0);
    assert!(num(&r, "rel_deviation") < 0.1, "{r:?}");
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(fails(&["complete", "--dims", "8,8,3"]).contains("--seed"));
    assert!(fails(&["approx", "--dims", "8,8,3", "--algo", "blbp", "--seed", "1"]).contains("--eps"));
    fails(&["complete", "--dims", "8,8,3", "--seed", "1", "--penalty", "mcp:0.5"]);
    fails(&["metrics", "--reference", "/nonexistent.gten", "--estimate", "/nonexistent.gten"]);
    fails(&["complete", "--dims", "8,8,3", "--seed", "1", "--sr", "0"]);
}
