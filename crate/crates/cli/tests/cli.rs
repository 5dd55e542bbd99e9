use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rnl(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rnl"));
    c.args(args).env_remove("RNL_THREADS");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_SOLVE: &[&str] = &[
    "solve", "--d", "1", "--n-max", "8", "--tau-step", "1", "--tau-max", "400", "--t", "0.125",
];

#[test]
fn type_mismatch_exits_2_and_names_the_key() {
    let o = rnl(&["sweep", "--s", "abc"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("`s`"), "{}", text(&o.stderr));
}

#[test]
fn unknown_key_and_constraint_messages_differ() {
    let a = rnl(&["--frobnicate", "1"], &[]);
    let b = rnl(&["--d", "5"], &[]);
    assert_eq!((a.status.code(), b.status.code()), (Some(2), Some(2)));
    assert!(text(&a.stderr).contains("unknown key `frobnicate`"));
    assert!(text(&b.stderr).contains("invalid value for key `d`"));
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = rnl(&["sweep", "--family", "example1", "--mode", "Z", "--N", "4,8,16,32,64", "--out", out], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,u_norm,v_norm,lhs,ratio"));
    let ns: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["4", "8", "16", "32", "64"]);
    let j = json(&dir.path().join("sweep.json"));
    assert!(j["result"]["fitted_slope"].is_f64());
    assert_eq!(j["config"]["N"], serde_json::json!([4, 8, 16, 32, 64]));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = d.path().to_str().unwrap();
        let mut args = SMALL_SOLVE.to_vec();
        args.extend(["--seed", "7", "--out", out]);
        assert_eq!(rnl(&args, &[]).status.code(), Some(0));
        let o = rnl(&["sweep", "--mode", "X", "--out", out], &[]);
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["solve.json", "solve.csv", "sweep.json", "sweep.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn seed_changes_the_solve() {
    let run = |seed: &str| {
        let d = tempfile::tempdir().unwrap();
        let mut args = SMALL_SOLVE.to_vec();
        args.extend(["--seed", seed, "--out", d.path().to_str().unwrap()]);
        assert_eq!(rnl(&args, &[]).status.code(), Some(0));
        json(&d.path().join("solve.json"))["result"]["trace"]["z_norms"].clone()
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn threshold_finds_minus_two_thirds() {
    let o = rnl(&["threshold", "--family", "example2", "--s-range", "-0.9:-0.4:0.05"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let stdout = text(&o.stdout);
    let start = stdout.find('{').unwrap();
    let j: serde_json::Value = serde_json::from_str(&stdout[start..]).unwrap();
    let c = j["result"]["crossing"].as_f64().unwrap();
    assert!((c + 2.0 / 3.0).abs() < 0.05, "{c}");
}

#[test]
fn missed_expectation_exits_1() {
    let o = rnl(&["threshold", "--family", "example2", "--expect-crossing", "0"], &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = rnl(&["threshold", "--family", "example2", "--s-range", "-0.5:-0.1:0.1"], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("no sign change"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sweep setup\nfamily = remarkuu\nmode=X\nN=4,8,16\ns=-0.2\n").unwrap();
    let out = dir.path().join("out");
    let o = rnl(
        &["sweep", "--config", cfg.to_str().unwrap(), "--s", "-0.4", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let j = json(&out.join("sweep.json"));
    assert_eq!(j["result"]["kind"], "remarkuu");
    assert_eq!(j["result"]["s"], -0.4);
    let missing = rnl(&["--config", "/nonexistent/run.cfg"], &[]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(text(&missing.stderr).contains("/nonexistent/run.cfg"));
}

#[test]
fn thread_cap_is_validated() {
    let bad = rnl(&["sweep", "--mode", "X"], &[("RNL_THREADS", "many")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(text(&bad.stderr).contains("RNL_THREADS"));
    let ok = rnl(&["sweep", "--mode", "X"], &[("RNL_THREADS", "1")]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn filesystem_errors_carry_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    let o = rnl(&["sweep", "--mode", "X", "--out", target.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains(target.to_str().unwrap()), "{}", text(&o.stderr));
}

#[test]
fn family_dumps_feed_the_norm_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = rnl(&["family", "--family", "example2", "--N", "8", "--out", out, "--dump", "true"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let fam = json(&dir.path().join("family.json"));
    let dump = dir.path().join("example2_N8_v.bin");
    let norm_dir = dir.path().join("norm");
    let o = rnl(
        &["norm", "--field", "dump", "--input", dump.to_str().unwrap(), "--out", norm_dir.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let n = json(&norm_dir.join("norm.json"));
    let from_dump = n["result"][0]["x"].as_f64().unwrap();
    let direct = fam["result"]["members"][0]["v_x"].as_f64().unwrap();
    assert!((from_dump - direct).abs() <= 1e-6 * direct, "{from_dump} vs {direct}");
}

#[test]
fn check_prints_one_line_per_property() {
    let o = rnl(&["check"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let stdout = text(&o.stdout);
    let lines: Vec<&str> = stdout.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(lines.len(), 14);
    assert!(lines.iter().all(|l| l.starts_with("PASS")));
}

#[test]
fn oversized_solver_grid_is_a_config_error() {
    let o = rnl(&["solve"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("`n_max`"));
}

#[test]
fn help_exits_0() {
    let o = rnl(&["--help"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o.stdout).starts_with("usage: rnl"));
}
