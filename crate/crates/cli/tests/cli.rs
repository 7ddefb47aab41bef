use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(command: &str, config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fredholm2d"))
        .arg(command)
        .arg("--config")
        .arg(config)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = dir.join("out");
    fs::write(&path, format!("output_dir = {:?}\n{body}", out.display().to_string())).unwrap();
    path
}

const SMALL_STUDY: &str = "[study]\nh_ladder = [0.4, 0.2, 0.1, 0.05]\neval_resolution = 200\nmls_degree = 1\n";

#[test]
fn study_writes_report_and_echoes_the_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "study.toml", SMALL_STUDY);
    let out = run("study", &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(report.lines().count(), 5);
    assert!(report.starts_with("level,h,h_x,h_y,n_x,n_y,err_sup,eoc,cond_inf,w_l1,r_inf,mls_grown_rows,status\n"));
    assert!(!report.contains("seconds"));
    assert_eq!(fs::read_to_string(dir.path().join("out/timings.csv")).unwrap().lines().count(), 5);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["h_ladder"].as_array().unwrap().len(), 4);
    assert_eq!(summary["results"]["levels"].as_array().unwrap().len(), 4);
}

#[test]
fn summary_reproduces_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "study.toml", SMALL_STUDY);
    assert_eq!(run("study", &cfg).status.code(), Some(0));
    let first = fs::read(dir.path().join("out/report.csv")).unwrap();
    let summary = dir.path().join("summary-first.json");
    fs::rename(dir.path().join("out/summary.json"), &summary).unwrap();
    fs::remove_file(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(run("study", &summary).status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("out/report.csv")).unwrap(), first);

    let cfg = write_config(dir.path(), "solve.toml", "[solve]\nh = 0.1\nh_x = 0.2\neval_resolution = 100\n");
    assert_eq!(run("solve", &cfg).status.code(), Some(0));
    let first = fs::read(dir.path().join("out/solution.csv")).unwrap();
    fs::rename(dir.path().join("out/summary.json"), &summary).unwrap();
    assert_eq!(run("solve", &summary).status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("out/solution.csv")).unwrap(), first);
}

#[test]
fn validation_errors_exit_1_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[solve]\nkernel = \"bessel\"\n");
    let out = run("solve", &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel"));
    assert!(!dir.path().join("out").exists());

    let cfg = write_config(dir.path(), "neg.toml", "[solve]\nsigma = -1\n");
    let out = run("solve", &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));

    let cfg = write_config(dir.path(), "syntax.toml", "[solve]\nsigma = 0.5\nh = [\n");
    let out = run("solve", &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let out = run("solve", &dir.path().join("missing.toml"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // k ≡ 1 on the unit square: λ = Σw = 1 is the discrete eigenvalue.
    let cfg = write_config(
        dir.path(),
        "eig.toml",
        "[solve]\nkernel = \"constant\"\nlambda = 1.0\nvariant = \"classical\"\nh = 0.1\n",
    );
    let out = run("solve", &cfg);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("out").exists());

    let cfg = write_config(
        dir.path(),
        "newton.toml",
        "[solve-nonlinear]\ndomain = \"unit_disk\"\nproblem = \"logistic_disk\"\nh = 0.1\nh_x = 0.2\nmaxit = 1\n",
    );
    assert_eq!(run("solve-nonlinear", &cfg).status.code(), Some(2));
}

#[test]
fn remaining_commands_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "all.toml",
        "domain = \"unit_disk\"\nh = 0.1\nh_x = 0.2\nh_ladder = [0.4, 0.2, 0.1]\neval_resolution = 100\n\
         [nodes]\n[quadtest]\n[solve-nonlinear]\nproblem = \"logistic_disk\"\n[compare]\nfit_degree = 2\nmls_degree = 3\n",
    );
    assert_eq!(run("nodes", &cfg).status.code(), Some(0));
    let nodes = fs::read_to_string(dir.path().join("out/nodes.txt")).unwrap();
    assert!(nodes.lines().all(|l| l.split_whitespace().count() == 3));

    assert_eq!(run("quadtest", &cfg).status.code(), Some(0));
    assert!(dir.path().join("out/rule.txt").exists());
    assert_eq!(fs::read_to_string(dir.path().join("out/quadtest.csv")).unwrap().lines().count(), 4);

    assert_eq!(run("solve-nonlinear", &cfg).status.code(), Some(0));
    let sol = fs::read_to_string(dir.path().join("out/solution.csv")).unwrap();
    assert!(sol.starts_with("x,y,u_h\n"));

    assert_eq!(run("compare", &cfg).status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("out/compare.csv")).unwrap().lines().count(), 7);
}
