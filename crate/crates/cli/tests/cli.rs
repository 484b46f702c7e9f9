use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn sqg(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqg"))
        .args(args)
        .env("SQG_OUTPUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

const SINGLE_MODE: &str = r#"
[grid]
n = 32

[solver]
gamma = 1.0
dt = 0.01
t_end = 1.0
snapshot_stride = 10

[initial_data]
kind = "single_mode"

[criterion]
p = 4.0
r0 = 4.0
"#;

const RANDOM_BAND: &str = r#"
[grid]
n = 32

[solver]
gamma = 1.0
dt = 0.01
t_end = 0.2
snapshot_stride = 5

[initial_data]
kind = "random_band"
j_lo = 0
j_hi = 2
seed = 9

[criterion]
p = 4.0
r0 = 4.0

[outputs]
checkpoint_stride = 10
"#;

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn single_mode_monitor_decays_exactly() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "run.toml", SINGLE_MODE);
    let out = tmp.path().join("out");
    let o = sqg(&["simulate", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&out.join("monitor.csv"));
    let first: f64 = rows[0][1].parse().unwrap();
    let last: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert_eq!(rows.last().unwrap()[0], "1.0");
    assert!(
        (last - (-1f64).exp() * first).abs() < 1e-6,
        "{last} vs {first}"
    );
    let header = fs::read_to_string(out.join("monitor.csv")).unwrap();
    assert!(header.starts_with("time,besov_alpha,running_integral\n"));
}

#[test]
fn invalid_configs_exit_with_status_one() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(&tmp, "p.toml", &SINGLE_MODE.replace("p = 4.0", "p = 1.5"));
    let o = sqg(&["simulate", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("p ∈ [2,∞)"), "{}", stderr(&o));

    let cfg = write_config(
        &tmp,
        "dt.toml",
        &SINGLE_MODE.replace("dt = 0.01", "dt = 2.0"),
    );
    let o = sqg(&["simulate", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("t_end"), "{}", stderr(&o));

    let cfg = write_config(
        &tmp,
        "bad.toml",
        &SINGLE_MODE.replace("n = 32", "n = \"many\""),
    );
    let o = sqg(&["simulate", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = sqg(
        &[
            "simulate",
            "-c",
            tmp.path().join("missing.toml").to_str().unwrap(),
        ],
        &out,
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn json_config_is_accepted() {
    let tmp = TempDir::new().unwrap();
    let json = r#"{
        "grid": {"n": 16},
        "solver": {"gamma": 0.5, "dt": 0.01, "t_end": 0.05, "scheme": "etd_rk2"},
        "initial_data": {"kind": "single_mode", "amplitude": 0.5},
        "criterion": {"p": 2.0, "r0": 2.0}
    }"#;
    let cfg = write_config(&tmp, "run.json", json);
    let o = sqg(
        &["simulate", "-c", cfg.to_str().unwrap()],
        &tmp.path().join("out"),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn manifest_hashes_every_artifact_and_runs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "run.toml", RANDOM_BAND);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = sqg(&["simulate", "-c", cfg.to_str().unwrap()], dir);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "completed");
    let files: Vec<String> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["path"].as_str().unwrap().to_string())
        .collect();
    for name in [
        "checkpoint_00000000.sqgf",
        "checkpoint_00000010.sqgf",
        "checkpoint_00000020.sqgf",
        "final.sqgf",
        "diagnostics.csv",
        "monitor.csv",
        "summary.json",
    ] {
        assert!(
            files.iter().any(|f| f == name),
            "{name} missing from {files:?}"
        );
        assert!(a.join(name).exists());
        if name.ends_with(".sqgf") || name.ends_with(".csv") {
            assert_eq!(
                fs::read(a.join(name)).unwrap(),
                fs::read(b.join(name)).unwrap(),
                "{name}"
            );
        }
    }
    let m = a.join("manifest.json");
    let o = sqg(&["manifest", "verify", m.to_str().unwrap()], &a);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    fs::write(a.join("monitor.csv"), "tampered").unwrap();
    let o = sqg(&["manifest", "verify", m.to_str().unwrap()], &a);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("monitor.csv"));
}

#[test]
fn checkpoint_info_and_diff() {
    let tmp = TempDir::new().unwrap();
    let text = SINGLE_MODE
        .replace("t_end = 1.0", "t_end = 0.2")
        .replace("dt = 0.01", "dt = 0.1")
        .replace(
            "snapshot_stride = 10",
            "snapshot_stride = 1\nnonlinear = false",
        )
        .replace(
            "[criterion]",
            "[outputs]\ncheckpoint_stride = 1\n\n[criterion]",
        )
        .replace("gamma = 1.0", "gamma = 0.5");
    let cfg = write_config(&tmp, "lin.toml", &text);
    let out = tmp.path().join("out");
    let o = sqg(&["simulate", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let c0 = out.join("checkpoint_00000000.sqgf");
    let c1 = out.join("checkpoint_00000001.sqgf");

    let o = sqg(&["checkpoint", "info", c1.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "n = 32\nlength = 1.0\ngamma = 0.5\ntime = 0.1\n"
    );

    let o = sqg(
        &[
            "checkpoint",
            "diff",
            c0.to_str().unwrap(),
            c0.to_str().unwrap(),
        ],
        &out,
    );
    assert_eq!(stdout(&o), "max_diff = 0.0\n");

    // sin(x₁) has coefficients of modulus 1/2 at |ξ| = 1.
    let o = sqg(
        &[
            "checkpoint",
            "diff",
            c0.to_str().unwrap(),
            c1.to_str().unwrap(),
        ],
        &out,
    );
    let d: f64 = stdout(&o)
        .trim()
        .trim_start_matches("max_diff = ")
        .parse()
        .unwrap();
    let expect = (1.0 - (-0.1f64).exp()) * 0.5;
    assert!((d - expect).abs() < 1e-15, "{d} vs {expect}");

    fs::write(
        tmp.path().join("junk.sqgf"),
        b"NOPE0000000000000000000000000000000000000",
    )
    .unwrap();
    let o = sqg(
        &[
            "checkpoint",
            "info",
            tmp.path().join("junk.sqgf").to_str().unwrap(),
        ],
        &out,
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("magic"), "{}", stderr(&o));
}

#[test]
fn pileup_exits_with_status_two() {
    let tmp = TempDir::new().unwrap();
    // The data fills the top octave of the n = 16 dealiased band.
    let cfg = write_config(&tmp, "run.toml", &RANDOM_BAND.replace("n = 32", "n = 16"));
    let out = tmp.path().join("out");
    let o = sqg(&["simulate", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"blowup_flagged\""));
}

const VERIFY: &str = r#"
[grid]
n = 64

[verify]
samples = 100
seed = 1
j_lo = 0
j_hi = 4
"#;

fn report(out: &Path, suite: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{suite}_report.json"))).unwrap())
        .unwrap()
}

#[test]
fn verify_partition_and_bernstein() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "verify.toml", VERIFY);
    let out = tmp.path().join("out");
    let o = sqg(&["verify", "partition", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&out, "partition");
    assert!(r["constants"]["max_deviation"].as_f64().unwrap() < 1e-12);

    let o = sqg(&["verify", "bernstein", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&out, "bernstein");
    assert_eq!(r["verdict"]["status"], "bounded");
    let band = r["constants"]["band_derivative"].as_f64().unwrap();
    assert!(band > 1.0 && band < 4.0, "{band}");
}

#[test]
fn verify_commutator_checks_hypotheses() {
    let tmp = TempDir::new().unwrap();
    let run = RANDOM_BAND.replace("[outputs]\ncheckpoint_stride = 10\n", "");
    let good = format!(
        "{run}\n[verify.commutator]\nrho1 = 0.5\nrho2 = 0.5\nr1 = 4.0\nr2 = 4.0\np = 2.0\nq = 2.0\n"
    );
    let cfg = write_config(&tmp, "good.toml", &good);
    let out = tmp.path().join("out");
    let o = sqg(&["verify", "commutator", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(report(&out, "commutator")["constants"]["cj_lq_norm"]
        .as_f64()
        .unwrap()
        .is_finite());

    let cfg = write_config(&tmp, "bad.toml", &good.replace("rho1 = 0.5", "rho1 = 1.0"));
    let o = sqg(&["verify", "commutator", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("rho1 < 1"), "{}", stderr(&o));
}

#[test]
fn unknown_suite_lists_valid_names() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "verify.toml", VERIFY);
    let o = sqg(
        &["verify", "nonsense", "-c", cfg.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    for name in [
        "bernstein",
        "gen_bernstein",
        "commutator",
        "product",
        "partition",
        "scaling",
    ] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn picard_single_mode_differences_vanish_after_the_first() {
    let tmp = TempDir::new().unwrap();
    let text = SINGLE_MODE.replace("t_end = 1.0", "t_end = 0.2");
    let cfg = write_config(&tmp, "run.toml", &text);
    let out = tmp.path().join("out");
    let o = sqg(
        &["picard", "-c", cfg.to_str().unwrap(), "--k-max", "4"],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&out.join("picard.csv"));
    assert_eq!(rows.len(), 4);
    let d1: f64 = rows[0][1].parse().unwrap();
    for row in &rows[1..] {
        let d: f64 = row[1].parse().unwrap();
        assert!(d < 1e-14 * d1, "{d}");
    }
}

#[test]
fn picard_contraction_depends_on_the_horizon() {
    let tmp = TempDir::new().unwrap();
    let small = RANDOM_BAND.replace("seed = 9", "seed = 9\namplitude = 0.3")
        + "\n[picard]\nc_cal = 100.0\nsteps = 200\n";
    let small = small.replace("r0 = 4.0", "r0 = 2.0");
    let cfg = write_config(&tmp, "small.toml", &small);
    let out = tmp.path().join("small");
    let o = sqg(&["picard", "-c", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("picard.json")).unwrap()).unwrap();
    assert!(v["median_ratio"].as_f64().unwrap() < 1.0);

    let large = small
        .replace("amplitude = 0.3", "amplitude = 10.0")
        .replace("c_cal = 100.0", "c_cal = 1e5");
    let cfg = write_config(&tmp, "large.toml", &large);
    let o = sqg(
        &["picard", "-c", cfg.to_str().unwrap()],
        &tmp.path().join("large"),
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}
