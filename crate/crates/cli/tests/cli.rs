use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gsrp_cli::emit::{read_csv, CSV_HEADER};

const SMALL: &str = r#"
lambda = [0.0, 0.25, 0.5, 0.75, 1.0]

[grid]
t_min = -12.0
t_max = 12.0
samples_per_period = 16
period = 1.0

[sampling]
generator = { kind = "bspline", order = 0 }

[reconstruction]
generator = { kind = "bspline", order = 3 }

[prior]
generator = { kind = "lowpass", cutoff = 0.5, half_support = 192 }
shifts = "centers"

[input]
kind = "gaussian"
sigma = 0.09
"#;

fn gsrp(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gsrp"));
    cmd.args(args).env_remove("GSRP_THREADS");
    if let Some(t) = threads {
        cmd.env("GSRP_THREADS", t);
    }
    cmd.output().expect("gsrp runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn sweep_output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let one = gsrp(&["sweep", "--config", &cfg], Some("1"));
    let four = gsrp(&["sweep", "--config", &cfg], Some("4"));
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let rows = read_csv(&text).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[2].lambda, 0.5);
}

#[test]
fn json_and_plot_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("rows.json");
    let plots = dir.path().join("plots");
    let run = gsrp(
        &[
            "sweep",
            "--config",
            &cfg,
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
            "--plot-dir",
            plots.to_str().unwrap(),
        ],
        None,
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
    for scheme in ["subspace", "regret", "constrained", "orthogonal"] {
        let dat = fs::read_to_string(plots.join(format!("snr_{scheme}.dat"))).unwrap();
        assert_eq!(dat.lines().count(), 6);
    }
}

#[test]
fn angles_report_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let run = gsrp(&["angles", "--config", &cfg, "--json"], None);
    assert!(run.status.success());
    let v: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    let cos_as = v["angles"]["cos_as"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&cos_as));
    assert!(v["direct_sum_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.toml",
        &SMALL.replace("order = 3", "order = \"three\""),
    );
    let run = gsrp(&["sweep", "--config", &bad], None);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("line"));

    let semantic = write(
        dir.path(),
        "semantic.toml",
        &SMALL.replace("sigma = 0.09", "sigma = -1.0"),
    );
    assert_eq!(
        gsrp(&["sweep", "--config", &semantic], None).status.code(),
        Some(2)
    );
    assert_eq!(
        gsrp(&["sweep", "--config", "no_such_thing"], None).status.code(),
        Some(2)
    );

    let cfg = write(dir.path(), "small.toml", SMALL);
    assert_eq!(
        gsrp(&["sweep", "--config", &cfg], Some("zero")).status.code(),
        Some(2)
    );
}

#[test]
fn verify_reports_failures_and_missing_lambdas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let ok = write(
        dir.path(),
        "ok.toml",
        "[[claim]]\nname = \"bounds\"\nkind = \"bounds_hold\"\n\n\
         [[claim]]\nname = \"ends\"\nkind = \"endpoint_coherence\"\ntolerance_db = 1e-9\n",
    );
    let run = gsrp(&["verify", "--config", &cfg, "--claims", &ok], None);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stdout)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).matches("PASS").count(), 2);

    let failing = write(
        dir.path(),
        "fail.toml",
        "[[claim]]\nname = \"impossible\"\nkind = \"gap_at_optimum\"\nreference = \"orthogonal\"\nmax_db = -1.0\n",
    );
    let run = gsrp(&["verify", "--config", &cfg, "--claims", &failing], None);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("FAIL impossible"));

    let missing = write(
        dir.path(),
        "missing.toml",
        "[[claim]]\nname = \"gain\"\nkind = \"improvement_at\"\nlambda = 0.64\nscheme = \"constrained\"\n\
         over = \"subspace\"\nexpected_db = 1.26\ntolerance_db = 0.3\n",
    );
    assert_eq!(
        gsrp(&["verify", "--config", &cfg, "--claims", &missing], None)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn selftest_passes_briefly() {
    let run = gsrp(&["selftest", "--trials", "20", "--seed", "3"], None);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    let text = String::from_utf8_lossy(&run.stdout);
    assert!(text.contains("oracle_equivalence"));
    assert!(!text.contains("FAIL"));
}
