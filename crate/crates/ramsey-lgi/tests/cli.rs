//! End-to-end runs of the `ramsey-lgi` binary: exit codes, file contents and
//! the documented example runs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ramsey-lgi"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove("RAMSEY_LGI_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Header and numeric rows; non-numeric cells become NaN.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.unwrap()
                .iter()
                .map(|c| c.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn summary(path: &Path) -> Value {
    let meta: Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    meta["summary"].clone()
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
    assert_eq!(code(&run(dir.path(), &["correlate", "--no-such-flag"])), 1);
    assert_eq!(
        code(&run(dir.path(), &["correlate", "--theta-grid", "0:1"])),
        1
    );
    assert_eq!(
        code(&run(
            dir.path(),
            &["correlate", "--config", "/nonexistent.json"]
        )),
        1
    );
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn zero_amplitude_gives_constant_product() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "correlate",
            "--alpha",
            "0",
            "--theta-grid",
            "0:6.283:64",
            "--phibar1",
            "0.4",
            "--phibar2",
            "-1.2",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&dir.path().join("correlate.csv"));
    assert_eq!(rows.len(), 64);
    let c = column(&h, "c_analytic");
    for r in &rows {
        assert!((r[c] - 0.4f64.cos() * 1.2f64.cos()).abs() < 1e-15);
    }
}

#[test]
fn paired_engines_agree_on_a_plane() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "correlate",
            "--engine",
            "both",
            "--alpha1",
            "1,0.5",
            "--re-grid=-2:2:10",
            "--im-grid=-2:2:10",
            "--nbar",
            "0.3",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&dir.path().join("correlate.csv"));
    assert_eq!(rows.len(), 100);
    let d = column(&h, "abs_diff");
    assert!(rows.iter().all(|r| r[d] < 1e-6));
    assert!(
        summary(&dir.path().join("correlate.json"))["max_abs_diff"]
            .as_f64()
            .unwrap()
            < 1e-6
    );
}

#[test]
fn interference_spots_sit_at_plus_minus_alpha1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "correlate",
            "--alpha1",
            "5,5",
            "--re-grid=-8:8:65",
            "--im-grid=-8:8:65",
        ],
    );
    assert_eq!(code(&o), 0);
    let (h, rows) = read_csv(&dir.path().join("correlate.csv"));
    let (re, im, c) = (
        column(&h, "re_alpha2"),
        column(&h, "im_alpha2"),
        column(&h, "c_analytic"),
    );
    let mut peak: f64 = 0.0;
    for r in &rows {
        let near = ((r[re] - 5.0).hypot(r[im] - 5.0)).min((r[re] + 5.0).hypot(r[im] + 5.0));
        // e^{-r^2 / 2} / 2 < 1e-3 beyond r = 3.5
        if near > 4.0 {
            assert!(r[c].abs() < 1e-3, "{r:?}");
        } else {
            peak = peak.max(r[c].abs());
        }
    }
    assert!((peak - 0.5).abs() < 1e-9);
}

#[test]
fn truncation_exits_3_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "correlate",
            "--engine",
            "both",
            "--alpha1",
            "5,5",
            "--re-grid=-8:8:5",
            "--im-grid=-8:8:5",
        ],
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncation"));
    assert_eq!(fs::read_dir(dir.path()).map(|d| d.count()).unwrap_or(0), 0);
}

#[test]
fn failed_comparison_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "correlate",
            "--engine",
            "both",
            "--alpha",
            "1.3",
            "--theta-grid",
            "0.3:2:4",
            "--tol",
            "1e-30",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(dir.path().join("correlate.csv").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"seed": 11, "correlate": {"alpha": 0.7, "theta_grid": "0:1:3", "nbar": 0.2}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(
        &out,
        &[
            "correlate",
            "--config",
            cfg.to_str().unwrap(),
            "--nbar",
            "0.5",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let meta: Value =
        serde_json::from_slice(&fs::read(out.join("correlate.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["config"]["correlate"]["alpha"], 0.7);
    assert_eq!(meta["config"]["correlate"]["nbar"], 0.5);
    assert_eq!(meta["config"]["correlate"]["theta_grid"], "0:1:3");
    assert_eq!(meta["command"], "correlate");
    assert_eq!(read_csv(&out.join("correlate.csv")).1.len(), 3);

    fs::write(&cfg, r#"{"correlate": {"alpah": 1}}"#).unwrap();
    assert_eq!(
        code(&run(
            &out,
            &["correlate", "--config", cfg.to_str().unwrap()]
        )),
        1
    );
}

#[test]
fn lgi_sweep_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "lgi-sweep",
            "--alpha",
            "5",
            "--check-asymptote",
            "--theta-grid",
            "3.0",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&dir.path().join("lgi_sweep.json"));
    let check = &s["asymptote_checks"][0];
    assert_eq!(check["law"], "large_alpha");
    let w = check["w_max"].as_f64().unwrap();
    assert!((w - 1.3520).abs() < 0.02 * 1.3520 && w <= 1.5 + 1e-6, "{w}");

    let o = run(
        dir.path(),
        &[
            "lgi-sweep",
            "--nbar",
            "0.5",
            "--alpha-max",
            "0.1",
            "--theta-grid",
            "0:6.283185307179586:24",
            "--check-asymptote",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&dir.path().join("lgi_sweep.json"));
    assert_eq!(s["violations"], 0);
    assert!(s["max_w"].as_f64().unwrap() <= 1.0 + 1e-9);
}

#[test]
fn lgi_sweep_oracle_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "lgi-sweep",
            "--engine",
            "both",
            "--alpha-grid",
            "0.5:1.5:3",
            "--theta-grid",
            "0.5:2.5:3",
            "--nbar",
            "0.2",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&dir.path().join("lgi_sweep.csv"));
    let d = column(&h, "abs_diff");
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[d] < 1e-6));
}

#[test]
fn wigner_grid_integrates_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["wigner"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&dir.path().join("wigner.json"));
    let waits = s["waits"].as_array().unwrap();
    assert_eq!(waits.len(), 3);
    for w in waits {
        assert!((w["integral_analytic"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    }
    // fringes fade as the waiting time grows
    let f: Vec<f64> = waits
        .iter()
        .map(|w| w["fringe_factor"].as_f64().unwrap())
        .collect();
    assert!(f[0] == 1.0 && f[1] < f[0] && f[2] < f[1]);
    let (_, rows) = read_csv(&dir.path().join("wigner.csv"));
    assert_eq!(rows.len(), 3 * 111 * 111);
}

#[test]
fn wigner_oracle_agrees_at_reduced_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "wigner",
            "--engine",
            "both",
            "--alpha1",
            "1.5,1",
            "--n-eq",
            "1",
            "--gamma-th-dt",
            "0.04",
            "--re-grid=-1:2.5:8",
            "--im-grid=-1:2:7",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&dir.path().join("wigner.csv"));
    let d = column(&h, "abs_diff");
    assert!(rows.iter().all(|r| r[d] < 1e-3));
}

#[test]
fn classical_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "classical",
            "--variance",
            "0",
            "--theta-grid",
            "0:3:4",
            "--samples",
            "10000",
            "--phases",
            "0.3,1.1,-0.5",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&dir.path().join("classical.csv"));
    let (c, mc) = (column(&h, "c_classical"), column(&h, "mc_estimate"));
    for r in &rows {
        assert!((r[c] - 0.3f64.cos() * 1.1f64.cos()).abs() < 1e-15);
        assert!((r[mc] - r[c]).abs() < 1e-14);
    }

    let o = run(
        dir.path(),
        &[
            "classical",
            "--nbar",
            "0.3",
            "--theta-grid",
            "0:6.283185307179586:9",
            "--seed",
            "5",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&dir.path().join("classical.csv"));
    let (z, w) = (column(&h, "z"), column(&h, "w_classical"));
    assert!(rows.iter().all(|r| r[z].abs() < 4.0 && r[w] <= 1.0 + 1e-9));
}

#[test]
fn decoherence_reports_both_rates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "decoherence",
            "--engine",
            "both",
            "--n-eq",
            "1",
            "--gamma",
            "0.01",
            "--lambda",
            "0.5",
            "--omega-t-grid",
            "0:9.42477796076938:4",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&dir.path().join("decoherence.json"));
    assert!(s["max_abs_diff"].as_f64().unwrap() < 1e-3);
    assert!(s["rate_quoted"].as_f64().unwrap() > 0.0 && s["rate_fitted"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(
        code(&run(&a, &["verify", "--seed", "3", "--threads", "1"])),
        0
    );
    assert_eq!(
        code(&run(&b, &["verify", "--seed", "3", "--threads", "3"])),
        0
    );
    assert_eq!(
        fs::read(a.join("verify.csv")).unwrap(),
        fs::read(b.join("verify.csv")).unwrap()
    );
    let s = summary(&a.join("verify.json"));
    assert_eq!(s["failed"], 0);
    let names: Vec<&str> = s["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert_eq!(names.len(), 8, "{names:?}");
}
