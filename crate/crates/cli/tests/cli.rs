//! End-to-end tests of the `mcd` binary and the run pipeline: artifacts,
//! schema, determinism, and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mcd")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mcd-cli-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_csv(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("results.csv")).unwrap()
}

/// The CSV with the wall-clock seconds column stripped; everything else is
/// byte-identical for a fixed config and seed.
fn strip_seconds(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let mut parts: Vec<&str> = line.split(',').collect();
            if parts.len() == 10 {
                parts.truncate(9);
            }
            parts.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn dichotomy_artifacts_and_schema() {
    let dir = tmp_dir("dich");
    let status = Command::new(bin())
        .args(["dichotomy", "--out"])
        .arg(&dir)
        .args(["--degrees", "2,4,6,8", "--assert"])
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["results.csv", "plot_dichotomy.svg", "config_resolved.json"] {
        assert!(dir.join(name).exists(), "{name} missing");
    }
    let csv = read_csv(&dir);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,d,resolution,point_id,value,err_total,err_proj,err_approx,cond_est,seconds"
    );
    for line in lines {
        assert_eq!(line.matches(',').count(), 9, "bad column count: {line}");
    }
    // bound rows exist for exterior points
    assert!(csv.contains(":bound"));
    // the resolved config parses back
    let echoed = std::fs::read_to_string(dir.join("config_resolved.json")).unwrap();
    let _: mcd_cli::config::ExperimentConfig = serde_json::from_str(&echoed).unwrap();
}

#[test]
fn identical_seed_gives_identical_results() {
    let dir_a = tmp_dir("det-a");
    let dir_b = tmp_dir("det-b");
    for dir in [&dir_a, &dir_b] {
        let status = Command::new(bin())
            .args(["recover-box", "--out"])
            .arg(dir)
            .args(["--degrees", "4,8", "--seed", "7"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = strip_seconds(&read_csv(&dir_a));
    let b = strip_seconds(&read_csv(&dir_b));
    assert_eq!(a, b);
}

#[test]
fn density_kind_names_match_their_documented_spellings() {
    // "smooth-1d" is the documented selector; a config using it must load
    let dir = tmp_dir("names");
    let cfg_path = dir.join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{"experiment": "recover-box", "density": {"kind": "smooth-1d"}, "degrees": [4, 8]}"#,
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let echoed = std::fs::read_to_string(dir.join("config_resolved.json")).unwrap();
    assert!(echoed.contains("smooth-1d"), "{echoed}");
}

#[test]
fn flag_overrides_reach_the_output() {
    let dir = tmp_dir("flags");
    let status = Command::new(bin())
        .args(["recover-box", "--out"])
        .arg(&dir)
        .args(["--degrees", "4,8", "--seed", "123"])
        .status()
        .unwrap();
    assert!(status.success());
    let echoed = std::fs::read_to_string(dir.join("config_resolved.json")).unwrap();
    let cfg: mcd_cli::config::ExperimentConfig = serde_json::from_str(&echoed).unwrap();
    assert_eq!(cfg.degrees, vec![4, 8]);
    assert_eq!(cfg.seed, 123);
}

#[test]
fn config_error_exits_2() {
    let dir = tmp_dir("cfg-err");
    let cfg_path = dir.join("bad.json");
    std::fs::write(
        &cfg_path,
        r#"{"experiment": "recover-box", "degrees": [8, 4]}"#,
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("config error"), "{stderr}");

    // K touching the boundary is rejected per the interior-compactness
    // precondition
    let cfg_path = dir.join("bad_k.json");
    std::fs::write(
        &cfg_path,
        r#"{"experiment": "recover-box", "grid": {"k_lo": [0.0], "k_hi": [0.6]}}"#,
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    let output = Command::new(bin()).arg("no-such-experiment").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    // the norm-scaled monomial basis cannot be factorized at degree 40
    let dir = tmp_dir("num-err");
    let cfg_path = dir.join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{
            "experiment": "dichotomy",
            "basis": "scaled-monomial",
            "degrees": [40],
            "grid": {"points": [[0.0]]}
        }"#,
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("numerical failure"), "{stderr}");
}

#[test]
fn assert_failure_exits_4() {
    // an empirical measure has no ground truth, so the rate thresholds
    // cannot be certified
    let dir = tmp_dir("assert-err");
    let samples = dir.join("samples.txt");
    let mut text = String::new();
    let mut state = 12345u64;
    for _ in 0..400 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let x = (state >> 11) as f64 / (1u64 << 53) as f64;
        text.push_str(&format!("{x}\n"));
    }
    std::fs::write(&samples, text).unwrap();
    let cfg_path = dir.join("cfg.json");
    std::fs::write(
        &cfg_path,
        format!(
            r#"{{
                "experiment": "recover-box",
                "density": {{"kind": "empirical", "path": {:?}}},
                "degrees": [4, 8]
            }}"#,
            samples
        ),
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&dir)
        .arg("--assert")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "{:?}", output);
}

#[test]
fn funk_hecke_and_axioms_tables() {
    let dir = tmp_dir("tables");
    for exp in ["funk-hecke-check", "axioms-check"] {
        let out = dir.join(exp);
        let status = Command::new(bin())
            .arg(exp)
            .args(["--out"])
            .arg(&out)
            .arg("--assert")
            .status()
            .unwrap();
        assert!(status.success(), "{exp} failed");
        let csv = read_csv(&out);
        assert!(csv.lines().count() > 10);
        // tables have no plot
        assert!(!out.join(format!("plot_{exp}.svg")).exists());
    }
}

#[test]
fn sphere_small_run_produces_l2_rows() {
    let dir = tmp_dir("sphere-small");
    let status = Command::new(bin())
        .args(["recover-sphere", "--out"])
        .arg(&dir)
        .args(["--degrees", "4,6,8"])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read_csv(&dir);
    let l2_rows: Vec<&str> = csv.lines().filter(|l| l.contains(",L2,")).collect();
    assert_eq!(l2_rows.len(), 3);
    assert!(dir.join("plot_recover-sphere.svg").exists());
}

#[test]
fn single_degree_disables_classifier_and_marks_inapplicable_bounds() {
    let dir = tmp_dir("single");
    let cfg_path = dir.join("cfg.json");
    // the point at 1.05 sits closer to the support than 2 eps, so the
    // bound does not apply there; it must still be reported
    std::fs::write(
        &cfg_path,
        r#"{
            "experiment": "dichotomy",
            "degrees": [6],
            "grid": {"points": [[0.0], [1.05], [2.0]]}
        }"#,
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("classifier disabled"), "{stdout}");
    assert!(stdout.contains("bound inapplicable"), "{stdout}");
    let csv = read_csv(&dir);
    // SMCD values for all three points at the single degree
    assert_eq!(csv.lines().filter(|l| l.contains(",p0")).count(), 4); // 3 values + 1 bound (p02)
    assert!(csv.contains("p02:bound"));
    assert!(!csv.contains("p01:bound"));
}

#[test]
fn dump_moments_writes_matrix_csv() {
    let dir = tmp_dir("dump");
    let status = Command::new(bin())
        .args(["dichotomy", "--out"])
        .arg(&dir)
        .args(["--degrees", "2,4", "--dump-moments"])
        .status()
        .unwrap();
    assert!(status.success());
    let path = dir.join("moments_d4.csv");
    assert!(path.exists());
    let text = std::fs::read_to_string(path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 5); // basis size at degree 4 in 1D
    assert_eq!(rows[0].matches(',').count(), 4);
}
