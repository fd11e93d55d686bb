use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use happyreg::synth::MicroDgp;
use happyreg::{generate_micro, MicroDataset};

const BIN: &str = env!("CARGO_BIN_EXE_happyreg");

fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata").join(name)
}

fn happyreg(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stderr_line(out: &Output) -> String {
    let s = String::from_utf8_lossy(&out.stderr).to_string();
    assert_eq!(s.trim_end().lines().count(), 1, "stderr: {s}");
    s
}

/// Synthetic macro and micro files sharing years.
fn inputs(dir: &Path) -> (String, String) {
    let m = dir.join("macro.csv");
    let b = dir.join("beta0_true.csv");
    let u = dir.join("micro.csv");
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let out = happyreg(&[
        "synth", "macro", "--dgp", testdata("macro_dgp.json").to_str().unwrap(),
        "--seed", "7", "--out", &s(&m), "--beta0-out", &s(&b),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = happyreg(&[
        "synth", "micro", "--dgp", testdata("micro_dgp.json").to_str().unwrap(),
        "--intercepts", &s(&b), "--n-per-year", "300", "--seed", "11", "--out", &s(&u),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (s(&u), s(&m))
}

#[test]
fn pipeline_runs_and_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (micro, macro_csv) = inputs(dir.path());
    let spec = testdata("spec.json");
    let mut reports = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("report{i}.txt"));
        let o = happyreg(&[
            "pipeline", "--micro", &micro, "--macro", &macro_csv,
            "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        reports.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let text = String::from_utf8(reports.remove(0)).unwrap();
    for needle in ["Pooled OLS", "B0_hat", "Breusch-Pagan", "Durbin alternative", "F(7, 15)", "rho_hat", "reduction in happiness", "d_income6 (1)", "d_income6 (2)"] {
        assert!(text.contains(needle), "report lacks {needle}");
    }
}

#[test]
fn stage_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let (micro, macro_csv) = inputs(dir.path());
    let beta0 = dir.path().join("beta0.csv");
    let o = happyreg(&["stage1", "--micro", &micro, "--out", beta0.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&beta0).unwrap();
    assert!(csv.starts_with("year,beta0,n_year,dropped_columns\n"));
    assert_eq!(csv.lines().count(), 25);

    let o = happyreg(&["stage2", "--beta0", beta0.to_str().unwrap(), "--macro", &macro_csv, "--event-dummies"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("party") && text.contains("Number of observations") && text.contains("t(14)"));

    let o = happyreg(&["stage2", "--beta0", beta0.to_str().unwrap(), "--macro", &macro_csv, "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("name,coef,se,t,p,sig\nunemp,"));

    let o = happyreg(&["diagnose", "--beta0", beta0.to_str().unwrap(), "--macro", &macro_csv]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("F(4, 18)") && text.contains("Decision"));

    for cmd in ["fit-micro", "fit-oprobit"] {
        let o = happyreg(&[cmd, "--micro", &micro, "--format", "csv"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8(o.stdout).unwrap().contains("d_unemp,"));
    }
    let o = happyreg(&["summarize", "--micro", &micro, "--macro", &macro_csv]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn stage2_without_beta0_is_a_usage_error() {
    let o = happyreg(&["stage2", "--macro", "m.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr_line(&o).contains("--beta0"));
}

#[test]
fn unknown_subcommand_and_missing_file_are_usage_errors() {
    assert_eq!(happyreg(&["frobnicate"]).status.code(), Some(1));
    let o = happyreg(&["fit-micro", "--micro", "/nonexistent/micro.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr_line(&o).contains("does not exist"));
}

#[test]
fn empty_category_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let dgp = MicroDgp::survey_like([(2000, 1.7), (2001, 1.8)].into_iter().collect());
    let sim = generate_micro(&dgp, 300, 1).unwrap();
    let records = sim
        .data
        .records()
        .iter()
        .map(|r| happyreg::MicroRecord { happy: if r.happy == 2 { 3 } else { r.happy }, ..*r })
        .collect();
    let data = MicroDataset::from_records(records).unwrap();
    let path = dir.path().join("micro.csv");
    happyreg::data::write_micro_csv(&data, std::fs::File::create(&path).unwrap()).unwrap();
    let out = dir.path().join("never.txt");
    let o = happyreg(&["fit-oprobit", "--micro", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_line(&o).contains("empty category"));
    assert!(!out.exists(), "no partial output on failure");
}

#[test]
fn bad_spec_is_a_data_error_and_help_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let (micro, _) = inputs(dir.path());
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"dependent": "happy", "bogus": 1}"#).unwrap();
    let o = happyreg(&["fit-micro", "--micro", &micro, "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    stderr_line(&o);
    assert_eq!(happyreg(&["pipeline", "--help"]).status.code(), Some(0));
}
