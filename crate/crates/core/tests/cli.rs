use std::process::{Command, Output};

use kspm::cli::{AvalancheOutput, Document, ScanOutput, SpectralOutput, StabilizeOutput, VerifyOutput};
use serde::de::DeserializeOwned;

fn kspm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kspm"))
        .args(args)
        .env_remove("KSPM_THREADS")
        .output()
        .expect("failed to run kspm")
}

fn json<T: DeserializeOwned>(out: &Output) -> Document<T> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("output does not parse")
}

#[test]
fn stabilize_pi_24() {
    let doc: Document<StabilizeOutput> = json(&kspm(&["stabilize", "--p", "2", "--n", "24", "--format", "json"]));
    assert_eq!(doc.meta.command, "stabilize");
    assert_eq!(doc.result.fixed_point.slopes.as_slice(), &[2, 1, 2, 1, 2]);
    assert_eq!(doc.result.fixed_point.shot, vec![8, 1, 2]);
    assert_eq!(doc.result.heights, vec![8, 6, 5, 3, 2]);
    assert_eq!((doc.result.w, doc.result.n_strict), (5, 5));
}

#[test]
fn stabilize_pi_2000_and_empty() {
    let doc: Document<StabilizeOutput> = json(&kspm(&["stabilize", "--p", "4", "--n", "2000"]));
    assert_eq!(doc.result.w, 41);
    assert_eq!(doc.result.n_strict, 20);
    assert_eq!(doc.result.interior_zeros, 1);
    assert_eq!(doc.result.heights[0], 96);
    let doc: Document<StabilizeOutput> = json(&kspm(&["stabilize", "--p", "1", "--n", "0"]));
    assert!(doc.result.fixed_point.slopes.as_slice().is_empty());
    assert_eq!(doc.result.w, 0);
}

#[test]
fn random_strategy_is_reproducible_and_recorded() {
    let args = ["stabilize", "--p", "3", "--n", "500", "--strategy", "random", "--seed", "7"];
    let a = kspm(&args);
    let b = kspm(&args);
    assert_eq!(a.stdout, b.stdout);
    let doc: Document<StabilizeOutput> = json(&a);
    assert!(doc.meta.rng.is_some());
}

#[test]
fn stabilize_csv() {
    let out = kspm(&["stabilize", "--p", "2", "--n", "24", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "i,slope,height,shot");
    assert_eq!(lines[1], "0,2,8,8");
    assert_eq!(lines.len(), 6);
    assert!(!text.contains('\r'));
}

#[test]
fn scan_csv_schema_and_determinism() {
    let args = ["scan", "--p", "2", "--n-max", "1024", "--stride", "1", "--incremental", "--format", "csv"];
    let a = kspm(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "N,p,w,n_strict,n_loose,uniform_index,interior_zeros,density_column,ambiguous_count,elapsed_us"
    );
    assert_eq!(lines.count(), 1024);
    assert_eq!(kspm(&args).stdout, a.stdout);
}

#[test]
fn scan_json_fits_and_threads() {
    let doc: Document<ScanOutput> = json(&kspm(&["scan", "--p", "4", "--n-max", "3000", "--stride", "29"]));
    assert!(doc.result.all_invariants_ok);
    assert_eq!(doc.result.rows.len(), 3000 / 29);
    assert!(doc.result.fits.iter().all(|f| f.fit.is_some()));

    let threaded = Command::new(env!("CARGO_BIN_EXE_kspm"))
        .args(["scan", "--p", "4", "--n-max", "3000", "--stride", "29"])
        .env("KSPM_THREADS", "2")
        .output()
        .unwrap();
    let doc2: Document<ScanOutput> = json(&threaded);
    assert_eq!(doc.result.rows, doc2.result.rows);
}

#[test]
fn scan_plot_data_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.csv");
    let out = dir.path().join("scan.json");
    let status = kspm(&[
        "scan",
        "--p",
        "3",
        "--n-max",
        "200",
        "--stride",
        "10",
        "--emit-plot-data",
        plot.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let plot = std::fs::read_to_string(plot).unwrap();
    assert!(plot.starts_with("series,x,y\n"));
    assert_eq!(plot.lines().filter(|l| l.starts_with("n_strict_vs_log2_n,")).count(), 20);
    assert_eq!(plot.lines().filter(|l| l.starts_with("w_vs_sqrt_n,")).count(), 20);
    let doc: Document<ScanOutput> = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(doc.result.rows.len(), 20);
}

#[test]
fn argument_errors_exit_2() {
    for args in [
        &["scan", "--p", "2", "--n-max", "5", "--stride", "6"][..],
        &["spectral", "--p-max", "3", "--tol", "0"],
        &["spectral", "--p-max", "1"],
        &["stabilize", "--p", "0", "--n", "3"],
        &["avalanche", "--p", "2", "--k", "0"],
        &["stabilize", "--p", "2"],
        &["frobnicate"],
    ] {
        assert_eq!(kspm(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn overflow_exits_3() {
    let out = kspm(&["stabilize", "--p", "2", "--n", "18446744073709551615"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn spectral_reports() {
    let doc: Document<SpectralOutput> = json(&kspm(&["spectral", "--p-max", "2"]));
    assert_eq!(doc.result.reports.len(), 1);
    let (re, im) = doc.result.reports[0].roots[0];
    assert!((re + 0.5).abs() < 1e-15 && im == 0.0);
    let doc: Document<SpectralOutput> = json(&kspm(&["spectral", "--p-max", "30"]));
    assert_eq!(doc.result.reports.len(), 29);
    assert!(doc.result.all_passed);
}

#[test]
fn avalanche_command() {
    let doc: Document<AvalancheOutput> = json(&kspm(&["avalanche", "--p", "2", "--k", "1"]));
    assert!(doc.result.fired.is_empty());
    assert_eq!(doc.result.max_fired, None);
    let doc: Document<AvalancheOutput> = json(&kspm(&["avalanche", "--p", "2", "--k", "24"]));
    assert_eq!(doc.result.after.as_slice(), &[2, 1, 2, 1, 2]);
    let mut sorted = doc.result.order.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, doc.result.fired);
}

#[test]
fn verify_passes_on_golden_cases() {
    for (p, n) in [("4", "2000"), ("2", "24"), ("3", "500")] {
        let doc: Document<VerifyOutput> = json(&kspm(&["verify", "--p", p, "--n", n]));
        assert!(doc.result.passed, "{:?}", doc.result.checks);
    }
}

#[test]
fn help_documents_csv_columns() {
    let out = kspm(&["scan", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("N,p,w,n_strict,n_loose,uniform_index,interior_zeros,density_column,ambiguous_count,elapsed_us"));
    assert!(text.contains("KSPM_THREADS"));
}
