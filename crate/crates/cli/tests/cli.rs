use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cca_core::report::CsvTable;

const DESK: [&str; 6] = [
    "--set",
    "n_half=60",
    "--set",
    "t_override=60",
    "--set",
    "allow_undersized_array=true",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cca-nm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn table(path: &Path) -> CsvTable {
    CsvTable::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn nv_analytic_single_value() {
    let o = run(&["nv-analytic", "--set", "r=4"]);
    assert!(o.status.success());
    let line = stdout(&o);
    let nv: f64 = line
        .split_whitespace()
        .find_map(|w| w.strip_prefix("N_V="))
        .unwrap()
        .parse()
        .unwrap();
    // α = e^{-x}(1 - x): |α|⁴ rises once, from 0 at x = 1 to e^{-8} at x = 2
    let expected = (-8.0f64).exp();
    assert!((nv - expected).abs() < 1e-12, "{nv} vs {expected}");
}

#[test]
fn nv_analytic_grid_to_stdout() {
    let o = run(&[
        "nv-analytic",
        "--set",
        "r_min=0.5",
        "--set",
        "r_max=6",
        "--set",
        "r_steps=12",
    ]);
    assert!(o.status.success());
    let t = CsvTable::parse(&stdout(&o)).unwrap();
    assert_eq!(t.schema, "nv-analytic/1");
    let nv = t.column_f64("nv").unwrap();
    assert_eq!(nv.len(), 12);
    assert!(nv.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn ordered_baseline_tracks_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ob.csv");
    let o = run(&[
        "ordered-baseline",
        "--set",
        "n_half=200",
        "--set",
        "t_end=150",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = table(&out);
    assert_eq!(t.schema, "ordered-baseline/1");
    let dev = t.column_f64("deviation").unwrap();
    let worst = dev.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    assert!(worst < 0.01, "max deviation {worst}");
    assert!(stdout(&o).starts_with("ordered-baseline:"));
}

#[test]
fn missing_config_is_usage_error() {
    let o = run(&["sweep", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not found"));
}

#[test]
fn bad_input_is_usage_error() {
    for args in [
        &["frobnicate"][..],
        &["sweep", "--no-such-flag"][..],
        &["sweep", "--set", "no_such_key=1"][..],
        &["sweep", "--set", "realizations"][..],
        &["sweep", "--set", "pdf=uniform"][..],
        &["single", "--set", "r=1"][..],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn config_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# small run\nsigma_grid = 0.5, 2\nrealizations = 3\nn_half = 60\nt_override = 60\nallow_undersized_array = true\n",
    )
    .unwrap();
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = table(&out);
    assert_eq!(t.column_f64("sigma").unwrap(), vec![0.5, 2.0]);
    assert!(t.column_f64("count").unwrap().iter().all(|&c| c == 3.0));
    assert!(t.meta.contains("realizations=3"));
}

#[test]
fn sweep_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("s{threads}.csv"));
        let detail = dir.path().join(format!("d{threads}.csv"));
        let mut args = vec![
            "sweep",
            "--set",
            "realizations=6",
            "--set",
            "sigma_grid=0.5,1.5",
            "--seed",
            "11",
        ];
        args.extend(DESK);
        args.extend([
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
            "--detail",
            detail.to_str().unwrap(),
        ]);
        let o = run(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((fs::read(&out).unwrap(), fs::read(&detail).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let detail = CsvTable::parse(std::str::from_utf8(&outputs[0].1).unwrap()).unwrap();
    assert_eq!(detail.rows.len(), 12);
}

#[test]
fn pheno_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let mut args = vec![
        "pheno-curve",
        "--set",
        "realizations=4",
        "--set",
        "lambda_kind=thouless",
    ];
    args.extend(DESK);
    args.extend(["--out", out.to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = table(&out);
    assert_eq!(t.schema, "pheno-curve/1");
    assert_eq!(t.rows.len(), 5);
    let n = t.column_f64("n_predicted").unwrap();
    assert!(n.iter().all(|x| (0.0..=1.0).contains(x)));
    let c = t.column_index("lambda_kind").unwrap();
    assert!(t.rows.iter().all(|r| r[c] == "thouless"));
}

#[test]
fn single_trajectory_csv() {
    let mut args = vec!["single", "--set", "sigma=1", "--seed", "5"];
    args.extend(DESK);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = CsvTable::parse(&stdout(&o)).unwrap();
    assert_eq!(t.schema, "trajectory/1");
    let abs = t.column_f64("abs_alpha").unwrap();
    assert!((abs[0] - 1.0).abs() < 1e-12);
    assert!(abs.iter().all(|&a| a <= 1.0 + 1e-9));
    assert!(String::from_utf8_lossy(&o.stderr).contains("single: sigma=1 seed=5"));
}

#[test]
fn localization_stats_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.csv");
    let mut args = vec![
        "localization-stats",
        "--set",
        "realizations=5",
        "--set",
        "sigma_grid=0.5;2",
    ];
    args.extend(DESK);
    args.extend(["--out", out.to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = table(&out);
    assert_eq!(t.schema, "localization-stats/1");
    assert_eq!(t.rows.len(), 2);
    assert!(t.column_index("mean_lambda_q2").is_some());
}
