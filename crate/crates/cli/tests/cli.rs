use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use qmatch::orderstats::QuantileObservation;
use qmatch::predictive::predictive_quantile;
use qmatch::simulation::{simulate_quantile_data, SimConfig};
use qmatch::Dist;
use qmatch_cli::dataset::{format_dataset, parse_dataset, read_dataset, Overrides};
use qmatch_cli::report::{read_report, to_json, ReportFile};
use qmatch_testkit::check_property;

const QUICK: [&str; 4] = ["--samples", "1000", "--warmup", "1000"];

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
fn cli<S: AsRef<str>>(args: &[S]) -> (i32, String, String) {
    let mut argv = vec!["qmatch".to_string()];
    argv.extend(args.iter().map(|s| s.as_ref().to_string()));
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = qmatch_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn quick_fit(data_path: &Path, family: &str, extra: &[&str]) -> (i32, String, String) {
    let mut args = vec![
        "fit".to_string(),
        s(data_path),
        "--family".into(),
        family.into(),
    ];
    args.extend(QUICK.iter().map(|a| a.to_string()));
    args.extend(extra.iter().map(|a| a.to_string()));
    cli(&args)
}

#[test]
fn bundled_datasets_match_reference_values() {
    let table: [(&str, u64, [f64; 3]); 8] = [
        ("el", 12918, [4930.0, 7500.0, 11000.0]),
        ("es", 19177, [8803.0, 13681.0, 20413.0]),
        ("fr", 21325, [16185.0, 21713.0, 29008.0]),
        ("it", 24969, [10699.0, 16247.0, 22944.0]),
        ("lu", 10292, [23964.0, 33818.0, 48692.0]),
        ("nl", 12748, [16879.0, 22733.0, 30327.0]),
        ("se", 11635, [17794.0, 25164.0, 33365.0]),
        ("uk", 17645, [14897.0, 21136.0, 30151.0]),
    ];
    for (code, n, x) in table {
        let obs = read_dataset(&data(&format!("{code}.csv")), Overrides::default()).unwrap();
        assert_eq!(obs.q(), &[0.25, 0.5, 0.75], "{code}");
        assert_eq!(obs.x(), &x, "{code}");
        assert_eq!(obs.n_total(), n, "{code}");
        assert_eq!(obs.scale_divisor(), x[1], "{code}");
    }
}

#[test]
fn fit_output_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let (code, _, err) = quick_fit(
            &data("el.csv"),
            "gamma",
            &["--seed", seed, "--out", &s(&out)],
        );
        assert_eq!(code, 0, "{err}");
        std::fs::read(out).unwrap()
    };
    let a = run("5", "a.json");
    let b = run("5", "b.json");
    let c = run("6", "c.json");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn seed_falls_back_to_environment() {
    let bin = env!("CARGO_BIN_EXE_qmatch");
    let base = ["fit", "--family", "gamma", "--no-draws"];
    let with_flag = Command::new(bin)
        .args(base)
        .arg(data("el.csv"))
        .args(QUICK)
        .args(["--seed", "9"])
        .env_remove("QMATCH_SEED")
        .output()
        .unwrap();
    let with_env = Command::new(bin)
        .args(base)
        .arg(data("el.csv"))
        .args(QUICK)
        .env("QMATCH_SEED", "9")
        .output()
        .unwrap();
    let default = Command::new(bin)
        .args(base)
        .arg(data("el.csv"))
        .args(QUICK)
        .env_remove("QMATCH_SEED")
        .output()
        .unwrap();
    assert_eq!(with_flag.status.code(), Some(0));
    assert_eq!(with_flag.stdout, with_env.stdout);
    assert_ne!(with_flag.stdout, default.stdout);
}

#[test]
fn process_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qmatch");
    let code = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .env_remove("QMATCH_SEED")
            .output()
            .unwrap()
            .status
            .code()
    };
    let el = s(&data("el.csv"));
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["--version"]), Some(0));
    assert_eq!(code(&[]), Some(1));
    assert_eq!(code(&["fit", &el, "--family", "gama"]), Some(1));
    assert_eq!(
        code(&["fit", "/nonexistent/data.csv", "--family", "gamma"]),
        Some(1)
    );
    // A single chain cannot be checked for convergence, which is a warning.
    let single = [
        "fit",
        &el,
        "--family",
        "gamma",
        "--chains",
        "1",
        "--samples",
        "200",
        "--warmup",
        "200",
        "--no-draws",
    ];
    assert_eq!(code(&single), Some(2));
}

#[test]
fn malformed_datasets_are_rejected_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "unsorted.csv",
            "# meta: N=100\nq,x\n0.5,2\n0.25,1\n",
            "line 4",
        ),
        ("level.csv", "# meta: N=100\nq,x\n0.5,2\n1.5,3\n", "line 4"),
        ("text.csv", "# meta: N=100\nq,x\n0.5,two\n", "line 3"),
        (
            "header.csv",
            "# meta: N=100\nlevel,value\n0.5,2\n",
            "line 2",
        ),
        ("nan.csv", "# meta: N=100\nq,x\n0.5,NaN\n", "line 3"),
        ("no_n.csv", "q,x\n0.5,2\n", "--n"),
        ("empty.csv", "# meta: N=100\nq,x\n", "no rows"),
    ];
    for (name, text, needle) in cases {
        let p = write(dir.path(), name, text);
        let (code, out, err) = cli(&["fit", &s(&p), "--family", "normal"]);
        assert_eq!(code, 1, "{name}");
        assert!(out.is_empty(), "{name}");
        assert!(err.contains(needle), "{name}: {err}");
    }
    // The sample size can come from the command line instead.
    let p = write(dir.path(), "ok.csv", "q,x\n0.25,-1\n0.5,0\n0.75,1\n");
    let (code, _, err) = quick_fit(&p, "normal", &["--n", "50", "--no-draws"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn invalid_flags_exit_with_input_error() {
    let el = s(&data("el.csv"));
    let bad: Vec<Vec<&str>> = vec![
        vec!["fit", &el, "--family", "gamma", "--predict", "1.5"],
        vec![
            "fit",
            &el,
            "--family",
            "gamma",
            "--likelihood",
            "gn",
            "--sigma-noise",
            "0",
        ],
        vec!["fit", &el, "--family", "gamma", "--chains", "0"],
        vec!["fit", &el, "--family", "gamma", "--scale-divisor", "-1"],
        vec!["compare", &el, "--families", "gamma,nope"],
        vec![
            "simulate", "--dist", "normal", "--params", "0,-1", "--n", "10",
        ],
        vec![
            "simulate",
            "--dist",
            "normal",
            "--params",
            "0,1",
            "--n",
            "10",
            "--quantiles",
            "0.9:0.1:3",
        ],
        vec![
            "simulate",
            "--dist",
            "normal",
            "--params",
            "0,1",
            "--n",
            "10",
            "--quantiles",
            "0.001",
        ],
        vec!["curves", "--mode", "penalty", "--reps", "3"],
        vec!["curves", "--mode", "ensemble", "--q", "0.1"],
        vec!["curves", "--mode", "predictive"],
        vec![
            "curves", "--mode", "penalty", "--x-min", "2", "--x-max", "1",
        ],
        vec!["curves", "--mode", "penalty", "--report", &el],
        vec!["curves", "--mode", "ensemble", "--points", "5"],
    ];
    for args in bad {
        let (code, out, err) = cli(&args);
        assert_eq!(code, 1, "{args:?}: {err}");
        assert!(out.is_empty(), "{args:?}");
        assert!(err.starts_with("error"), "{args:?}: {err}");
    }
}

#[test]
fn output_to_missing_directory_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("fit.json");
    let (code, _, _) = quick_fit(&data("el.csv"), "gamma", &["--out", &s(&target)]);
    assert_eq!(code, 1);
    assert!(!target.exists());
}

#[test]
fn gaussian_noise_reports_record_sigma() {
    let (code, out, err) = quick_fit(
        &data("uk.csv"),
        "lognormal",
        &["--likelihood", "gn", "--sigma-noise", "0.1", "--no-draws"],
    );
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["format"], "qmatch-fit/1");
    assert_eq!(v["report"]["likelihood"], "gaussian_noise");
    assert_eq!(v["report"]["sigma_noise"].as_f64(), Some(0.1));
    assert!(v["report"].get("draws").is_none());

    let (code, out, _) = quick_fit(&data("uk.csv"), "lognormal", &["--no-draws"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["likelihood"], "order_statistics");
    assert!(v["report"]["sigma_noise"].is_null());
}

#[test]
fn reports_round_trip_exactly() {
    let (code, out, _) = quick_fit(&data("el.csv"), "gamma", &[]);
    assert_eq!(code, 0);
    let file: ReportFile = serde_json::from_str(&out).unwrap();
    assert_eq!(String::from_utf8(to_json(&file).unwrap()).unwrap(), out);
    let ReportFile::Fit(fit) = &file else {
        panic!("expected a fit report");
    };
    assert_eq!(fit.report.params.len(), 2);
    assert_eq!(fit.report.predictive_quantiles.len(), 2);
    assert!(fit.report.draws.is_some());
}

#[test]
fn predict_matches_library_and_scales_by_divisor() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("el.json");
    let (code, _, _) = quick_fit(&data("el.csv"), "gamma", &["--out", &s(&path)]);
    assert_eq!(code, 0);
    let file = read_report(&path).unwrap();
    let draws = file.primary_fit().unwrap().draws.as_ref().unwrap();

    let (code, out, _) = cli(&["predict", &s(&path), "--p", "0.5,0.99"]);
    assert_eq!(code, 0);
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(out.lines().next(), Some("p,mean,lower,upper"));
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let q = predictive_quantile(draws, row[0], 7500.0).unwrap();
        assert_eq!(row[1..], [q.mean, q.lower, q.upper]);
    }

    let (code, out, _) = cli(&["predict", &s(&path), "--p", "0.99", "--divisor", "1"]);
    assert_eq!(code, 0);
    let unit: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(unit * 7500.0, rows[1][1]);

    let (code, _, err) = cli(&["predict", &s(&path), "--p", "1"]);
    assert_eq!(code, 1, "{err}");

    let bare = dir.path().join("bare.json");
    let (code, _, _) = quick_fit(
        &data("el.csv"),
        "gamma",
        &["--no-draws", "--out", &s(&bare)],
    );
    assert_eq!(code, 0);
    let (code, _, err) = cli(&["predict", &s(&bare)]);
    assert_eq!(code, 1);
    assert!(err.contains("no embedded draws"), "{err}");
}

#[test]
fn compare_ranks_and_predicts_from_best_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("el.json");
    let args: Vec<String> = ["compare", &s(&data("el.csv")), "--out", &s(&path)]
        .iter()
        .map(|a| a.to_string())
        .collect();
    let (code, _, err) = cli(&args);
    assert_eq!(code, 0, "{err}");
    let ReportFile::Compare(cmp) = read_report(&path).unwrap() else {
        panic!("expected a comparison");
    };
    assert_eq!(cmp.reports.len(), 7);
    assert!(cmp.failures.is_empty());
    assert_eq!(cmp.ranking[0].family.to_string(), "gamma");
    assert!(cmp.ranking[0].best);
    assert!(cmp
        .ranking
        .windows(2)
        .all(|w| w[0].score.mean >= w[1].score.mean));

    let (code, out, _) = cli(&["predict", &s(&path), "--p", "0.99"]);
    assert_eq!(code, 0);
    let gamma = cmp
        .reports
        .iter()
        .find(|r| r.family.to_string() == "gamma")
        .unwrap();
    let q = predictive_quantile(gamma.draws.as_ref().unwrap(), 0.99, 7500.0).unwrap();
    let mean: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(mean, q.mean);
}

#[test]
fn compare_subset_lists() {
    let mut args: Vec<String> = [
        "compare",
        &s(&data("uk.csv")),
        "--families",
        "gamma,lognormal",
        "--no-draws",
    ]
    .iter()
    .map(|a| a.to_string())
    .collect();
    args.extend(QUICK.map(String::from));
    let (code, out, err) = cli(&args);
    assert_eq!(code, 0, "{err}");
    let ReportFile::Compare(cmp) = serde_json::from_str(&out).unwrap() else {
        panic!("expected a comparison");
    };
    let names: Vec<String> = cmp.reports.iter().map(|r| r.family.to_string()).collect();
    assert_eq!(names, ["gamma", "lognormal"]);
    assert_eq!(cmp.ranking[0].family.to_string(), "lognormal");
}

#[test]
fn simulate_matches_library_and_parses_back() {
    let args = [
        "simulate",
        "--dist",
        "normal",
        "--params",
        "3,1.5",
        "--n",
        "1000",
        "--quantiles",
        "0.05:0.95:19",
        "--seed",
        "7",
    ];
    let (code, out, err) = cli(&args);
    assert_eq!(code, 0, "{err}");
    assert_eq!(cli(&args).1, out);
    let obs = parse_dataset(&out, Overrides::default()).unwrap();
    let expected = simulate_quantile_data(&SimConfig {
        dist: Dist::normal(3.0, 1.5).unwrap(),
        n: 1000,
        q: obs.q().to_vec(),
        reps: 1,
        seed: 7,
    })
    .unwrap();
    assert_eq!(obs, expected[0]);
    assert_eq!(obs.q().len(), 19);
    assert_eq!(obs.q()[5], 0.3);
    assert_eq!(obs.n_total(), 1000);

    let neg = cli(&[
        "simulate", "--dist", "cauchy", "--params", "-2,1", "--n", "50",
    ]);
    assert_eq!(neg.0, 0, "{}", neg.2);
    assert_eq!(
        parse_dataset(&neg.1, Overrides::default())
            .unwrap()
            .q()
            .len(),
        10
    );
}

#[test]
fn penalty_curves_have_unit_peaks() {
    let (code, out, err) = cli(&["curves", "--mode", "penalty"]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("q,x,os,gn"));
    let rows: Vec<[f64; 4]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect();
    assert_eq!(rows.len(), 3 * 1001);
    for q in [0.1, 0.01, 0.001] {
        let block: Vec<&[f64; 4]> = rows.iter().filter(|r| r[0] == q).collect();
        assert_eq!(block.len(), 1001);
        let os_peak = block.iter().map(|r| r[2]).fold(0.0, f64::max);
        let gn_peak = block.iter().map(|r| r[3]).fold(0.0, f64::max);
        assert!((os_peak - 1.0).abs() < 1e-12, "{q}: {os_peak}");
        assert!((gn_peak - 1.0).abs() < 1e-12, "{q}: {gn_peak}");
        assert!(block
            .iter()
            .all(|r| (0.0..=1.0).contains(&r[2]) && (0.0..=1.0).contains(&r[3])));
    }
}

#[test]
fn ensemble_rows_are_sorted() {
    let (code, out, _) = cli(&[
        "curves", "--mode", "ensemble", "--n", "20", "--reps", "30", "--seed", "4",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    let levels: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(levels.len(), 20);
    assert_eq!(levels[19], 1.0);
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 30);
    assert!(rows
        .iter()
        .all(|r| r.len() == 20 && r.windows(2).all(|w| w[0] <= w[1])));
    assert_eq!(
        cli(&["curves", "--mode", "ensemble", "--n", "20", "--reps", "30", "--seed", "4"]).1,
        out
    );
}

#[test]
fn predictive_curves_are_monotone_bands() {
    let dir = tempfile::tempdir().unwrap();
    let el = dir.path().join("el.json");
    let uk = dir.path().join("uk.json");
    assert_eq!(
        quick_fit(&data("el.csv"), "gamma", &["--out", &s(&el)]).0,
        0
    );
    assert_eq!(
        quick_fit(&data("uk.csv"), "lognormal", &["--out", &s(&uk)]).0,
        0
    );
    let (code, out, err) = cli(&[
        "curves",
        "--mode",
        "predictive",
        "--report",
        &s(&el),
        "--report",
        &s(&uk),
        "--points",
        "50",
    ]);
    assert_eq!(code, 0, "{err}");
    let rows: Vec<Vec<String>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 100);
    for block in rows.chunks(50) {
        let v: Vec<Vec<f64>> = block
            .iter()
            .map(|r| r[2..].iter().map(|c| c.parse().unwrap()).collect())
            .collect();
        assert!(v.windows(2).all(|w| w[1][2] >= w[0][2]));
        assert!(v.iter().all(|r| r[3] <= r[2] && r[2] <= r[4]));
        assert!(v[0][2] < 0.01 && v[49][2] > 0.99);
    }
    assert_eq!(rows[0][1], "gamma");
    assert_eq!(rows[50][1], "lognormal");
}

#[test]
fn dataset_format_round_trips() {
    let strategy = (
        proptest::collection::vec((0.001f64..0.999, -1e6f64..1e6), 1..12),
        1u64..1_000_000,
        proptest::option::of(0.01f64..1e4),
    );
    check_property(64, strategy, |(pairs, n, divisor)| {
        let mut q: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut x: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        q.sort_by(f64::total_cmp);
        q.dedup();
        x.sort_by(f64::total_cmp);
        x.dedup();
        let m = q.len().min(x.len());
        q.truncate(m);
        x.truncate(m);
        let mut obs = QuantileObservation::new(q, x, n).unwrap();
        if let Some(d) = divisor {
            obs = obs.with_scale_divisor(d).unwrap();
        }
        let back = parse_dataset(&format_dataset(&obs), Overrides::default()).unwrap();
        prop_assert_eq!(back, obs);
        Ok(())
    });
}

fn to_args(args: &[&str]) -> Vec<String> {
    args.iter().map(|a| a.to_string()).collect()
}

#[test]
fn el_gamma_fit_scores_near_reference_value() {
    let (code, out, err) = cli(&[
        "fit",
        &s(&data("el.csv")),
        "--family",
        "gamma",
        "--seed",
        "7",
        "--no-draws",
    ]);
    assert_eq!(code, 0, "{err}");
    let ReportFile::Fit(fit) = serde_json::from_str(&out).unwrap() else {
        panic!("expected a fit report");
    };
    assert!(
        (fit.report.score.mean - 10.2).abs() <= 1.5,
        "{}",
        fit.report.score.mean
    );
}

#[test]
fn compare_finds_weibull_for_se_and_accepts_one_family() {
    let (code, out, err) = cli(&to_args(&[
        "compare",
        &s(&data("se.csv")),
        "--families",
        "all",
        "--seed",
        "3",
        "--no-draws",
    ]));
    assert_eq!(code, 0, "{err}");
    let ReportFile::Compare(cmp) = serde_json::from_str(&out).unwrap() else {
        panic!("expected a comparison");
    };
    assert_eq!(cmp.ranking[0].family.to_string(), "weibull");
    assert_eq!(cmp.ranking.iter().filter(|r| r.best).count(), 1);

    let (code, out, _) = cli(&[
        "compare",
        &s(&data("se.csv")),
        "--families",
        "exponential",
        "--no-draws",
    ]);
    assert_eq!(code, 0);
    let ReportFile::Compare(cmp) = serde_json::from_str(&out).unwrap() else {
        panic!("expected a comparison");
    };
    assert_eq!(cmp.ranking.len(), 1);
    assert!(cmp.ranking[0].best);
}

#[test]
fn lu_top_percentile_matches_reference_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lu.json");
    let (code, _, _) = cli(&[
        "fit",
        &s(&data("lu.csv")),
        "--family",
        "lognormal",
        "--out",
        &s(&path),
    ]);
    assert_eq!(code, 0);
    let (code, out, _) = cli(&["predict", &s(&path), "--p", "0.99", "--divisor", "33818"]);
    assert_eq!(code, 0);
    let mean: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((mean / 115693.5 - 1.0).abs() < 0.03, "{mean}");
}

#[test]
fn simulate_defaults_to_ten_levels() {
    let (code, out, _) = cli(&[
        "simulate", "--dist", "cauchy", "--params", "3,1.5", "--n", "200", "--seed", "2",
    ]);
    assert_eq!(code, 0);
    let obs = parse_dataset(&out, Overrides::default()).unwrap();
    assert_eq!(obs.len(), 10);
    assert_eq!(obs.n_total(), 200);
    assert_eq!(obs.q()[0], 0.05);
    assert_eq!(obs.q()[9], 0.95);
}

#[test]
fn predictive_curves_pass_through_observed_quantiles() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (code, family) in [("el", "gamma"), ("it", "weibull"), ("uk", "lognormal")] {
        let path = dir.path().join(format!("{code}.json"));
        let (status, _, err) = cli(&[
            "fit",
            &s(&data(&format!("{code}.csv"))),
            "--family",
            family,
            "--out",
            &s(&path),
        ]);
        assert_eq!(status, 0, "{err}");
        reports.push((code, path));
    }
    for (code, path) in &reports {
        let (status, out, _) = cli(&[
            "curves",
            "--mode",
            "predictive",
            "--report",
            &s(path),
            "--points",
            "2000",
        ]);
        assert_eq!(status, 0);
        let rows: Vec<(f64, f64)> = out
            .lines()
            .skip(1)
            .map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                (c[3].parse().unwrap(), c[4].parse().unwrap())
            })
            .collect();
        let obs = read_dataset(&data(&format!("{code}.csv")), Overrides::default()).unwrap();
        for (q, x) in obs.q().iter().zip(obs.x()) {
            let i = rows.partition_point(|r| r.0 < *x);
            let (a, b) = (rows[i - 1], rows[i]);
            let cdf = a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
            assert!(
                (cdf - q).abs() < 0.02,
                "{code}: F({x}) = {cdf}, expected {q}"
            );
        }
    }
}
