//! CLI contract tests: flag surface, exit-code taxonomy, file outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bayeslm"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("failed to spawn CLI")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Simulates a small dataset and returns (data path, stats path).
fn small_dataset(dir: &Path, n: u64, k: usize, seed: u64) -> (PathBuf, PathBuf) {
    let data = dir.join(format!("data-{seed}.csv"));
    let stats = dir.join(format!("stats-{seed}.txt"));
    let out = run(cli().args([
        "simulate",
        "--n",
        &n.to_string(),
        "--k",
        &k.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        data.to_str().unwrap(),
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let out = run(cli().args([
        "ingest",
        "--input",
        data.to_str().unwrap(),
        "--predictor-cols",
        &format!("1-{k}"),
        "--response-col",
        &(k + 1).to_string(),
        "--out",
        stats.to_str().unwrap(),
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    (data, stats)
}

#[test]
fn missing_required_flag_is_usage_error() {
    let out = run(cli().args(["ingest", "--input", "x.csv", "--predictor-cols", "1-3"]));
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(
        err.lines().next().unwrap_or("").starts_with("error"),
        "{err}"
    );
    assert!(err.to_lowercase().contains("usage"), "no usage text: {err}");
    assert!(err.contains("response-col"), "{err}");
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = run(cli().args(["frobnicate"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pd_violating_rho_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(cli().args([
        "simulate",
        "--n",
        "10",
        "--k",
        "4",
        "--rho",
        "-0.5",
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).starts_with("error: usage:"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn non_numeric_field_is_data_error_naming_location() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "1.0,2.0,3.0\n4.0,a,b\n").unwrap();
    let out = run(cli().args([
        "ingest",
        "--input",
        data.to_str().unwrap(),
        "--predictor-cols",
        "1,2",
        "--response-col",
        "3",
        "--out",
        dir.path().join("s.txt").to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.starts_with("error: data:"), "{err}");
    assert!(err.contains("row 2") && err.contains("column 2"), "{err}");
}

#[test]
fn singular_design_under_flat_prior_is_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("collinear.csv");
    // Second predictor duplicates the first: XᵀX is singular.
    let mut text = String::new();
    for i in 0..50 {
        let x = i as f64 * 0.1;
        text.push_str(&format!("{x},{x},{}\n", 2.0 * x + 1.0));
    }
    std::fs::write(&data, text).unwrap();
    let stats = dir.path().join("s.txt");
    let out = run(cli().args([
        "ingest",
        "--input",
        data.to_str().unwrap(),
        "--predictor-cols",
        "1,2",
        "--response-col",
        "3",
        "--out",
        stats.to_str().unwrap(),
    ]));
    assert!(out.status.success());
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "flat",
        "--sigmasq-prior",
        "jeffreys",
        "--samples",
        "10",
        "--out-prefix",
        dir.path().join("run_").to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_of(&out);
    assert!(err.starts_with("error: numeric:"), "{err}");
    assert!(err.contains("rank deficient"), "{err}");
}

#[test]
fn wrong_length_hyperparameter_vector_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 200, 3, 1);
    let mu = dir.path().join("mu.txt");
    std::fs::write(&mu, "0.0 0.0\n").unwrap(); // needs p = 4 values
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "mvnorm-known",
        "--mean-mu",
        mu.to_str().unwrap(),
        "--sigmasq-prior",
        "inverse-gamma",
        "--samples",
        "10",
        "--out-prefix",
        dir.path().join("r_").to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("expected length 4"), "{err}");
}

#[test]
fn matrix_hyperparameters_load_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 400, 1, 99);
    // p = 2 with the intercept; a valid 2x2 covariance, one row per line.
    let cov = dir.path().join("cov.txt");
    std::fs::write(&cov, "2.0 0.5\n0.5 1.0\n").unwrap();
    let mu = dir.path().join("mu.txt");
    std::fs::write(&mu, "0.1, -0.2\n").unwrap();
    let prefix = format!("{}/mf_", dir.path().display());
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "mvnorm-known",
        "--mean-mu",
        mu.to_str().unwrap(),
        "--cov-c",
        cov.to_str().unwrap(),
        "--sigmasq-prior",
        "inverse-gamma",
        "--samples",
        "50",
        "--seed",
        "1",
        "--out-prefix",
        &prefix,
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));

    // A non-SPD covariance file is a numerical failure.
    std::fs::write(&cov, "1.0 2.0\n2.0 1.0\n").unwrap();
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "mvnorm-known",
        "--cov-c",
        cov.to_str().unwrap(),
        "--sigmasq-prior",
        "inverse-gamma",
        "--samples",
        "50",
        "--seed",
        "1",
        "--out-prefix",
        &prefix,
    ]));
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stderr_of(&out).starts_with("error: numeric:"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn ingest_prints_n_p_and_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, "1.0,2.0\n3.0,4.0\n5.0,6.0\n").unwrap();
    let bytes = std::fs::metadata(&data).unwrap().len();
    let out = run(cli().args([
        "ingest",
        "--input",
        data.to_str().unwrap(),
        "--predictor-cols",
        "1",
        "--response-col",
        "2",
        "--out",
        dir.path().join("s.txt").to_str().unwrap(),
    ]));
    assert!(out.status.success());
    let stdout = stdout_of(&out);
    assert!(stdout.contains("n=3 p=2"), "{stdout}");
    assert!(stdout.contains(&format!("bytes={bytes}")), "{stdout}");
}

#[test]
fn update_flag_matches_concatenated_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, seed) in [(&a, 5u64), (&b, 6)] {
        let out = run(cli().args([
            "simulate",
            "--n",
            "1500",
            "--k",
            "3",
            "--seed",
            &seed.to_string(),
            "--out",
            path.to_str().unwrap(),
        ]));
        assert!(out.status.success());
    }
    let stats_a = dir.path().join("sa.txt");
    let stats_ab = dir.path().join("sab.txt");
    let stats_both = dir.path().join("sboth.txt");
    run(cli().args([
        "ingest",
        "--input",
        a.to_str().unwrap(),
        "--predictor-cols",
        "1-3",
        "--response-col",
        "4",
        "--out",
        stats_a.to_str().unwrap(),
    ]));
    run(cli().args([
        "ingest",
        "--input",
        b.to_str().unwrap(),
        "--predictor-cols",
        "1-3",
        "--response-col",
        "4",
        "--update",
        stats_a.to_str().unwrap(),
        "--out",
        stats_ab.to_str().unwrap(),
    ]));
    run(cli().args([
        "ingest",
        "--input",
        a.to_str().unwrap(),
        "--input",
        b.to_str().unwrap(),
        "--predictor-cols",
        "1-3",
        "--response-col",
        "4",
        "--out",
        stats_both.to_str().unwrap(),
    ]));
    let updated = bayeslm::summaries::load(&stats_ab).unwrap();
    let both = bayeslm::summaries::load(&stats_both).unwrap();
    assert_eq!(updated.n(), both.n());
    for (x, y) in updated.xtx().as_slice().iter().zip(both.xtx().as_slice()) {
        assert!((x - y).abs() <= 1e-12 * y.abs().max(1e-12), "{x} vs {y}");
    }
}

#[test]
fn simulation_study_flags_replay() {
    // The simulated-data walkthrough at desk scale: ten predictors,
    // response in column 11, normal-known β prior with IG(1,1) σ² prior.
    let dir = tempfile::tempdir().unwrap();
    let (data, stats) = {
        let data = dir.path().join("sim.csv");
        let out = run(cli().args([
            "simulate",
            "--n",
            "4000",
            "--k",
            "10",
            "--rho",
            "0.2",
            "--sigma-sq",
            "1",
            "--seed",
            "2",
            "--out",
            data.to_str().unwrap(),
        ]));
        assert!(out.status.success());
        let stats = dir.path().join("stats.txt");
        let out = run(cli().args([
            "ingest",
            "--input",
            data.to_str().unwrap(),
            "--predictor-cols",
            "1-10",
            "--response-col",
            "11",
            "--first-rows",
            "100000",
            "--next-rows",
            "100000",
            "--out",
            stats.to_str().unwrap(),
        ]));
        assert!(out.status.success());
        assert!(stdout_of(&out).contains("n=4000 p=11"));
        (data, stats)
    };
    let _ = data;
    let prefix = format!("{}/", dir.path().display());
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "mvnorm-known",
        "--mean-mu",
        "zeros",
        "--cov-c",
        "identity",
        "--sigmasq-prior",
        "inverse-gamma",
        "--ig-a",
        "1",
        "--ig-b",
        "1",
        "--sigmasq-init",
        "1",
        "--samples",
        "11000",
        "--seed",
        "3",
        "--out-prefix",
        &prefix,
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let draws = dir.path().join("draws.csv");
    let lines = std::fs::read_to_string(&draws).unwrap().lines().count();
    assert_eq!(lines, 11_001, "header plus 11000 draws");

    // Summaries over the 10,000 draws left after burn-in.
    let out = run(cli().args([
        "summarize",
        "--draws",
        draws.to_str().unwrap(),
        "--burn-in",
        "1000",
    ]));
    assert!(out.status.success());
    let stdout = stdout_of(&out);
    assert!(stdout.contains("beta10"), "{stdout}");
    assert!(stdout.contains("sigmasq"), "{stdout}");
    assert!(stdout.contains("credible intervals"), "{stdout}");
}

#[test]
fn flat_jeffreys_prior_pair_replays() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 1000, 2, 8);
    let prefix = format!("{}/fj_", dir.path().display());
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "flat",
        "--sigmasq-prior",
        "jeffreys",
        "--sigmasq-init",
        "1",
        "--samples",
        "500",
        "--seed",
        "12",
        "--out-prefix",
        &prefix,
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(dir.path().join("fj_draws.csv").exists());
}

#[test]
fn mvnorm_unknown_writes_mu_and_cinv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 500, 2, 21);
    let prefix = format!("{}/mu_", dir.path().display());
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "mvnorm-unknown",
        "--sigmasq-prior",
        "inverse-gamma",
        "--samples",
        "50",
        "--seed",
        "5",
        "--out-prefix",
        &prefix,
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let header = std::fs::read_to_string(dir.path().join("mu_draws.csv"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(
        header,
        "beta0,beta1,beta2,sigmasq,mu0,mu1,mu2,\
         cinv0_0,cinv0_1,cinv0_2,cinv1_0,cinv1_1,cinv1_2,cinv2_0,cinv2_1,cinv2_2"
    );
}

#[test]
fn zero_intercept_drops_a_column() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 400, 2, 33);
    let prefix = format!("{}/zi_", dir.path().display());
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "flat",
        "--sigmasq-prior",
        "jeffreys",
        "--samples",
        "50",
        "--seed",
        "5",
        "--zero-intercept",
        "--out-prefix",
        &prefix,
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let header = std::fs::read_to_string(dir.path().join("zi_draws.csv"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header, "beta0,beta1,sigmasq");
}

#[test]
fn chains_flag_writes_suffixed_independent_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 600, 2, 44);
    let prefix = format!("{}/mc_", dir.path().display());
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "mvnorm-known",
        "--sigmasq-prior",
        "inverse-gamma",
        "--samples",
        "200",
        "--seed",
        "91",
        "--chains",
        "2",
        "--out-prefix",
        &prefix,
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let c0 = std::fs::read(dir.path().join("mc_chain0_draws.csv")).unwrap();
    let c1 = std::fs::read(dir.path().join("mc_chain1_draws.csv")).unwrap();
    assert_ne!(c0, c1, "chains must use independent streams");

    // Chain 0 must coincide with a single-chain run under the same seed.
    let prefix_single = format!("{}/sc_", dir.path().display());
    let out = run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "mvnorm-known",
        "--sigmasq-prior",
        "inverse-gamma",
        "--samples",
        "200",
        "--seed",
        "91",
        "--out-prefix",
        &prefix_single,
    ]));
    assert!(out.status.success());
    let single = std::fs::read(dir.path().join("sc_draws.csv")).unwrap();
    assert_eq!(c0, single);
}

#[test]
fn summarize_burn_in_too_large_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 300, 2, 55);
    let prefix = format!("{}/bi_", dir.path().display());
    run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "flat",
        "--sigmasq-prior",
        "jeffreys",
        "--samples",
        "100",
        "--seed",
        "2",
        "--out-prefix",
        &prefix,
    ]));
    let out = run(cli().args([
        "summarize",
        "--draws",
        dir.path().join("bi_draws.csv").to_str().unwrap(),
        "--burn-in",
        "100",
    ]));
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).starts_with("error: data:"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn summarize_quantile_headers_follow_probs_order() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 300, 2, 66);
    let prefix = format!("{}/qh_", dir.path().display());
    run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "flat",
        "--sigmasq-prior",
        "jeffreys",
        "--samples",
        "200",
        "--seed",
        "2",
        "--out-prefix",
        &prefix,
    ]));
    let summary = dir.path().join("summary.csv");
    let out = run(cli().args([
        "summarize",
        "--draws",
        dir.path().join("qh_draws.csv").to_str().unwrap(),
        "--probs",
        "0.1,0.5,0.9",
        "--level",
        "0.8",
        "--out",
        summary.to_str().unwrap(),
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let header = std::fs::read_to_string(&summary)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header, "parameter,mean,sd,naive_se,q0.1,q0.5,q0.9");
}

#[test]
fn summarize_writes_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 300, 2, 77);
    let prefix = format!("{}/pd_", dir.path().display());
    run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "flat",
        "--sigmasq-prior",
        "jeffreys",
        "--samples",
        "400",
        "--seed",
        "2",
        "--out-prefix",
        &prefix,
    ]));
    let plots = dir.path().join("plots");
    let out = run(cli().args([
        "summarize",
        "--draws",
        dir.path().join("pd_draws.csv").to_str().unwrap(),
        "--burn-in",
        "100",
        "--plot-data",
        plots.to_str().unwrap(),
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    for name in ["beta0", "beta1", "beta2", "sigmasq"] {
        assert!(plots.join(format!("{name}_history.csv")).exists());
        assert!(plots.join(format!("{name}_density.csv")).exists());
    }
}

#[test]
fn summarize_computes_interval_quantiles_not_in_probs() {
    let dir = tempfile::tempdir().unwrap();
    let (_, stats) = small_dataset(dir.path(), 300, 2, 88);
    let prefix = format!("{}/iq_", dir.path().display());
    run(cli().args([
        "sample",
        "--stats",
        stats.to_str().unwrap(),
        "--beta-prior",
        "flat",
        "--sigmasq-prior",
        "jeffreys",
        "--samples",
        "200",
        "--seed",
        "2",
        "--out-prefix",
        &prefix,
    ]));
    let out = run(cli().args([
        "summarize",
        "--draws",
        dir.path().join("iq_draws.csv").to_str().unwrap(),
        "--probs",
        "0.5",
        "--level",
        "0.95",
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(stdout_of(&out).contains("95% equal-tail credible intervals"));
}

#[test]
fn delimiter_skip_and_no_intercept_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("semi.csv");
    std::fs::write(&data, "x;y\n1.0;2.0\n2.0;4.0\n3.0;6.0\n").unwrap();
    let stats_path = dir.path().join("s.txt");
    let out = run(cli().args([
        "ingest",
        "--input",
        data.to_str().unwrap(),
        "--predictor-cols",
        "1",
        "--response-col",
        "2",
        "--delimiter",
        ";",
        "--skip",
        "1",
        "--no-intercept",
        "--out",
        stats_path.to_str().unwrap(),
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stats = bayeslm::summaries::load(&stats_path).unwrap();
    assert_eq!(stats.n(), 3);
    assert_eq!(stats.p(), 1);
    assert!(!stats.intercept());
    assert_eq!(stats.xtx()[(0, 0)], 14.0); // 1 + 4 + 9
    assert_eq!(stats.xty(), &[28.0]); // 2 + 8 + 18
    assert_eq!(stats.yty(), 56.0); // 4 + 16 + 36

    let out = run(cli().args([
        "ingest",
        "--input",
        data.to_str().unwrap(),
        "--predictor-cols",
        "1",
        "--response-col",
        "2",
        "--delimiter",
        ";;",
        "--out",
        stats_path.to_str().unwrap(),
    ]));
    assert_eq!(
        out.status.code(),
        Some(1),
        "multi-char delimiter is a usage error"
    );
}

#[test]
fn bench_row_has_the_six_column_roles() {
    // A million rows at ten predictors: ingest completes at desk scale and
    // the row carries the six column roles.
    let out = run(cli().args([
        "bench",
        "--n",
        "1000000",
        "--k",
        "10",
        "--samples",
        "500",
        "--seed",
        "3",
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = stdout_of(&out);
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "predictors,rows,bytes,ingest_seconds,prior_config,sampling_seconds"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 6);
    assert_eq!(row[0], "10");
    assert_eq!(row[1], "1000000");
    assert!(row[2].parse::<u64>().unwrap() > 100_000_000);
    assert!(row[3].parse::<f64>().unwrap() > 0.0);
    assert_eq!(row[4], "flat+inverse-gamma");
    assert!(row[5].parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn bench_unknown_prior_samples_slower_than_flat_at_k_100() {
    // The unknown-(μ, C) prior runs three extra O(p³) draws per iteration,
    // so its sampling column dominates the flat prior's at p = 101.
    let seconds_of = |beta_prior: &str| -> f64 {
        let out = run(cli().args([
            "bench",
            "--n",
            "4000",
            "--k",
            "100",
            "--samples",
            "300",
            "--beta-prior",
            beta_prior,
            "--sigmasq-prior",
            if beta_prior == "flat" {
                "inverse-gamma"
            } else {
                "jeffreys"
            },
            "--seed",
            "4",
        ]));
        assert!(out.status.success(), "{}", stderr_of(&out));
        let stdout = stdout_of(&out);
        let row = stdout.lines().nth(1).unwrap();
        row.split(',').nth(5).unwrap().parse().unwrap()
    };
    let flat = seconds_of("flat");
    let unknown = seconds_of("mvnorm-unknown");
    assert!(
        unknown > flat,
        "expected mvnorm-unknown sampling ({unknown} s) to exceed flat ({flat} s)"
    );
}
