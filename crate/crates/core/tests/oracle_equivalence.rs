//! Ingestion against a dense whole-matrix oracle.
//!
//! The oracle materializes the full design in memory and computes XᵀX,
//! XᵀY, YᵀY with plain triple loops: no chunking, no shared code with the
//! fold path.

use std::fmt::Write as _;
use std::path::Path;

use bayeslm::distributions::RngStream;
use bayeslm::summaries::{ingest, IngestConfig};

struct DenseOracle {
    xtx: Vec<Vec<f64>>,
    xty: Vec<f64>,
    yty: f64,
}

fn dense_oracle(rows: &[Vec<f64>], y: &[f64]) -> DenseOracle {
    let p = rows[0].len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    let mut yty = 0.0;
    for i in 0..p {
        for j in 0..p {
            let mut acc = 0.0;
            for row in rows {
                acc += row[i] * row[j];
            }
            xtx[i][j] = acc;
        }
        xty[i] = rows.iter().zip(y).map(|(row, yr)| row[i] * yr).sum();
    }
    for yr in y {
        yty += yr * yr;
    }
    DenseOracle { xtx, xty, yty }
}

/// Writes `n` rows of `k` predictors plus a response, returns the raw
/// values for the oracle.
fn write_random_file(path: &Path, n: usize, k: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = RngStream::new(seed);
    let mut text = String::with_capacity(n * (k + 1) * 20);
    let mut raw_x = Vec::with_capacity(n);
    let mut raw_y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut design_row = vec![1.0]; // oracle sees the intercept column
        for j in 0..k {
            let v = rng.standard_normal() * (1.0 + j as f64 * 0.1);
            design_row.push(v);
            write!(text, "{v},").unwrap();
        }
        let y = rng.standard_normal() * 2.0 + 0.5;
        writeln!(text, "{y}").unwrap();
        raw_x.push(design_row);
        raw_y.push(y);
    }
    std::fs::write(path, text).unwrap();
    (raw_x, raw_y)
}

fn assert_close(got: f64, want: f64, rtol: f64, what: &str) {
    let denom = want.abs().max(1e-300);
    assert!(
        ((got - want) / denom).abs() <= rtol,
        "{what}: got {got}, want {want} (rtol {rtol})"
    );
}

#[test]
fn chunked_ingest_matches_dense_oracle() {
    // Random datasets up to p = 20 design columns; chunked reads must agree
    // with the dense computation to 1e-10 relative per entry.
    let dir = tempfile::tempdir().unwrap();
    for &(n, k, seed) in &[(20_000usize, 19usize, 11u64), (5_000, 7, 12), (999, 3, 13)] {
        let path = dir.path().join(format!("data_{k}_{seed}.csv"));
        let (raw_x, raw_y) = write_random_file(&path, n, k, seed);
        let oracle = dense_oracle(&raw_x, &raw_y);

        let mut config = IngestConfig::new(vec![path], (1..=k).collect(), k + 1);
        config.first_rows = 1_000;
        config.next_rows = 777;
        let stats = ingest(&config, None).unwrap();

        assert_eq!(stats.n() as usize, n);
        assert_eq!(stats.p(), k + 1);
        for i in 0..=k {
            for j in 0..=k {
                assert_close(
                    stats.xtx()[(i, j)],
                    oracle.xtx[i][j],
                    1e-10,
                    &format!("xtx[{i}][{j}] n={n} k={k}"),
                );
            }
            assert_close(stats.xty()[i], oracle.xty[i], 1e-10, &format!("xty[{i}]"));
        }
        assert_close(stats.yty(), oracle.yty, 1e-10, "yty");
        // With the intercept column, xtx[0][0] counts rows exactly and
        // xtx[0][j] is the column-j sum.
        assert_eq!(stats.xtx()[(0, 0)], n as f64);
        for j in 1..=k {
            let col_sum: f64 = raw_x.iter().map(|r| r[j]).sum();
            assert_close(stats.xtx()[(0, j)], col_sum, 1e-12, "intercept row sum");
        }
    }
}

#[test]
fn chunk_size_never_changes_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    write_random_file(&path, 1000, 4, 21);

    let single = {
        let mut c = IngestConfig::new(vec![path.clone()], (1..=4).collect(), 5);
        c.first_rows = 1_000_000;
        ingest(&c, None).unwrap()
    };
    for &(first, next) in &[(1usize, 1usize), (3, 4), (100, 7), (999, 999), (1000, 1)] {
        let mut c = IngestConfig::new(vec![path.clone()], (1..=4).collect(), 5);
        c.first_rows = first;
        c.next_rows = next;
        let chunked = ingest(&c, None).unwrap();
        assert_eq!(chunked.n(), single.n());
        for (a, b) in chunked.xtx().as_slice().iter().zip(single.xtx().as_slice()) {
            assert_close(*a, *b, 1e-12, &format!("chunks ({first},{next})"));
        }
        for (a, b) in chunked.xty().iter().zip(single.xty()) {
            assert_close(*a, *b, 1e-12, "xty");
        }
        assert_close(chunked.yty(), single.yty(), 1e-12, "yty");
    }
}

#[test]
fn update_path_equals_concatenated_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let file_a = dir.path().join("a.csv");
    let file_b = dir.path().join("b.csv");
    write_random_file(&file_a, 1500, 5, 31);
    write_random_file(&file_b, 900, 5, 32);

    let both = {
        let mut c = IngestConfig::new(vec![file_a.clone(), file_b.clone()], (1..=5).collect(), 6);
        c.first_rows = 400;
        c.next_rows = 250;
        ingest(&c, None).unwrap()
    };
    let updated = {
        let mut c = IngestConfig::new(vec![file_a], (1..=5).collect(), 6);
        c.first_rows = 400;
        c.next_rows = 250;
        let first = ingest(&c, None).unwrap();
        let mut c2 = IngestConfig::new(vec![file_b], (1..=5).collect(), 6);
        c2.first_rows = 400;
        c2.next_rows = 250;
        ingest(&c2, Some(first)).unwrap()
    };
    assert_eq!(both.n(), updated.n());
    for (a, b) in updated.xtx().as_slice().iter().zip(both.xtx().as_slice()) {
        assert_close(*a, *b, 1e-12, "update xtx");
    }
    for (a, b) in updated.xty().iter().zip(both.xty()) {
        assert_close(*a, *b, 1e-12, "update xty");
    }
    assert_close(updated.yty(), both.yty(), 1e-12, "update yty");
}

#[test]
fn update_with_mismatched_shape_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file_a = dir.path().join("a.csv");
    write_random_file(&file_a, 50, 3, 41);
    let c3 = IngestConfig::new(vec![file_a.clone()], (1..=3).collect(), 4);
    let stats3 = ingest(&c3, None).unwrap();
    // Re-ingest selecting only two predictors; the p=4 update must be refused.
    let c2 = IngestConfig::new(vec![file_a], (1..=2).collect(), 4);
    assert!(matches!(
        ingest(&c2, Some(stats3)),
        Err(bayeslm::Error::IncompatibleSummaries { .. })
    ));
}
