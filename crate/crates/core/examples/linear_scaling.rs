//! Time extraction for 10..100 backlinks and fit a line.

use kgod::bench::{generate_synthetic_corpus, report_csv, run_bench, BenchOptions};

#[tokio::main]
async fn main() {
    let counts: Vec<usize> = (1..=10).map(|i| i * 10).collect();
    let dir = tempfile::tempdir().unwrap();
    generate_synthetic_corpus(&counts, dir.path(), 42).unwrap();
    let report = run_bench(dir.path(), &counts, &BenchOptions { repeats: 5, ..Default::default() }).await.unwrap();
    print!("{}", String::from_utf8(report_csv(&report)).unwrap());
    let pages = report.pages_fit.unwrap();
    println!("pages processed = {:.1} + {:.1}*k (r2 {})", pages.intercept, pages.slope, pages.r_squared);
}
