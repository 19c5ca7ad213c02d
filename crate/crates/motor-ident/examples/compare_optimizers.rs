//! Run all five optimizers on the same identification problem at a reduced
//! budget and print the summary statistics tables.
//!
//! ```text
//! cargo run --release --example compare_optimizers [budget] [runs] [seed]
//! ```
//!
//! The scenario is the scaled-down benchmark: 0.5 s horizon, noisy
//! reference currents, coarse candidate integration. Result CSVs land in
//! `target/compare/`.

use motor_ident::harness::{self, AlgoTag, ExperimentConfig};

fn main() {
    let mut config = ExperimentConfig::scaled_benchmark();
    if let Some(budget) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        config.budget = budget;
    }
    if let Some(runs) = std::env::args().nth(2).and_then(|s| s.parse().ok()) {
        config.runs = runs;
    }
    if let Some(seed) = std::env::args().nth(3).and_then(|s| s.parse().ok()) {
        config.base_seed = seed;
    }

    let out = std::path::Path::new("target/compare");
    let started = std::time::Instant::now();
    let output = harness::run_experiment(&config, out).expect("experiment");
    println!(
        "{} runs x {} optimizers, budget {}: {:.1} s total",
        config.runs,
        config.algos.len(),
        config.budget,
        started.elapsed().as_secs_f64()
    );
    print!("{}", harness::render_tables(&output.stats));

    let ls_consumed: Vec<u64> = output
        .records
        .iter()
        .filter(|r| r.algo == AlgoTag::Ls)
        .map(|r| r.evals_consumed)
        .collect();
    if !ls_consumed.is_empty() {
        println!("line-search evaluations consumed per run: {ls_consumed:?}");
    }
    println!("CSV outputs in {}", out.display());
}
