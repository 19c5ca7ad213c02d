//! Identify the five motor parameters with the clubs-based PSO against a
//! synthetic reference waveform, then compare the estimate to the truth.
//!
//! ```text
//! cargo run --release --example identify_cpso [budget] [seed]
//! ```

use motor_ident::harness::{self, percent_deviation, AlgoTag, ExperimentConfig};
use motor_ident::motor::MotorParams;

fn main() {
    let budget: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_000);
    let seed: u64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);

    let mut config = ExperimentConfig::default();
    config.supply.horizon = 0.5;
    config.budget = budget;
    config.base_seed = seed;

    let reference = harness::generate_reference(&config).expect("reference waveform");
    println!(
        "reference: {} samples, budget {budget}, seed {seed}",
        reference.len()
    );

    let started = std::time::Instant::now();
    let record = harness::run_single(&config, &reference, AlgoTag::Cpso, 0);
    let elapsed = started.elapsed().as_secs_f64();

    let truth = MotorParams::NOMINAL;
    let estimate = MotorParams::from_array(record.final_theta);
    let deviation = percent_deviation(&record.final_theta, &truth.to_array());

    println!(
        "final fitness {:.6e} after {} evaluations in {elapsed:.1} s",
        record.final_fitness, record.evals_consumed
    );
    println!("{:<8} {:>12} {:>12} {:>10}", "param", "true", "estimated", "dev %");
    let names = ["Rs", "Rr", "Lleak", "Lm", "J"];
    for (d, name) in names.iter().enumerate() {
        println!(
            "{:<8} {:>12.6} {:>12.6} {:>10.3}",
            name,
            truth.to_array()[d],
            estimate.to_array()[d],
            deviation[d]
        );
    }
}
