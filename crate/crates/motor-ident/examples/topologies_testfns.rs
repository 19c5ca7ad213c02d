//! Compare the three PSO topologies on classic analytic test functions.
//!
//! ```text
//! cargo run --release --example topologies_testfns [budget]
//! ```
//!
//! On the unimodal sphere all topologies converge and the global-best
//! variant is quickest. On the heavily multimodal Rastrigin function the
//! picture inverts: the global topology tends to collapse into a local
//! minimum while the clubs topology keeps enough diversity to find the
//! global one.

use motor_ident::harness::AlgoTag;
use motor_ident::objective::{sphere, Budget, FnObjective, Point, SearchSpace};
use motor_ident::pso::{pso_run, PsoConfig};

fn rosenbrock(x: &Point) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

fn rastrigin(x: &Point) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (std::f64::consts::TAU * v).cos())
            .sum::<f64>()
}

fn compare(name: &str, f: fn(&Point) -> f64, space: &SearchSpace, budget: u64) {
    for (config, tag) in [
        (PsoConfig::clubs(), AlgoTag::Cpso),
        (PsoConfig::ring(), AlgoTag::PsoL),
        (PsoConfig::global(), AlgoTag::PsoG),
    ] {
        let mut finals: Vec<f64> = (0..7)
            .map(|seed| {
                let mut objective = FnObjective::new(f, Budget::new(budget));
                pso_run(space, &mut objective, &config, None, 42 + seed).final_fitness
            })
            .collect();
        finals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rendered: Vec<String> = finals.iter().map(|v| format!("{v:.2e}")).collect();
        println!(
            "{name:<12} {tag:<5} median {:.3e}  finals [{}]",
            finals[finals.len() / 2],
            rendered.join(", ")
        );
    }
    println!();
}

fn main() {
    let budget: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_000);
    println!("7 seeds per topology, {budget} evaluations each\n");
    compare("sphere", sphere, &SearchSpace::symmetric(5.12), budget);
    compare("rosenbrock", rosenbrock, &SearchSpace::symmetric(5.0), budget);
    compare("rastrigin", rastrigin, &SearchSpace::symmetric(5.12), budget);
}
