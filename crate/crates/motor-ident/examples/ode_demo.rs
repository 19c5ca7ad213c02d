//! Exercise the adaptive Dormand-Prince integrator on problems with known
//! closed-form solutions and show the achieved accuracy per tolerance.
//!
//! ```text
//! cargo run --release --example ode_demo
//! ```

use motor_ident::ode::{integrate, IntegratorConfig, IvpProblem};

fn main() {
    println!("exponential decay dy/dt = -y, y(0) = 1, over [0, 1]:");
    println!("{:>10} {:>14} {:>14}", "rtol", "y(1)", "error");
    for exp in [3, 5, 7, 9] {
        // Open up the step limits so the tolerance drives the accuracy.
        let config = IntegratorConfig {
            rtol: 10f64.powi(-exp),
            atol: 10f64.powi(-exp - 2),
            max_step: 10.0,
            initial_step: 1e-2,
        };
        let problem =
            IvpProblem::new(|_t, y: &[f64; 1]| [-y[0]], [1.0], (0.0, 1.0), vec![1.0]).unwrap();
        let out = integrate(&problem, &config).unwrap();
        let exact = (-1.0f64).exp();
        println!(
            "{:>10.0e} {:>14.10} {:>14.2e}",
            config.rtol,
            out[0][0],
            (out[0][0] - exact).abs()
        );
    }

    println!("\nharmonic oscillator y'' = -y over five periods, energy drift:");
    let period = std::f64::consts::TAU;
    let grid: Vec<f64> = (1..=50).map(|k| k as f64 * period / 10.0).collect();
    let problem = IvpProblem::new(
        |_t, y: &[f64; 2]| [y[1], -y[0]],
        [1.0, 0.0],
        (0.0, 5.0 * period),
        grid,
    )
    .unwrap();
    let out = integrate(&problem, &IntegratorConfig::default()).unwrap();
    let max_drift = out
        .iter()
        .map(|y| (y[0] * y[0] + y[1] * y[1] - 1.0).abs())
        .fold(0.0f64, f64::max);
    println!("max |energy - 1| over 50 samples: {max_drift:.2e}");

    let last = out.last().unwrap();
    println!(
        "state after five periods: ({:.8}, {:.8}) vs exact (1, 0)",
        last[0], last[1]
    );
}
