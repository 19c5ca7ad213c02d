//! Simulate the bench motor's V/F startup and export the reference
//! waveform CSV that the identification experiments consume.
//!
//! ```text
//! cargo run --release --example simulate_waveform [out_dir]
//! ```

use motor_ident::motor::{self, MotorParams, SupplyProfile};
use motor_ident::ode::IntegratorConfig;

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/waveform".into());
    let supply = SupplyProfile::default();
    let integrator = IntegratorConfig::default();

    let started = std::time::Instant::now();
    let waveform = motor::simulate(&MotorParams::NOMINAL, &supply, &integrator)
        .expect("nominal startup simulates");
    let elapsed = started.elapsed();

    let peak = waveform
        .i1
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let omega = motor::terminal_speed(&MotorParams::NOMINAL, &supply, &integrator).unwrap();
    println!(
        "simulated {} samples over {} s in {:.1} ms",
        waveform.len(),
        supply.horizon,
        elapsed.as_secs_f64() * 1e3
    );
    println!("peak phase current: {peak:.3} A");
    println!(
        "terminal speed: {omega:.2} rad/s (synchronous {:.2} rad/s)",
        supply.synchronous_mech_speed()
    );

    std::fs::create_dir_all(&out_dir).expect("create output directory");
    let path = std::path::Path::new(&out_dir).join("reference.csv");
    waveform.write_csv(&path).expect("write waveform CSV");
    println!("wrote {}", path.display());
}
