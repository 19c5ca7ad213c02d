//! Induction-motor parameter identification from startup current waveforms.
//!
//! A constant-V/F startup excites the motor dynamics; the recorded phase
//! currents are compared against a dq-model simulation and the integrated
//! absolute current error is minimized over five machine parameters
//! (Rs, Rr, combined leakage, Lm, J). Five optimizers are provided for the
//! search: clubs-based PSO with a dynamic social network, global-best and
//! ring-topology PSO, a real-coded GA with SBX crossover and polynomial
//! mutation, and a deterministic discretized line search baseline.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release --example simulate_waveform
//! cargo run --release --example identify_cpso
//! cargo run --release --example compare_optimizers
//! cargo run --release --example club_dynamics
//! cargo run --release --example topologies_testfns
//! cargo run --release --example ode_demo
//! ```
//!
//! The `identify` binary wraps the same machinery behind `simulate`, `run`,
//! and `report` subcommands for scripted experiments.

pub mod ga;
pub mod harness;
pub mod line_search;
pub mod motor;
pub mod objective;
pub mod ode;
pub mod pso;

pub use motor::{CurrentWaveform, MotorParams, MotorState, SupplyProfile};
pub use objective::{
    Budget, BudgetExhausted, FnObjective, MotorObjective, Objective, Point, SearchSpace, DIM,
};
pub use ode::{IntegratorConfig, IvpProblem, OdeError};
