//! Deterministic discretized greedy descent baseline.
//!
//! The search space is discretized with a per-dimension step of 0.1% of the
//! initialization range. From a random start the method evaluates the 2n
//! axis neighbors and moves to the most fit one while it is no worse than
//! the current point, terminating on the first strict deterioration. The
//! move-on-equal rule admits two-cycles on plateaus, so the last two
//! accepted points are remembered and excluded from re-entry.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::harness::{AlgoTag, RunRecord, TraceRecorder};
use crate::objective::{clamp_lower, sample_uniform, Objective, Point, SearchSpace, DIM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsConfig {
    /// Step size as a fraction of each dimension's initialization range.
    pub step_fraction: f64,
    /// Re-seed from a fresh random point after convergence instead of
    /// leaving the remaining budget unconsumed.
    pub restart_on_convergence: bool,
}

impl Default for LsConfig {
    fn default() -> Self {
        Self {
            step_fraction: 0.001,
            restart_on_convergence: false,
        }
    }
}

impl LsConfig {
    /// Absolute per-dimension steps for a given space.
    pub fn deltas(&self, space: &SearchSpace) -> Point {
        let mut out = [0.0; DIM];
        for d in 0..DIM {
            out[d] = self.step_fraction * space.width(d);
        }
        out
    }
}

/// The 2n axis neighbors of `x`, clamped to the lower bounds. Ordered by
/// dimension, negative direction first, which also fixes tie-breaking.
pub fn neighbors(x: &Point, deltas: &Point, space: &SearchSpace) -> Vec<Point> {
    let mut out = Vec::with_capacity(2 * DIM);
    for d in 0..DIM {
        for sign in [-1.0, 1.0] {
            let mut n = *x;
            n[d] += sign * deltas[d];
            out.push(clamp_lower(n, space));
        }
    }
    out
}

/// Runs the line search until it converges or the budget refuses. Without
/// restarts the remaining budget stays unconsumed and the exported trace is
/// padded flat to the full budget.
pub fn ls_run<O: Objective>(
    space: &SearchSpace,
    objective: &mut O,
    config: &LsConfig,
    seed: u64,
) -> RunRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deltas = config.deltas(space);
    let mut trace = TraceRecorder::new();

    'outer: loop {
        let mut current = sample_uniform(space, &mut rng);
        let mut current_fitness = match objective.evaluate(&current) {
            Ok(fit) => {
                trace.observe(fit.eval_index, fit.error, &current);
                fit.error
            }
            Err(_) => break 'outer,
        };

        // The last two accepted points; enough to break plateau two-cycles.
        let mut recent: [Option<Point>; 2] = [None, None];

        loop {
            let candidates = neighbors(&current, &deltas, space);
            let mut sweep: Vec<(Point, f64)> = Vec::with_capacity(candidates.len());
            for c in &candidates {
                match objective.evaluate(c) {
                    Ok(fit) => {
                        trace.observe(fit.eval_index, fit.error, c);
                        sweep.push((*c, fit.error));
                    }
                    Err(_) => break 'outer,
                }
            }

            let best = sweep
                .iter()
                .filter(|(point, _)| !recent.iter().flatten().any(|r| r == point))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            match best {
                Some(&(point, fitness)) if fitness <= current_fitness => {
                    recent = [Some(current), recent[0]];
                    current = point;
                    current_fitness = fitness;
                }
                _ => break, // strictly worse neighbors only: converged
            }
        }

        if !config.restart_on_convergence {
            break;
        }
    }

    let mut record = trace.into_record(AlgoTag::Ls, seed, Vec::new(), objective.budget());
    record.pad_trace_to(objective.budget().max());
    record
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{Budget, FnObjective};

    fn quad_center() -> Point {
        [1.0, -2.0, 0.5, 3.0, -1.5]
    }

    fn quadratic(x: &Point) -> f64 {
        let c = quad_center();
        x.iter()
            .zip(&c)
            .map(|(xi, ci)| (xi - ci) * (xi - ci))
            .sum()
    }

    #[test]
    fn neighbor_set_has_2n_points() {
        let space = SearchSpace::symmetric(5.0);
        let deltas = LsConfig::default().deltas(&space);
        let x = [0.0; DIM];
        let set = neighbors(&x, &deltas, &space);
        assert_eq!(set.len(), 2 * DIM);
        for (k, point) in set.iter().enumerate() {
            let d = k / 2;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            let mut expect = x;
            expect[d] += sign * deltas[d];
            assert_eq!(*point, expect);
        }
    }

    #[test]
    fn neighbors_on_the_bound_clamp_back() {
        let space = SearchSpace::motor();
        let deltas = LsConfig::default().deltas(&space);
        let mut x = [5.0, 5.0, 0.5, 2.0, 0.0005];
        x[0] = space.lower[0];
        let set = neighbors(&x, &deltas, &space);
        // The -delta neighbor in dimension 0 clamps onto the bound.
        assert_eq!(set[0][0], space.lower[0]);
        assert_eq!(set[1][0], space.lower[0] + deltas[0]);
    }

    #[test]
    fn converges_to_quadratic_minimum_within_grid_resolution() {
        let space = SearchSpace::symmetric(5.0);
        let config = LsConfig::default();
        let deltas = config.deltas(&space);
        let mut objective = FnObjective::new(quadratic, Budget::new(2_000_000));
        let record = ls_run(&space, &mut objective, &config, 7);
        let c = quad_center();
        for d in 0..DIM {
            assert!(
                (record.final_theta[d] - c[d]).abs() <= deltas[d] + 1e-12,
                "dim {d}: {} vs {} (delta {})",
                record.final_theta[d],
                c[d],
                deltas[d]
            );
        }
        assert!(record.evals_consumed < 2_000_000);
    }

    #[test]
    fn local_minimum_terminates_after_one_sweep() {
        // Fitness that is minimal exactly at the start point.
        let space = SearchSpace::symmetric(5.0);
        let config = LsConfig::default();
        let mut first: Option<Point> = None;
        let f = move |x: &Point| {
            let start = *first.get_or_insert(*x);
            if *x == start {
                0.0
            } else {
                1.0
            }
        };
        let mut objective = FnObjective::new(f, Budget::new(1_000));
        let record = ls_run(&space, &mut objective, &config, 3);
        assert_eq!(record.evals_consumed, 1 + 2 * DIM as u64);
        assert_eq!(record.final_fitness, 0.0);
    }

    #[test]
    fn plateau_moves_but_never_cycles() {
        // Constant fitness: the <= rule keeps accepting moves; the visited
        // memory must prevent an infinite two-cycle and the budget bounds
        // the run regardless.
        let space = SearchSpace::symmetric(5.0);
        let config = LsConfig::default();
        let mut objective = FnObjective::new(|_: &Point| 1.0, Budget::new(5_000));
        let record = ls_run(&space, &mut objective, &config, 5);
        // The walk keeps moving across the plateau until the budget refuses.
        assert_eq!(record.evals_consumed, 5_000);
        assert_eq!(record.final_fitness, 1.0);
    }

    #[test]
    fn equal_fitness_neighbor_is_accepted() {
        // One axis is flat; the rule must move along it rather than stop.
        let space = SearchSpace::symmetric(5.0);
        let config = LsConfig::default();
        let f = |x: &Point| x[1].powi(2) + x[2].powi(2) + x[3].powi(2) + x[4].powi(2);
        let mut objective = FnObjective::new(f, Budget::new(200));
        let record = ls_run(&space, &mut objective, &config, 1);
        // More than one sweep happened: flat direction was accepted.
        assert!(record.evals_consumed > 1 + 2 * DIM as u64);
    }

    #[test]
    fn run_is_deterministic_per_seed() {
        let space = SearchSpace::symmetric(5.0);
        let config = LsConfig::default();
        let run = || {
            let mut objective = FnObjective::new(quadratic, Budget::new(50_000));
            ls_run(&space, &mut objective, &config, 21)
        };
        let a = run();
        let b = run();
        assert_eq!(a.final_theta, b.final_theta);
        assert_eq!(a.convergence, b.convergence);
        assert_eq!(a.evals_consumed, b.evals_consumed);
    }

    #[test]
    fn trace_is_padded_to_the_full_budget() {
        let space = SearchSpace::symmetric(5.0);
        let mut objective = FnObjective::new(quadratic, Budget::new(100_000));
        let record = ls_run(&space, &mut objective, &LsConfig::default(), 2);
        assert!(record.evals_consumed < 100_000);
        assert_eq!(record.convergence.last().unwrap().0, 100_000);
    }

    #[test]
    fn restart_mode_consumes_the_whole_budget() {
        let space = SearchSpace::symmetric(5.0);
        let config = LsConfig {
            restart_on_convergence: true,
            ..LsConfig::default()
        };
        let mut objective = FnObjective::new(quadratic, Budget::new(3_000));
        let record = ls_run(&space, &mut objective, &config, 2);
        assert_eq!(record.evals_consumed, 3_000);
    }
}
