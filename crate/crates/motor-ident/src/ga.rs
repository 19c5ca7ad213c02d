//! Real-coded genetic algorithm: SBX crossover, polynomial mutation,
//! binary-tournament survival over the pooled parents and offspring, and
//! elitism on the pool's best individual.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::harness::{AlgoTag, RunRecord, TraceRecorder};
use crate::objective::{clamp_lower, sample_uniform, Objective, Point, SearchSpace, DIM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    /// Probability that a parent pair is crossed at all.
    pub crossover_rate: f64,
    /// SBX distribution index (eta_c).
    pub crossover_index: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Polynomial mutation distribution index (eta_m).
    pub mutation_index: f64,
    pub tournament_size: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            crossover_rate: 0.5,
            crossover_index: 15.0,
            mutation_rate: 0.01,
            mutation_index: 15.0,
            tournament_size: 2,
        }
    }
}

/// One population member.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub chromosome: Point,
    pub fitness: f64,
}

/// SBX spread factor for a single uniform draw `u`.
#[inline]
pub fn sbx_beta(u: f64, eta_c: f64) -> f64 {
    let exponent = 1.0 / (eta_c + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(exponent)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(exponent)
    }
}

/// One-dimensional SBX blend, pre-clamp. The children's mean equals the
/// parents' mean identically.
#[inline]
pub fn sbx_blend(p1: f64, p2: f64, beta: f64) -> (f64, f64) {
    let sum = p1 + p2;
    let spread = beta * (p2 - p1);
    (0.5 * (sum - spread), 0.5 * (sum + spread))
}

/// Polynomial-mutation perturbation for a single uniform draw `u`, as a
/// fraction of the dimension's initialization range. Zero at `u = 0.5`.
#[inline]
pub fn polynomial_delta(u: f64, eta_m: f64) -> f64 {
    let exponent = 1.0 / (eta_m + 1.0);
    if u < 0.5 {
        (2.0 * u).powf(exponent) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - u)).powf(exponent)
    }
}

/// SBX over a parent pair: each dimension is crossed with probability 0.5,
/// then both children are pinned to the lower bounds.
pub fn sbx_crossover<R: Rng>(
    parent1: &Point,
    parent2: &Point,
    eta_c: f64,
    space: &SearchSpace,
    rng: &mut R,
) -> (Point, Point) {
    let mut c1 = *parent1;
    let mut c2 = *parent2;
    for d in 0..DIM {
        if rng.gen::<f64>() < 0.5 {
            let beta = sbx_beta(rng.gen(), eta_c);
            let (a, b) = sbx_blend(parent1[d], parent2[d], beta);
            c1[d] = a;
            c2[d] = b;
        }
    }
    (clamp_lower(c1, space), clamp_lower(c2, space))
}

/// Polynomial mutation: each gene mutates with probability `rate`, moving
/// by `delta * (upper - lower)`, then pins to the lower bound.
pub fn polynomial_mutation<R: Rng>(
    chromosome: &Point,
    eta_m: f64,
    rate: f64,
    space: &SearchSpace,
    rng: &mut R,
) -> Point {
    let mut out = *chromosome;
    for d in 0..DIM {
        if rng.gen::<f64>() < rate {
            let delta = polynomial_delta(rng.gen(), eta_m);
            out[d] += delta * space.width(d);
        }
    }
    clamp_lower(out, space)
}

/// Forms the next generation from the pooled parents and offspring:
/// `population_size` tournaments over uniform draws with replacement
/// (fitter competitor wins, ties go to the first drawn), then the pool's
/// best individual replaces a uniformly random slot unless an identical
/// chromosome already survived.
pub fn survival_selection<R: Rng>(
    parents: &[Individual],
    offspring: &[Individual],
    config: &GaConfig,
    rng: &mut R,
) -> Vec<Individual> {
    let pool: Vec<&Individual> = parents.iter().chain(offspring.iter()).collect();
    assert!(!pool.is_empty());
    let mut next = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let mut winner = pool[rng.gen_range(0..pool.len())];
        for _ in 1..config.tournament_size {
            let challenger = pool[rng.gen_range(0..pool.len())];
            if challenger.fitness < winner.fitness {
                winner = challenger;
            }
        }
        next.push(winner.clone());
    }

    let best = pool
        .iter()
        .min_by(|a, b| a.fitness.partial_cmp(&b.fitness).unwrap())
        .unwrap();
    if !next.iter().any(|ind| ind.chromosome == best.chromosome) {
        let slot = rng.gen_range(0..next.len());
        next[slot] = (*best).clone();
    }
    next
}

/// Runs the GA until the budget refuses, recording best-so-far per
/// evaluation.
pub fn ga_run<O: Objective>(
    space: &SearchSpace,
    objective: &mut O,
    config: &GaConfig,
    seed: u64,
) -> RunRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.population_size;
    let mut trace = TraceRecorder::new();

    let mut population: Vec<Individual> = Vec::with_capacity(n);
    for _ in 0..n {
        population.push(Individual {
            chromosome: sample_uniform(space, &mut rng),
            fitness: f64::INFINITY,
        });
    }
    let mut exhausted = false;
    for ind in &mut population {
        match objective.evaluate(&ind.chromosome) {
            Ok(fit) => {
                trace.observe(fit.eval_index, fit.error, &ind.chromosome);
                ind.fitness = fit.error;
            }
            Err(_) => {
                exhausted = true;
                break;
            }
        }
    }

    while !exhausted {
        // Random disjoint pairing: shuffle indices, pair consecutive.
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }

        let mut offspring: Vec<Individual> = Vec::with_capacity(n);
        for pair in order.chunks(2) {
            if pair.len() == 2 {
                let p1 = &population[pair[0]].chromosome;
                let p2 = &population[pair[1]].chromosome;
                let (c1, c2) = if rng.gen::<f64>() < config.crossover_rate {
                    sbx_crossover(p1, p2, config.crossover_index, space, &mut rng)
                } else {
                    (*p1, *p2)
                };
                for c in [c1, c2] {
                    offspring.push(Individual {
                        chromosome: polynomial_mutation(
                            &c,
                            config.mutation_index,
                            config.mutation_rate,
                            space,
                            &mut rng,
                        ),
                        fitness: f64::INFINITY,
                    });
                }
            } else {
                // Odd population: the leftover parent passes through mutation.
                offspring.push(Individual {
                    chromosome: polynomial_mutation(
                        &population[pair[0]].chromosome,
                        config.mutation_index,
                        config.mutation_rate,
                        space,
                        &mut rng,
                    ),
                    fitness: f64::INFINITY,
                });
            }
        }

        for child in &mut offspring {
            match objective.evaluate(&child.chromosome) {
                Ok(fit) => {
                    trace.observe(fit.eval_index, fit.error, &child.chromosome);
                    child.fitness = fit.error;
                }
                Err(_) => {
                    exhausted = true;
                    break;
                }
            }
        }
        if exhausted {
            break;
        }
        population = survival_selection(&population, &offspring, config, &mut rng);
    }

    trace.into_record(AlgoTag::Ga, seed, Vec::new(), objective.budget())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{sphere, Budget, FnObjective};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sbx_beta_is_one_at_half() {
        assert_eq!(sbx_beta(0.5, 15.0), 1.0);
        // beta = 1 reproduces the parents.
        let (c1, c2) = sbx_blend(3.0, 7.0, 1.0);
        assert_eq!((c1, c2), (3.0, 7.0));
    }

    #[test]
    fn sbx_preserves_the_parent_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let p1 = rng.gen_range(-10.0..10.0);
            let p2 = rng.gen_range(-10.0..10.0);
            let beta = sbx_beta(rng.gen(), 15.0);
            let (c1, c2) = sbx_blend(p1, p2, beta);
            assert!(((c1 + c2) - (p1 + p2)).abs() < 1e-12);
        }
    }

    #[test]
    fn sbx_identical_parents_yield_identical_children() {
        let space = SearchSpace::motor();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = [5.0, 5.0, 0.5, 2.5, 0.0005];
        for _ in 0..50 {
            let (c1, c2) = sbx_crossover(&p, &p, 15.0, &space, &mut rng);
            assert_eq!(c1, p);
            assert_eq!(c2, p);
        }
    }

    #[test]
    fn polynomial_delta_endpoints() {
        assert_eq!(polynomial_delta(0.5, 15.0), 0.0);
        assert_eq!(polynomial_delta(0.0, 15.0), -1.0);
        assert_eq!(polynomial_delta(1.0, 15.0), 1.0);
    }

    #[test]
    fn full_negative_mutation_clamps_to_lower_bound() {
        // delta = -1 moves the gene by the full range, landing below the
        // lower bound, which the clamp pins.
        let space = SearchSpace::motor();
        let x = [10.0, 10.0, 0.5, 2.5, 0.0005];
        for d in 0..DIM {
            let moved = x[d] + polynomial_delta(0.0, 15.0) * space.width(d);
            assert!(moved < space.lower[d]);
        }
    }

    #[test]
    fn zero_mutation_rate_is_identity() {
        let space = SearchSpace::motor();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = [3.0, 4.0, 0.3, 2.0, 0.0007];
        for _ in 0..100 {
            assert_eq!(polynomial_mutation(&x, 15.0, 0.0, &space, &mut rng), x);
        }
    }

    fn individual(fitness: f64, c0: f64) -> Individual {
        Individual {
            chromosome: [c0, 0.0, 0.0, 0.0, 0.0],
            fitness,
        }
    }

    #[test]
    fn tournament_prefers_lower_fitness() {
        let parents = vec![individual(3.0, 1.0)];
        let offspring = vec![individual(7.0, 2.0)];
        let config = GaConfig {
            population_size: 50,
            ..GaConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let next = survival_selection(&parents, &offspring, &config, &mut rng);
        // Whenever the 3.0 and 7.0 meet, 3.0 wins; the population can only
        // hold copies of the two, and 3.0 must dominate.
        let wins = next.iter().filter(|i| i.fitness == 3.0).count();
        assert!(wins > 25, "fitter individual won only {wins}/50");
    }

    #[test]
    fn elitism_keeps_the_pool_best() {
        let parents: Vec<Individual> = (0..10).map(|k| individual(10.0 + k as f64, k as f64)).collect();
        let mut offspring: Vec<Individual> = (0..10).map(|k| individual(20.0 + k as f64, k as f64)).collect();
        offspring[7] = individual(0.5, 99.0); // the pool best
        let config = GaConfig {
            population_size: 10,
            ..GaConfig::default()
        };
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let next = survival_selection(&parents, &offspring, &config, &mut rng);
            assert_eq!(next.len(), 10);
            assert!(next.iter().any(|i| i.fitness == 0.5));
        }
    }

    #[test]
    fn degenerate_pool_reproduces_itself() {
        let parents = vec![individual(1.0, 2.0); 4];
        let offspring = vec![individual(1.0, 2.0); 4];
        let config = GaConfig {
            population_size: 4,
            ..GaConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = survival_selection(&parents, &offspring, &config, &mut rng);
        assert!(next.iter().all(|i| *i == parents[0]));
    }

    #[test]
    fn ga_solves_the_sphere() {
        let space = SearchSpace::symmetric(5.12);
        let mut objective = FnObjective::new(sphere, Budget::new(10_000));
        let record = ga_run(&space, &mut objective, &GaConfig::default(), 3);
        assert!(
            record.final_fitness < 1e-2,
            "GA reached only {}",
            record.final_fitness
        );
        assert_eq!(record.evals_consumed, 10_000);
    }

    #[test]
    fn ga_consumes_the_full_budget() {
        // 100,000 evaluations at population 50: the initial population plus
        // ~2,000 offspring generations.
        let space = SearchSpace::symmetric(5.12);
        let mut objective = FnObjective::new(sphere, Budget::new(100_000));
        let record = ga_run(&space, &mut objective, &GaConfig::default(), 5);
        assert_eq!(record.evals_consumed, 100_000);
    }

    #[test]
    fn ga_best_so_far_is_non_increasing() {
        let space = SearchSpace::symmetric(5.12);
        let mut objective = FnObjective::new(sphere, Budget::new(4_000));
        let record = ga_run(&space, &mut objective, &GaConfig::default(), 11);
        for w in record.convergence.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
    }

    #[test]
    fn operators_respect_lower_bounds() {
        let space = SearchSpace::motor();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let p1 = sample_uniform(&space, &mut rng);
            let p2 = sample_uniform(&space, &mut rng);
            let (c1, c2) = sbx_crossover(&p1, &p2, 15.0, &space, &mut rng);
            let m = polynomial_mutation(&c1, 15.0, 0.5, &space, &mut rng);
            for d in 0..DIM {
                assert!(c1[d] >= space.lower[d]);
                assert!(c2[d] >= space.lower[d]);
                assert!(m[d] >= space.lower[d]);
            }
        }
    }
}
