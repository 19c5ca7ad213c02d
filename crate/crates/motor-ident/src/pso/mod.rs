//! Particle swarm optimizer with three interchangeable social topologies:
//! global best (PSO-g), ring (PSO-l), and dynamic clubs (C-PSO).
//!
//! All randomness comes from one generator per run with a fixed draw order,
//! so runs are bit-reproducible per seed:
//!
//! 1. initial positions, particle-major then dimension-minor;
//! 2. initial velocities, same order;
//! 3. (clubs) initial memberships per particle;
//! 4. per iteration: velocity draws per particle then dimension — two
//!    uniforms per dimension, or three with randomized inertia — followed
//!    by the membership-rule draws in particle order.

mod clubs;

pub use clubs::{ClubParams, ClubRegistry, MembershipAction, MembershipChange};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::harness::{AlgoTag, RunRecord, TraceRecorder};
use crate::objective::{clamp_lower, sample_uniform, Objective, Point, SearchSpace, DIM};

/// Social network shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Every particle sees the whole swarm.
    Global,
    /// Every particle sees itself and its two ring neighbors.
    Ring,
    /// Neighborhoods follow the dynamic club registry.
    Clubs,
}

/// How initial velocities are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityInit {
    /// Uniform in +/- (fraction * dimension range); small fractions avoid
    /// immediate bound violations.
    Symmetric(f64),
    /// Uniform over the position initialization range itself, component by
    /// component. Far more violent: the swarm is launched across and above
    /// the box before settling.
    PositionRange,
}

/// Swarm update parameters.
///
/// The clubs defaults double the inertia weight and multiply it by a fresh
/// uniform random number per dimension, so its expected value matches the
/// static topologies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoConfig {
    pub swarm_size: usize,
    /// Inertia weight w.
    pub inertia: f64,
    /// Constriction coefficient chi applied to the whole update.
    pub constriction: f64,
    /// Personal learning rate.
    pub cognitive: f64,
    /// Social learning rate.
    pub social: f64,
    pub topology: Topology,
    /// Multiply the inertia term by a fresh uniform draw per dimension.
    pub randomized_inertia: bool,
    pub velocity_init: VelocityInit,
}

impl PsoConfig {
    pub fn global() -> Self {
        Self {
            swarm_size: 20,
            inertia: 0.729,
            constriction: 1.0,
            cognitive: 1.494,
            social: 1.494,
            topology: Topology::Global,
            randomized_inertia: false,
            velocity_init: VelocityInit::Symmetric(0.1),
        }
    }

    pub fn ring() -> Self {
        Self {
            topology: Topology::Ring,
            ..Self::global()
        }
    }

    pub fn clubs() -> Self {
        Self {
            inertia: 1.458,
            topology: Topology::Clubs,
            randomized_inertia: true,
            ..Self::global()
        }
    }
}

/// One swarm member.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Point,
    pub velocity: Point,
    pub best_position: Point,
    pub best_fitness: f64,
    pub index: usize,
}

/// One velocity component of the standard update:
/// `chi * (w*v + c1*r1*(p - x) + c2*r2*(g - x))`.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn standard_velocity(
    inertia: f64,
    constriction: f64,
    cognitive: f64,
    social: f64,
    velocity: f64,
    to_pbest: f64,
    to_nbest: f64,
    r1: f64,
    r2: f64,
) -> f64 {
    constriction * (inertia * velocity + cognitive * r1 * to_pbest + social * r2 * to_nbest)
}

/// One velocity component of the randomized-inertia (clubs) update:
/// `chi * (w*r1*v + c1*r2*(p - x) + c2*r3*(g - x))`.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn clubs_velocity(
    inertia: f64,
    constriction: f64,
    cognitive: f64,
    social: f64,
    velocity: f64,
    to_pbest: f64,
    to_nbest: f64,
    r1: f64,
    r2: f64,
    r3: f64,
) -> f64 {
    constriction * (inertia * r1 * velocity + cognitive * r2 * to_pbest + social * r3 * to_nbest)
}

/// A particle swarm mid-run. Exposed so tests and instrumentation can
/// drive single iterations and inspect the club registry.
pub struct Swarm {
    pub config: PsoConfig,
    pub particles: Vec<Particle>,
    space: SearchSpace,
    registry: Option<ClubRegistry>,
    /// Completed evaluate-update iterations.
    pub iterations: u64,
}

impl Swarm {
    /// Random positions and velocities in the initialization ranges; clubs
    /// topology also draws the initial memberships.
    pub fn new<R: Rng>(
        space: &SearchSpace,
        config: PsoConfig,
        club_params: Option<ClubParams>,
        rng: &mut R,
    ) -> Self {
        assert!(config.swarm_size >= 2, "swarm needs at least two particles");
        assert!(space.validate(), "invalid search space");
        let n = config.swarm_size;

        let positions: Vec<Point> = (0..n).map(|_| sample_uniform(space, rng)).collect();
        let velocities: Vec<Point> = (0..n)
            .map(|_| match config.velocity_init {
                VelocityInit::Symmetric(fraction) => {
                    let mut v = [0.0; DIM];
                    for (d, vd) in v.iter_mut().enumerate() {
                        let half = fraction * space.width(d);
                        *vd = rng.gen_range(-half..half);
                    }
                    v
                }
                VelocityInit::PositionRange => sample_uniform(space, rng),
            })
            .collect();

        let registry = match config.topology {
            Topology::Clubs => Some(ClubRegistry::new(
                club_params.unwrap_or_default(),
                n,
                rng,
            )),
            _ => None,
        };

        let particles = positions
            .into_iter()
            .zip(velocities)
            .enumerate()
            .map(|(index, (position, velocity))| Particle {
                position,
                velocity,
                best_position: position,
                best_fitness: f64::INFINITY,
                index,
            })
            .collect();

        Swarm {
            config,
            particles,
            space: space.clone(),
            registry,
            iterations: 0,
        }
    }

    pub fn registry(&self) -> Option<&ClubRegistry> {
        self.registry.as_ref()
    }

    /// Particle indices visible to particle `i` under the current topology.
    pub fn neighborhood_indices(&self, i: usize) -> Vec<usize> {
        let n = self.particles.len();
        match self.config.topology {
            Topology::Global => (0..n).collect(),
            Topology::Ring => {
                let mut ids = vec![(i + n - 1) % n, i, (i + 1) % n];
                ids.sort_unstable();
                ids.dedup();
                ids
            }
            Topology::Clubs => self.registry.as_ref().unwrap().neighborhood(i),
        }
    }

    /// Best personal-best within particle `i`'s neighborhood; ties break
    /// toward the lowest particle index.
    pub fn neighborhood_best(&self, i: usize) -> (usize, Point) {
        let mut owner = None;
        for j in self.neighborhood_indices(i) {
            let fit = self.particles[j].best_fitness;
            match owner {
                None => owner = Some(j),
                Some(o) if fit < self.particles[o].best_fitness => owner = Some(j),
                _ => {}
            }
        }
        let o = owner.expect("neighborhood contains the particle itself");
        (o, self.particles[o].best_position)
    }

    /// Swarm-wide best personal best; ties break toward the lowest index.
    pub fn global_best(&self) -> (usize, f64, Point) {
        let mut o = 0;
        for j in 1..self.particles.len() {
            if self.particles[j].best_fitness < self.particles[o].best_fitness {
                o = j;
            }
        }
        let p = &self.particles[o];
        (o, p.best_fitness, p.best_position)
    }

    /// Evaluates every particle's current position in index order, updating
    /// personal bests and the trace. On budget refusal the already-charged
    /// evaluations stand and `false` is returned.
    pub fn evaluate_all<O: Objective>(&mut self, objective: &mut O, trace: &mut TraceRecorder) -> bool {
        for p in &mut self.particles {
            match objective.evaluate(&p.position) {
                Ok(fit) => {
                    trace.observe(fit.eval_index, fit.error, &p.position);
                    if fit.error < p.best_fitness {
                        p.best_fitness = fit.error;
                        p.best_position = p.position;
                    }
                }
                Err(_) => return false,
            }
        }
        true
    }

    /// Applies the velocity and position updates to every particle.
    /// Positions are pinned at the search-space lower bounds; velocities
    /// are unrestricted.
    pub fn move_particles<R: Rng>(&mut self, rng: &mut R) {
        let c = self.config;
        for i in 0..self.particles.len() {
            let (_, nbest) = self.neighborhood_best(i);
            let p = &mut self.particles[i];
            for d in 0..DIM {
                let to_pbest = p.best_position[d] - p.position[d];
                let to_nbest = nbest[d] - p.position[d];
                p.velocity[d] = if c.randomized_inertia {
                    let r1: f64 = rng.gen();
                    let r2: f64 = rng.gen();
                    let r3: f64 = rng.gen();
                    clubs_velocity(
                        c.inertia,
                        c.constriction,
                        c.cognitive,
                        c.social,
                        p.velocity[d],
                        to_pbest,
                        to_nbest,
                        r1,
                        r2,
                        r3,
                    )
                } else {
                    let r1: f64 = rng.gen();
                    let r2: f64 = rng.gen();
                    standard_velocity(
                        c.inertia,
                        c.constriction,
                        c.cognitive,
                        c.social,
                        p.velocity[d],
                        to_pbest,
                        to_nbest,
                        r1,
                        r2,
                    )
                };
                p.position[d] += p.velocity[d];
            }
            p.position = clamp_lower(p.position, &self.space);
        }
    }

    /// Runs the membership rules (clubs topology only). Extremes are judged
    /// on personal-best fitness, consistent with the neighborhood best used
    /// in the velocity update; ties go to the lowest index. `iteration` is
    /// the 1-based iteration index used for the retention check.
    pub fn update_clubs<R: Rng>(&mut self, iteration: u64, rng: &mut R) -> Vec<MembershipChange> {
        let Some(registry) = self.registry.as_mut() else {
            return Vec::new();
        };
        let n = self.particles.len();
        let mut is_best = vec![false; n];
        let mut is_worst = vec![false; n];
        for j in 0..n {
            let hood = registry.neighborhood(j);
            let mut best = hood[0];
            let mut worst = hood[0];
            for &m in &hood[1..] {
                if self.particles[m].best_fitness < self.particles[best].best_fitness {
                    best = m;
                }
                if self.particles[m].best_fitness > self.particles[worst].best_fitness {
                    worst = m;
                }
            }
            is_best[j] = best == j;
            is_worst[j] = worst == j;
        }
        registry.update(&is_best, &is_worst, iteration, rng)
    }
}

/// Tag string used in file names and reports.
fn tag_for(topology: Topology) -> AlgoTag {
    match topology {
        Topology::Global => AlgoTag::PsoG,
        Topology::Ring => AlgoTag::PsoL,
        Topology::Clubs => AlgoTag::Cpso,
    }
}

/// Runs a PSO of the configured topology until the budget refuses.
pub fn pso_run<O: Objective>(
    space: &SearchSpace,
    objective: &mut O,
    config: &PsoConfig,
    club_params: Option<ClubParams>,
    seed: u64,
) -> RunRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut swarm = Swarm::new(space, *config, club_params, &mut rng);
    let mut trace = TraceRecorder::new();
    let mut best_particle = Vec::new();

    loop {
        if !swarm.evaluate_all(objective, &mut trace) {
            break;
        }
        swarm.iterations += 1;
        best_particle.push(swarm.global_best().0 as u32);
        swarm.move_particles(&mut rng);
        if swarm.config.topology == Topology::Clubs {
            swarm.update_clubs(swarm.iterations, &mut rng);
        }
    }

    trace.into_record(tag_for(config.topology), seed, best_particle, objective.budget())
}
