//! Experiment configuration and its flat `key = value` file format.
//!
//! Every field has a default, so an empty file is a valid configuration.
//! Lines starting with `#` are comments; unknown keys are rejected to catch
//! typos. `to_config_string` emits every key, and parsing that output
//! reproduces the configuration exactly.

use crate::ga::GaConfig;
use crate::harness::AlgoTag;
use crate::line_search::LsConfig;
use crate::motor::{MotorParams, SupplyProfile};
use crate::objective::SearchSpace;
use crate::ode::IntegratorConfig;
use crate::pso::{ClubParams, PsoConfig, Topology, VelocityInit};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Parameters that generate the synthetic reference waveform.
    pub true_params: MotorParams,
    pub supply: SupplyProfile,
    /// Tolerances used for candidate evaluations.
    pub integrator: IntegratorConfig,
    /// Tighter tolerances for the reference waveform, so the model cannot
    /// fit the "measurement" to exactly zero error.
    pub reference_rtol: f64,
    pub reference_atol: f64,
    /// Generate the reference at the candidate tolerances instead; the
    /// self-consistency check needs this.
    pub equal_tolerances: bool,
    /// Additive Gaussian current noise on the reference (A); 0 disables.
    pub noise_sigma: f64,
    pub space: SearchSpace,
    pub algos: Vec<AlgoTag>,
    /// PSO parameters for the static topologies; the clubs variant swaps in
    /// `clubs_inertia` and randomized inertia.
    pub pso: PsoConfig,
    pub clubs_inertia: f64,
    pub club_params: ClubParams,
    pub ga: GaConfig,
    pub ls: LsConfig,
    pub budget: u64,
    pub runs: u32,
    pub base_seed: u64,
    /// Sequential execution with zeroed wall times for byte-stable outputs.
    pub deterministic: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            true_params: MotorParams::NOMINAL,
            supply: SupplyProfile::default(),
            integrator: IntegratorConfig::default(),
            reference_rtol: 1e-8,
            reference_atol: 1e-10,
            equal_tolerances: false,
            noise_sigma: 0.0,
            space: SearchSpace::motor(),
            algos: AlgoTag::ALL.to_vec(),
            pso: PsoConfig::global(),
            clubs_inertia: 1.458,
            club_params: ClubParams::default(),
            ga: GaConfig::default(),
            ls: LsConfig::default(),
            budget: 100_000,
            runs: 10,
            base_seed: 42,
            deterministic: false,
        }
    }
}

impl ExperimentConfig {
    /// A scaled-down benchmark: half-second horizon, 20,000 evaluations,
    /// 5 runs, and a measurement-like reference (additive current noise,
    /// candidate simulations at a coarse tolerance against a fine-tolerance
    /// reference). Small enough for a desk run while keeping the fitness
    /// floor away from zero.
    pub fn scaled_benchmark() -> Self {
        let mut config = Self::default();
        config.supply.horizon = 0.5;
        config.supply.ramp = 0.5;
        config.integrator.rtol = 1e-3;
        config.integrator.atol = 1e-5;
        config.noise_sigma = 0.05;
        config.budget = 20_000;
        config.runs = 5;
        config
    }

    /// The swarm configuration for one of the PSO variants.
    pub fn pso_config_for(&self, algo: AlgoTag) -> PsoConfig {
        match algo {
            AlgoTag::PsoG => PsoConfig {
                topology: Topology::Global,
                ..self.pso
            },
            AlgoTag::PsoL => PsoConfig {
                topology: Topology::Ring,
                ..self.pso
            },
            AlgoTag::Cpso => PsoConfig {
                topology: Topology::Clubs,
                inertia: self.clubs_inertia,
                randomized_inertia: true,
                ..self.pso
            },
            _ => panic!("{algo} is not a PSO variant"),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.true_params.is_strictly_positive() {
            return Err("true parameters must be strictly positive".into());
        }
        self.supply.validate().map_err(|e| e.to_string())?;
        if !self.space.validate() {
            return Err("search space bounds must satisfy lower < upper".into());
        }
        if self.runs < 1 {
            return Err("runs must be at least 1".into());
        }
        if self.algos.is_empty() {
            return Err("no optimizers selected".into());
        }
        let population = self
            .algos
            .iter()
            .map(|a| match a {
                AlgoTag::Ga => self.ga.population_size as u64,
                AlgoTag::Ls => 1 + 2 * 5,
                _ => self.pso.swarm_size as u64,
            })
            .max()
            .unwrap_or(1);
        if self.budget < population {
            return Err(format!(
                "budget {} is below the largest population size {population}",
                self.budget
            ));
        }
        self.club_params.validate()?;
        if self.pso.swarm_size < 2 {
            return Err("swarm size must be at least 2".into());
        }
        Ok(())
    }

    /// Emits the full key set in canonical order.
    pub fn to_config_string(&self) -> String {
        let algos = self
            .algos
            .iter()
            .map(|a| a.as_str())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "# Motor identification experiment configuration.\n\
             # True motor parameters (ohm, ohm, H, H, kg m^2).\n\
             true.rs = {}\ntrue.rr = {}\ntrue.lleak = {}\ntrue.lm = {}\ntrue.j = {}\n\
             # Supply: line-neutral voltage amplitude (V), electrical frequency\n\
             # (rad/s), V/F ramp duration (s), horizon (s), pole pairs, sample\n\
             # period (s).\n\
             supply.v_rated = {}\nsupply.omega_rated = {}\nsupply.ramp = {}\n\
             supply.horizon = {}\nsupply.pole_pairs = {}\nsupply.sample_period = {}\n\
             # Candidate integrator tolerances.\n\
             integrator.rtol = {}\nintegrator.atol = {}\nintegrator.max_step = {}\n\
             integrator.initial_step = {}\n\
             # Reference waveform generation.\n\
             reference.rtol = {}\nreference.atol = {}\nreference.equal_tolerances = {}\n\
             reference.noise_sigma = {}\n\
             # Search space initialization bounds.\n\
             space.rs.lower = {}\nspace.rs.upper = {}\nspace.rr.lower = {}\n\
             space.rr.upper = {}\nspace.lleak.lower = {}\nspace.lleak.upper = {}\n\
             space.lm.lower = {}\nspace.lm.upper = {}\nspace.j.lower = {}\n\
             space.j.upper = {}\n\
             # Protocol.\n\
             algos = {}\nbudget = {}\nruns = {}\nseed = {}\ndeterministic = {}\n\
             # PSO (static topologies use pso.inertia; clubs uses clubs.inertia).\n\
             # velocity_init: `symmetric:<fraction>` or `position_range`.\n\
             pso.swarm_size = {}\npso.inertia = {}\npso.constriction = {}\n\
             pso.cognitive = {}\npso.social = {}\npso.velocity_init = {}\n\
             clubs.inertia = {}\nclubs.count = {}\nclubs.min = {}\nclubs.default = {}\n\
             clubs.max = {}\nclubs.retention = {}\n\
             # Real-coded GA.\n\
             ga.population = {}\nga.crossover_rate = {}\nga.crossover_index = {}\n\
             ga.mutation_rate = {}\nga.mutation_index = {}\nga.tournament = {}\n\
             # Line search.\n\
             ls.step_fraction = {}\nls.restart = {}\n",
            self.true_params.rs,
            self.true_params.rr,
            self.true_params.lleak,
            self.true_params.lm,
            self.true_params.j,
            self.supply.v_rated,
            self.supply.omega_rated,
            self.supply.ramp,
            self.supply.horizon,
            self.supply.pole_pairs,
            self.supply.sample_period,
            self.integrator.rtol,
            self.integrator.atol,
            self.integrator.max_step,
            self.integrator.initial_step,
            self.reference_rtol,
            self.reference_atol,
            self.equal_tolerances,
            self.noise_sigma,
            self.space.lower[0],
            self.space.upper[0],
            self.space.lower[1],
            self.space.upper[1],
            self.space.lower[2],
            self.space.upper[2],
            self.space.lower[3],
            self.space.upper[3],
            self.space.lower[4],
            self.space.upper[4],
            algos,
            self.budget,
            self.runs,
            self.base_seed,
            self.deterministic,
            self.pso.swarm_size,
            self.pso.inertia,
            self.pso.constriction,
            self.pso.cognitive,
            self.pso.social,
            match self.pso.velocity_init {
                VelocityInit::Symmetric(fraction) => format!("symmetric:{fraction}"),
                VelocityInit::PositionRange => "position_range".into(),
            },
            self.clubs_inertia,
            self.club_params.club_count,
            self.club_params.min_membership,
            self.club_params.default_membership,
            self.club_params.max_membership,
            self.club_params.retention_ratio,
            self.ga.population_size,
            self.ga.crossover_rate,
            self.ga.crossover_index,
            self.ga.mutation_rate,
            self.ga.mutation_index,
            self.ga.tournament_size,
            self.ls.step_fraction,
            self.ls.restart_on_convergence,
        )
    }

    /// Parses the flat `key = value` format on top of the defaults.
    pub fn from_config_str(text: &str) -> Result<Self, String> {
        let mut config = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            config
                .apply(key, value)
                .map_err(|e| format!("line {}: key `{key}`: {e}", lineno + 1))?;
        }
        Ok(config)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num(value: &str) -> Result<f64, String> {
            value.parse::<f64>().map_err(|e| e.to_string())
        }
        fn int(value: &str) -> Result<u64, String> {
            value.parse::<u64>().map_err(|e| e.to_string())
        }
        fn flag(value: &str) -> Result<bool, String> {
            value.parse::<bool>().map_err(|e| e.to_string())
        }
        match key {
            "true.rs" => self.true_params.rs = num(value)?,
            "true.rr" => self.true_params.rr = num(value)?,
            "true.lleak" => self.true_params.lleak = num(value)?,
            "true.lm" => self.true_params.lm = num(value)?,
            "true.j" => self.true_params.j = num(value)?,
            "supply.v_rated" => self.supply.v_rated = num(value)?,
            "supply.omega_rated" => self.supply.omega_rated = num(value)?,
            "supply.ramp" => self.supply.ramp = num(value)?,
            "supply.horizon" => self.supply.horizon = num(value)?,
            "supply.pole_pairs" => self.supply.pole_pairs = int(value)? as u32,
            "supply.sample_period" => self.supply.sample_period = num(value)?,
            "integrator.rtol" => self.integrator.rtol = num(value)?,
            "integrator.atol" => self.integrator.atol = num(value)?,
            "integrator.max_step" => self.integrator.max_step = num(value)?,
            "integrator.initial_step" => self.integrator.initial_step = num(value)?,
            "reference.rtol" => self.reference_rtol = num(value)?,
            "reference.atol" => self.reference_atol = num(value)?,
            "reference.equal_tolerances" => self.equal_tolerances = flag(value)?,
            "reference.noise_sigma" => self.noise_sigma = num(value)?,
            "space.rs.lower" => self.space.lower[0] = num(value)?,
            "space.rs.upper" => self.space.upper[0] = num(value)?,
            "space.rr.lower" => self.space.lower[1] = num(value)?,
            "space.rr.upper" => self.space.upper[1] = num(value)?,
            "space.lleak.lower" => self.space.lower[2] = num(value)?,
            "space.lleak.upper" => self.space.upper[2] = num(value)?,
            "space.lm.lower" => self.space.lower[3] = num(value)?,
            "space.lm.upper" => self.space.upper[3] = num(value)?,
            "space.j.lower" => self.space.lower[4] = num(value)?,
            "space.j.upper" => self.space.upper[4] = num(value)?,
            "algos" => {
                if value == "all" {
                    self.algos = AlgoTag::ALL.to_vec();
                } else {
                    let mut algos = Vec::new();
                    for part in value.split(',') {
                        let part = part.trim();
                        algos.push(
                            AlgoTag::parse(part)
                                .ok_or_else(|| format!("unknown optimizer `{part}`"))?,
                        );
                    }
                    self.algos = algos;
                }
            }
            "budget" => self.budget = int(value)?,
            "runs" => self.runs = int(value)? as u32,
            "seed" => self.base_seed = int(value)?,
            "deterministic" => self.deterministic = flag(value)?,
            "pso.swarm_size" => self.pso.swarm_size = int(value)? as usize,
            "pso.inertia" => self.pso.inertia = num(value)?,
            "pso.constriction" => self.pso.constriction = num(value)?,
            "pso.cognitive" => self.pso.cognitive = num(value)?,
            "pso.social" => self.pso.social = num(value)?,
            "pso.velocity_init" => {
                self.pso.velocity_init = if value == "position_range" {
                    VelocityInit::PositionRange
                } else if let Some(fraction) = value.strip_prefix("symmetric:") {
                    VelocityInit::Symmetric(num(fraction)?)
                } else {
                    return Err(format!(
                        "expected `position_range` or `symmetric:<fraction>`, got `{value}`"
                    ));
                }
            }
            "clubs.inertia" => self.clubs_inertia = num(value)?,
            "clubs.count" => self.club_params.club_count = int(value)? as usize,
            "clubs.min" => self.club_params.min_membership = int(value)? as usize,
            "clubs.default" => self.club_params.default_membership = int(value)? as usize,
            "clubs.max" => self.club_params.max_membership = int(value)? as usize,
            "clubs.retention" => self.club_params.retention_ratio = int(value)?,
            "ga.population" => self.ga.population_size = int(value)? as usize,
            "ga.crossover_rate" => self.ga.crossover_rate = num(value)?,
            "ga.crossover_index" => self.ga.crossover_index = num(value)?,
            "ga.mutation_rate" => self.ga.mutation_rate = num(value)?,
            "ga.mutation_index" => self.ga.mutation_index = num(value)?,
            "ga.tournament" => self.ga.tournament_size = int(value)? as usize,
            "ls.step_fraction" => self.ls.step_fraction = num(value)?,
            "ls.restart" => self.ls.restart_on_convergence = flag(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default() {
        let config = ExperimentConfig::from_config_str("").unwrap();
        assert_eq!(config, ExperimentConfig::default());
        config.validate().unwrap();
    }

    #[test]
    fn config_round_trips_through_text() {
        let mut config = ExperimentConfig::default();
        config.budget = 12_345;
        config.runs = 3;
        config.base_seed = 99;
        config.supply.horizon = 0.5;
        config.noise_sigma = 0.01;
        config.algos = vec![AlgoTag::Cpso, AlgoTag::Ls];
        config.deterministic = true;
        let text = config.to_config_string();
        let back = ExperimentConfig::from_config_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let config = ExperimentConfig::from_config_str(
            "# comment\n\nbudget = 500\n  # indented comment\nruns=2\n",
        )
        .unwrap();
        assert_eq!(config.budget, 500);
        assert_eq!(config.runs, 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_config_str("bogus.key = 1\n").unwrap_err();
        assert!(err.contains("unknown key"), "{err}");
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(ExperimentConfig::from_config_str("budget 500\n").is_err());
        assert!(ExperimentConfig::from_config_str("budget = abc\n").is_err());
        assert!(ExperimentConfig::from_config_str("algos = cpso,unknown\n").is_err());
    }

    #[test]
    fn validation_rejects_small_budgets() {
        let mut config = ExperimentConfig::default();
        config.budget = 10; // below the GA population of 50
        assert!(config.validate().is_err());
    }

    #[test]
    fn pso_variants_derive_from_the_base() {
        let config = ExperimentConfig::default();
        let g = config.pso_config_for(AlgoTag::PsoG);
        assert_eq!(g.topology, Topology::Global);
        assert_eq!(g.inertia, 0.729);
        assert!(!g.randomized_inertia);
        let l = config.pso_config_for(AlgoTag::PsoL);
        assert_eq!(l.topology, Topology::Ring);
        let c = config.pso_config_for(AlgoTag::Cpso);
        assert_eq!(c.topology, Topology::Clubs);
        assert_eq!(c.inertia, 1.458);
        assert!(c.randomized_inertia);
    }
}
