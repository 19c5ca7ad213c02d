//! Experiment orchestration: reference-waveform generation, optimizer run
//! scheduling, summary statistics, and CSV persistence.

mod config;
mod export;

pub use config::ExperimentConfig;
pub use export::{read_finals, render_tables, report, write_outputs, FinalRow};

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ga::ga_run;
use crate::line_search::ls_run;
use crate::motor::{self, CurrentWaveform, MotorError};
use crate::objective::{Budget, MotorObjective, Point};
use crate::ode::IntegratorConfig;
use crate::pso::pso_run;

/// Optimizer identity, in the reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoTag {
    Cpso,
    PsoL,
    PsoG,
    Ga,
    Ls,
}

impl AlgoTag {
    pub const ALL: [AlgoTag; 5] = [
        AlgoTag::Cpso,
        AlgoTag::PsoL,
        AlgoTag::PsoG,
        AlgoTag::Ga,
        AlgoTag::Ls,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AlgoTag::Cpso => "cpso",
            AlgoTag::PsoL => "psol",
            AlgoTag::PsoG => "psog",
            AlgoTag::Ga => "ga",
            AlgoTag::Ls => "ls",
        }
    }

    pub fn parse(s: &str) -> Option<AlgoTag> {
        match s {
            "cpso" => Some(AlgoTag::Cpso),
            "psol" => Some(AlgoTag::PsoL),
            "psog" => Some(AlgoTag::PsoG),
            "ga" => Some(AlgoTag::Ga),
            "ls" => Some(AlgoTag::Ls),
            _ => None,
        }
    }
}

impl std::fmt::Display for AlgoTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One optimizer run: seed, traces, and the final estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algo: AlgoTag,
    pub run: u32,
    pub seed: u64,
    /// Change points of the best-so-far fitness: (evaluation count, fitness).
    pub convergence: Vec<(u64, f64)>,
    /// Index of the best particle per iteration (PSO runs only).
    pub best_particle: Vec<u32>,
    pub final_theta: Point,
    pub final_fitness: f64,
    pub evals_consumed: u64,
    pub wall_seconds: f64,
}

impl RunRecord {
    /// A run is usable for statistics when it evaluated anything at all and
    /// ended on a finite fitness.
    pub fn success(&self) -> bool {
        !self.convergence.is_empty() && self.final_fitness.is_finite()
    }

    /// Extends the trace flat to `evals`; used when a run leaves budget
    /// unconsumed.
    pub fn pad_trace_to(&mut self, evals: u64) {
        if let Some(&(last, fitness)) = self.convergence.last() {
            if last < evals {
                self.convergence.push((evals, fitness));
            }
        }
    }

    /// First evaluation count at which best-so-far reached 5% of the
    /// initial fitness, if it ever did.
    pub fn evals_to_5pct(&self) -> Option<u64> {
        let initial = self.convergence.first()?.1;
        let threshold = 0.05 * initial;
        self.convergence
            .iter()
            .find(|(_, f)| *f <= threshold)
            .map(|(e, _)| *e)
    }
}

/// Accumulates best-so-far change points while an optimizer runs.
#[derive(Debug, Default)]
pub struct TraceRecorder {
    points: Vec<(u64, f64)>,
    best_fitness: f64,
    best_theta: Point,
}

impl TraceRecorder {
    pub fn new() -> Self {
        Self {
            points: Vec::new(),
            best_fitness: f64::INFINITY,
            best_theta: [0.0; 5],
        }
    }

    pub fn observe(&mut self, eval_index: u64, fitness: f64, theta: &Point) {
        if fitness < self.best_fitness {
            self.best_fitness = fitness;
            self.best_theta = *theta;
            self.points.push((eval_index, fitness));
        }
    }

    pub fn best(&self) -> (f64, &Point) {
        (self.best_fitness, &self.best_theta)
    }

    pub fn into_record(
        self,
        algo: AlgoTag,
        seed: u64,
        best_particle: Vec<u32>,
        budget: &Budget,
    ) -> RunRecord {
        let mut record = RunRecord {
            algo,
            run: 0,
            seed,
            convergence: self.points,
            best_particle,
            final_theta: self.best_theta,
            final_fitness: self.best_fitness,
            evals_consumed: budget.consumed(),
            wall_seconds: 0.0,
        };
        record.pad_trace_to(record.evals_consumed);
        record
    }
}

/// Box-and-whisker summary of the final fitness sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxplotStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

/// Per-optimizer statistics over the successful runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub algo: AlgoTag,
    pub count: usize,
    pub average: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single run.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    /// Set when only one run contributed and std_dev is meaningless.
    pub degenerate: bool,
    /// Average percentage deviation of the estimate per parameter.
    pub deviation: [f64; 5],
    /// Median evaluations to reach 5% of the initial fitness, over the runs
    /// that reached it at all.
    pub evals_to_5pct_median: Option<f64>,
    pub boxplot: BoxplotStats,
}

/// Absolute percentage deviation of an estimate from the true parameters.
pub fn percent_deviation(theta_hat: &Point, theta_true: &Point) -> [f64; 5] {
    let mut out = [0.0; 5];
    for d in 0..5 {
        assert!(theta_true[d] > 0.0, "true parameters must be positive");
        out[d] = 100.0 * (theta_hat[d] - theta_true[d]).abs() / theta_true[d];
    }
    out
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Linear-interpolation quantile of a sorted sample.
fn quantile_of_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = p * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn boxplot_of_sorted(sorted: &[f64]) -> BoxplotStats {
    let q1 = quantile_of_sorted(sorted, 0.25);
    let q3 = quantile_of_sorted(sorted, 0.75);
    let iqr = q3 - q1;
    let low_fence = q1 - 1.5 * iqr;
    let high_fence = q3 + 1.5 * iqr;
    let inside: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|v| *v >= low_fence && *v <= high_fence)
        .collect();
    BoxplotStats {
        q1,
        median: median_of_sorted(sorted),
        q3,
        lower_whisker: inside.first().copied().unwrap_or(q1),
        upper_whisker: inside.last().copied().unwrap_or(q3),
        outliers: sorted
            .iter()
            .copied()
            .filter(|v| *v < low_fence || *v > high_fence)
            .collect(),
    }
}

/// Summarizes the successful runs of one optimizer. Returns `None` when no
/// run of that optimizer succeeded.
pub fn summarize_algo(
    algo: AlgoTag,
    records: &[RunRecord],
    theta_true: &Point,
) -> Option<SummaryStats> {
    let runs: Vec<&RunRecord> = records
        .iter()
        .filter(|r| r.algo == algo && r.success())
        .collect();
    if runs.is_empty() {
        return None;
    }
    let mut finals: Vec<f64> = runs.iter().map(|r| r.final_fitness).collect();
    finals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = finals.len();
    let average = finals.iter().sum::<f64>() / n as f64;
    let std_dev = if n > 1 {
        (finals.iter().map(|v| (v - average).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };

    let mut deviation = [0.0; 5];
    for r in &runs {
        let dev = percent_deviation(&r.final_theta, theta_true);
        for d in 0..5 {
            deviation[d] += dev[d] / n as f64;
        }
    }

    let mut reached: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.evals_to_5pct())
        .map(|e| e as f64)
        .collect();
    reached.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let evals_to_5pct_median = if reached.is_empty() {
        None
    } else {
        Some(median_of_sorted(&reached))
    };

    Some(SummaryStats {
        algo,
        count: n,
        average,
        std_dev,
        min: finals[0],
        max: finals[n - 1],
        median: median_of_sorted(&finals),
        degenerate: n == 1,
        deviation,
        evals_to_5pct_median,
        boxplot: boxplot_of_sorted(&finals),
    })
}

/// Stats for every optimizer present in `records`, in reporting order.
pub fn summarize(records: &[RunRecord], theta_true: &Point) -> Vec<SummaryStats> {
    AlgoTag::ALL
        .iter()
        .filter_map(|&algo| summarize_algo(algo, records, theta_true))
        .collect()
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("I/O failed for {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Motor(#[from] MotorError),
    #[error("missing or malformed data: {0}")]
    Data(String),
}

pub(crate) fn io_err(path: &Path, err: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        msg: err.to_string(),
    }
}

/// Generates the synthetic reference waveform: true parameters simulated at
/// the reference tolerances, plus optional additive Gaussian noise.
pub fn generate_reference(config: &ExperimentConfig) -> Result<CurrentWaveform, HarnessError> {
    let integrator = if config.equal_tolerances {
        config.integrator
    } else {
        IntegratorConfig {
            rtol: config.reference_rtol,
            atol: config.reference_atol,
            ..config.integrator
        }
    };
    let mut waveform = motor::simulate(&config.true_params, &config.supply, &integrator)?;
    if config.noise_sigma > 0.0 {
        // Noise stream is separated from the run streams.
        let mut rng = ChaCha8Rng::seed_from_u64(config.base_seed);
        rng.set_stream(1);
        let mut gauss = || {
            // Box-Muller transform.
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        for k in 0..waveform.len() {
            waveform.i1[k] += config.noise_sigma * gauss();
            waveform.i2[k] += config.noise_sigma * gauss();
            waveform.i3[k] += config.noise_sigma * gauss();
        }
    }
    Ok(waveform)
}

/// Executes one optimizer run against a shared reference waveform.
pub fn run_single(
    config: &ExperimentConfig,
    reference: &CurrentWaveform,
    algo: AlgoTag,
    run: u32,
) -> RunRecord {
    let seed = config.base_seed + run as u64;
    let mut objective = MotorObjective::new(
        reference,
        config.supply,
        config.integrator,
        Budget::new(config.budget),
    );
    let started = Instant::now();
    let mut record = match algo {
        AlgoTag::Cpso | AlgoTag::PsoL | AlgoTag::PsoG => {
            let pso_config = config.pso_config_for(algo);
            let clubs = (algo == AlgoTag::Cpso).then_some(config.club_params);
            pso_run(&config.space, &mut objective, &pso_config, clubs, seed)
        }
        AlgoTag::Ga => ga_run(&config.space, &mut objective, &config.ga, seed),
        AlgoTag::Ls => ls_run(&config.space, &mut objective, &config.ls, seed),
    };
    record.wall_seconds = started.elapsed().as_secs_f64();
    record.run = run;
    record
}

/// Everything an experiment produces.
pub struct ExperimentOutput {
    pub reference: CurrentWaveform,
    pub records: Vec<RunRecord>,
    pub stats: Vec<SummaryStats>,
}

/// Runs `runs` independent runs of every selected optimizer, writes all
/// output files into `out_dir`, and returns the records and statistics.
///
/// Runs execute on a small worker pool unless `deterministic` is set, in
/// which case they run sequentially and wall times are zeroed so repeated
/// invocations produce byte-identical files.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<ExperimentOutput, HarnessError> {
    config.validate().map_err(HarnessError::Config)?;
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;

    let reference = generate_reference(config)?;
    // Fail on unwritable output before any optimizer runs.
    reference
        .write_csv(&out_dir.join("reference.csv"))
        .map_err(HarnessError::Motor)?;
    std::fs::write(out_dir.join("config_used.cfg"), config.to_config_string())
        .map_err(|e| io_err(out_dir, e))?;

    let jobs: Vec<(AlgoTag, u32)> = config
        .algos
        .iter()
        .flat_map(|&algo| (0..config.runs).map(move |run| (algo, run)))
        .collect();

    let mut records: Vec<RunRecord> = if config.deterministic || jobs.len() <= 1 {
        jobs.iter()
            .map(|&(algo, run)| run_single(config, &reference, algo, run))
            .collect()
    } else {
        let slots: Vec<Mutex<Option<RunRecord>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
        let cursor = AtomicUsize::new(0);
        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(jobs.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let k = cursor.fetch_add(1, Ordering::SeqCst);
                    if k >= jobs.len() {
                        break;
                    }
                    let (algo, run) = jobs[k];
                    let record = run_single(config, &reference, algo, run);
                    *slots[k].lock().unwrap() = Some(record);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| slot.into_inner().unwrap().expect("worker filled slot"))
            .collect()
    };

    if config.deterministic {
        for r in &mut records {
            r.wall_seconds = 0.0;
        }
    }
    for r in &records {
        if !r.success() {
            eprintln!(
                "warning: {} run {} (seed {}) failed; excluded from statistics",
                r.algo, r.run, r.seed
            );
        }
    }

    let stats = summarize(&records, &config.true_params.to_array());
    write_outputs(out_dir, &records, &stats)?;

    Ok(ExperimentOutput {
        reference,
        records,
        stats,
    })
}
