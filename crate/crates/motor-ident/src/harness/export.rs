//! CSV persistence for experiment outputs and the report recomputation
//! path. All floats are written in Rust's shortest round-trip form, so
//! statistics recomputed from the files equal the in-memory values exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::harness::{
    io_err, summarize, AlgoTag, ExperimentConfig, HarnessError, RunRecord, SummaryStats,
};

fn write_file(path: &Path, content: &str) -> Result<(), HarnessError> {
    fs::write(path, content).map_err(|e| io_err(path, e))
}

fn convergence_name(algo: AlgoTag, run: u32) -> String {
    format!("convergence_{algo}_{run}.csv")
}

fn best_particle_name(algo: AlgoTag, run: u32) -> String {
    format!("best_particle_{algo}_{run}.csv")
}

/// Writes the per-run and summary CSV files into `dir`.
pub fn write_outputs(
    dir: &Path,
    records: &[RunRecord],
    stats: &[SummaryStats],
) -> Result<(), HarnessError> {
    for r in records {
        let mut out = String::from("evals,best_fitness\n");
        for (evals, fitness) in &r.convergence {
            let _ = writeln!(out, "{evals},{fitness}");
        }
        write_file(&dir.join(convergence_name(r.algo, r.run)), &out)?;

        if !r.best_particle.is_empty() {
            let mut out = String::from("iteration,particle_index\n");
            for (iteration, index) in r.best_particle.iter().enumerate() {
                let _ = writeln!(out, "{},{index}", iteration + 1);
            }
            write_file(&dir.join(best_particle_name(r.algo, r.run)), &out)?;
        }
    }

    let mut finals = String::from("algo,run,seed,fitness,Rs,Rr,Lleak,Lm,J,wall_s\n");
    for r in records {
        let t = r.final_theta;
        let _ = writeln!(
            finals,
            "{},{},{},{},{},{},{},{},{},{}",
            r.algo, r.run, r.seed, r.final_fitness, t[0], t[1], t[2], t[3], t[4], r.wall_seconds
        );
    }
    write_file(&dir.join("finals.csv"), &finals)?;

    write_file(&dir.join("summary.csv"), &render_summary_csv(stats))?;
    write_file(&dir.join("deviation.csv"), &render_deviation_csv(stats))?;
    write_file(&dir.join("boxplot.csv"), &render_boxplot_csv(stats))?;
    Ok(())
}

fn render_summary_csv(stats: &[SummaryStats]) -> String {
    let mut out = String::from("algo,average,std_dev,min,max,median,evals_to_5pct\n");
    for s in stats {
        let speed = s
            .evals_to_5pct_median
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{speed}",
            s.algo, s.average, s.std_dev, s.min, s.max, s.median
        );
    }
    out
}

fn render_deviation_csv(stats: &[SummaryStats]) -> String {
    let mut out = String::from("algo,Rs,Rr,Lleak,Lm,J\n");
    for s in stats {
        let d = s.deviation;
        let _ = writeln!(out, "{},{},{},{},{},{}", s.algo, d[0], d[1], d[2], d[3], d[4]);
    }
    out
}

fn render_boxplot_csv(stats: &[SummaryStats]) -> String {
    let mut out = String::from("algo,lower_whisker,q1,median,q3,upper_whisker,outliers\n");
    for s in stats {
        let b = &s.boxplot;
        let outliers = b
            .outliers
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{outliers}",
            s.algo, b.lower_whisker, b.q1, b.median, b.q3, b.upper_whisker
        );
    }
    out
}

/// One parsed row of `finals.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalRow {
    pub algo: AlgoTag,
    pub run: u32,
    pub seed: u64,
    pub fitness: f64,
    pub theta: [f64; 5],
    pub wall_seconds: f64,
}

pub fn read_finals(path: &Path) -> Result<Vec<FinalRow>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("algo,run,seed,fitness,Rs,Rr,Lleak,Lm,J,wall_s") => {}
        other => {
            return Err(HarnessError::Data(format!(
                "{}: unexpected header {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(HarnessError::Data(format!(
                "{}: row {} has {} fields",
                path.display(),
                n + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| {
            HarnessError::Data(format!("{}: row {}: bad {what}", path.display(), n + 2))
        };
        let algo = AlgoTag::parse(fields[0]).ok_or_else(|| bad("algo"))?;
        let num =
            |idx: usize, what: &str| fields[idx].parse::<f64>().map_err(|_| bad(what));
        rows.push(FinalRow {
            algo,
            run: fields[1].parse().map_err(|_| bad("run"))?,
            seed: fields[2].parse().map_err(|_| bad("seed"))?,
            fitness: num(3, "fitness")?,
            theta: [
                num(4, "Rs")?,
                num(5, "Rr")?,
                num(6, "Lleak")?,
                num(7, "Lm")?,
                num(8, "J")?,
            ],
            wall_seconds: num(9, "wall_s")?,
        });
    }
    Ok(rows)
}

fn read_convergence(dir: &Path, algo: AlgoTag, run: u32) -> Result<Vec<(u64, f64)>, HarnessError> {
    let path = dir.join(convergence_name(algo, run));
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("evals,best_fitness") => {}
        other => {
            return Err(HarnessError::Data(format!(
                "{}: unexpected header {other:?}",
                path.display()
            )))
        }
    }
    let mut points = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (e, f) = line.split_once(',').ok_or_else(|| {
            HarnessError::Data(format!("{}: malformed row {line:?}", path.display()))
        })?;
        let evals = e
            .parse::<u64>()
            .map_err(|_| HarnessError::Data(format!("{}: bad evals {e:?}", path.display())))?;
        let fitness = f
            .parse::<f64>()
            .map_err(|_| HarnessError::Data(format!("{}: bad fitness {f:?}", path.display())))?;
        points.push((evals, fitness));
    }
    Ok(points)
}

/// Rebuilds run records from the CSV files, recomputes the statistics, and
/// rewrites the derived tables. Returns the recomputed statistics.
pub fn report(dir: &Path) -> Result<(Vec<SummaryStats>, ExperimentConfig), HarnessError> {
    let config_path = dir.join("config_used.cfg");
    let config_text = fs::read_to_string(&config_path).map_err(|e| io_err(&config_path, e))?;
    let config = ExperimentConfig::from_config_str(&config_text).map_err(HarnessError::Config)?;

    let finals = read_finals(&dir.join("finals.csv"))?;
    let mut records = Vec::with_capacity(finals.len());
    for row in finals {
        let convergence = read_convergence(dir, row.algo, row.run)?;
        let evals_consumed = convergence.last().map(|&(e, _)| e).unwrap_or(0);
        records.push(RunRecord {
            algo: row.algo,
            run: row.run,
            seed: row.seed,
            convergence,
            best_particle: Vec::new(),
            final_theta: row.theta,
            final_fitness: row.fitness,
            evals_consumed,
            wall_seconds: row.wall_seconds,
        });
    }

    let stats = summarize(&records, &config.true_params.to_array());
    write_file(&dir.join("summary.csv"), &render_summary_csv(&stats))?;
    write_file(&dir.join("deviation.csv"), &render_deviation_csv(&stats))?;
    write_file(&dir.join("boxplot.csv"), &render_boxplot_csv(&stats))?;
    Ok((stats, config))
}

/// Fixed-width text rendering of the summary and deviation tables.
pub fn render_tables(stats: &[SummaryStats]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>14}",
        "algo", "runs", "average", "std_dev", "min", "max", "median", "evals_to_5pct"
    );
    for s in stats {
        let speed = s
            .evals_to_5pct_median
            .map(|v| format!("{v:.0}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<6} {:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>14}",
            s.algo.to_string(),
            s.count,
            s.average,
            s.std_dev,
            s.min,
            s.max,
            s.median,
            speed
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<6} {:>10} {:>10} {:>10} {:>10} {:>10}   (average % deviation)",
        "algo", "Rs", "Rr", "Lleak", "Lm", "J"
    );
    for s in stats {
        let d = s.deviation;
        let _ = writeln!(
            out,
            "{:<6} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            s.algo.to_string(),
            d[0],
            d[1],
            d[2],
            d[3],
            d[4]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::TraceRecorder;
    use crate::objective::Budget;

    fn sample_record(algo: AlgoTag, run: u32, fitness: f64) -> RunRecord {
        let budget = Budget::new(100);
        for _ in 0..10 {
            budget.charge().unwrap();
        }
        let mut trace = TraceRecorder::new();
        trace.observe(1, fitness * 4.0, &[1.0; 5]);
        trace.observe(7, fitness, &[2.0, 3.0, 0.5, 1.5, 0.0004]);
        let mut r = trace.into_record(algo, 42 + run as u64, vec![0, 3, 3], &budget);
        r.run = run;
        r.wall_seconds = 0.25;
        r
    }

    #[test]
    fn finals_round_trip() {
        let dir = std::env::temp_dir().join(format!("mi_export_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let records = vec![
            sample_record(AlgoTag::Cpso, 0, 0.125),
            sample_record(AlgoTag::Cpso, 1, 0.5),
            sample_record(AlgoTag::Ls, 0, 9.25),
        ];
        let stats = summarize(&records, &[1.0; 5]);
        write_outputs(&dir, &records, &stats).unwrap();

        let rows = read_finals(&dir.join("finals.csv")).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].algo, AlgoTag::Cpso);
        assert_eq!(rows[0].fitness, 0.125);
        assert_eq!(rows[0].theta, [2.0, 3.0, 0.5, 1.5, 0.0004]);
        assert_eq!(rows[2].algo, AlgoTag::Ls);

        let conv = read_convergence(&dir, AlgoTag::Cpso, 0).unwrap();
        assert_eq!(conv, vec![(1, 0.5), (7, 0.125), (10, 0.125)]);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn report_reproduces_summary_exactly() {
        let dir = std::env::temp_dir().join(format!("mi_report_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let records = vec![
            sample_record(AlgoTag::Ga, 0, 1.0),
            sample_record(AlgoTag::Ga, 1, 2.0),
            sample_record(AlgoTag::Ga, 2, 3.0),
        ];
        let truth = ExperimentConfig::default().true_params.to_array();
        let stats = summarize(&records, &truth);
        write_outputs(&dir, &records, &stats).unwrap();
        fs::write(
            dir.join("config_used.cfg"),
            ExperimentConfig::default().to_config_string(),
        )
        .unwrap();

        let (recomputed, _) = report(&dir).unwrap();
        assert_eq!(recomputed, stats);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rendered_tables_contain_all_algos() {
        let records = vec![
            sample_record(AlgoTag::Cpso, 0, 0.1),
            sample_record(AlgoTag::Ga, 0, 0.3),
        ];
        let stats = summarize(&records, &[1.0; 5]);
        let text = render_tables(&stats);
        assert!(text.contains("cpso"));
        assert!(text.contains("ga"));
    }
}
