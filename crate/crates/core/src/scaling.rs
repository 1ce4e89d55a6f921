//! Solver dispatch, the scaling experiment (solve time against network
//! size) and exponential regression of its timings.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{root_lower_bound, solve_exact, SolveLimits};
use crate::generate::{generate, GenParams};
use crate::heuristic::{solve_heuristic, StepRule, DEFAULT_ITERATIONS, DEFAULT_ROUNDS};
use crate::model::{formulation_stats, Instance, Solution};

/// Header of the summary CSV written by [`BenchCsv`].
pub const BENCH_CSV_HEADER: &str = "bts,variables,constraints,density,avg_time_s,std_dev_s,avg_gap";

/// Per-instance time limit used by the scaling experiment in exact mode.
pub const DEFAULT_BENCH_TIME_LIMIT_S: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveMode {
    Exact,
    Greedy,
    Local,
    Lagrange,
}

impl FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolveMode::Exact),
            "greedy" => Ok(SolveMode::Greedy),
            "local" => Ok(SolveMode::Local),
            "lagrange" => Ok(SolveMode::Lagrange),
            other => Err(Error::Config(format!(
                "unknown solve mode {other:?} (expected exact, greedy, local or lagrange)"
            ))),
        }
    }
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMode::Exact => "exact",
            SolveMode::Greedy => "greedy",
            SolveMode::Local => "local",
            SolveMode::Lagrange => "lagrange",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub limits: SolveLimits,
    pub local_rounds: usize,
    pub lagrange_iterations: usize,
    pub step_rule: StepRule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            limits: SolveLimits::default(),
            local_rounds: DEFAULT_ROUNDS,
            lagrange_iterations: DEFAULT_ITERATIONS,
            step_rule: StepRule::default(),
        }
    }
}

/// Result of one solver run, whatever the mode.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub mode: SolveMode,
    pub solution: Solution,
    pub lower_bound: f64,
    pub optimal: bool,
    /// An exact search stopped on its time or node limit.
    pub limit_reached: bool,
    pub nodes_explored: u64,
    pub iterations: usize,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn gap(&self) -> f64 {
        let obj = self.solution.objective;
        if obj.abs() < f64::EPSILON {
            0.0
        } else {
            ((obj - self.lower_bound) / obj.abs()).max(0.0)
        }
    }
}

/// Runs the requested solver.
///
/// Greedy and local modes report the cheapest-link bound; lagrange mode runs
/// greedy plus local search and reports the Lagrangian bound.
pub fn solve(instance: &Instance, mode: SolveMode, options: &SolveOptions) -> Result<Outcome> {
    let started = Instant::now();
    match mode {
        SolveMode::Exact => {
            let r = solve_exact(instance, &options.limits)?;
            Ok(Outcome {
                mode,
                solution: r.solution,
                lower_bound: r.lower_bound,
                optimal: r.optimal,
                limit_reached: !r.optimal,
                nodes_explored: r.nodes_explored,
                iterations: 0,
                elapsed: r.elapsed,
            })
        }
        SolveMode::Greedy | SolveMode::Local | SolveMode::Lagrange => {
            let rounds = if mode == SolveMode::Greedy {
                0
            } else {
                options.local_rounds
            };
            let lagrange = (mode == SolveMode::Lagrange)
                .then_some((options.lagrange_iterations, options.step_rule));
            let r = solve_heuristic(instance, rounds, lagrange)?;
            let lower_bound = r
                .lower_bound
                .unwrap_or_else(|| root_lower_bound(instance))
                .min(r.solution.objective);
            let optimal = r.solution.objective - lower_bound <= crate::exact::TIE_TOLERANCE;
            Ok(Outcome {
                mode,
                solution: r.solution,
                lower_bound,
                optimal,
                limit_reached: false,
                nodes_explored: 0,
                iterations: r.iterations,
                elapsed: started.elapsed(),
            })
        }
    }
}

/// One row of the scaling table: averages over the repetitions of one size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub n_bts: usize,
    pub variables: usize,
    /// Assignment and capacity rows, `3 * n_bts` for generated instances.
    pub constraints: usize,
    pub density: f64,
    pub avg_time: f64,
    pub std_dev_time: f64,
    pub avg_gap: f64,
    /// Runs stopped by the time limit; their time counts as the limit.
    pub censored: usize,
    pub runs: usize,
}

/// One solved instance of the scaling experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRun {
    pub n_bts: usize,
    pub rep: usize,
    pub seed: u64,
    pub objective: f64,
    pub lower_bound: f64,
    pub elapsed_s: f64,
    pub censored: bool,
}

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub base_seed: u64,
    pub mode: SolveMode,
    pub options: SolveOptions,
    /// Solve the repetitions of one size concurrently.
    pub parallel: bool,
}

impl ScalingConfig {
    pub fn new(sizes: Vec<usize>, reps: usize, base_seed: u64, mode: SolveMode) -> Self {
        let mut options = SolveOptions::default();
        if mode == SolveMode::Exact {
            options.limits = SolveLimits::with_time_limit(DEFAULT_BENCH_TIME_LIMIT_S);
        }
        Self {
            sizes,
            reps,
            base_seed,
            mode,
            options,
            parallel: false,
        }
    }

    /// Seed of repetition `rep` at size `n_bts`.
    pub fn instance_seed(&self, n_bts: usize, rep: usize) -> u64 {
        self.base_seed
            .wrapping_add(1000 * n_bts as u64)
            .wrapping_add(rep as u64)
    }
}

/// Generates and solves `reps` instances per size, in size order.
///
/// `on_record` is called as soon as each size completes, so callers can
/// flush partial results. Runs that hit the time limit are kept as censored
/// observations.
pub fn run_scaling<F>(config: &ScalingConfig, mut on_record: F) -> Result<Vec<BenchRecord>>
where
    F: FnMut(&BenchRecord, &[InstanceRun]) -> Result<()>,
{
    if config.reps == 0 {
        return Err(Error::Config("at least one repetition is required".into()));
    }
    if config.sizes.is_empty() || config.sizes.contains(&0) {
        return Err(Error::Config(
            "sizes must be a non-empty list of positive counts".into(),
        ));
    }

    let mut records = Vec::with_capacity(config.sizes.len());
    for &n_bts in &config.sizes {
        let solve_one = |rep: usize| -> Result<InstanceRun> {
            let seed = config.instance_seed(n_bts, rep);
            let instance = generate(&GenParams::new(n_bts, seed))?;
            let started = Instant::now();
            let outcome = solve(&instance, config.mode, &config.options)?;
            let elapsed = started.elapsed();
            Ok(InstanceRun {
                n_bts,
                rep,
                seed,
                objective: outcome.solution.objective,
                lower_bound: outcome.lower_bound,
                elapsed_s: elapsed.as_secs_f64(),
                censored: outcome.limit_reached,
            })
        };
        let runs: Vec<InstanceRun> = if config.parallel {
            (0..config.reps)
                .into_par_iter()
                .map(solve_one)
                .collect::<Result<_>>()?
        } else {
            (0..config.reps).map(solve_one).collect::<Result<_>>()?
        };

        let stats = formulation_stats(&generate(&GenParams::new(
            n_bts,
            config.instance_seed(n_bts, 0),
        ))?);
        let limit = config.options.limits.time_limit.map(|t| t.as_secs_f64());
        let times: Vec<f64> = runs
            .iter()
            .map(|r| match (r.censored, limit) {
                (true, Some(l)) => l,
                _ => r.elapsed_s,
            })
            .collect();
        let gaps: Vec<f64> = runs
            .iter()
            .map(|r| {
                if r.objective.abs() < f64::EPSILON {
                    0.0
                } else {
                    ((r.objective - r.lower_bound) / r.objective.abs()).max(0.0)
                }
            })
            .collect();
        let (avg_time, std_dev_time) = mean_std(&times);
        let record = BenchRecord {
            n_bts,
            variables: stats.variables,
            constraints: stats.model_constraints,
            density: stats.density,
            avg_time,
            std_dev_time,
            avg_gap: mean_std(&gaps).0,
            censored: runs.iter().filter(|r| r.censored).count(),
            runs: runs.len(),
        };
        on_record(&record, &runs)?;
        records.push(record);
    }
    Ok(records)
}

/// Mean and sample standard deviation (zero for a single value).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Writes the summary CSV row by row, flushing after each one.
pub struct BenchCsv<W: Write> {
    out: W,
}

impl<W: Write> BenchCsv<W> {
    pub fn new(mut out: W) -> Result<Self> {
        writeln!(out, "{BENCH_CSV_HEADER}")?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn write(&mut self, r: &BenchRecord) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{},{}",
            r.n_bts, r.variables, r.constraints, r.density, r.avg_time, r.std_dev_time, r.avg_gap
        )?;
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// `y = coef_a * exp(coef_b * x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub coef_a: f64,
    pub coef_b: f64,
}

impl ExpFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coef_a * (self.coef_b * x).exp()
    }
}

/// Least-squares fit of `ln y = ln a + b x`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ExpFit> {
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "an exponential fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|&&(x, y)| !y.is_finite() || y <= 0.0 || !x.is_finite())
    {
        return Err(Error::Domain(format!(
            "point ({x}, {y}) is unusable: y must be positive and both finite"
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_ly = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y.ln() - mean_ly);
    }
    if sxx == 0.0 {
        return Err(Error::Domain("all x values coincide".into()));
    }
    let coef_b = sxy / sxx;
    Ok(ExpFit {
        coef_a: (mean_ly - coef_b * mean_x).exp(),
        coef_b,
    })
}
