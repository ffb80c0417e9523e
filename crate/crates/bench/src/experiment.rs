//! Running solvers over seeds and repetitions, and writing result tables.

use std::path::Path;

use mrta::allocator::Method;
use mrta::baselines::{ga_allocate, greedy_allocate, GaConfig};
use mrta::geometry::Point;
use mrta::metrics::{median, MetricsReport};
use mrta::scenario_io::{generate_scenario, load_scenario, CostModel, Scenario};
use mrta::{solve_clustered, Solution};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

/// One solver run. Columns other than `time_s` are byte-stable for fixed seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub method: Method,
    pub seed: u64,
    pub rep: usize,
    /// Locations including the depot.
    pub n_sites: usize,
    pub n_robots: usize,
    pub total_cost: f64,
    pub time_s: f64,
    pub load_balance: f64,
    pub collisions: usize,
    pub feasible: bool,
    pub collisions_all_legs: usize,
}

impl Row {
    pub fn new(method: Method, seed: u64, rep: usize, scenario: &Scenario, m: &MetricsReport, feasible: bool) -> Self {
        Row {
            method,
            seed,
            rep,
            n_sites: scenario.sites.len() + 1,
            n_robots: scenario.robots.len(),
            total_cost: m.total_cost,
            time_s: m.solve_time,
            load_balance: m.load_balance,
            collisions: m.collision_count,
            feasible,
            collisions_all_legs: m.collision_count_all_legs,
        }
    }
}

/// Medians over every run of one method at one problem size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub n_sites: usize,
    pub n_robots: usize,
    pub runs: usize,
    pub median_total_cost: f64,
    pub median_time_s: f64,
    pub median_load_balance: f64,
    pub median_collisions: f64,
    pub median_collisions_all_legs: f64,
    pub feasible_runs: usize,
}

pub fn summarize(rows: &[Row]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, usize, usize)> = Vec::new();
    for r in rows {
        let key = (r.method, r.n_sites, r.n_robots);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, n_sites, n_robots)| {
            let group: Vec<&Row> =
                rows.iter().filter(|r| (r.method, r.n_sites, r.n_robots) == (method, n_sites, n_robots)).collect();
            let med = |f: fn(&Row) -> f64| median(&group.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap_or(0.0);
            SummaryRow {
                method,
                n_sites,
                n_robots,
                runs: group.len(),
                median_total_cost: med(|r| r.total_cost),
                median_time_s: med(|r| r.time_s),
                median_load_balance: med(|r| r.load_balance),
                median_collisions: med(|r| r.collisions as f64),
                median_collisions_all_legs: med(|r| r.collisions_all_legs as f64),
                feasible_runs: group.iter().filter(|r| r.feasible).count(),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<10} {:>7} {:>6} {:>5} {:>12} {:>12} {:>10} {:>10} {:>9}\n",
        "method", "sites", "robots", "runs", "cost", "time_s", "balance", "collisions", "feasible"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<10} {:>7} {:>6} {:>5} {:>12.2} {:>12.3e} {:>10.2} {:>10.1} {:>5}/{:<3}\n",
            r.method.name(),
            r.n_sites,
            r.n_robots,
            r.runs,
            r.median_total_cost,
            r.median_time_s,
            r.median_load_balance,
            r.median_collisions,
            r.feasible_runs,
            r.runs
        ));
    }
    out
}

/// Runs one method on a prepared scenario.
pub fn solve(
    method: Method,
    scenario: &Scenario,
    model: &CostModel,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<Solution, CliError> {
    let result = match method {
        Method::Clustered => {
            solve_clustered(scenario, &model.matrix, &config.kmeans.config(scenario.robots.len(), seed))
        }
        Method::Ga => ga_allocate(scenario, &model.matrix, &GaConfig { seed, ..config.ga.clone() }),
        Method::Greedy => greedy_allocate(scenario, &model.matrix),
    };
    result.map_err(|e| CliError::Data(format!("{method} solve failed: {e}")))
}

pub fn metrics(
    solution: &Solution,
    scenario: &Scenario,
    model: &CostModel,
    config: &ExperimentConfig,
) -> MetricsReport {
    MetricsReport::compute(solution, &model.legs, scenario.depot, config.depot_exclusion_radius)
}

/// The scenario for one seed: the configured file, or a fresh one generated
/// with that seed.
pub fn scenario_for(config: &ExperimentConfig, seed: u64) -> Result<Scenario, CliError> {
    match &config.scenario {
        Some(path) => load_scenario(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => {
            let params = mrta::scenario_io::ScenarioParams { seed, ..config.generate.clone() };
            generate_scenario(&params).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

/// Every (seed, method, repetition) cell, run serially so timings do not
/// contend. The last solution of each (seed, method) pair is passed to
/// `on_solution`.
pub fn run_grid(
    config: &ExperimentConfig,
    mut on_solution: impl FnMut(u64, &Scenario, &Solution) -> Result<(), CliError>,
) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for &seed in &config.seeds {
        let scenario = scenario_for(config, seed)?;
        let model = scenario.cost_model().map_err(|e| CliError::Data(e.to_string()))?;
        for &method in &config.methods {
            let mut last = None;
            for rep in 0..config.repetitions {
                let solution = solve(method, &scenario, &model, seed, config)?;
                let m = metrics(&solution, &scenario, &model, config);
                rows.push(Row::new(method, seed, rep, &scenario, &m, solution.all_feasible()));
                last = Some(solution);
            }
            if let Some(solution) = last {
                on_solution(seed, &scenario, &solution)?;
            }
        }
    }
    Ok(rows)
}

/// Solution file written by `solve`: the solution plus the geometry needed to
/// plot it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub depot: Point,
    pub sites: Vec<Point>,
    pub solution: Solution,
}

impl SolutionFile {
    pub fn new(scenario: &Scenario, solution: &Solution, keep_time: bool) -> Self {
        let mut solution = solution.clone();
        if !keep_time {
            solution.solve_time = 0.0;
        }
        SolutionFile { depot: scenario.depot, sites: scenario.sites.clone(), solution }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution file serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}
