//! Subcommand definitions and handlers.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mrta::allocator::Method;
use mrta::geometry::{GridMap, Point};
use mrta::scenario_io::{
    generate_grid_scenario, generate_scenario, load_scenario, save_scenario, scenario_to_json, ScenarioParams,
};

use crate::config::ExperimentConfig;
use crate::experiment::{self, summarize, summary_table, write_csv, Row, SolutionFile, SummaryRow};
use crate::svg::{self, Series};
use crate::CliError;

/// Environment variable that overrides every seed on the command line or in
/// the config.
pub const SEED_ENV: &str = "MRTA_SEED";

#[derive(Debug, Parser)]
#[command(name = "mrta", version, about = "Multi-robot task allocation experiments")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random scenario file.
    Gen(GenArgs),
    /// Solve one scenario with one method.
    Solve(SolveArgs),
    /// Compare methods over seeds and repetitions.
    Bench(BenchArgs),
    /// Measure cost and runtime across problem sizes and team sizes.
    Sweep(SweepArgs),
    /// Render SVG plots for a solution file.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Number of locations, depot included.
    #[arg(long, default_value_t = 50)]
    sites: usize,
    #[arg(long, default_value_t = 4)]
    robots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100.0)]
    width: f64,
    #[arg(long, default_value_t = 100.0)]
    height: f64,
    /// Per-robot travel budget in metres.
    #[arg(long, default_value_t = 500.0)]
    budget: f64,
    /// Depot position as `x,y`.
    #[arg(long, default_value = "0,0", value_parser = parse_point)]
    depot: Point,
    /// Occupancy grid text file; sites are drawn from its free cells and
    /// costs become shortest grid paths.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Output path; the scenario JSON is printed when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    scenario: PathBuf,
    #[arg(long, default_value = "clustered")]
    method: Method,
    /// Solver seed; defaults to the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Experiment config supplying K-means and GA settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Solution file; defaults to `<scenario stem>.<method>.json` next to
    /// the scenario.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Append the metrics row to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Exit with status 1 when any robot exceeds its budget.
    #[arg(long)]
    strict: bool,
    /// Keep the measured solve time in the solution file.
    #[arg(long)]
    keep_time: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment config (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Scenario file to use for every seed instead of generating one.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Locations per generated scenario, depot included.
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long)]
    robots: Option<usize>,
    /// Write solution files and plots for the last run of each cell.
    #[arg(long)]
    plots: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Locations per scenario, depot included.
    #[arg(long, value_delimiter = ',', default_value = "20,50,100,200")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    robots: Vec<usize>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    solution: PathBuf,
    /// Output directory; defaults to the solution file's directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Point::new(parse(x)?, parse(y)?))
}

fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not a seed"))),
        Err(_) => Ok(None),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Sweep(a) => sweep(a),
        Command::Plot(a) => plot(a),
    }
}

fn gen(a: GenArgs) -> Result<(), CliError> {
    let params = ScenarioParams {
        n_sites: a.sites,
        n_robots: a.robots,
        width: a.width,
        height: a.height,
        depot: a.depot,
        budget: a.budget,
        seed: seed_override()?.unwrap_or(a.seed),
    };
    let scenario = match &a.grid {
        Some(path) => {
            let map = GridMap::load(path).map_err(|e| io_err(path, e))?;
            generate_grid_scenario(&params, map)
        }
        None => generate_scenario(&params),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    match &a.output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            save_scenario(&scenario, path).map_err(|e| io_err(path, e))?;
            println!(
                "wrote {}: {} sites + depot, {} robots, seed {}, {:?} costs",
                path.display(),
                scenario.sites.len(),
                scenario.robots.len(),
                scenario.seed,
                scenario.cost_backend
            );
        }
        None if scenario.grid.is_some() => {
            return Err(CliError::Usage("grid scenarios need --output so the grid file can be written".into()))
        }
        None => print!("{}", scenario_to_json(&scenario)),
    }
    Ok(())
}

fn solve(a: SolveArgs) -> Result<(), CliError> {
    let config = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.validate()?;
    let scenario = load_scenario(&a.scenario).map_err(|e| io_err(&a.scenario, e))?;
    let seed = seed_override()?.or(a.seed).unwrap_or(scenario.seed);
    let model = scenario.cost_model().map_err(|e| io_err(&a.scenario, e))?;
    let solution = experiment::solve(a.method, &scenario, &model, seed, &config)?;
    let m = experiment::metrics(&solution, &scenario, &model, &config);
    let row = Row::new(a.method, seed, 0, &scenario, &m, solution.all_feasible());

    let output = a.output.clone().unwrap_or_else(|| {
        let stem = a.scenario.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        a.scenario.with_file_name(format!("{stem}.{}.json", a.method))
    });
    write_file(&output, &SolutionFile::new(&scenario, &solution, a.keep_time).to_json())?;

    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.serialize(&row).and_then(|_| w.flush().map_err(csv::Error::from)).map_err(|e| CliError::Data(e.to_string()))?;
    if let Some(path) = &a.csv {
        append_row(path, &row)?;
    }
    eprintln!("wrote {}", output.display());

    if a.strict && !solution.all_feasible() {
        let over: Vec<usize> = (0..solution.feasible.len()).filter(|&k| !solution.feasible[k]).collect();
        return Err(CliError::Infeasible(format!("robots {over:?} exceed their budgets")));
    }
    Ok(())
}

fn append_row(path: &Path, row: &Row) -> Result<(), CliError> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    w.serialize(row).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

fn experiment_config(a: &ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = &a.methods {
        config.methods = m.clone();
    }
    if let Some(s) = &a.seeds {
        config.seeds = s.clone();
    }
    if let Some(seed) = seed_override()? {
        config.seeds = vec![seed];
    }
    if let Some(r) = a.reps {
        config.repetitions = r;
    }
    if let Some(d) = &a.out_dir {
        config.output_dir = d.clone();
    }
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir).map_err(|e| io_err(&config.output_dir, e))?;
    Ok(config)
}

fn bench(a: BenchArgs) -> Result<(), CliError> {
    let mut config = experiment_config(&a.common)?;
    if let Some(s) = &a.scenario {
        config.scenario = Some(s.clone());
    }
    if let Some(n) = a.sites {
        config.generate.n_sites = n;
    }
    if let Some(r) = a.robots {
        config.generate.n_robots = r;
    }
    config.emit_plots |= a.plots;

    let plots_dir = config.output_dir.join("plots");
    let emit = config.emit_plots;
    let rows = experiment::run_grid(&config, |seed, scenario, solution| {
        if !emit {
            return Ok(());
        }
        let dir = plots_dir.join(format!("seed{seed}_{}", solution.method));
        let file = SolutionFile::new(scenario, solution, true);
        write_file(&dir.join("solution.json"), &file.to_json())?;
        write_plots(&file, &dir).map(|_| ())
    })?;
    let summary = summarize(&rows);
    write_csv(&config.output_dir.join("results.csv"), &rows)?;
    write_csv(&config.output_dir.join("summary.csv"), &summary)?;
    print!("{}", summary_table(&summary));
    println!("{} runs written to {}", rows.len(), config.output_dir.join("results.csv").display());
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let mut config = experiment_config(&a.common)?;
    if a.sizes.is_empty() || a.robots.is_empty() {
        return Err(CliError::Usage("sizes and robots must be non-empty".into()));
    }
    config.scenario = None;
    let mut rows = Vec::new();
    for &robots in &a.robots {
        for &size in &a.sizes {
            config.generate.n_sites = size;
            config.generate.n_robots = robots;
            rows.extend(experiment::run_grid(&config, |_, _, _| Ok(()))?);
        }
    }
    let summary = summarize(&rows);
    write_csv(&config.output_dir.join("sweep.csv"), &rows)?;
    write_csv(&config.output_dir.join("sweep_summary.csv"), &summary)?;
    write_file(
        &config.output_dir.join("sweep_time.svg"),
        &svg::line_chart(
            "Median solve time by problem size",
            "locations",
            "time (s)",
            &sweep_series(&summary, |r| r.median_time_s),
            true,
        ),
    )?;
    write_file(
        &config.output_dir.join("sweep_cost.svg"),
        &svg::line_chart(
            "Median total cost by problem size",
            "locations",
            "total cost (m)",
            &sweep_series(&summary, |r| r.median_total_cost),
            false,
        ),
    )?;
    print!("{}", summary_table(&summary));
    Ok(())
}

fn sweep_series(summary: &[SummaryRow], value: fn(&SummaryRow) -> f64) -> Vec<Series> {
    let mut keys: Vec<(Method, usize)> = summary.iter().map(|r| (r.method, r.n_robots)).collect();
    keys.sort_by_key(|&(m, r)| (m.name(), r));
    keys.dedup();
    keys.into_iter()
        .map(|(method, robots)| {
            let mut points: Vec<(f64, f64)> = summary
                .iter()
                .filter(|r| r.method == method && r.n_robots == robots)
                .map(|r| (r.n_sites as f64, value(r)))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { name: format!("{method} ({robots} robots)"), points }
        })
        .collect()
}

fn plot(a: PlotArgs) -> Result<(), CliError> {
    let file = SolutionFile::load(&a.solution)?;
    let dir = a.out_dir.clone().unwrap_or_else(|| a.solution.parent().map(Path::to_path_buf).unwrap_or_default());
    for path in write_plots(&file, &dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

/// Writes the route map, the K-means WCM curve and one 2-opt cost trace per
/// robot. Missing traces are skipped with a warning.
fn write_plots(file: &SolutionFile, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let solution = &file.solution;
    let mut written = Vec::new();
    let mut emit = |name: String, contents: String| -> Result<(), CliError> {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };

    let title = format!("{} routes, total cost {:.1} m", solution.method, solution.total_cost);
    emit("routes.svg".into(), svg::routes_map(&title, file.depot, &file.sites, solution))?;

    match solution.assignment.as_ref().filter(|a| !a.wcm_trace.is_empty()) {
        Some(a) => {
            let points = a.wcm_trace.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect();
            let series = [Series { name: "WCM".into(), points }];
            emit("wcm.svg".into(), svg::line_chart("K-means convergence", "iteration", "WCM (m²)", &series, false))?;
        }
        None => eprintln!("warning: solution has no K-means trace; wcm.svg skipped"),
    }

    for route in &solution.routes {
        if route.trace.is_empty() {
            eprintln!("warning: robot {} has no 2-opt trace; plot skipped", route.robot);
            continue;
        }
        let points = route.trace.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        let series = [Series { name: format!("robot {}", route.robot), points }];
        let title = format!("2-opt cost, robot {}", route.robot);
        emit(
            format!("two_opt_robot_{}.svg", route.robot),
            svg::line_chart(&title, "improving pass", "route cost (m)", &series, false),
        )?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_argument() {
        assert_eq!(parse_point("1.5, -2").unwrap(), Point::new(1.5, -2.0));
        assert!(parse_point("1.5").is_err());
        assert!(parse_point("a,b").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
