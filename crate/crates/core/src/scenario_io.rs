//! Scenario generation and persistence.
//!
//! Scenarios are stored as JSON:
//!
//! ```json
//! {
//!   "version": 1,
//!   "workspace": { "w": 100.0, "h": 100.0 },
//!   "depot": [0.0, 0.0],
//!   "sites": [[12.5, 40.1], ...],
//!   "robots": [{ "id": 0, "budget": 500.0 }, ...],
//!   "seed": 7,
//!   "cost_backend": "euclidean",
//!   "grid_file": "map.grid"
//! }
//! ```
//!
//! `grid_file` is required for the `grid` backend and resolved relative to
//! the scenario file. An optional `tasks` array of `{site, measurement_type}`
//! may list several tasks per site; when absent there is one task per site.

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocator::{Robot, Task};
use crate::error::{MrtaError, Result};
use crate::geometry::{
    dijkstra_costs_with_paths, euclidean_cost_matrix, CostMatrix, GridMap, GridPaths, LegGeometry, Point, StraightLegs,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Robots move at 1 m/s, so a cost in metres is also a duration in seconds.
pub const ROBOT_SPEED_MPS: f64 = 1.0;

/// Minimum distance between any two generated locations.
pub const MIN_SITE_SPACING: f64 = 1e-3;

const MAX_DRAWS_PER_SITE: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostBackend {
    #[default]
    Euclidean,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub w: f64,
    pub h: f64,
}

impl Workspace {
    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.w).contains(&p.x) && (0.0..=self.h).contains(&p.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub workspace: Workspace,
    pub depot: Point,
    /// Task sites; site `i` is location index `i + 1`.
    pub sites: Vec<Point>,
    pub robots: Vec<Robot>,
    pub tasks: Vec<Task>,
    pub seed: u64,
    pub cost_backend: CostBackend,
    pub grid: Option<GridMap>,
    /// File name the grid is stored under, relative to the scenario file.
    pub grid_file: Option<String>,
}

impl Scenario {
    /// Euclidean scenario with one task per site and a workspace spanning
    /// every location.
    pub fn new(depot: Point, sites: Vec<Point>, robots: Vec<Robot>) -> Self {
        let w = sites.iter().chain(std::iter::once(&depot)).map(|p| p.x).fold(0.0, f64::max);
        let h = sites.iter().chain(std::iter::once(&depot)).map(|p| p.y).fold(0.0, f64::max);
        let tasks = one_task_per_site(sites.len());
        Scenario {
            workspace: Workspace { w, h },
            depot,
            sites,
            robots,
            tasks,
            seed: 0,
            cost_backend: CostBackend::Euclidean,
            grid: None,
            grid_file: None,
        }
    }

    /// Depot followed by every site.
    pub fn locations(&self) -> Vec<Point> {
        std::iter::once(self.depot).chain(self.sites.iter().copied()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(MrtaError::Validation(msg));
        let ws = self.workspace;
        if !(ws.w.is_finite() && ws.h.is_finite() && ws.w >= 0.0 && ws.h >= 0.0) {
            return fail(format!("workspace {}x{} is not a valid size", ws.w, ws.h));
        }
        if !self.depot.is_finite() {
            return fail(format!("depot {} is not finite", self.depot));
        }
        for (i, p) in self.sites.iter().enumerate() {
            if !p.is_finite() || !ws.contains(p) {
                return fail(format!("site {i} at {p} lies outside the {}x{} workspace", ws.w, ws.h));
            }
            if *p == self.depot {
                return fail(format!("site {i} coincides with the depot"));
            }
        }
        if self.robots.is_empty() {
            return fail("scenario has no robots".into());
        }
        if self.sites.len() < self.robots.len() {
            return fail(format!("{} sites for {} robots", self.sites.len(), self.robots.len()));
        }
        for (k, r) in self.robots.iter().enumerate() {
            if !(r.budget.is_finite() && r.budget > 0.0) {
                return fail(format!("robot {k} has non-positive budget {}", r.budget));
            }
            if self.robots[..k].iter().any(|o| o.id == r.id) {
                return fail(format!("robot id {} appears twice", r.id));
            }
        }
        for (t, task) in self.tasks.iter().enumerate() {
            if task.site == 0 || task.site > self.sites.len() {
                return fail(format!("task {t} refers to location {} which is not a site", task.site));
            }
        }
        match (self.cost_backend, &self.grid) {
            (CostBackend::Grid, None) => return fail("grid backend requires a grid map".into()),
            (CostBackend::Euclidean, Some(_)) => return fail("grid map given for the euclidean backend".into()),
            _ => {}
        }
        Ok(())
    }

    /// Builds the travel-cost matrix and leg geometry for this scenario's
    /// backend.
    pub fn cost_model(&self) -> Result<CostModel> {
        match (&self.cost_backend, &self.grid) {
            (CostBackend::Euclidean, _) => Ok(CostModel {
                matrix: euclidean_cost_matrix(self.depot, &self.sites)?,
                legs: Legs::Straight(StraightLegs::new(self.depot, &self.sites)),
            }),
            (CostBackend::Grid, Some(map)) => {
                let (matrix, paths) = dijkstra_costs_with_paths(map, self.depot, &self.sites)?;
                Ok(CostModel { matrix, legs: Legs::Grid(paths) })
            }
            (CostBackend::Grid, None) => Err(MrtaError::invalid("grid backend requires a grid map")),
        }
    }
}

fn one_task_per_site(n: usize) -> Vec<Task> {
    (1..=n).map(|site| Task { site, measurement_type: 0 }).collect()
}

/// Travel costs plus the physical trajectory of every leg.
#[derive(Debug, Clone)]
pub struct CostModel {
    pub matrix: CostMatrix,
    pub legs: Legs,
}

#[derive(Debug, Clone)]
pub enum Legs {
    Straight(StraightLegs),
    Grid(GridPaths),
}

impl LegGeometry for Legs {
    fn leg(&self, from: usize, to: usize) -> Vec<Point> {
        match self {
            Legs::Straight(s) => s.leg(from, to),
            Legs::Grid(g) => g.leg(from, to),
        }
    }
}

/// Parameters for [`generate_scenario`]. `n_sites` counts the depot, so
/// `n_sites − 1` task sites are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioParams {
    pub n_sites: usize,
    pub n_robots: usize,
    pub width: f64,
    pub height: f64,
    pub depot: Point,
    pub budget: f64,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            n_sites: 50,
            n_robots: 4,
            width: 100.0,
            height: 100.0,
            depot: Point::new(0.0, 0.0),
            budget: 500.0,
            seed: 0,
        }
    }
}

impl ScenarioParams {
    fn check(&self) -> Result<()> {
        if self.n_robots == 0 {
            return Err(MrtaError::invalid("at least one robot is required"));
        }
        if self.n_sites < self.n_robots + 1 {
            return Err(MrtaError::invalid(format!(
                "{} sites (depot included) leave fewer task sites than the {} robots",
                self.n_sites, self.n_robots
            )));
        }
        if !(self.width.is_finite() && self.height.is_finite() && self.width >= 0.0 && self.height >= 0.0) {
            return Err(MrtaError::invalid(format!("workspace {}x{} is not a valid size", self.width, self.height)));
        }
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(MrtaError::invalid(format!("budget {} must be positive", self.budget)));
        }
        if !self.depot.is_finite() {
            return Err(MrtaError::invalid("depot must be finite"));
        }
        Ok(())
    }

    fn robots(&self) -> Vec<Robot> {
        (0..self.n_robots).map(|id| Robot { id, budget: self.budget }).collect()
    }
}

/// Uniformly random Euclidean scenario, deterministic in `params.seed`.
pub fn generate_scenario(params: &ScenarioParams) -> Result<Scenario> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let count = params.n_sites - 1;
    let mut sites: Vec<Point> = Vec::with_capacity(count);
    let mut draws = 0;
    while sites.len() < count {
        if draws >= MAX_DRAWS_PER_SITE * count {
            return Err(MrtaError::GenerationFailure(format!(
                "placed {} of {count} sites {MIN_SITE_SPACING} m apart in a {}x{} workspace after {draws} draws",
                sites.len(),
                params.width,
                params.height
            )));
        }
        draws += 1;
        let p = Point::new(rng.gen::<f64>() * params.width, rng.gen::<f64>() * params.height);
        let crowded =
            p.distance(&params.depot) < MIN_SITE_SPACING || sites.iter().any(|s| s.distance(&p) < MIN_SITE_SPACING);
        if !crowded {
            sites.push(p);
        }
    }
    Ok(Scenario {
        workspace: Workspace { w: params.width, h: params.height },
        depot: params.depot,
        tasks: one_task_per_site(sites.len()),
        sites,
        robots: params.robots(),
        seed: params.seed,
        cost_backend: CostBackend::Euclidean,
        grid: None,
        grid_file: None,
    })
}

/// Grid-backend scenario: task sites are distinct free cell centres inside
/// the workspace, drawn uniformly without replacement. The depot must sit on
/// a free cell.
pub fn generate_grid_scenario(params: &ScenarioParams, map: GridMap) -> Result<Scenario> {
    params.check()?;
    let depot_cell = map.snap(&params.depot)?;
    let ws = Workspace { w: params.width, h: params.height };
    let free: Vec<Point> = (0..map.height())
        .flat_map(|cy| (0..map.width()).map(move |cx| (cx, cy)))
        .filter(|&(cx, cy)| !map.is_blocked(cx, cy) && (cx, cy) != depot_cell)
        .map(|(cx, cy)| map.cell_center(cx, cy))
        .filter(|p| ws.contains(p))
        .collect();
    let count = params.n_sites - 1;
    if free.len() < count {
        return Err(MrtaError::GenerationFailure(format!(
            "only {} free cells available for {count} sites",
            free.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let sites: Vec<Point> = sample(&mut rng, free.len(), count).iter().map(|i| free[i]).collect();
    Ok(Scenario {
        workspace: ws,
        depot: params.depot,
        tasks: one_task_per_site(sites.len()),
        sites,
        robots: params.robots(),
        seed: params.seed,
        cost_backend: CostBackend::Grid,
        grid: Some(map),
        grid_file: None,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    version: u32,
    workspace: Workspace,
    depot: Point,
    sites: Vec<Point>,
    robots: Vec<Robot>,
    seed: u64,
    cost_backend: CostBackend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tasks: Option<Vec<Task>>,
}

/// Parses scenario JSON. A grid scenario's map is read through `read_grid`.
pub fn parse_scenario(json: &str, read_grid: impl FnOnce(&str) -> Result<GridMap>) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        MrtaError::Parse {
            context: format!("{} (line {}, column {})", e.path(), inner.line(), inner.column()),
            message: inner.to_string(),
        }
    })?;
    if file.version != SCHEMA_VERSION {
        return Err(MrtaError::Parse {
            context: "version".into(),
            message: format!("unsupported schema version {} (expected {SCHEMA_VERSION})", file.version),
        });
    }
    let grid = match (&file.cost_backend, &file.grid_file) {
        (CostBackend::Grid, Some(name)) => Some(read_grid(name)?),
        (CostBackend::Grid, None) => {
            return Err(MrtaError::Parse {
                context: "grid_file".into(),
                message: "required for the grid cost backend".into(),
            })
        }
        (CostBackend::Euclidean, _) => None,
    };
    let tasks = file.tasks.unwrap_or_else(|| one_task_per_site(file.sites.len()));
    let scenario = Scenario {
        workspace: file.workspace,
        depot: file.depot,
        sites: file.sites,
        robots: file.robots,
        tasks,
        seed: file.seed,
        cost_backend: file.cost_backend,
        grid,
        grid_file: file.grid_file,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Serializes a scenario. Tasks are only written when they differ from the
/// default one-task-per-site layout.
pub fn scenario_to_json(scenario: &Scenario) -> String {
    let tasks = (scenario.tasks != one_task_per_site(scenario.sites.len())).then(|| scenario.tasks.clone());
    let file = ScenarioFile {
        version: SCHEMA_VERSION,
        workspace: scenario.workspace,
        depot: scenario.depot,
        sites: scenario.sites.clone(),
        robots: scenario.robots.clone(),
        seed: scenario.seed,
        cost_backend: scenario.cost_backend,
        grid_file: scenario.grid_file.clone(),
        tasks,
    };
    serde_json::to_string_pretty(&file).expect("scenario serializes") + "\n"
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario(&text, |name| GridMap::load(dir.join(name)))
}

/// Writes the scenario JSON and, for grid scenarios, the grid text file next
/// to it (named `<stem>.grid` unless `grid_file` is already set).
pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut scenario = scenario.clone();
    if let Some(map) = &scenario.grid {
        let name = scenario.grid_file.clone().unwrap_or_else(|| {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
            format!("{stem}.grid")
        });
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        map.save(dir.join(&name))?;
        scenario.grid_file = Some(name);
    }
    std::fs::write(path, scenario_to_json(&scenario))?;
    Ok(())
}
