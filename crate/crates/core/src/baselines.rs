//! Unclustered comparison allocators: a permutation-and-split genetic
//! algorithm and a greedy nearest-task allocator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocator::{check_instance, Method, RouteResult, Solution};
use crate::error::{MrtaError, Result};
use crate::geometry::CostMatrix;
use crate::metrics::timed;
use crate::routing::{route_cost, Tour};
use crate::scenario_io::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-offspring probability of a swap mutation, and independently of
    /// re-drawing the route breaks.
    pub mutation_rate: f64,
    pub tournament_size: usize,
    /// Fitness penalty per metre of budget overrun.
    pub budget_penalty_weight: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            generations: 500,
            crossover_rate: 0.9,
            mutation_rate: 0.05,
            tournament_size: 3,
            budget_penalty_weight: 10.0,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 || self.tournament_size == 0 {
            return Err(MrtaError::invalid("population and tournament sizes must be at least 1"));
        }
        if self.population_size < self.tournament_size {
            return Err(MrtaError::invalid(format!(
                "population {} is smaller than the tournament size {}",
                self.population_size, self.tournament_size
            )));
        }
        for (name, rate) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(MrtaError::invalid(format!("{name} {rate} outside [0, 1]")));
            }
        }
        if !(self.budget_penalty_weight.is_finite() && self.budget_penalty_weight >= 0.0) {
            return Err(MrtaError::invalid("budget_penalty_weight must be non-negative"));
        }
        Ok(())
    }
}

/// Giant-tour encoding: a permutation of every site location, cut into one
/// segment per robot at the sorted `breaks` positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub permutation: Vec<usize>,
    pub breaks: Vec<usize>,
}

impl Chromosome {
    fn random(sites: &[usize], robots: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut permutation = sites.to_vec();
        permutation.shuffle(rng);
        let breaks = random_breaks(sites.len(), robots, rng);
        Chromosome { permutation, breaks }
    }

    /// Per-robot slices of the permutation.
    pub fn segments(&self) -> Vec<&[usize]> {
        let mut out = Vec::with_capacity(self.breaks.len() + 1);
        let mut start = 0;
        for &b in &self.breaks {
            out.push(&self.permutation[start..b]);
            start = b;
        }
        out.push(&self.permutation[start..]);
        out
    }

    fn routes(&self) -> Vec<Vec<usize>> {
        self.segments()
            .into_iter()
            .map(|seg| {
                let mut order = Vec::with_capacity(seg.len() + 2);
                order.push(0);
                order.extend_from_slice(seg);
                order.push(0);
                order
            })
            .collect()
    }
}

fn random_breaks(n: usize, robots: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut b: Vec<usize> = (0..robots.saturating_sub(1)).map(|_| rng.gen_range(0..=n)).collect();
    b.sort_unstable();
    b
}

fn fitness(ch: &Chromosome, costs: &CostMatrix, budgets: &[f64], penalty: f64) -> f64 {
    ch.routes()
        .iter()
        .zip(budgets)
        .map(|(order, &budget)| {
            let c = route_cost(order, costs);
            c + penalty * (c - budget).max(0.0)
        })
        .sum()
}

/// Order crossover: copy a random slice of `p1`, fill the rest with the
/// remaining genes in `p2`'s order starting after the slice.
fn order_crossover(p1: &[usize], p2: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = p1.len();
    if n < 2 {
        return p1.to_vec();
    }
    let (mut a, mut b) = (rng.gen_range(0..n), rng.gen_range(0..n));
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let max_loc = p1.iter().copied().max().unwrap_or(0);
    let mut taken = vec![false; max_loc + 1];
    let mut child = vec![usize::MAX; n];
    for i in a..=b {
        child[i] = p1[i];
        taken[p1[i]] = true;
    }
    let mut pos = (b + 1) % n;
    for k in 0..n {
        let gene = p2[(b + 1 + k) % n];
        if !taken[gene] {
            child[pos] = gene;
            pos = (pos + 1) % n;
        }
    }
    child
}

fn tournament<'a>(pop: &'a [(Chromosome, f64)], size: usize, rng: &mut ChaCha8Rng) -> &'a Chromosome {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..size {
        let cand = rng.gen_range(0..pop.len());
        if pop[cand].1 < pop[best].1 {
            best = cand;
        }
    }
    &pop[best].0
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub solution: Solution,
    /// Best fitness in the initial population, then after every generation.
    pub best_fitness_trace: Vec<f64>,
}

/// Genetic algorithm over unclustered allocations. Fitness is the total
/// route cost plus a penalty on budget overruns; the best individual always
/// survives to the next generation.
pub fn ga_allocate(scenario: &Scenario, costs: &CostMatrix, config: &GaConfig) -> Result<Solution> {
    ga_allocate_traced(scenario, costs, config).map(|o| o.solution)
}

pub fn ga_allocate_traced(scenario: &Scenario, costs: &CostMatrix, config: &GaConfig) -> Result<GaOutcome> {
    check_instance(scenario, costs)?;
    config.validate()?;
    let robots = scenario.robots.len();
    let budgets: Vec<f64> = scenario.robots.iter().map(|r| r.budget).collect();
    let sites: Vec<usize> = (1..=scenario.sites.len()).collect();
    let penalty = config.budget_penalty_weight;
    let eval = |ch: Chromosome| {
        let f = fitness(&ch, costs, &budgets, penalty);
        (ch, f)
    };

    let ((best, trace), elapsed) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut pop: Vec<(Chromosome, f64)> =
            (0..config.population_size).map(|_| eval(Chromosome::random(&sites, robots, &mut rng))).collect();
        let mut best = fittest(&pop).clone();
        let mut trace = vec![best.1];

        for _ in 0..config.generations {
            let mut next = Vec::with_capacity(config.population_size);
            next.push(best.clone());
            while next.len() < config.population_size {
                let p1 = tournament(&pop, config.tournament_size, &mut rng);
                let p2 = tournament(&pop, config.tournament_size, &mut rng);
                let mut child = if rng.gen_bool(config.crossover_rate) {
                    Chromosome {
                        permutation: order_crossover(&p1.permutation, &p2.permutation, &mut rng),
                        breaks: p1.breaks.clone(),
                    }
                } else {
                    p1.clone()
                };
                if rng.gen_bool(config.mutation_rate) && child.permutation.len() > 1 {
                    let n = child.permutation.len();
                    let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    child.permutation.swap(i, j);
                }
                if rng.gen_bool(config.mutation_rate) {
                    child.breaks = random_breaks(child.permutation.len(), robots, &mut rng);
                }
                next.push(eval(child));
            }
            pop = next;
            let gen_best = fittest(&pop);
            if gen_best.1 < best.1 {
                best = gen_best.clone();
            }
            trace.push(best.1);
        }
        (best, trace)
    });

    let routes = best
        .0
        .routes()
        .into_iter()
        .enumerate()
        .map(|(robot, order)| {
            let cost = route_cost(&order, costs);
            RouteResult { robot, tour: Tour { order, cost }, trace: Vec::new() }
        })
        .collect();
    let solution = Solution::assemble(Method::Ga, None, routes, &scenario.robots, elapsed);
    Ok(GaOutcome { solution, best_fitness_trace: trace })
}

fn fittest(pop: &[(Chromosome, f64)]) -> &(Chromosome, f64) {
    pop.iter().fold(&pop[0], |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Greedy nearest-task allocation. All robots start at the depot; the robot
/// with the least accumulated cost repeatedly claims its nearest unassigned
/// site and moves there. Every robot finally returns to the depot. Ties go to
/// the lowest robot index and then the lowest location index.
pub fn greedy_allocate(scenario: &Scenario, costs: &CostMatrix) -> Result<Solution> {
    check_instance(scenario, costs)?;
    let m = scenario.robots.len();
    let n = scenario.sites.len();
    let (orders, elapsed) = timed(|| {
        let mut orders: Vec<Vec<usize>> = vec![vec![0]; m];
        let mut accumulated = vec![0.0f64; m];
        let mut position = vec![0usize; m];
        let mut assigned = vec![false; n + 1];
        for _ in 0..n {
            let k = (0..m).fold(0, |best, r| if accumulated[r] < accumulated[best] { r } else { best });
            let here = position[k];
            let row = costs.row(here);
            let mut next = usize::MAX;
            for loc in 1..=n {
                if !assigned[loc] && (next == usize::MAX || row[loc] < row[next]) {
                    next = loc;
                }
            }
            assigned[next] = true;
            accumulated[k] += row[next];
            position[k] = next;
            orders[k].push(next);
        }
        for order in &mut orders {
            order.push(0);
        }
        orders
    });
    let routes = orders
        .into_iter()
        .enumerate()
        .map(|(robot, order)| {
            let cost = route_cost(&order, costs);
            RouteResult { robot, tour: Tour { order, cost }, trace: Vec::new() }
        })
        .collect();
    Ok(Solution::assemble(Method::Greedy, None, routes, &scenario.robots, elapsed))
}
