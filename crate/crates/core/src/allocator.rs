//! The clustered allocator and the solution type shared by every method.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans_partition, ClusterAssignment, KMeansConfig};
use crate::error::{MrtaError, Result};
use crate::geometry::{CostMatrix, Point};
use crate::metrics::timed;
use crate::routing::{nearest_neighbor_tour, route_cost, two_opt, Tour};
use crate::scenario_io::Scenario;

/// Largest fleet for which the centroid-distance mapping is solved exactly.
pub const MAX_EXHAUSTIVE_ROBOTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Robot {
    pub id: usize,
    /// Maximum travel cost, in metres.
    pub budget: f64,
}

/// A measurement task at a site. `site` is a location index (never the depot).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub site: usize,
    #[serde(default)]
    pub measurement_type: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Clustered,
    Ga,
    Greedy,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Clustered, Method::Ga, Method::Greedy];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Clustered => "clustered",
            Method::Ga => "ga",
            Method::Greedy => "greedy",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = MrtaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clustered" => Ok(Method::Clustered),
            "ga" => Ok(Method::Ga),
            "greedy" => Ok(Method::Greedy),
            other => Err(MrtaError::invalid(format!("unknown method {other:?} (expected clustered, ga or greedy)"))),
        }
    }
}

/// One robot's route plus the cost trace of its improvement phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    pub robot: usize,
    pub tour: Tour,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub method: Method,
    /// Present for the clustered method only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<ClusterAssignment>,
    pub routes: Vec<RouteResult>,
    pub per_robot_cost: Vec<f64>,
    pub total_cost: f64,
    pub feasible: Vec<bool>,
    /// Wall-clock solve time in seconds.
    pub solve_time: f64,
}

impl Solution {
    /// Assembles a solution from per-robot routes, deriving the cost and
    /// budget fields.
    pub fn assemble(
        method: Method,
        assignment: Option<ClusterAssignment>,
        routes: Vec<RouteResult>,
        robots: &[Robot],
        solve_time: f64,
    ) -> Self {
        let per_robot_cost: Vec<f64> = routes.iter().map(|r| r.tour.cost).collect();
        let total_cost = per_robot_cost.iter().sum();
        let feasible = per_robot_cost.iter().zip(robots).map(|(&c, r)| c <= r.budget).collect();
        Solution { method, assignment, routes, per_robot_cost, total_cost, feasible, solve_time }
    }

    pub fn all_feasible(&self) -> bool {
        self.feasible.iter().all(|&f| f)
    }

    /// Canonical JSON. With `include_time == false` the solve time is
    /// zeroed so that reruns with equal seeds serialize identically.
    pub fn to_json(&self, include_time: bool) -> String {
        if include_time {
            serde_json::to_string_pretty(self).expect("solution serializes")
        } else {
            let mut copy = self.clone();
            copy.solve_time = 0.0;
            serde_json::to_string_pretty(&copy).expect("solution serializes")
        }
    }

    /// Checks the allocation constraints: one route per robot, each closed at
    /// the depot, every site visited by exactly one robot, stored costs and
    /// flags consistent with the cost matrix and budgets.
    pub fn validate(&self, n_sites: usize, robots: &[Robot], costs: &CostMatrix) -> Result<()> {
        let fail = |msg: String| Err(MrtaError::Validation(msg));
        if costs.len() != n_sites + 1 {
            return fail(format!("cost matrix covers {} locations, expected {}", costs.len(), n_sites + 1));
        }
        if self.routes.len() != robots.len() {
            return fail(format!("{} routes for {} robots", self.routes.len(), robots.len()));
        }
        if self.per_robot_cost.len() != robots.len() || self.feasible.len() != robots.len() {
            return fail("per-robot fields do not match the fleet size".into());
        }
        let mut owner = vec![None; n_sites + 1];
        for (k, route) in self.routes.iter().enumerate() {
            let order = &route.tour.order;
            if route.robot != k {
                return fail(format!("route {k} is labelled robot {}", route.robot));
            }
            if order.len() < 2 || order[0] != 0 || order[order.len() - 1] != 0 {
                return fail(format!("robot {k} route {order:?} does not start and end at the depot"));
            }
            for &loc in &order[1..order.len() - 1] {
                if loc == 0 || loc > n_sites {
                    return fail(format!("robot {k} visits invalid location {loc}"));
                }
                if let Some(other) = owner[loc].replace(k) {
                    return fail(format!("location {loc} visited by robot {other} and robot {k}"));
                }
            }
            let recomputed = route_cost(order, costs);
            if (recomputed - route.tour.cost).abs() > 1e-9 {
                return fail(format!("robot {k} stores cost {} but its route costs {recomputed}", route.tour.cost));
            }
            if self.per_robot_cost[k] != route.tour.cost {
                return fail(format!("per_robot_cost[{k}] disagrees with the route cost"));
            }
            if self.feasible[k] != (route.tour.cost <= robots[k].budget) {
                return fail(format!("feasible[{k}] disagrees with budget {}", robots[k].budget));
            }
        }
        if let Some(loc) = (1..=n_sites).find(|&l| owner[l].is_none()) {
            return fail(format!("location {loc} is not visited by any robot"));
        }
        let total: f64 = self.per_robot_cost.iter().sum();
        if (total - self.total_cost).abs() > 1e-9 {
            return fail(format!("total_cost {} differs from the per-robot sum {total}", self.total_cost));
        }
        Ok(())
    }
}

/// Number of tasks each robot serves, given its route.
pub fn tasks_per_robot(solution: &Solution, tasks: &[Task]) -> Vec<usize> {
    solution.routes.iter().map(|r| tasks.iter().filter(|t| r.tour.members().contains(&t.site)).count()).collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum MappingPolicy {
    /// Robot `k` serves cluster `k`.
    #[default]
    Identity,
    /// Match robots to clusters minimising the summed distance from each
    /// robot's home to its cluster centroid.
    CentroidDistance { homes: Vec<Point> },
}

/// Returns, for each robot, the index of the cluster it serves.
pub fn cluster_to_robot_mapping(
    assignment: &ClusterAssignment,
    robots: &[Robot],
    policy: &MappingPolicy,
) -> Result<Vec<usize>> {
    let k = assignment.k();
    if k != robots.len() {
        return Err(MrtaError::invalid(format!("{k} clusters for {} robots", robots.len())));
    }
    match policy {
        MappingPolicy::Identity => Ok((0..k).collect()),
        MappingPolicy::CentroidDistance { homes } => {
            if homes.len() != k {
                return Err(MrtaError::invalid(format!("{} robot homes for {k} robots", homes.len())));
            }
            if k > MAX_EXHAUSTIVE_ROBOTS {
                return Err(MrtaError::invalid(format!(
                    "centroid-distance mapping supports at most {MAX_EXHAUSTIVE_ROBOTS} robots, got {k}"
                )));
            }
            let mut best: Option<(f64, Vec<usize>)> = None;
            for perm in (0..k).permutations(k) {
                let d: f64 = perm.iter().enumerate().map(|(r, &c)| homes[r].distance(&assignment.centroids[c])).sum();
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, perm));
                }
            }
            Ok(best.map(|(_, p)| p).unwrap_or_default())
        }
    }
}

pub(crate) fn check_instance(scenario: &Scenario, costs: &CostMatrix) -> Result<()> {
    if scenario.robots.is_empty() {
        return Err(MrtaError::invalid("scenario has no robots"));
    }
    if scenario.sites.len() < scenario.robots.len() {
        return Err(MrtaError::invalid(format!("{} sites for {} robots", scenario.sites.len(), scenario.robots.len())));
    }
    if costs.len() != scenario.sites.len() + 1 {
        return Err(MrtaError::invalid(format!(
            "cost matrix covers {} locations, scenario has {}",
            costs.len(),
            scenario.sites.len() + 1
        )));
    }
    Ok(())
}

/// Partition the sites with K-means, give each robot one cluster and route it
/// from the depot with a nearest-neighbour tour improved by 2-opt.
///
/// Budgets are checked, not enforced: over-budget robots are reported in
/// [`Solution::feasible`].
pub fn solve_clustered(scenario: &Scenario, costs: &CostMatrix, config: &KMeansConfig) -> Result<Solution> {
    solve_clustered_with(scenario, costs, config, &MappingPolicy::Identity)
}

pub fn solve_clustered_with(
    scenario: &Scenario,
    costs: &CostMatrix,
    config: &KMeansConfig,
    policy: &MappingPolicy,
) -> Result<Solution> {
    check_instance(scenario, costs)?;
    if config.k != scenario.robots.len() {
        return Err(MrtaError::invalid(format!(
            "k = {} but the scenario has {} robots",
            config.k,
            scenario.robots.len()
        )));
    }
    let (result, elapsed) = timed(|| -> Result<_> {
        let assignment = kmeans_partition(&scenario.sites, config)?;
        let mapping = cluster_to_robot_mapping(&assignment, &scenario.robots, policy)?;
        let clusters = assignment.members();
        let mut routes = Vec::with_capacity(mapping.len());
        for (robot, &cluster) in mapping.iter().enumerate() {
            // site i lives at location index i + 1
            let members: Vec<usize> = clusters[cluster].iter().map(|&i| i + 1).collect();
            let initial = nearest_neighbor_tour(costs, &members)?;
            let improved = two_opt(&initial, costs)?;
            routes.push(RouteResult { robot, tour: improved.tour, trace: improved.trace });
        }
        Ok((assignment, routes))
    });
    let (assignment, routes) = result?;
    Ok(Solution::assemble(Method::Clustered, Some(assignment), routes, &scenario.robots, elapsed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::euclidean_cost_matrix;
    use crate::scenario_io::{generate_scenario, ScenarioParams};

    fn scenario(sites: &[(f64, f64)], robots: usize, budget: f64) -> Scenario {
        Scenario::new(
            Point::new(0.0, 0.0),
            sites.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            (0..robots).map(|id| Robot { id, budget }).collect(),
        )
    }

    fn costs(s: &Scenario) -> CostMatrix {
        euclidean_cost_matrix(s.depot, &s.sites).unwrap()
    }

    #[test]
    fn single_robot_single_site() {
        let s = scenario(&[(3.0, 4.0)], 1, 10.0);
        let sol = solve_clustered(&s, &costs(&s), &KMeansConfig::new(1, 0)).unwrap();
        assert_eq!(sol.routes[0].tour.order, vec![0, 1, 0]);
        assert_eq!(sol.total_cost, 10.0);
        assert_eq!(sol.feasible, vec![true]);

        let tight = scenario(&[(3.0, 4.0)], 1, 9.99);
        let sol = solve_clustered(&tight, &costs(&tight), &KMeansConfig::new(1, 0)).unwrap();
        assert_eq!(sol.feasible, vec![false]);
    }

    /// Exhaustive oracle: every assignment of sites to robots, each route
    /// solved exactly.
    fn exhaustive_best(s: &Scenario, c: &CostMatrix) -> (f64, Vec<Vec<usize>>) {
        let n = s.sites.len();
        let m = s.robots.len();
        let mut best = (f64::INFINITY, vec![]);
        for code in 0..m.pow(n as u32) {
            let mut groups = vec![Vec::new(); m];
            let mut x = code;
            for site in 1..=n {
                groups[x % m].push(site);
                x /= m;
            }
            if groups.iter().any(Vec::is_empty) {
                continue;
            }
            let total: f64 = groups.iter().map(|g| crate::routing::brute_force_tsp(c, g).unwrap().cost).sum();
            if total < best.0 - 1e-9 {
                best = (total, groups);
            }
        }
        best
    }

    #[test]
    fn two_robots_two_arms() {
        let s = scenario(&[(0.0, 10.0), (0.0, 11.0), (10.0, 0.0), (11.0, 0.0)], 2, 100.0);
        let c = costs(&s);
        let (opt, groups) = exhaustive_best(&s, &c);
        assert!((opt - 44.0).abs() < 1e-9);
        for seed in 0..10 {
            let sol = solve_clustered(&s, &c, &KMeansConfig::new(2, seed)).unwrap();
            sol.validate(4, &s.robots, &c).unwrap();
            assert!((sol.total_cost - opt).abs() < 1e-9);
            let mut got: Vec<Vec<usize>> =
                sol.routes.iter().map(|r| r.tour.members().iter().copied().sorted().collect()).collect();
            got.sort();
            let mut want = groups.clone();
            want.sort();
            assert_eq!(got, want);
            assert!(sol.all_feasible());
        }
    }

    #[test]
    fn rejects_bad_instances() {
        let s = scenario(&[(1.0, 1.0)], 2, 100.0);
        assert!(solve_clustered(&s, &costs(&s), &KMeansConfig::new(2, 0)).is_err());
        let s = scenario(&[(1.0, 1.0), (2.0, 2.0)], 2, 100.0);
        assert!(solve_clustered(&s, &costs(&s), &KMeansConfig::new(1, 0)).is_err());
        let wrong = euclidean_cost_matrix(s.depot, &s.sites[..1]).unwrap();
        assert!(solve_clustered(&s, &wrong, &KMeansConfig::new(2, 0)).is_err());
    }

    #[test]
    fn paper_scenario_is_feasible() {
        let s = generate_scenario(&ScenarioParams { seed: 1, ..Default::default() }).unwrap();
        let c = costs(&s);
        let sol = solve_clustered(&s, &c, &KMeansConfig::new(4, 1)).unwrap();
        sol.validate(49, &s.robots, &c).unwrap();
        assert!(sol.all_feasible(), "{:?}", sol.per_robot_cost);
    }

    #[test]
    fn validator_catches_violations() {
        let s = scenario(&[(1.0, 0.0), (2.0, 0.0)], 2, 100.0);
        let c = costs(&s);
        let good = solve_clustered(&s, &c, &KMeansConfig::new(2, 0)).unwrap();
        good.validate(2, &s.robots, &c).unwrap();

        let mut dup = good.clone();
        dup.routes[1].tour = dup.routes[0].tour.clone();
        assert!(dup.validate(2, &s.robots, &c).is_err());

        let mut open = good.clone();
        open.routes[0].tour.order.pop();
        assert!(open.validate(2, &s.robots, &c).is_err());

        let mut cost = good.clone();
        cost.total_cost += 1.0;
        assert!(cost.validate(2, &s.robots, &c).is_err());

        let mut flag = good;
        flag.feasible[0] = false;
        assert!(flag.validate(2, &s.robots, &c).is_err());
    }

    fn assignment_with(centroids: Vec<Point>) -> ClusterAssignment {
        ClusterAssignment { labels: vec![], centroids, wcm_trace: vec![], iterations_used: 0, converged: true }
    }

    #[test]
    fn identity_mapping() {
        let robots: Vec<Robot> = (0..4).map(|id| Robot { id, budget: 1.0 }).collect();
        let a = assignment_with(vec![Point::default(); 4]);
        assert_eq!(cluster_to_robot_mapping(&a, &robots, &MappingPolicy::Identity).unwrap(), vec![0, 1, 2, 3]);
        let one = assignment_with(vec![Point::default()]);
        assert_eq!(cluster_to_robot_mapping(&one, &robots[..1], &MappingPolicy::Identity).unwrap(), vec![0]);
        assert!(cluster_to_robot_mapping(&one, &robots, &MappingPolicy::Identity).is_err());
    }

    #[test]
    fn centroid_mapping_matches_exhaustive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for k in 1..=6 {
            let robots: Vec<Robot> = (0..k).map(|id| Robot { id, budget: 1.0 }).collect();
            let rand_pt =
                |rng: &mut rand_chacha::ChaCha8Rng| Point::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
            let centroids: Vec<Point> = (0..k).map(|_| rand_pt(&mut rng)).collect();
            let homes: Vec<Point> = (0..k).map(|_| rand_pt(&mut rng)).collect();
            let a = assignment_with(centroids.clone());
            let map = cluster_to_robot_mapping(&a, &robots, &MappingPolicy::CentroidDistance { homes: homes.clone() })
                .unwrap();
            let mut sorted = map.clone();
            sorted.sort();
            assert_eq!(sorted, (0..k).collect::<Vec<_>>());
            let got: f64 = map.iter().enumerate().map(|(r, &c)| homes[r].distance(&centroids[c])).sum();
            // independent oracle: Heap's-algorithm style enumeration via recursion
            fn rec(r: usize, used: &mut Vec<bool>, acc: f64, h: &[Point], c: &[Point], best: &mut f64) {
                if r == h.len() {
                    *best = best.min(acc);
                    return;
                }
                for j in 0..c.len() {
                    if !used[j] {
                        used[j] = true;
                        rec(r + 1, used, acc + h[r].distance(&c[j]), h, c, best);
                        used[j] = false;
                    }
                }
            }
            let mut best = f64::INFINITY;
            rec(0, &mut vec![false; k], 0.0, &homes, &centroids, &mut best);
            assert!((got - best).abs() < 1e-9);
        }
    }

    #[test]
    fn homes_on_centroids_map_to_them() {
        let robots: Vec<Robot> = (0..3).map(|id| Robot { id, budget: 1.0 }).collect();
        let centroids = vec![Point::new(0.0, 0.0), Point::new(50.0, 0.0), Point::new(0.0, 50.0)];
        let homes = vec![centroids[2], centroids[0], centroids[1]];
        let a = assignment_with(centroids);
        let map = cluster_to_robot_mapping(&a, &robots, &MappingPolicy::CentroidDistance { homes }).unwrap();
        assert_eq!(map, vec![2, 0, 1]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("tabu".parse::<Method>().is_err());
    }
}
