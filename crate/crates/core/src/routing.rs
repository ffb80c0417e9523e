//! Depot-anchored routes: nearest-neighbour construction, 2-opt
//! improvement and an exhaustive oracle for small member sets.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{MrtaError, Result};
use crate::geometry::CostMatrix;

/// Improvements smaller than this are ignored.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

/// Largest member set [`brute_force_tsp`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 10;

/// A closed route over location indices. `order` starts and ends at the
/// depot (index 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub cost: f64,
}

impl Tour {
    /// Builds a tour from its order, computing the cost.
    pub fn from_order(order: Vec<usize>, costs: &CostMatrix) -> Result<Self> {
        validate_order(&order, costs.len())?;
        let cost = route_cost(&order, costs);
        Ok(Tour { order, cost })
    }

    /// The depot-only tour `[0, 0]`.
    pub fn empty() -> Self {
        Tour { order: vec![0, 0], cost: 0.0 }
    }

    /// Visited locations excluding the depot endpoints.
    pub fn members(&self) -> &[usize] {
        &self.order[1..self.order.len() - 1]
    }

    pub fn is_empty(&self) -> bool {
        self.order.len() <= 2
    }
}

/// Sum of consecutive-pair costs along `order`.
pub fn route_cost(order: &[usize], costs: &CostMatrix) -> f64 {
    order.windows(2).map(|w| costs.get(w[0], w[1])).sum()
}

fn validate_order(order: &[usize], n: usize) -> Result<()> {
    if order.len() < 2 || order[0] != 0 || order[order.len() - 1] != 0 {
        return Err(MrtaError::invalid(format!("tour {order:?} must start and end at the depot")));
    }
    let mut seen = vec![false; n];
    for &loc in &order[1..order.len() - 1] {
        if loc == 0 || loc >= n {
            return Err(MrtaError::invalid(format!("tour {order:?} visits invalid location {loc}")));
        }
        if std::mem::replace(&mut seen[loc], true) {
            return Err(MrtaError::invalid(format!("tour {order:?} visits location {loc} twice")));
        }
    }
    Ok(())
}

fn validate_members(members: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &m in members {
        if m == 0 || m >= n {
            return Err(MrtaError::invalid(format!("member {m} is the depot or outside 1..{n}")));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(MrtaError::invalid(format!("member {m} listed twice")));
        }
    }
    Ok(())
}

/// Greedy chain from the depot, always moving to the closest unvisited member
/// (lowest index on ties), then back to the depot.
pub fn nearest_neighbor_tour(costs: &CostMatrix, members: &[usize]) -> Result<Tour> {
    validate_members(members, costs.len())?;
    let mut remaining: Vec<usize> = members.iter().copied().sorted().collect();
    let mut order = Vec::with_capacity(members.len() + 2);
    order.push(0);
    let mut cur = 0;
    while !remaining.is_empty() {
        let mut best = 0;
        for (pos, &cand) in remaining.iter().enumerate().skip(1) {
            if costs.get(cur, cand) < costs.get(cur, remaining[best]) {
                best = pos;
            }
        }
        cur = remaining.remove(best);
        order.push(cur);
    }
    order.push(0);
    let cost = route_cost(&order, costs);
    Ok(Tour { order, cost })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoOptOutcome {
    pub tour: Tour,
    /// Tour cost before the first pass, then after every pass.
    pub trace: Vec<f64>,
}

/// First-improvement 2-opt. Sweeps all edge pairs, reversing the segment
/// between them whenever that shortens the tour by more than
/// [`IMPROVEMENT_EPS`], and repeats until a sweep changes nothing.
///
/// Assumes symmetric costs. The depot entries at both ends never move.
pub fn two_opt(tour: &Tour, costs: &CostMatrix) -> Result<TwoOptOutcome> {
    validate_order(&tour.order, costs.len())?;
    let mut t = tour.order.clone();
    let mut cost = route_cost(&t, costs);
    let mut trace = vec![cost];
    // edges are (t[e], t[e+1]) for e in 0..=last
    let last = t.len() - 2;
    let mut improvement = true;
    while improvement {
        improvement = false;
        for i in 0..last {
            for j in (i + 2)..=last {
                let removed = costs.get(t[i], t[i + 1]) + costs.get(t[j], t[j + 1]);
                let added = costs.get(t[i], t[j]) + costs.get(t[i + 1], t[j + 1]);
                if removed - added > IMPROVEMENT_EPS {
                    t[i + 1..=j].reverse();
                    improvement = true;
                }
            }
        }
        if improvement {
            cost = route_cost(&t, costs);
            trace.push(cost);
        }
    }
    Ok(TwoOptOutcome { tour: Tour { order: t, cost }, trace })
}

/// True if no edge pair admits an improving 2-opt exchange.
pub fn is_two_opt_optimal(tour: &Tour, costs: &CostMatrix) -> bool {
    let t = &tour.order;
    let last = t.len() - 2;
    (0..last).all(|i| {
        ((i + 1)..=last).all(|j| {
            costs.get(t[i], t[i + 1]) + costs.get(t[j], t[j + 1])
                <= costs.get(t[i], t[j]) + costs.get(t[i + 1], t[j + 1]) + IMPROVEMENT_EPS
        })
    })
}

/// Exact minimum-cost tour by enumerating every visiting order. Among orders
/// within [`IMPROVEMENT_EPS`] of each other the lexicographically smallest
/// wins.
pub fn brute_force_tsp(costs: &CostMatrix, members: &[usize]) -> Result<Tour> {
    if members.len() > BRUTE_FORCE_LIMIT {
        return Err(MrtaError::SizeLimit { members: members.len(), limit: BRUTE_FORCE_LIMIT });
    }
    validate_members(members, costs.len())?;
    if members.is_empty() {
        return Ok(Tour::empty());
    }
    let sorted: Vec<usize> = members.iter().copied().sorted().collect();
    let mut best: Option<Tour> = None;
    let mut order = Vec::with_capacity(sorted.len() + 2);
    for perm in sorted.iter().copied().permutations(sorted.len()) {
        order.clear();
        order.push(0);
        order.extend(perm);
        order.push(0);
        let c = route_cost(&order, costs);
        if best.as_ref().is_none_or(|b| c < b.cost - IMPROVEMENT_EPS) {
            best = Some(Tour { order: order.clone(), cost: c });
        }
    }
    Ok(best.expect("at least one permutation"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{euclidean_cost_matrix, Point};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix(points: &[(f64, f64)]) -> CostMatrix {
        let pts: Vec<Point> = points.iter().map(|&(x, y)| Point::new(x, y)).collect();
        euclidean_cost_matrix(Point::new(0.0, 0.0), &pts).unwrap()
    }

    #[test]
    fn nn_single_site() {
        let c = CostMatrix::from_rows(vec![vec![0.0, 5.0], vec![5.0, 0.0]]).unwrap();
        let t = nearest_neighbor_tour(&c, &[1]).unwrap();
        assert_eq!(t.order, vec![0, 1, 0]);
        assert_eq!(t.cost, 10.0);
    }

    #[test]
    fn nn_collinear() {
        let c = matrix(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        let t = nearest_neighbor_tour(&c, &[3, 1, 2]).unwrap();
        assert_eq!(t.order, vec![0, 1, 2, 3, 0]);
        assert_eq!(t.cost, 6.0);
        // no order beats it
        assert_eq!(brute_force_tsp(&c, &[1, 2, 3]).unwrap().cost, 6.0);
    }

    #[test]
    fn nn_empty() {
        let c = matrix(&[(1.0, 0.0)]);
        assert_eq!(nearest_neighbor_tour(&c, &[]).unwrap(), Tour::empty());
    }

    #[test]
    fn nn_rejects_depot_member() {
        let c = matrix(&[(1.0, 0.0)]);
        assert!(nearest_neighbor_tour(&c, &[0, 1]).is_err());
        assert!(nearest_neighbor_tour(&c, &[1, 1]).is_err());
        assert!(nearest_neighbor_tour(&c, &[2]).is_err());
    }

    #[test]
    fn two_opt_fixes_crossed_square() {
        let c = matrix(&[(0.0, 10.0), (10.0, 10.0), (10.0, 0.0)]);
        let start = Tour::from_order(vec![0, 2, 1, 3, 0], &c).unwrap();
        let expected_start = 200f64.sqrt() + 10.0 + 200f64.sqrt() + 10.0;
        assert!((start.cost - expected_start).abs() < 1e-9);
        assert!((start.cost - 48.284).abs() < 1e-3);
        let out = two_opt(&start, &c).unwrap();
        assert!((out.tour.cost - 40.0).abs() < 1e-9);
        assert_eq!(brute_force_tsp(&c, &[1, 2, 3]).unwrap().cost, 40.0);
        assert_eq!(out.trace.first().copied(), Some(start.cost));
        assert_eq!(out.trace.last().copied(), Some(out.tour.cost));
        assert!(is_two_opt_optimal(&out.tour, &c));
    }

    #[test]
    fn two_opt_keeps_optimal_tour() {
        let c = matrix(&[(0.0, 10.0), (10.0, 10.0), (10.0, 0.0)]);
        let opt = Tour::from_order(vec![0, 1, 2, 3, 0], &c).unwrap();
        let out = two_opt(&opt, &c).unwrap();
        assert_eq!(out.tour, opt);
        assert_eq!(out.trace, vec![opt.cost]);
    }

    #[test]
    fn two_opt_rejects_malformed() {
        let c = matrix(&[(0.0, 10.0), (10.0, 10.0)]);
        let bad = Tour { order: vec![1, 2, 0], cost: 0.0 };
        assert!(matches!(two_opt(&bad, &c), Err(MrtaError::InvalidInput(_))));
        let dup = Tour { order: vec![0, 1, 1, 0], cost: 0.0 };
        assert!(two_opt(&dup, &c).is_err());
    }

    #[test]
    fn two_opt_on_trivial_tours() {
        let c = matrix(&[(3.0, 4.0)]);
        assert_eq!(two_opt(&Tour::empty(), &c).unwrap().tour, Tour::empty());
        let one = Tour::from_order(vec![0, 1, 0], &c).unwrap();
        assert_eq!(two_opt(&one, &c).unwrap().tour.cost, 10.0);
    }

    #[test]
    fn brute_force_examples() {
        let c = CostMatrix::from_rows(vec![vec![0.0, 7.0], vec![7.0, 0.0]]).unwrap();
        assert_eq!(brute_force_tsp(&c, &[1]).unwrap().cost, 14.0);

        let sym = matrix(&[(1.0, 0.0), (0.0, 1.0)]);
        let t = brute_force_tsp(&sym, &[2, 1]).unwrap();
        assert_eq!(t.order, vec![0, 1, 2, 0]);

        let many: Vec<(f64, f64)> = (1..=11).map(|i| (i as f64, 0.0)).collect();
        let c = matrix(&many);
        let members: Vec<usize> = (1..=11).collect();
        assert!(matches!(brute_force_tsp(&c, &members), Err(MrtaError::SizeLimit { members: 11, limit: 10 })));
    }

    #[test]
    fn small_instances_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=3);
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect();
            let c = matrix(&pts);
            let members: Vec<usize> = (1..=n).collect();
            let nn = nearest_neighbor_tour(&c, &members).unwrap();
            let out = two_opt(&nn, &c).unwrap();
            let exact = brute_force_tsp(&c, &members).unwrap();
            assert!((out.tour.cost - exact.cost).abs() < 1e-9);
        }
    }
}
