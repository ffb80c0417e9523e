//! Evaluation metrics: total mission cost, load balance, inter-robot path
//! intersections and solve time.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::allocator::Solution;
use crate::geometry::{segments_intersect, Intersection, LegGeometry, Point, Segment, StraightLegs, COINCIDENCE_TOL};

/// Intersections closer than this to the depot are not counted.
pub const DEFAULT_DEPOT_EXCLUSION_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total_cost: f64,
    pub solve_time: f64,
    pub load_balance: f64,
    /// Intersections between zone legs ([`CollisionScope::ZoneLegs`]).
    pub collision_count: usize,
    /// Intersections when depot transit legs are included.
    pub collision_count_all_legs: usize,
    pub per_robot_cost: Vec<f64>,
}

impl MetricsReport {
    pub fn compute(solution: &Solution, legs: &impl LegGeometry, depot: Point, depot_exclusion_radius: f64) -> Self {
        let per_robot_cost: Vec<f64> = solution.routes.iter().map(|r| r.tour.cost).collect();
        MetricsReport {
            total_cost: total_mission_cost(solution),
            solve_time: solution.solve_time,
            load_balance: load_balance(solution),
            collision_count: collision_count_with(
                solution,
                legs,
                depot,
                depot_exclusion_radius,
                CollisionScope::ZoneLegs,
            ),
            collision_count_all_legs: collision_count_with(
                solution,
                legs,
                depot,
                depot_exclusion_radius,
                CollisionScope::AllLegs,
            ),
            per_robot_cost,
        }
    }
}

/// Sum of every robot's route cost.
pub fn total_mission_cost(solution: &Solution) -> f64 {
    solution.routes.iter().map(|r| r.tour.cost).sum()
}

/// Population standard deviation of per-robot route costs.
pub fn load_balance(solution: &Solution) -> f64 {
    let costs: Vec<f64> = solution.routes.iter().map(|r| r.tour.cost).collect();
    std_dev(&costs)
}

pub fn std_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Collision count for straight site-to-site legs.
pub fn collision_count(solution: &Solution, sites: &[Point], depot: Point, depot_exclusion_radius: f64) -> usize {
    let legs = StraightLegs::new(depot, sites);
    collision_count_with(solution, &legs, depot, depot_exclusion_radius, CollisionScope::default())
}

/// Counts intersections between the trajectories of distinct robots.
///
/// Each crossing point counts once per robot pair, and each shared collinear
/// stretch counts once however many legs run along it. Points within
/// `depot_exclusion_radius` of the depot, and overlaps lying entirely inside
/// that disc, are ignored.
pub fn collision_count_with(
    solution: &Solution,
    legs: &impl LegGeometry,
    depot: Point,
    depot_exclusion_radius: f64,
    scope: CollisionScope,
) -> usize {
    let paths: Vec<Vec<Segment>> = solution.routes.iter().map(|r| trajectory(&r.tour.order, legs, scope)).collect();
    let boxes: Vec<Vec<Bbox>> = paths.iter().map(|p| p.iter().map(Bbox::of).collect()).collect();
    let near_depot = |p: &Point| p.distance(&depot) < depot_exclusion_radius;

    let mut total = 0;
    for a in 0..paths.len() {
        for b in (a + 1)..paths.len() {
            let mut overlaps: Vec<Segment> = Vec::new();
            let mut points: Vec<Point> = Vec::new();
            for (sa, ba) in paths[a].iter().zip(&boxes[a]) {
                for (sb, bb) in paths[b].iter().zip(&boxes[b]) {
                    if !ba.touches(bb) {
                        continue;
                    }
                    match segments_intersect(sa, sb) {
                        Some(Intersection::Overlap(o)) => {
                            if !(near_depot(&o.p) && near_depot(&o.q)) {
                                add_overlap(&mut overlaps, o);
                            }
                        }
                        Some(Intersection::Point(p)) if !near_depot(&p) => points.push(p),
                        _ => {}
                    }
                }
            }
            let mut counted: Vec<Point> = Vec::new();
            for p in points {
                let dup = counted.iter().any(|c| c.distance(&p) <= COINCIDENCE_TOL)
                    || overlaps.iter().any(|o| o.distance_to(&p) <= COINCIDENCE_TOL);
                if !dup {
                    counted.push(p);
                }
            }
            total += overlaps.len() + counted.len();
        }
    }
    total
}

/// Records an overlap stretch, merging it with any recorded stretch that
/// contains it or that it contains.
fn add_overlap(overlaps: &mut Vec<Segment>, o: Segment) {
    let within = |outer: &Segment, inner: &Segment| {
        outer.distance_to(&inner.p) <= COINCIDENCE_TOL && outer.distance_to(&inner.q) <= COINCIDENCE_TOL
    };
    if overlaps.iter().any(|e| within(e, &o)) {
        return;
    }
    overlaps.retain(|e| !within(&o, e));
    overlaps.push(o);
}

/// Which legs of a route count as its trajectory for collision counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionScope {
    /// Only site-to-site legs inside each robot's zone. Transit legs to and
    /// from the shared depot are left out.
    #[default]
    ZoneLegs,
    /// Every leg, depot transit included.
    AllLegs,
}

/// A route's physical path as maximal straight runs, zero-length hops removed.
fn trajectory(order: &[usize], legs: &impl LegGeometry, scope: CollisionScope) -> Vec<Segment> {
    let mut chains: Vec<Vec<Point>> = vec![Vec::new()];
    for w in order.windows(2) {
        if scope == CollisionScope::ZoneLegs && (w[0] == 0 || w[1] == 0) {
            if !chains.last().is_none_or(Vec::is_empty) {
                chains.push(Vec::new());
            }
            continue;
        }
        let chain = chains.last_mut().expect("non-empty");
        for p in legs.leg(w[0], w[1]) {
            if chain.last().is_none_or(|last| last.distance(&p) > COINCIDENCE_TOL) {
                chain.push(p);
            }
        }
    }
    let mut runs: Vec<Segment> = Vec::new();
    for chain in &chains {
        let first = runs.len();
        for w in chain.windows(2) {
            let next = Segment::new(w[0], w[1]);
            if runs.len() > first {
                let last = runs.last_mut().expect("non-empty");
                if continues_straight(last, &next) {
                    last.q = next.q;
                    continue;
                }
            }
            runs.push(next);
        }
    }
    runs
}

fn continues_straight(run: &Segment, next: &Segment) -> bool {
    let (dx1, dy1) = (run.q.x - run.p.x, run.q.y - run.p.y);
    let (dx2, dy2) = (next.q.x - next.p.x, next.q.y - next.p.y);
    let cross = dx1 * dy2 - dy1 * dx2;
    let dot = dx1 * dx2 + dy1 * dy2;
    dot > 0.0 && cross.abs() <= 1e-12 * run.length() * next.length()
}

#[derive(Debug, Clone, Copy)]
struct Bbox {
    min: Point,
    max: Point,
}

impl Bbox {
    fn of(s: &Segment) -> Self {
        Bbox {
            min: Point::new(s.p.x.min(s.q.x), s.p.y.min(s.q.y)),
            max: Point::new(s.p.x.max(s.q.x), s.p.y.max(s.q.y)),
        }
    }

    fn touches(&self, o: &Bbox) -> bool {
        let t = COINCIDENCE_TOL;
        self.min.x <= o.max.x + t && o.min.x <= self.max.x + t && self.min.y <= o.max.y + t && o.min.y <= self.max.y + t
    }
}

/// Runs `f` and returns its result with the elapsed wall-clock seconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Median of the values; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}
