//! Workspace geometry: points, cost matrices (straight-line and grid
//! Dijkstra) and the segment intersection test behind the collision metric.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MrtaError, Result};

/// Endpoints closer than this are treated as the same point.
pub const COINCIDENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn add_scaled(self, d: Point, t: f64) -> Point {
        Point::new(self.x + d.x * t, self.y + d.y * t)
    }

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub p: Point,
    pub q: Point,
}

impl Segment {
    pub const fn new(p: Point, q: Point) -> Self {
        Segment { p, q }
    }

    pub fn length(&self) -> f64 {
        self.p.distance(&self.q)
    }

    /// Distance from `pt` to the closest point of the segment.
    pub fn distance_to(&self, pt: &Point) -> f64 {
        let d = self.q.sub(self.p);
        let len_sq = d.dot(d);
        if len_sq == 0.0 {
            return self.p.distance(pt);
        }
        let t = (pt.sub(self.p).dot(d) / len_sq).clamp(0.0, 1.0);
        self.p.add_scaled(d, t).distance(pt)
    }
}

/// Result of intersecting two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intersection {
    Point(Point),
    /// The segments are collinear and share a stretch of positive length.
    Overlap(Segment),
}

/// Intersects two closed segments.
///
/// Shared endpoints are reported as that endpoint. Collinear segments that
/// share more than a single point are reported as [`Intersection::Overlap`].
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> Option<Intersection> {
    for a in [s1.p, s1.q] {
        for b in [s2.p, s2.q] {
            if a.distance(&b) <= COINCIDENCE_TOL {
                // A shared endpoint may still hide a collinear overlap.
                if let Some(Intersection::Overlap(o)) = collinear_overlap(s1, s2) {
                    return Some(Intersection::Overlap(o));
                }
                return Some(Intersection::Point(a));
            }
        }
    }

    let r = s1.q.sub(s1.p);
    let s = s2.q.sub(s2.p);
    let len_r = r.dot(r).sqrt();
    let len_s = s.dot(s).sqrt();

    if len_r <= COINCIDENCE_TOL {
        return (s2.distance_to(&s1.p) <= COINCIDENCE_TOL).then_some(Intersection::Point(s1.p));
    }
    if len_s <= COINCIDENCE_TOL {
        return (s1.distance_to(&s2.p) <= COINCIDENCE_TOL).then_some(Intersection::Point(s2.p));
    }

    let denom = r.cross(s);
    let qp = s2.p.sub(s1.p);
    if denom.abs() <= 1e-12 * len_r * len_s {
        return collinear_overlap(s1, s2);
    }

    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let slack_t = COINCIDENCE_TOL / len_r;
    let slack_u = COINCIDENCE_TOL / len_s;
    if (-slack_t..=1.0 + slack_t).contains(&t) && (-slack_u..=1.0 + slack_u).contains(&u) {
        Some(Intersection::Point(s1.p.add_scaled(r, t.clamp(0.0, 1.0))))
    } else {
        None
    }
}

fn collinear_overlap(s1: &Segment, s2: &Segment) -> Option<Intersection> {
    let r = s1.q.sub(s1.p);
    let len_sq = r.dot(r);
    if len_sq == 0.0 {
        return None;
    }
    let len = len_sq.sqrt();
    // Both endpoints of s2 must lie on the carrier line of s1.
    if (s2.p.sub(s1.p).cross(r) / len).abs() > COINCIDENCE_TOL
        || (s2.q.sub(s1.p).cross(r) / len).abs() > COINCIDENCE_TOL
    {
        return None;
    }
    let t0 = s2.p.sub(s1.p).dot(r) / len_sq;
    let t1 = s2.q.sub(s1.p).dot(r) / len_sq;
    let lo = t0.min(t1).max(0.0);
    let hi = t0.max(t1).min(1.0);
    let slack = COINCIDENCE_TOL / len;
    if hi < lo - slack {
        return None;
    }
    let a = s1.p.add_scaled(r, lo.min(hi));
    let b = s1.p.add_scaled(r, hi.max(lo));
    if a.distance(&b) <= COINCIDENCE_TOL {
        Some(Intersection::Point(a))
    } else {
        Some(Intersection::Overlap(Segment::new(a, b)))
    }
}

/// Dense symmetric travel-cost matrix over locations, depot at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    cost: Vec<f64>,
}

impl CostMatrix {
    /// Builds a matrix from explicit rows, checking shape, zero diagonal and
    /// non-negativity.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut cost = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(MrtaError::invalid(format!("cost row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, c) in row.into_iter().enumerate() {
                if !c.is_finite() || c < 0.0 {
                    return Err(MrtaError::invalid(format!("cost[{i}][{j}] = {c} is not a finite non-negative value")));
                }
                if i == j && c != 0.0 {
                    return Err(MrtaError::invalid(format!("cost[{i}][{i}] = {c}, expected 0")));
                }
                cost.push(c);
            }
        }
        Ok(CostMatrix { n, cost })
    }

    /// Number of locations, depot included.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.cost[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

fn locations(depot: Point, sites: &[Point]) -> Result<Vec<Point>> {
    let mut all = Vec::with_capacity(sites.len() + 1);
    all.push(depot);
    all.extend_from_slice(sites);
    for (i, p) in all.iter().enumerate() {
        if !p.is_finite() {
            return Err(MrtaError::invalid(format!("location {i} has non-finite coordinates {p}")));
        }
    }
    Ok(all)
}

/// Straight-line distances between the depot and every site.
pub fn euclidean_cost_matrix(depot: Point, sites: &[Point]) -> Result<CostMatrix> {
    let all = locations(depot, sites)?;
    let n = all.len();
    let mut cost = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = all[i].distance(&all[j]);
            cost[i * n + j] = d;
            cost[j * n + i] = d;
        }
    }
    Ok(CostMatrix { n, cost })
}

/// Occupancy grid. Cell `(cx, cy)` is centred at `(cx * cell_size, cy * cell_size)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cell_size: f64,
    blocked: BTreeSet<usize>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, cell_size: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(MrtaError::invalid(format!("grid dimensions {width}x{height} must be at least 1x1")));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(MrtaError::invalid(format!("cell size {cell_size} must be positive")));
        }
        Ok(GridMap { width, height, cell_size, blocked: BTreeSet::new() })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn blocked_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blocked.iter().map(|&idx| (idx % self.width, idx / self.width))
    }

    pub fn block(&mut self, cx: usize, cy: usize) -> Result<()> {
        if cx >= self.width || cy >= self.height {
            return Err(MrtaError::invalid(format!("cell ({cx}, {cy}) outside {}x{} grid", self.width, self.height)));
        }
        self.blocked.insert(cy * self.width + cx);
        Ok(())
    }

    pub fn is_blocked(&self, cx: usize, cy: usize) -> bool {
        self.blocked.contains(&(cy * self.width + cx))
    }

    pub fn cell_center(&self, cx: usize, cy: usize) -> Point {
        Point::new(cx as f64 * self.cell_size, cy as f64 * self.cell_size)
    }

    /// Snaps a point to the nearest cell centre. Fails if the snap moves the
    /// point by `cell_size / 2` or more, or if the cell is blocked.
    pub fn snap(&self, p: &Point) -> Result<(usize, usize)> {
        if !p.is_finite() {
            return Err(MrtaError::invalid(format!("point {p} is not finite")));
        }
        let cx = (p.x / self.cell_size).round();
        let cy = (p.y / self.cell_size).round();
        let in_grid = cx >= 0.0 && cy >= 0.0 && cx < self.width as f64 && cy < self.height as f64;
        if !in_grid {
            return Err(MrtaError::invalid(format!("point {p} lies outside the grid")));
        }
        let (cx, cy) = (cx as usize, cy as usize);
        let moved = self.cell_center(cx, cy).distance(p);
        if moved >= self.cell_size / 2.0 {
            return Err(MrtaError::invalid(format!(
                "point {p} is {moved:.4} m from the nearest cell centre (limit {})",
                self.cell_size / 2.0
            )));
        }
        if self.is_blocked(cx, cy) {
            return Err(MrtaError::invalid(format!("point {p} falls on blocked cell ({cx}, {cy})")));
        }
        Ok((cx, cy))
    }

    /// Parses the text format: a header line `width height cell_size`, then
    /// `height` rows of `width` characters, `.` free and `#` blocked. The
    /// first row is `y = 0`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| MrtaError::Parse { context: "line 1".into(), message: "empty grid file".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let header_err = |message: String| MrtaError::Parse { context: "line 1".into(), message };
        if fields.len() != 3 {
            return Err(header_err(format!("expected `width height cell_size`, got {header:?}")));
        }
        let width: usize = fields[0].parse().map_err(|e| header_err(format!("width: {e}")))?;
        let height: usize = fields[1].parse().map_err(|e| header_err(format!("height: {e}")))?;
        let cell_size: f64 = fields[2].parse().map_err(|e| header_err(format!("cell_size: {e}")))?;
        let mut map = GridMap::new(width, height, cell_size).map_err(|e| header_err(e.to_string()))?;

        let mut rows = 0;
        for (lineno, line) in lines {
            let ctx = || format!("line {}", lineno + 1);
            if rows == height {
                return Err(MrtaError::Parse { context: ctx(), message: format!("more than {height} rows") });
            }
            let row = line.trim_end();
            if row.chars().count() != width {
                return Err(MrtaError::Parse {
                    context: ctx(),
                    message: format!("row has {} cells, expected {width}", row.chars().count()),
                });
            }
            for (cx, ch) in row.chars().enumerate() {
                match ch {
                    '.' => {}
                    '#' => {
                        map.blocked.insert(rows * width + cx);
                    }
                    other => {
                        return Err(MrtaError::Parse {
                            context: format!("{}, column {}", ctx(), cx + 1),
                            message: format!("unexpected cell character {other:?}"),
                        })
                    }
                }
            }
            rows += 1;
        }
        if rows != height {
            return Err(MrtaError::Parse {
                context: "end of file".into(),
                message: format!("found {rows} rows, expected {height}"),
            });
        }
        Ok(map)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.width, self.height, self.cell_size);
        for cy in 0..self.height {
            for cx in 0..self.width {
                out.push(if self.is_blocked(cx, cy) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        GridMap::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy) = (idx % self.width, idx / self.width);
        let w = self.width;
        let candidates = [
            (cx > 0).then(|| idx - 1),
            (cx + 1 < w).then(|| idx + 1),
            (cy > 0).then(|| idx - w),
            (cy + 1 < self.height).then(|| idx + w),
        ];
        candidates.into_iter().flatten().filter(move |n| !self.blocked.contains(n))
    }

    /// Single-source Dijkstra in unit steps. Returns step counts and the
    /// predecessor of each reached cell.
    fn shortest_paths(&self, source: usize) -> (Vec<u32>, Vec<u32>) {
        let cells = self.width * self.height;
        let mut dist = vec![u32::MAX; cells];
        let mut pred = vec![u32::MAX; cells];
        let mut heap = BinaryHeap::new();
        dist[source] = 0;
        heap.push(Reverse((0u32, source)));
        while let Some(Reverse((d, idx))) = heap.pop() {
            if d > dist[idx] {
                continue;
            }
            for next in self.neighbors(idx) {
                let nd = d + 1;
                if nd < dist[next] {
                    dist[next] = nd;
                    pred[next] = idx as u32;
                    heap.push(Reverse((nd, next)));
                }
            }
        }
        (dist, pred)
    }
}

/// Shortest grid paths between every pair of scenario locations.
#[derive(Debug, Clone)]
pub struct GridPaths {
    cells: Vec<usize>,
    width: usize,
    cell_size: f64,
    /// Predecessor tree rooted at each location's cell.
    trees: Vec<Vec<u32>>,
}

impl GridPaths {
    fn cell_point(&self, idx: usize) -> Point {
        Point::new((idx % self.width) as f64 * self.cell_size, (idx / self.width) as f64 * self.cell_size)
    }

    /// Cell-centre polyline from location `from` to location `to`.
    /// `leg(a, b)` is always the reverse of `leg(b, a)`.
    pub fn leg(&self, from: usize, to: usize) -> Vec<Point> {
        let (root, target) = if from <= to { (from, to) } else { (to, from) };
        let tree = &self.trees[root];
        let mut cur = self.cells[target];
        let stop = self.cells[root];
        // Walk back from target to root, which yields the root→target path reversed.
        let mut path = vec![self.cell_point(cur)];
        while cur != stop {
            cur = tree[cur] as usize;
            path.push(self.cell_point(cur));
        }
        if from <= to {
            path.reverse();
        }
        path
    }
}

/// Grid shortest-path costs, 4-connected, in metres.
pub fn dijkstra_cost_matrix(map: &GridMap, depot: Point, sites: &[Point]) -> Result<CostMatrix> {
    dijkstra_costs_with_paths(map, depot, sites).map(|(c, _)| c)
}

/// Like [`dijkstra_cost_matrix`] but also keeps the paths for trajectory
/// analysis.
pub fn dijkstra_costs_with_paths(map: &GridMap, depot: Point, sites: &[Point]) -> Result<(CostMatrix, GridPaths)> {
    let all = locations(depot, sites)?;
    let cells = all
        .iter()
        .enumerate()
        .map(|(i, p)| {
            map.snap(p)
                .map(|(cx, cy)| cy * map.width + cx)
                .map_err(|e| MrtaError::invalid(format!("location {i}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = all.len();
    let mut cost = vec![0.0; n * n];
    let mut trees = Vec::with_capacity(n);
    for i in 0..n {
        let (dist, pred) = map.shortest_paths(cells[i]);
        for j in 0..n {
            let steps = dist[cells[j]];
            if steps == u32::MAX {
                return Err(MrtaError::InfeasiblePair { from: i, to: j });
            }
            if j > i {
                let c = steps as f64 * map.cell_size;
                cost[i * n + j] = c;
                cost[j * n + i] = c;
            }
        }
        trees.push(pred);
    }
    let paths = GridPaths { cells, width: map.width, cell_size: map.cell_size, trees };
    Ok((CostMatrix { n, cost }, paths))
}

/// Physical trajectory of each leg between two locations.
pub trait LegGeometry {
    fn leg(&self, from: usize, to: usize) -> Vec<Point>;
}

/// Legs are straight lines between location coordinates (depot at 0).
#[derive(Debug, Clone)]
pub struct StraightLegs {
    pub locations: Vec<Point>,
}

impl StraightLegs {
    pub fn new(depot: Point, sites: &[Point]) -> Self {
        let mut locations = Vec::with_capacity(sites.len() + 1);
        locations.push(depot);
        locations.extend_from_slice(sites);
        StraightLegs { locations }
    }
}

impl LegGeometry for StraightLegs {
    fn leg(&self, from: usize, to: usize) -> Vec<Point> {
        vec![self.locations[from], self.locations[to]]
    }
}

impl LegGeometry for GridPaths {
    fn leg(&self, from: usize, to: usize) -> Vec<Point> {
        GridPaths::leg(self, from, to)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn seg(a: (f64, f64), b: (f64, f64)) -> Segment {
        Segment::new(pt(a.0, a.1), pt(b.0, b.1))
    }

    #[test]
    fn euclidean_three_four_five() {
        let m = euclidean_cost_matrix(pt(0.0, 0.0), &[pt(3.0, 4.0)]).unwrap();
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.get(1, 0), 5.0);
    }

    #[test]
    fn euclidean_depot_only() {
        let m = euclidean_cost_matrix(pt(0.0, 0.0), &[]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn euclidean_diagonal_pair() {
        let m = euclidean_cost_matrix(pt(0.0, 0.0), &[pt(10.0, 0.0), pt(0.0, 10.0)]).unwrap();
        // independent route: sqrt of summed squared differences
        let expected = ((10.0f64 - 0.0).powi(2) + (0.0f64 - 10.0).powi(2)).sqrt();
        assert!((m.get(1, 2) - expected).abs() < 1e-12);
        assert!((m.get(1, 2) - 14.142135623730951).abs() < 1e-12);
    }

    #[test]
    fn euclidean_rejects_nan() {
        let err = euclidean_cost_matrix(pt(0.0, 0.0), &[pt(f64::NAN, 1.0)]).unwrap_err();
        assert!(matches!(err, MrtaError::InvalidInput(_)));
    }

    #[test]
    fn dijkstra_free_grid_is_manhattan() {
        let map = GridMap::new(10, 10, 1.0).unwrap();
        let m = dijkstra_cost_matrix(&map, pt(0.0, 0.0), &[pt(3.0, 4.0)]).unwrap();
        assert_eq!(m.get(0, 1), 7.0);
    }

    /// Plain BFS over the grid as an independent oracle for the wall case.
    fn bfs_steps(map: &GridMap, from: (usize, usize), to: (usize, usize)) -> Option<usize> {
        let (w, h) = (map.width(), map.height());
        let mut seen = vec![false; w * h];
        let mut frontier = vec![from];
        seen[from.1 * w + from.0] = true;
        let mut steps = 0;
        while !frontier.is_empty() {
            if frontier.contains(&to) {
                return Some(steps);
            }
            let mut next = Vec::new();
            for (x, y) in frontier {
                let cand = [(x.wrapping_sub(1), y), (x + 1, y), (x, y.wrapping_sub(1)), (x, y + 1)];
                for (nx, ny) in cand {
                    if nx < w && ny < h && !map.is_blocked(nx, ny) && !seen[ny * w + nx] {
                        seen[ny * w + nx] = true;
                        next.push((nx, ny));
                    }
                }
            }
            frontier = next;
            steps += 1;
        }
        None
    }

    #[test]
    fn dijkstra_detours_around_wall() {
        let mut map = GridMap::new(5, 5, 1.0).unwrap();
        for y in 0..4 {
            map.block(2, y).unwrap();
        }
        assert_eq!(bfs_steps(&map, (0, 0), (4, 0)), Some(12));
        let (m, paths) = dijkstra_costs_with_paths(&map, pt(0.0, 0.0), &[pt(4.0, 0.0)]).unwrap();
        assert_eq!(m.get(0, 1), 12.0);
        let leg = paths.leg(0, 1);
        assert_eq!(leg.len(), 13);
        assert_eq!(leg[0], pt(0.0, 0.0));
        assert_eq!(leg[12], pt(4.0, 0.0));
        let mut back = paths.leg(1, 0);
        back.reverse();
        assert_eq!(leg, back);
    }

    #[test]
    fn dijkstra_unreachable_site() {
        let mut map = GridMap::new(5, 5, 1.0).unwrap();
        for (x, y) in [(3, 4), (4, 3), (3, 3)] {
            map.block(x, y).unwrap();
        }
        let err = dijkstra_cost_matrix(&map, pt(0.0, 0.0), &[pt(1.0, 1.0), pt(4.0, 4.0)]).unwrap_err();
        match err {
            MrtaError::InfeasiblePair { from, to } => assert_eq!((from, to), (0, 2)),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn dijkstra_rejects_blocked_or_far_points() {
        let mut map = GridMap::new(5, 5, 1.0).unwrap();
        map.block(1, 1).unwrap();
        assert!(dijkstra_cost_matrix(&map, pt(0.0, 0.0), &[pt(1.0, 1.0)]).is_err());
        // 0.6 m off-centre diagonally: beyond half a cell
        assert!(dijkstra_cost_matrix(&map, pt(0.0, 0.0), &[pt(2.45, 2.45)]).is_err());
        assert!(dijkstra_cost_matrix(&map, pt(0.0, 0.0), &[pt(9.0, 0.0)]).is_err());
        assert!(dijkstra_cost_matrix(&map, pt(0.0, 0.0), &[pt(2.2, 3.1)]).is_ok());
    }

    #[test]
    fn grid_text_round_trip() {
        let text = "4 3 0.5\n..#.\n....\n#...\n";
        let map = GridMap::parse(text).unwrap();
        assert_eq!(map.width(), 4);
        assert_eq!(map.height(), 3);
        assert_eq!(map.cell_size(), 0.5);
        assert!(map.is_blocked(2, 0));
        assert!(map.is_blocked(0, 2));
        assert_eq!(map.blocked_cells().count(), 2);
        assert_eq!(GridMap::parse(&map.to_text()).unwrap(), map);
    }

    #[test]
    fn grid_text_errors_carry_location() {
        let err = GridMap::parse("3 2 1\n...\n.x.\n").unwrap_err().to_string();
        assert!(err.contains("line 3, column 2"), "{err}");
        let err = GridMap::parse("3 2 1\n...\n").unwrap_err().to_string();
        assert!(err.contains("found 1 rows"), "{err}");
        assert!(GridMap::parse("3 two 1\n").is_err());
    }

    #[test]
    fn crossing_diagonals() {
        let hit = segments_intersect(&seg((0.0, 0.0), (10.0, 10.0)), &seg((0.0, 10.0), (10.0, 0.0)));
        match hit {
            Some(Intersection::Point(p)) => {
                assert!((p.x - 5.0).abs() < 1e-12 && (p.y - 5.0).abs() < 1e-12);
            }
            other => panic!("expected a point, got {other:?}"),
        }
    }

    #[test]
    fn crossing_matches_parametric_scan() {
        // brute force: sample both segments on a fine grid and keep the closest pair
        let (a, b) = (seg((0.0, 0.0), (10.0, 10.0)), seg((0.0, 10.0), (10.0, 0.0)));
        let steps = 2000;
        let mut best = (f64::INFINITY, Point::default());
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let pa = pt(a.p.x + (a.q.x - a.p.x) * t, a.p.y + (a.q.y - a.p.y) * t);
            for j in 0..=steps {
                let u = j as f64 / steps as f64;
                let pb = pt(b.p.x + (b.q.x - b.p.x) * u, b.p.y + (b.q.y - b.p.y) * u);
                let d = pa.distance(&pb);
                if d < best.0 {
                    best = (d, pa);
                }
            }
        }
        assert!(best.0 < 1e-9);
        assert!((best.1.x - 5.0).abs() < 1e-9 && (best.1.y - 5.0).abs() < 1e-9);
    }

    #[test]
    fn parallel_disjoint() {
        assert_eq!(segments_intersect(&seg((0.0, 0.0), (1.0, 0.0)), &seg((0.0, 1.0), (1.0, 1.0))), None);
    }

    #[test]
    fn shared_endpoint() {
        let hit = segments_intersect(&seg((0.0, 0.0), (1.0, 1.0)), &seg((1.0, 1.0), (2.0, 0.0)));
        assert_eq!(hit, Some(Intersection::Point(pt(1.0, 1.0))));
    }

    #[test]
    fn collinear_cases() {
        let hit = segments_intersect(&seg((0.0, 0.0), (4.0, 0.0)), &seg((2.0, 0.0), (6.0, 0.0)));
        assert_eq!(hit, Some(Intersection::Overlap(seg((2.0, 0.0), (4.0, 0.0)))));
        // touching end to end is a point, not an overlap
        let hit = segments_intersect(&seg((0.0, 0.0), (2.0, 0.0)), &seg((2.0, 0.0), (5.0, 0.0)));
        assert_eq!(hit, Some(Intersection::Point(pt(2.0, 0.0))));
        // collinear but apart
        assert_eq!(segments_intersect(&seg((0.0, 0.0), (1.0, 0.0)), &seg((2.0, 0.0), (3.0, 0.0))), None);
        // shared endpoint with overlap
        let hit = segments_intersect(&seg((0.0, 0.0), (4.0, 0.0)), &seg((0.0, 0.0), (2.0, 0.0)));
        assert_eq!(hit, Some(Intersection::Overlap(seg((0.0, 0.0), (2.0, 0.0)))));
    }

    #[test]
    fn t_junction_and_miss() {
        let hit = segments_intersect(&seg((0.0, 0.0), (4.0, 0.0)), &seg((2.0, 0.0), (2.0, 3.0)));
        assert_eq!(hit, Some(Intersection::Point(pt(2.0, 0.0))));
        assert_eq!(segments_intersect(&seg((0.0, 0.0), (4.0, 0.0)), &seg((2.0, 0.5), (2.0, 3.0))), None);
    }

    #[test]
    fn zero_length_segment() {
        let dot = seg((1.0, 1.0), (1.0, 1.0));
        assert_eq!(segments_intersect(&dot, &seg((0.0, 0.0), (2.0, 2.0))), Some(Intersection::Point(pt(1.0, 1.0))));
        assert_eq!(segments_intersect(&dot, &seg((0.0, 0.0), (2.0, 0.0))), None);
    }
}
