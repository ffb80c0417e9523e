//! K-means partitioning of task sites into one spatial zone per robot.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MrtaError, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// `k` distinct sites drawn uniformly at random.
    #[default]
    UniformRandomSites,
    /// Farthest-first: start at the site farthest from the mean, then
    /// repeatedly add the site farthest from every chosen centroid.
    SpreadSeeding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iterations: usize,
    /// Convergence threshold on centroid displacement, in metres.
    pub tolerance: f64,
    pub seed: u64,
    pub init_strategy: InitStrategy,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig { k: 4, max_iterations: 100, tolerance: 1e-4, seed: 0, init_strategy: InitStrategy::default() }
    }
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig { k, seed, ..Default::default() }
    }

    pub fn with_init(mut self, init_strategy: InitStrategy) -> Self {
        self.init_strategy = init_strategy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(MrtaError::invalid("k must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(MrtaError::invalid("max_iterations must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(MrtaError::invalid(format!("tolerance {} must be positive", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Cluster index of each site, in input order.
    pub labels: Vec<usize>,
    pub centroids: Vec<Point>,
    /// Within-cluster sum of squares after each iteration's centroid update.
    pub wcm_trace: Vec<f64>,
    pub iterations_used: usize,
    /// False when the iteration cap was hit before the centroids settled.
    #[serde(default)]
    pub converged: bool,
}

impl ClusterAssignment {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Site indices (0-based, into the clustered site list) of each cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

fn nearest(p: &Point, centroids: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = p.distance_sq(&centroids[0]);
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = p.distance_sq(c);
        // strict comparison: ties go to the lowest index
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn assign(sites: &[Point], centroids: &[Point], labels: &mut [usize]) {
    for (l, p) in labels.iter_mut().zip(sites) {
        *l = nearest(p, centroids);
    }
}

fn means(sites: &[Point], labels: &[usize], k: usize) -> (Vec<Point>, Vec<usize>) {
    let mut sums = vec![(0.0, 0.0); k];
    let mut counts = vec![0usize; k];
    for (p, &l) in sites.iter().zip(labels) {
        sums[l].0 += p.x;
        sums[l].1 += p.y;
        counts[l] += 1;
    }
    let centroids = sums
        .iter()
        .zip(&counts)
        .map(|(&(sx, sy), &c)| if c == 0 { Point::default() } else { Point::new(sx / c as f64, sy / c as f64) })
        .collect();
    (centroids, counts)
}

fn sum_sq(sites: &[Point], labels: &[usize], centroids: &[Point]) -> f64 {
    sites.iter().zip(labels).map(|(p, &l)| p.distance_sq(&centroids[l])).sum()
}

/// Reseeds every empty cluster at the site currently farthest from its own
/// centroid and moves that site into the emptied cluster.
fn repair_empty(sites: &[Point], labels: &mut [usize], centroids: &mut [Point]) -> Result<()> {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return Ok(());
        };
        let donor = (0..sites.len())
            .filter(|&i| counts[labels[i]] > 1)
            .map(|i| (i, sites[i].distance_sq(&centroids[labels[i]])))
            .fold(None::<(usize, f64)>, |best, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        match donor {
            Some((i, d)) if d > 0.0 => {
                centroids[empty] = sites[i];
                labels[i] = empty;
            }
            _ => {
                return Err(MrtaError::Degenerate(format!("cannot form {k} non-empty clusters from coincident sites")))
            }
        }
    }
}

fn initial_centroids(sites: &[Point], config: &KMeansConfig) -> Vec<Point> {
    match config.init_strategy {
        InitStrategy::UniformRandomSites => {
            // draw among sites with distinct coordinates so no two centroids coincide
            let mut distinct: Vec<usize> = Vec::with_capacity(sites.len());
            for (i, p) in sites.iter().enumerate() {
                if !distinct.iter().any(|&j| sites[j] == *p) {
                    distinct.push(i);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            sample(&mut rng, distinct.len(), config.k).iter().map(|i| sites[distinct[i]]).collect()
        }
        InitStrategy::SpreadSeeding => {
            let n = sites.len() as f64;
            let mean =
                Point::new(sites.iter().map(|p| p.x).sum::<f64>() / n, sites.iter().map(|p| p.y).sum::<f64>() / n);
            let mut chosen = vec![farthest(sites.len(), |i| sites[i].distance_sq(&mean))];
            let mut gap: Vec<f64> = sites.iter().map(|p| p.distance_sq(&sites[chosen[0]])).collect();
            while chosen.len() < config.k {
                let next = farthest(sites.len(), |i| gap[i]);
                chosen.push(next);
                for (g, p) in gap.iter_mut().zip(sites) {
                    *g = g.min(p.distance_sq(&sites[next]));
                }
            }
            chosen.into_iter().map(|i| sites[i]).collect()
        }
    }
}

/// Index in `0..n` maximising `score`, lowest index on ties.
fn farthest(n: usize, score: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_s = f64::NEG_INFINITY;
    for i in 0..n {
        let s = score(i);
        if s > best_s {
            best = i;
            best_s = s;
        }
    }
    best
}

fn distinct_count(sites: &[Point], cap: usize) -> usize {
    let mut seen: Vec<Point> = Vec::new();
    for p in sites {
        if !seen.contains(p) {
            seen.push(*p);
            if seen.len() >= cap {
                break;
            }
        }
    }
    seen.len()
}

/// Lloyd's algorithm over the task sites (the depot must not be included).
///
/// Iterates assignment and mean updates until every centroid moves less than
/// `config.tolerance` and the labels are a fixed point of the final
/// centroids, or until `config.max_iterations` is reached.
pub fn kmeans_partition(sites: &[Point], config: &KMeansConfig) -> Result<ClusterAssignment> {
    config.validate()?;
    if sites.is_empty() {
        return Err(MrtaError::invalid("no sites to cluster"));
    }
    if let Some((i, p)) = sites.iter().enumerate().find(|(_, p)| !p.is_finite()) {
        return Err(MrtaError::invalid(format!("site {i} has non-finite coordinates {p}")));
    }
    let k = config.k;
    if k > sites.len() {
        return Err(MrtaError::invalid(format!("k = {k} exceeds the {} available sites", sites.len())));
    }
    if distinct_count(sites, k) < k {
        return Err(MrtaError::Degenerate(format!("fewer than {k} distinct site positions")));
    }

    let mut centroids = initial_centroids(sites, config);
    let mut labels = vec![0usize; sites.len()];
    let mut wcm_trace = Vec::new();
    let mut iterations_used = 0;
    let mut converged = false;

    while iterations_used < config.max_iterations {
        iterations_used += 1;
        assign(sites, &centroids, &mut labels);
        repair_empty(sites, &mut labels, &mut centroids)?;
        let (updated, _) = means(sites, &labels, k);
        let shift = centroids.iter().zip(&updated).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
        centroids = updated;
        wcm_trace.push(sum_sq(sites, &labels, &centroids));

        if shift < config.tolerance {
            let mut check = labels.clone();
            assign(sites, &centroids, &mut check);
            if check == labels {
                converged = true;
                break;
            }
        }
    }

    Ok(ClusterAssignment { labels, centroids, wcm_trace, iterations_used, converged })
}

/// Within-cluster sum of squared distances, `Σ ‖aᵢ − μ_{L(i)}‖²`.
pub fn wcm(sites: &[Point], assignment: &ClusterAssignment) -> Result<f64> {
    if assignment.labels.len() != sites.len() {
        return Err(MrtaError::invalid(format!("{} labels for {} sites", assignment.labels.len(), sites.len())));
    }
    let k = assignment.centroids.len();
    if let Some((i, &l)) = assignment.labels.iter().enumerate().find(|(_, &l)| l >= k) {
        return Err(MrtaError::invalid(format!("site {i} has label {l} outside 0..{k}")));
    }
    Ok(sum_sq(sites, &assignment.labels, &assignment.centroids))
}
