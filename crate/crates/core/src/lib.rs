//! Multi-robot task allocation for homogeneous tasks.
//!
//! Sites are partitioned into one spatial cluster per robot with K-means,
//! each cluster is routed from the shared depot with a nearest-neighbour
//! tour improved by 2-opt, and the result is scored on total cost, load
//! balance, inter-robot path intersections and solve time. A genetic
//! algorithm and a greedy nearest-task allocator are provided as baselines.

pub mod allocator;
pub mod baselines;
pub mod clustering;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod routing;
pub mod scenario_io;

pub use allocator::{solve_clustered, Method, Robot, RouteResult, Solution, Task};
pub use baselines::{ga_allocate, greedy_allocate, GaConfig};
pub use clustering::{kmeans_partition, wcm, ClusterAssignment, InitStrategy, KMeansConfig};
pub use error::{MrtaError, Result};
pub use geometry::{CostMatrix, GridMap, Point, Segment};
pub use metrics::{CollisionScope, MetricsReport};
pub use routing::{brute_force_tsp, nearest_neighbor_tour, two_opt, Tour};
pub use scenario_io::{generate_grid_scenario, generate_scenario, CostBackend, CostModel, Scenario, ScenarioParams};
