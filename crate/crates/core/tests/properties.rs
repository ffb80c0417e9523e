use mrta::baselines::greedy_allocate;
use mrta::clustering::{kmeans_partition, wcm, KMeansConfig};
use mrta::geometry::{
    dijkstra_cost_matrix, euclidean_cost_matrix, segments_intersect, GridMap, Intersection, Point, Segment,
};
use mrta::metrics::{load_balance, std_dev};
use mrta::routing::{brute_force_tsp, is_two_opt_optimal, nearest_neighbor_tour, two_opt};
use mrta::scenario_io::{generate_scenario, parse_scenario, scenario_to_json, ScenarioParams};
use mrta::solve_clustered;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point> {
    (0.0f64..100.0, 0.0f64..100.0).prop_map(|(x, y)| Point::new(x, y))
}

fn lattice_point() -> impl Strategy<Value = Point> {
    (-20i32..20, -20i32..20).prop_map(|(x, y)| Point::new(x as f64, y as f64))
}

fn kind(i: Option<Intersection>) -> u8 {
    match i {
        None => 0,
        Some(Intersection::Point(_)) => 1,
        Some(Intersection::Overlap(_)) => 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn euclidean_matrix_is_a_symmetric_metric(depot in point(), sites in prop::collection::vec(point(), 0..20)) {
        let c = euclidean_cost_matrix(depot, &sites).unwrap();
        prop_assert!(c.is_symmetric(0.0));
        for i in 0..c.len() {
            prop_assert_eq!(c.get(i, i), 0.0);
            for j in 0..c.len() {
                for k in 0..c.len() {
                    prop_assert!(c.get(i, k) <= c.get(i, j) + c.get(j, k) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn grid_costs_dominate_euclidean(cells in prop::collection::vec((0usize..12, 0usize..12), 1..8), walls in prop::collection::vec((0usize..12, 1usize..12), 0..10)) {
        let mut map = GridMap::new(12, 12, 1.5).unwrap();
        for (x, y) in walls {
            if x != 0 || y > 0 {
                map.block(x, y).unwrap();
            }
        }
        let sites: Vec<Point> = cells.iter().filter(|&&(x, y)| !map.is_blocked(x, y)).map(|&(x, y)| map.cell_center(x, y)).collect();
        let depot = map.cell_center(0, 0);
        if let Ok(grid) = dijkstra_cost_matrix(&map, depot, &sites) {
            let euclid = euclidean_cost_matrix(depot, &sites).unwrap();
            prop_assert!(grid.is_symmetric(1e-9));
            for i in 0..grid.len() {
                for j in 0..grid.len() {
                    prop_assert!(grid.get(i, j) + 1e-9 >= euclid.get(i, j));
                }
            }
        }
    }

    #[test]
    fn intersection_is_symmetric_and_translation_invariant(
        a in lattice_point(), b in lattice_point(), c in lattice_point(), d in lattice_point(),
        dx in -50i32..50, dy in -50i32..50,
    ) {
        let s1 = Segment::new(a, b);
        let s2 = Segment::new(c, d);
        let shift = |p: Point| Point::new(p.x + dx as f64, p.y + dy as f64);
        let forward = kind(segments_intersect(&s1, &s2));
        prop_assert_eq!(forward, kind(segments_intersect(&s2, &s1)));
        prop_assert_eq!(forward, kind(segments_intersect(&Segment::new(shift(a), shift(b)), &Segment::new(shift(c), shift(d)))));
        if let Some(Intersection::Point(p)) = segments_intersect(&s1, &s2) {
            prop_assert!(s1.distance_to(&p) < 1e-6 && s2.distance_to(&p) < 1e-6);
        }
    }

    #[test]
    fn two_opt_is_locally_optimal_and_never_worse(sites in prop::collection::vec(point(), 1..15)) {
        let costs = euclidean_cost_matrix(Point::new(0.0, 0.0), &sites).unwrap();
        let members: Vec<usize> = (1..=sites.len()).collect();
        let nn = nearest_neighbor_tour(&costs, &members).unwrap();
        let out = two_opt(&nn, &costs).unwrap();
        prop_assert!(is_two_opt_optimal(&out.tour, &costs));
        prop_assert!(out.tour.cost <= nn.cost + 1e-9);
        prop_assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
        let mut visited = out.tour.members().to_vec();
        visited.sort();
        prop_assert_eq!(visited, members);
    }

    #[test]
    fn brute_force_is_a_lower_bound(sites in prop::collection::vec(point(), 1..7)) {
        let costs = euclidean_cost_matrix(Point::new(0.0, 0.0), &sites).unwrap();
        let members: Vec<usize> = (1..=sites.len()).collect();
        let best = brute_force_tsp(&costs, &members).unwrap();
        let heuristic = two_opt(&nearest_neighbor_tour(&costs, &members).unwrap(), &costs).unwrap();
        prop_assert!(best.cost <= heuristic.tour.cost + 1e-9);
    }

    #[test]
    fn kmeans_partitions_and_descends(sites in prop::collection::vec(point(), 4..40), k in 1usize..5, seed in any::<u64>()) {
        let a = kmeans_partition(&sites, &KMeansConfig::new(k, seed)).unwrap();
        prop_assert_eq!(a.labels.len(), sites.len());
        prop_assert!(a.members().iter().all(|m| !m.is_empty()));
        prop_assert!(a.wcm_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        let last = *a.wcm_trace.last().unwrap();
        prop_assert!((wcm(&sites, &a).unwrap() - last).abs() <= 1e-9 * last.max(1.0));
        prop_assert_eq!(a, kmeans_partition(&sites, &KMeansConfig::new(k, seed)).unwrap());
    }

    #[test]
    fn load_balance_scales_linearly(costs in prop::collection::vec(0.0f64..1000.0, 1..10), factor in 0.1f64..10.0) {
        let scaled: Vec<f64> = costs.iter().map(|c| c * factor).collect();
        let (a, b) = (std_dev(&costs), std_dev(&scaled));
        prop_assert!((b - a * factor).abs() <= 1e-9 * b.max(1.0));
    }

    #[test]
    fn solvers_agree_with_the_validator(n in 3usize..60, robots in 1usize..5, seed in any::<u64>()) {
        let s = generate_scenario(&ScenarioParams { n_sites: n.max(robots + 1), n_robots: robots, seed, ..ScenarioParams::default() }).unwrap();
        let m = s.cost_model().unwrap().matrix;
        for sol in [solve_clustered(&s, &m, &KMeansConfig::new(robots, seed)).unwrap(), greedy_allocate(&s, &m).unwrap()] {
            prop_assert!(sol.validate(s.sites.len(), &s.robots, &m).is_ok());
            prop_assert!(load_balance(&sol) >= 0.0);
        }
    }

    #[test]
    fn scenario_json_round_trips(n in 2usize..40, robots in 1usize..4, seed in any::<u64>()) {
        prop_assume!(n > robots);
        let s = generate_scenario(&ScenarioParams { n_sites: n, n_robots: robots, seed, ..ScenarioParams::default() }).unwrap();
        let json = scenario_to_json(&s);
        let back = parse_scenario(&json, |_| unreachable!()).unwrap();
        prop_assert_eq!(scenario_to_json(&back), json);
        prop_assert_eq!(back, s);
    }
}
