use hexsurvey::corpus;
use hexsurvey::coverage::*;
use hexsurvey::density::*;
use hexsurvey::geometry::*;
use proptest::prelude::*;
use rand::SeedableRng;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Counts lattice centroids inside an axis-aligned rectangle anchored at the origin.
fn rect_count_oracle(w: f64, h: f64, l: f64) -> usize {
    let dx = SQRT3 * l;
    let dy = 1.5 * l;
    let mut n = 0;
    let mut r = 0i64;
    while dy * r as f64 <= h {
        let shift = if r % 2 == 1 { 0.5 } else { 0.0 };
        let mut c = 0i64;
        while dx * (c as f64 + shift) <= w {
            n += 1;
            c += 1;
        }
        r += 1;
    }
    n
}

/// Best `(count, energy)` over every level, by brute force.
fn exhaustive(
    poly: &Polygon,
    em: &EnergyModel,
    bounds: DensityBounds,
    levels: usize,
) -> (usize, f64) {
    let grid = LevelGrid::new(bounds, levels);
    let mut best = (0, f64::NEG_INFINITY);
    for k in 0..levels {
        let p = predict_energy(grid.density(k) / SQRT3, poly, em).unwrap();
        if p.count >= 3 && p.energy <= em.budget && (p.count, p.energy) > best {
            best = (p.count, p.energy);
        }
    }
    best
}

fn four_cycle(l: f64) -> (PathCycle, SloiSet) {
    let poly = corpus::rectangle(40.0, 40.0);
    let grid = hex_tessellate(&poly, l).unwrap();
    let cells = [(2, 2), (3, 2), (3, 3), (2, 3)].map(|(c, r)| CellIndex::new(c, r));
    let slois = SloiSet::from_indices(grid, cells.to_vec());
    let seq = cells.iter().map(|&c| slois.find(c).unwrap()).collect();
    (PathCycle::new(seq), slois)
}

#[test]
fn path_energy_of_four_cycle() {
    let (path, slois) = four_cycle(1.0);
    let em = EnergyModel::new(1.0, 0.0, 100.0).unwrap();
    assert!((path_energy(&path, &slois, &em) - 4.0 * SQRT3).abs() < 1e-12);
    assert!((path_energy(&path, &slois, &em) - 6.9282).abs() < 1e-4);
    let em = EnergyModel::new(1.0, 1.0, 100.0).unwrap();
    assert!((path_energy(&path, &slois, &em) - (4.0 * SQRT3 + 4.0)).abs() < 1e-12);
    assert!((path_energy(&path, &slois, &em) - 10.9282).abs() < 1e-4);
}

#[test]
fn path_energy_matches_per_edge_resummation() {
    for (w, h, l, kappa, em_cost) in [
        (20.0, 14.0, 1.1, 1.0, 1.0),
        (33.0, 12.0, 0.8, 0.3, 2.5),
        (15.0, 25.0, 1.7, 2.0, 0.0),
    ] {
        let poly = corpus::l_shape(w, h, w / 3.0, h / 3.0);
        let grid = hex_tessellate(&poly, l).unwrap();
        let slois = select_slois(&grid, &poly);
        let acc = acc_decompose(&grid, &slois);
        let graph = build_adjacency(&slois, &grid);
        let out = plan_coverage(&acc, &slois, &graph, Point2::new(0.0, 0.0)).unwrap();
        let em = EnergyModel::new(kappa, em_cost, 1e9).unwrap();
        let sp = out.report.visited_count as f64;
        let expected = kappa * SQRT3 * l * sp + em_cost * sp;
        let got = path_energy(&out.cycle, &slois, &em);
        assert!((got - expected).abs() <= 1e-9 * expected);
    }
}

#[test]
fn energy_model_validation() {
    assert!(EnergyModel::new(0.0, 1.0, 10.0).is_err());
    assert!(EnergyModel::new(1.0, -1.0, 10.0).is_err());
    assert!(EnergyModel::new(1.0, 1.0, 0.0).is_err());
    assert!(EnergyModel::new(1.0, 0.0, 10.0).is_ok());
    let preset = EnergyModel::field_test_preset();
    assert_eq!(preset.budget, 81.3);
    assert_eq!(preset.measure_cost, 2.0);
    assert!((preset.travel_cost * 1200.0 - 81.3).abs() < 1e-9);
}

#[test]
fn single_sloi_prediction_is_degenerate() {
    let poly = corpus::rectangle(10.0, 10.0);
    let em = EnergyModel::new(1.0, 1.5, 100.0).unwrap();
    let p = predict_energy(20.0, &poly, &em).unwrap();
    assert_eq!(p.count, 1);
    assert_eq!(p.energy, 1.5);
    assert!(!p.is_feasible());
}

#[test]
fn prediction_on_forty_square() {
    let poly = corpus::rectangle(40.0, 40.0);
    let em = EnergyModel::new(1.0, 1.0, 1e6).unwrap();
    let p = predict_energy(2.0, &poly, &em).unwrap();
    let n = rect_count_oracle(40.0, 40.0, 2.0);
    assert_eq!(p.count, n);
    assert!((p.energy - (2.0 * SQRT3 + 1.0) * n as f64).abs() < 1e-9);
}

#[test]
fn prediction_tabulation_matches_enumeration() {
    let em = EnergyModel::new(1.0, 1.0, 1e6).unwrap();
    for (w, h) in [(40.0, 40.0), (51.0, 56.0), (17.5, 9.25)] {
        let poly = corpus::rectangle(w, h);
        for k in 0..200 {
            let l = 0.5 + 0.0213 * k as f64;
            let p = predict_energy(l, &poly, &em).unwrap();
            let n = rect_count_oracle(w, h, l);
            assert_eq!(p.count, n, "w={w} h={h} l={l}");
            assert!((p.energy - (SQRT3 * l + 1.0) * n as f64).abs() <= 1e-9 * p.energy);
        }
    }
}

#[test]
fn budget_below_three_samples_is_infeasible() {
    let poly = corpus::rectangle(40.0, 40.0);
    let bounds = DensityBounds::for_polygon(&poly).unwrap();
    let em = EnergyModel::length_budget(3.0 * (bounds.d_max + 1.0) - 0.5).unwrap();
    let err = search_optimal_density(&poly, &em, &SearchConfig::new(bounds, 20.0));
    assert!(
        matches!(err, Err(DensityError::Infeasible { .. })),
        "{err:?}"
    );
}

#[test]
fn invalid_bounds_are_rejected() {
    assert!(DensityBounds::new(0.0, 1.0).is_err());
    assert!(DensityBounds::new(2.0, 2.0).is_err());
    assert!(DensityBounds::new(2.0, f64::INFINITY).is_err());
}

#[test]
fn forty_square_budget_400_matches_exhaustive_scan() {
    let poly = corpus::rectangle(40.0, 40.0);
    let bounds = DensityBounds::for_polygon(&poly).unwrap();
    let em = EnergyModel::length_budget(400.0).unwrap();
    let choice = search_optimal_density(&poly, &em, &SearchConfig::new(bounds, 20.0)).unwrap();
    let (count, energy) = exhaustive(&poly, &em, bounds, 10_000);
    assert_eq!(choice.count, count);
    assert_eq!(choice.energy, energy);
    assert!(choice.energy <= 400.0);
}

#[test]
fn survey_rectangle_lands_in_delta_window() {
    let poly = corpus::rectangle(51.0, 56.0);
    let bounds = DensityBounds::for_polygon(&poly).unwrap();
    assert_eq!(bounds.d_min, 2.0);
    assert_eq!(bounds.d_max, 51.0 / 4.0);
    for budget in [400.0, 500.0, 600.0, 700.0, 800.0] {
        let em = EnergyModel::length_budget(budget).unwrap();
        let cfg = MissionConfig::new(SearchConfig::new(bounds, 20.0));
        let m = plan_mission(&poly, &em, Point2::new(0.0, 0.0), &cfg).unwrap();
        assert!(m.energy.total <= budget);
        if m.termination == Termination::Delta {
            assert!(
                budget - m.energy.total <= 20.0,
                "budget {budget}: {}",
                m.energy.total
            );
        }
    }
}

#[test]
fn generous_budget_gives_full_coverage() {
    let poly = corpus::rectangle(30.0, 30.0);
    let em = EnergyModel::length_budget(5000.0).unwrap();
    let cfg = MissionConfig::new(SearchConfig::new(
        DensityBounds::new(2.0, 7.5).unwrap(),
        20.0,
    ));
    let m = plan_mission(&poly, &em, Point2::new(0.0, 0.0), &cfg).unwrap();
    assert!(m.is_complete());
    assert_eq!(m.visited_count, m.sloi_count);
    assert!(m.energy.total <= 5000.0);
    assert!(m.predicted_energy <= 5000.0);
    assert!((m.energy.total - m.predicted_energy).abs() <= 1e-9 * m.predicted_energy);
    assert_eq!(m.waypoints.len(), m.path.len());
}

#[test]
fn achieved_count_grows_with_budget() {
    let poly = corpus::l_shape(50.0, 45.0, 20.0, 20.0);
    let bounds = DensityBounds::for_polygon(&poly).unwrap();
    let mut last: Option<(usize, f64)> = None;
    for budget in [400.0, 500.0, 600.0, 700.0, 800.0] {
        let em = EnergyModel::length_budget(budget).unwrap();
        let c = search_optimal_density(&poly, &em, &SearchConfig::new(bounds, 20.0)).unwrap();
        let (count, _) = exhaustive(&poly, &em, bounds, 10_000);
        assert_eq!(c.count, count);
        if let Some((n, _)) = last {
            assert!(c.count >= n);
        }
        last = Some((c.count, c.edge_length));
    }
}

#[test]
fn convex_contours_are_fully_covered() {
    let mut full = 0;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for budget in [400.0, 600.0, 800.0] {
        for _ in 0..4 {
            let poly = corpus::random_convex(&mut rng, 9, 26.0, 22.0);
            let bounds = DensityBounds::for_polygon(&poly).unwrap();
            let em = EnergyModel::length_budget(budget).unwrap();
            let cfg = MissionConfig::new(SearchConfig::new(bounds, 20.0));
            let m = plan_mission(&poly, &em, Point2::new(0.0, 0.0), &cfg).unwrap();
            if m.visited_count == m.sloi_count {
                full += 1;
                continue;
            }
            // Only lattice leaves, which no closed cycle can pass through, may be missed.
            let grid = hex_tessellate(&poly, m.edge_length).unwrap();
            let slois = select_slois(&grid, &poly);
            let graph = build_adjacency(&slois, &grid);
            assert!(
                m.report.unvisited.iter().all(|&u| graph.degree(u) < 2),
                "budget {budget}: {:?}",
                m.report.unvisited
            );
        }
    }
    assert!(full >= 11, "{full}/12 fully covered");
}

#[test]
fn transit_legs_count_against_the_budget() {
    let poly = corpus::rectangle(40.0, 40.0);
    let bounds = DensityBounds::for_polygon(&poly).unwrap();
    let em = EnergyModel::length_budget(600.0).unwrap();
    let home = Point2::new(-30.0, -30.0);
    let mut cfg = MissionConfig::new(SearchConfig::new(bounds, 20.0));
    let plain = plan_mission(&poly, &em, home, &cfg).unwrap();
    cfg.include_transit = true;
    let with = plan_mission(&poly, &em, home, &cfg).unwrap();
    assert_eq!(plain.energy.transit, 0.0);
    assert!(with.energy.transit > 80.0);
    let first = with.waypoints[0];
    assert!((with.energy.transit - 2.0 * home.dist(&first)).abs() < 1e-9);
    assert!(with.energy.total <= 600.0);
    assert!(with.sloi_count < plain.sloi_count);
}

#[test]
fn mission_is_deterministic_and_serializes() {
    let poly = corpus::t_shape(40.0, 36.0, 14.0, 12.0);
    let bounds = DensityBounds::for_polygon(&poly).unwrap();
    let em = EnergyModel::length_budget(500.0).unwrap();
    let cfg = MissionConfig::new(SearchConfig::new(bounds, 20.0));
    let a = plan_mission(&poly, &em, Point2::new(3.0, 4.0), &cfg).unwrap();
    let b = plan_mission(&poly, &em, Point2::new(3.0, 4.0), &cfg).unwrap();
    assert_eq!(a, b);
    let json = serde_json::to_string(&a).unwrap();
    let back: Mission = serde_json::from_str(&json).unwrap();
    assert_eq!(back.path, a.path);
    assert_eq!(back.sloi_count, a.sloi_count);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn search_dominates_every_level(budget in 150.0f64..1500.0, w in 20.0f64..50.0, h in 20.0f64..50.0) {
        let poly = corpus::rectangle(w, h);
        let bounds = DensityBounds::for_polygon(&poly).unwrap();
        let em = EnergyModel::length_budget(budget).unwrap();
        let mut cfg = SearchConfig::new(bounds, 20.0);
        cfg.levels = 600;
        match search_optimal_density(&poly, &em, &cfg) {
            Ok(c) => {
                prop_assert!(c.energy <= budget);
                let (count, energy) = exhaustive(&poly, &em, bounds, 600);
                prop_assert_eq!(c.count, count);
                prop_assert_eq!(c.energy, energy);
            }
            Err(DensityError::Infeasible { .. }) => {
                prop_assert_eq!(exhaustive(&poly, &em, bounds, 600).0, 0);
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
