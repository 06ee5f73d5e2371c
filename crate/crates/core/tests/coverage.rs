use hexsurvey::coverage::*;
use hexsurvey::geometry::*;
use proptest::prelude::*;

const SQRT3: f64 = 1.732_050_807_568_877_2;

struct Instance {
    slois: SloiSet,
    acc: AccGrid,
    graph: TriangularGraph,
}

fn base_grid(l: f64) -> HexGrid {
    hex_tessellate(&Polygon::rectangle(0.0, 0.0, 40.0, 40.0).unwrap(), l).unwrap()
}

fn from_cells(l: f64, cells: &[(i64, i64)]) -> Instance {
    let grid = base_grid(l);
    let slois = SloiSet::from_indices(
        grid,
        cells.iter().map(|&(c, r)| CellIndex::new(c, r)).collect(),
    );
    let acc = acc_decompose(&grid, &slois);
    let graph = build_adjacency(&slois, &grid);
    Instance { slois, acc, graph }
}

fn from_polygon(poly: &Polygon, l: f64) -> Instance {
    let grid = hex_tessellate(poly, l).unwrap();
    let slois = select_slois(&grid, poly);
    let acc = acc_decompose(&grid, &slois);
    let graph = build_adjacency(&slois, &grid);
    Instance { slois, acc, graph }
}

fn idx(inst: &Instance, c: i64, r: i64) -> usize {
    inst.slois.find(CellIndex::new(c, r)).unwrap()
}

/// Independent check: a permutation of all listed nodes with every
/// consecutive pair (and the closing pair) exactly one lattice spacing apart.
fn is_lattice_cycle(seq: &[usize], slois: &SloiSet, l: f64) -> bool {
    let mut sorted = seq.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seq.len() || seq.len() < 3 {
        return false;
    }
    (0..seq.len()).all(|k| {
        let a = slois.position(seq[k]);
        let b = slois.position(seq[(k + 1) % seq.len()]);
        (a.dist(&b) - SQRT3 * l).abs() <= 1e-9 * SQRT3 * l
    })
}

fn resum(seq: &[usize], slois: &SloiSet) -> f64 {
    let mut total = 0.0;
    for k in 0..seq.len() {
        let a = slois.position(seq[k]);
        let b = slois.position(seq[(k + 1) % seq.len()]);
        total += ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
    }
    total
}

/// Exhaustive search over permutations fixing node 0 first.
fn tsp_optimum(points: &[Point2]) -> f64 {
    fn go(points: &[Point2], path: &mut Vec<usize>, used: &mut [bool], acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        let last = *path.last().unwrap();
        if path.len() == points.len() {
            let total = acc + points[last].dist(&points[path[0]]);
            if total < *best {
                *best = total;
            }
            return;
        }
        for k in 1..points.len() {
            if !used[k] {
                used[k] = true;
                path.push(k);
                go(
                    points,
                    path,
                    used,
                    acc + points[last].dist(&points[k]),
                    best,
                );
                path.pop();
                used[k] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; points.len()];
    used[0] = true;
    go(points, &mut vec![0], &mut used, 0.0, &mut best);
    best
}

fn has_lattice_hamiltonian(graph: &TriangularGraph) -> bool {
    fn go(graph: &TriangularGraph, path: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let last = *path.last().unwrap();
        if path.len() == graph.node_count() {
            return graph.has_edge(last, path[0]);
        }
        let next: Vec<usize> = graph.neighbors(last).filter(|&k| !used[k]).collect();
        for k in next {
            used[k] = true;
            path.push(k);
            if go(graph, path, used) {
                return true;
            }
            path.pop();
            used[k] = false;
        }
        false
    }
    let mut used = vec![false; graph.node_count()];
    used[0] = true;
    go(graph, &mut vec![0], &mut used)
}

#[test]
fn one_full_acc_gives_four_cycle() {
    let l = 1.5;
    let inst = from_cells(l, &[(2, 2), (3, 2), (2, 3), (3, 3)]);
    let start = inst.slois.position(idx(&inst, 3, 3));
    let path = gen_coverage_path_cycle(&inst.acc, &inst.slois, &inst.graph, start).unwrap();
    assert_eq!(path.len(), 4);
    assert_eq!(path.sequence()[0], idx(&inst, 3, 3));
    let report = validate_cycle(&path, &inst.slois, &inst.graph);
    assert!((report.total_length - 4.0 * SQRT3 * l).abs() < 1e-9);
    assert!(is_lattice_cycle(path.sequence(), &inst.slois, l));
}

#[test]
fn four_by_four_block_is_hamiltonian() {
    let l = 1.0;
    let cells: Vec<(i64, i64)> = (0..4)
        .flat_map(|c| (0..4).map(move |r| (c + 2, r + 2)))
        .collect();
    let inst = from_cells(l, &cells);
    assert_eq!(inst.acc.full_count(), 4);
    let path = gen_coverage_path_cycle(&inst.acc, &inst.slois, &inst.graph, Point2::new(0.0, 0.0))
        .unwrap();
    assert_eq!(path.len(), 16);
    assert!(is_lattice_cycle(path.sequence(), &inst.slois, l));
    let report = validate_cycle(&path, &inst.slois, &inst.graph);
    assert!((report.total_length - 16.0 * SQRT3 * l).abs() < 1e-9);
    assert!(report.is_complete());
}

#[test]
fn l_shape_with_partial_corner_is_fully_covered() {
    let l = 1.0;
    let mut cells = Vec::new();
    for c in 2..6 {
        for r in 2..6 {
            if !(c >= 4 && r >= 4) {
                cells.push((c, r));
            }
        }
    }
    cells.push((4, 4));
    cells.push((4, 5));
    let inst = from_cells(l, &cells);
    assert!(inst.slois.len() <= 20);
    assert!(!inst.acc.is_full(AccIndex::new(2, 2)));
    assert!(has_lattice_hamiltonian(&inst.graph));
    let path = gen_coverage_path_cycle(&inst.acc, &inst.slois, &inst.graph, Point2::new(0.0, 0.0))
        .unwrap();
    assert_eq!(path.len(), inst.slois.len());
    assert!(is_lattice_cycle(path.sequence(), &inst.slois, l));
}

#[test]
fn too_few_slois_is_an_error() {
    let inst = from_cells(1.0, &[(2, 2), (3, 2)]);
    let err = gen_coverage_path_cycle(&inst.acc, &inst.slois, &inst.graph, Point2::new(0.0, 0.0));
    assert!(matches!(err, Err(PlanError::TooFewSlois(2))));
}

#[test]
fn leaf_sloi_is_reported_as_partial_coverage() {
    // A triangle plus a pendant node that has a single lattice neighbor.
    let inst = from_cells(1.0, &[(2, 2), (3, 2), (2, 3), (4, 2)]);
    let err = gen_coverage_path_cycle(&inst.acc, &inst.slois, &inst.graph, Point2::new(0.0, 0.0));
    let Err(PlanError::PartialCoverage(outcome)) = err else {
        panic!("expected partial coverage, got {err:?}");
    };
    assert_eq!(outcome.report.unvisited, vec![idx(&inst, 4, 2)]);
    assert!(outcome.report.is_valid());
}

#[test]
fn v_modification_inserts_and_lengthens_by_one_edge() {
    let l = 2.0;
    let inst = from_cells(l, &[(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)]);
    let (a, b, c, d, u) = (
        idx(&inst, 2, 2),
        idx(&inst, 3, 2),
        idx(&inst, 3, 3),
        idx(&inst, 2, 3),
        idx(&inst, 4, 2),
    );
    let path = PathCycle::new(vec![a, b, c, d]);
    let before = path.length(&inst.slois.positions());
    let out = v_modification(&path, &inst.graph, u, (b, c)).unwrap();
    let seq = out.sequence();
    let pu = seq.iter().position(|&k| k == u).unwrap();
    let around = [
        seq[(pu + seq.len() - 1) % seq.len()],
        seq[(pu + 1) % seq.len()],
    ];
    assert!(around.contains(&b) && around.contains(&c));
    assert!(!out
        .edges()
        .any(|(x, y)| (x, y) == (b, c) || (x, y) == (c, b)));
    let after = out.length(&inst.slois.positions());
    assert!((after - before - SQRT3 * l).abs() < 1e-9);
    assert!(is_lattice_cycle(seq, &inst.slois, l));

    assert!(matches!(
        v_modification(&path, &inst.graph, u, (a, b)),
        Err(PlanError::Precondition(_))
    ));
    assert!(matches!(
        v_modification(&path, &inst.graph, u, (a, c)),
        Err(PlanError::Precondition(_))
    ));
}

/// Lattice reflection about a vertical line: column `c` in row `r` maps to
/// `shift - c - (r mod 2)`.
fn mirror(cells: &[(i64, i64)], shift: i64) -> Vec<(i64, i64)> {
    cells
        .iter()
        .map(|&(c, r)| (shift - c - r.rem_euclid(2), r))
        .collect()
}

fn z_case(cells: &[(i64, i64)]) {
    let l = 1.0;
    let order = &cells[..10];
    let inst = from_cells(l, cells);
    let at = |k: usize| idx(&inst, cells[k].0, cells[k].1);
    let seq: Vec<usize> = (0..10).map(at).collect();
    let path = PathCycle::new(seq);
    assert!(
        is_lattice_cycle(path.sequence(), &inst.slois, l),
        "{order:?}"
    );
    let pattern = ZPattern {
        u: at(10),
        v: at(0),
        v_next: at(1),
        w: at(8),
        w_next: at(9),
    };
    let out = z_modification(&path, &inst.graph, pattern).unwrap();
    assert_eq!(out.len(), 11);
    assert!(is_lattice_cycle(out.sequence(), &inst.slois, l));
    let has = |a: usize, b: usize| {
        out.edges()
            .any(|(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
    };
    assert!(has(at(0), at(10)) && has(at(10), at(8)) && has(at(1), at(9)));
    assert!(!has(at(0), at(1)) && !has(at(8), at(9)));
    let report = validate_cycle(&out, &inst.slois, &inst.graph);
    assert!(report.is_complete());
    assert!((report.total_length - 11.0 * SQRT3 * l).abs() < 1e-9);

    let split = ZPattern {
        v_next: at(9),
        w_next: at(1),
        ..pattern
    };
    assert!(z_modification(&path, &inst.graph, split).is_err());
}

// Cycle v, v', ..., w, w' followed by the unvisited u.
const Z_CELLS: [(i64, i64); 11] = [
    (1, 2),
    (0, 1),
    (0, 0),
    (1, 0),
    (2, 0),
    (2, 1),
    (3, 1),
    (3, 2),
    (2, 2),
    (1, 1),
    (1, 3),
];

#[test]
fn z_modification_left_template() {
    let shifted: Vec<(i64, i64)> = Z_CELLS.iter().map(|&(c, r)| (c + 2, r + 2)).collect();
    z_case(&shifted);
}

#[test]
fn z_modification_mirrored_template() {
    let shifted: Vec<(i64, i64)> = Z_CELLS.iter().map(|&(c, r)| (c, r + 2)).collect();
    z_case(&mirror(&shifted, 8));
}

#[test]
fn z_modification_rejects_non_pattern() {
    let cells: Vec<(i64, i64)> = Z_CELLS.iter().map(|&(c, r)| (c + 2, r + 2)).collect();
    let inst = from_cells(1.0, &cells);
    let at = |k: usize| idx(&inst, cells[k].0, cells[k].1);
    let path = PathCycle::new((0..10).map(at).collect());
    let bad = ZPattern {
        u: at(10),
        v: at(3),
        v_next: at(4),
        w: at(8),
        w_next: at(9),
    };
    assert!(matches!(
        z_modification(&path, &inst.graph, bad),
        Err(PlanError::Precondition(_))
    ));
}

#[test]
fn two_side_by_side_cycles_merge() {
    let l = 1.0;
    let cells = [
        (2, 2),
        (3, 2),
        (3, 3),
        (2, 3),
        (4, 2),
        (5, 2),
        (5, 3),
        (4, 3),
    ];
    let inst = from_cells(l, &cells);
    let at = |k: usize| idx(&inst, cells[k].0, cells[k].1);
    let a = PathCycle::new((0..4).map(at).collect());
    let b = PathCycle::new((4..8).map(at).collect());
    let merged = combine_cycles(&[a.clone(), b.clone()], &inst.graph).unwrap();
    assert_eq!(merged.len(), 8);
    assert!(is_lattice_cycle(merged.sequence(), &inst.slois, l));
    let pos = inst.slois.positions();
    let sum = a.length(&pos) + b.length(&pos);
    assert!((merged.length(&pos) - sum).abs() < 1e-9);
}

#[test]
fn distant_cycles_fail_to_merge() {
    let cells = [
        (2, 2),
        (3, 2),
        (3, 3),
        (2, 3),
        (8, 2),
        (9, 2),
        (9, 3),
        (8, 3),
    ];
    let inst = from_cells(1.0, &cells);
    let at = |k: usize| idx(&inst, cells[k].0, cells[k].1);
    let a = PathCycle::new((0..4).map(at).collect());
    let b = PathCycle::new((4..8).map(at).collect());
    assert!(matches!(
        combine_cycles(&[a, b], &inst.graph),
        Err(PlanError::MergeFailure { cycles: 2 })
    ));
}

#[test]
fn validate_reports_perfect_and_broken_cycles() {
    let l = 1.0;
    let cells: Vec<(i64, i64)> = (0..4)
        .flat_map(|c| (0..4).map(move |r| (c + 2, r + 2)))
        .collect();
    let inst = from_cells(l, &cells);
    let path = gen_coverage_path_cycle(&inst.acc, &inst.slois, &inst.graph, Point2::new(0.0, 0.0))
        .unwrap();
    let report = validate_cycle(&path, &inst.slois, &inst.graph);
    assert_eq!(report.visited_count, 16);
    assert!(report.unvisited.is_empty());
    assert_eq!(report.cycle_count, 1);
    assert!((report.total_length - 16.0 * SQRT3 * l).abs() < 1e-9);

    let mut seq = path.sequence().to_vec();
    seq.push(seq[3]);
    let report = validate_cycle(&PathCycle::new(seq), &inst.slois, &inst.graph);
    assert_eq!(report.repeated, vec![path.sequence()[3]]);
    assert!(!report.is_valid());
}

#[test]
fn validate_length_matches_resummation() {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let inst = from_polygon(&Polygon::rectangle(0.0, 0.0, 12.0, 9.0).unwrap(), 1.1);
    for _ in 0..50 {
        let mut seq: Vec<usize> = (0..inst.slois.len()).collect();
        seq.shuffle(&mut rng);
        seq.truncate(3 + (seq.len() - 3) / 2);
        let report = validate_cycle(&PathCycle::new(seq.clone()), &inst.slois, &inst.graph);
        let oracle = resum(&seq, &inst.slois);
        assert!((report.total_length - oracle).abs() <= 1e-12 * oracle);
    }
}

#[test]
fn small_instances_match_exhaustive_tsp() {
    let mut checked = 0;
    for w in [2.5, 3.0, 3.5, 4.0, 5.0] {
        for h in [2.5, 3.0, 4.0] {
            for l in [0.7, 0.8, 0.9, 1.0, 1.2] {
                let inst = from_polygon(&Polygon::rectangle(0.0, 0.0, w, h).unwrap(), l);
                let n = inst.slois.len();
                if !(3..=10).contains(&n) || !has_lattice_hamiltonian(&inst.graph) {
                    continue;
                }
                let out = plan_coverage(&inst.acc, &inst.slois, &inst.graph, Point2::new(0.0, 0.0))
                    .unwrap();
                assert!(out.is_complete(), "w={w} h={h} l={l}");
                let opt = tsp_optimum(&inst.slois.positions());
                assert!(
                    (out.report.total_length - opt).abs() <= 1e-9 * opt,
                    "w={w} h={h} l={l}: {} vs {opt}",
                    out.report.total_length
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 10, "only {checked} instances");
}

#[test]
fn planner_is_deterministic() {
    let poly = Polygon::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(30.0, 0.0),
        Point2::new(30.0, 12.0),
        Point2::new(14.0, 12.0),
        Point2::new(14.0, 25.0),
        Point2::new(0.0, 25.0),
    ])
    .unwrap();
    let a = from_polygon(&poly, 1.3);
    let b = from_polygon(&poly, 1.3);
    let start = Point2::new(5.0, 5.0);
    let pa = plan_coverage(&a.acc, &a.slois, &a.graph, start).unwrap();
    let pb = plan_coverage(&b.acc, &b.slois, &b.graph, start).unwrap();
    assert_eq!(pa.cycle, pb.cycle);
}

#[test]
fn pure_rewiring_mode_never_exceeds_repaired_coverage() {
    let poly = Polygon::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(20.0, 3.0),
        Point2::new(24.0, 17.0),
        Point2::new(6.0, 21.0),
    ])
    .unwrap();
    for l in [0.9, 1.4, 2.2] {
        let inst = from_polygon(&poly, l);
        let start = Point2::new(0.0, 0.0);
        let plain = PlannerOptions {
            repair_depth: 0,
            window_radius: 0,
        };
        let a = plan_coverage_with(&inst.acc, &inst.slois, &inst.graph, start, plain).unwrap();
        let b = plan_coverage(&inst.acc, &inst.slois, &inst.graph, start).unwrap();
        assert!(a.report.is_valid() && b.report.is_valid());
        assert!(b.report.visited_count >= a.report.visited_count);
    }
}

fn assert_cycle_invariants(inst: &Instance, out: &CoverageOutcome, l: f64) {
    let seq = out.cycle.sequence();
    assert!(is_lattice_cycle(seq, &inst.slois, l));
    let visited = out.report.visited_count as f64;
    assert!(
        (out.report.total_length - SQRT3 * l * visited).abs() <= 1e-9 * out.report.total_length
    );
    assert_eq!(
        out.report.visited_count + out.report.unvisited.len(),
        inst.slois.len()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rectangle_cycles_are_valid(w in 4.0f64..40.0, h in 4.0f64..40.0, l in 0.6f64..2.5,
                                  sx in 0.0f64..1.0, sy in 0.0f64..1.0) {
        let poly = Polygon::rectangle(0.0, 0.0, w, h).unwrap();
        let inst = from_polygon(&poly, l);
        prop_assume!(inst.slois.len() >= 3);
        let start = Point2::new(sx * w, sy * h);
        match plan_coverage(&inst.acc, &inst.slois, &inst.graph, start) {
            Ok(out) => {
                assert_cycle_invariants(&inst, &out, l);
                let first = out.cycle.sequence()[0];
                let snapped = inst.slois.nearest(start).unwrap();
                if out.report.unvisited.is_empty() {
                    prop_assert_eq!(first, snapped);
                }
            }
            Err(PlanError::NoCycle) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn rectangles_with_full_blocks_are_fully_covered(cols in 1i64..8, rows in 1i64..8) {
        let cells: Vec<(i64, i64)> = (0..2 * cols)
            .flat_map(|c| (0..2 * rows).map(move |r| (c + 2, r + 2)))
            .collect();
        let inst = from_cells(1.0, &cells);
        let out = plan_coverage(&inst.acc, &inst.slois, &inst.graph, Point2::new(0.0, 0.0)).unwrap();
        prop_assert!(out.is_complete());
        assert_cycle_invariants(&inst, &out, 1.0);
    }
}
