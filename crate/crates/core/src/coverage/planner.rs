use std::collections::{BTreeSet, HashMap};

use log::debug;

use crate::geometry::{AccGrid, AccIndex, Point2, SloiSet, TriangularGraph};

use super::cover::CycleCover;
use super::repair::resolve_window;
use super::{validate_cycle, CycleReport, PathCycle, PlanError};

/// Planner output that always carries a cycle; `report.unvisited` lists
/// SLoIs the rewiring rules could not absorb.
#[derive(Debug, Clone)]
pub struct CoverageOutcome {
    pub cycle: PathCycle,
    pub report: CycleReport,
}

impl CoverageOutcome {
    pub fn is_complete(&self) -> bool {
        self.report.is_complete()
    }
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Edges generated by traversing full coarse cells column by column.
///
/// Each maximal run of full cells in a row links down to the row below at
/// most once, at its first column where the bottom cell is full.
fn full_cell_edges(acc: &AccGrid) -> BTreeSet<(usize, usize)> {
    let mut added = BTreeSet::new();
    let mut removed = BTreeSet::new();
    let Some(((i0, i1), (j0, j1))) = acc.bounds() else {
        return added;
    };
    let mut flag: HashMap<i64, bool> = HashMap::new();
    for i in i0..=i1 {
        for j in j0..=j1 {
            let cur = AccIndex::new(i, j);
            if !acc.is_full(cur) {
                continue;
            }
            let s = |label| acc.slot(cur, label).expect("full cell");
            if !acc.is_full(cur.left()) {
                added.insert(edge(s(1), s(3)));
                flag.insert(j, true);
            }
            added.insert(edge(s(3), s(4)));
            if acc.is_full(cur.right()) {
                let (c5, c6) = acc.right_refs(cur);
                added.insert(edge(s(2), c5.expect("full right")));
                added.insert(edge(s(4), c6.expect("full right")));
            } else {
                added.insert(edge(s(2), s(4)));
            }
            let row_flag = flag.get(&j).copied().unwrap_or(false);
            if acc.is_full(cur.bottom()) && row_flag {
                let (c7, c8) = acc.bottom_refs(cur);
                let (c7, c8) = (c7.expect("full bottom"), c8.expect("full bottom"));
                added.insert(edge(s(1), c7));
                added.insert(edge(s(2), c8));
                removed.insert(edge(c7, c8));
                flag.insert(j, false);
            } else {
                added.insert(edge(s(1), s(2)));
            }
        }
    }
    added.difference(&removed).copied().collect()
}

/// Seeds a cover with the first lattice triangle in row-major order.
fn seed_triangle(graph: &TriangularGraph, cover: &mut CycleCover) -> bool {
    for k in 0..graph.node_count() {
        let ring = graph.ring(k);
        for t in 0..6 {
            if let (Some(a), Some(b)) = (ring[t], ring[(t + 1) % 6]) {
                *cover = CycleCover::from_sequence(graph.node_count(), &[k, a, b]);
                return true;
            }
        }
    }
    false
}

fn try_v(
    u: usize,
    acc: &AccGrid,
    slois: &SloiSet,
    graph: &TriangularGraph,
    cover: &mut CycleCover,
) -> bool {
    let target = acc.centroid(acc.assignment(u).0);
    let ring = graph.ring(u);
    let mut best: Option<(usize, usize, f64)> = None;
    for t in 0..6 {
        let (Some(a), Some(b)) = (ring[t], ring[(t + 1) % 6]) else {
            continue;
        };
        if !cover.has_edge(a, b) {
            continue;
        }
        let d = slois
            .position(a)
            .midpoint(&slois.position(b))
            .dist_sq(&target);
        if best.is_none_or(|(_, _, bd)| d < bd) {
            best = Some((a, b, d));
        }
    }
    match best {
        Some((a, b, _)) => {
            cover.apply_v(u, a, b);
            true
        }
        None => false,
    }
}

fn try_z(u: usize, graph: &TriangularGraph, cover: &mut CycleCover) -> bool {
    let ring = graph.ring(u);
    let mut labels: Option<Vec<usize>> = None;
    for t in 0..6 {
        let (Some(v), Some(w)) = (ring[t], ring[(t + 1) % 6]) else {
            continue;
        };
        if !cover.on_cycle(v) || !cover.on_cycle(w) || cover.has_edge(v, w) {
            continue;
        }
        let vn: Vec<usize> = cover.neighbors(v).collect();
        let wn: Vec<usize> = cover.neighbors(w).collect();
        for &v2 in &vn {
            for &w2 in &wn {
                if v2 == w
                    || w2 == v
                    || v2 == w2
                    || !graph.has_edge(v2, w2)
                    || cover.has_edge(v2, w2)
                {
                    continue;
                }
                let labels = labels.get_or_insert_with(|| cover.labels().0);
                if cover.z_orientation_ok(labels, v, v2, w, w2) {
                    cover.apply_z(u, v, v2, w, w2);
                    return true;
                }
            }
        }
    }
    false
}

/// Repeatedly applies V- then Z-modifications to unvisited nodes in
/// row-major order until a full pass changes nothing.
fn absorb_unvisited(
    acc: &AccGrid,
    slois: &SloiSet,
    graph: &TriangularGraph,
    cover: &mut CycleCover,
    options: PlannerOptions,
) {
    loop {
        let mut updated = false;
        for u in 0..cover.len() {
            if cover.on_cycle(u) || !graph.neighbors(u).any(|n| cover.on_cycle(n)) {
                continue;
            }
            if try_v(u, acc, slois, graph, cover) || try_z(u, graph, cover) {
                updated = true;
            }
        }
        if updated {
            continue;
        }
        let mut chain = Vec::new();
        for u in 0..cover.len() {
            if cover.on_cycle(u) || !graph.neighbors(u).any(|n| cover.on_cycle(n)) {
                continue;
            }
            if try_displace(
                u,
                options.repair_depth,
                acc,
                slois,
                graph,
                cover,
                &mut chain,
            ) {
                updated = true;
                break;
            }
        }
        if updated {
            continue;
        }
        'window: for radius in 1..=options.window_radius {
            for u in 0..cover.len() {
                if cover.on_cycle(u) || !graph.neighbors(u).any(|n| cover.on_cycle(n)) {
                    continue;
                }
                if resolve_window(graph, cover, u, radius) {
                    updated = true;
                    break 'window;
                }
            }
        }
        if !updated {
            break;
        }
    }
}

/// Common lattice neighbor of the adjacent pair `(p, q)` other than `u`.
fn apex_opposite(graph: &TriangularGraph, u: usize, p: usize, q: usize) -> Option<usize> {
    graph.neighbors(p).find(|&x| x != u && graph.has_edge(x, q))
}

/// Displacement chain: `u` takes the place of an on-cycle node `x` whose two
/// cycle neighbors are both adjacent to `u`, and `x` is then absorbed in
/// turn (by V, Z, or a further displacement up to `depth`).
fn try_displace(
    u: usize,
    depth: usize,
    acc: &AccGrid,
    slois: &SloiSet,
    graph: &TriangularGraph,
    cover: &mut CycleCover,
    chain: &mut Vec<usize>,
) -> bool {
    if try_v(u, acc, slois, graph, cover) || try_z(u, graph, cover) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    chain.push(u);
    let ring = *graph.ring(u);
    for t in 0..6 {
        let (Some(p), Some(q)) = (ring[t], ring[(t + 1) % 6]) else {
            continue;
        };
        let Some(x) = apex_opposite(graph, u, p, q) else {
            continue;
        };
        if chain.contains(&x) || !cover.has_edge(p, x) || !cover.has_edge(x, q) {
            continue;
        }
        cover.apply_swap(x, u, p, q);
        if try_displace(x, depth - 1, acc, slois, graph, cover, chain) {
            chain.pop();
            return true;
        }
        cover.apply_swap(u, x, p, q);
    }
    chain.pop();
    false
}

fn sequence_from(cover: &CycleCover, slois: &SloiSet, start: Point2) -> Vec<usize> {
    let snapped = slois
        .nearest(start)
        .filter(|&k| cover.on_cycle(k))
        .or_else(|| {
            let mut best: Option<(usize, f64)> = None;
            for k in (0..cover.len()).filter(|&k| cover.on_cycle(k)) {
                let d = slois.position(k).dist_sq(&start);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((k, d));
                }
            }
            best.map(|(k, _)| k)
        });
    match snapped {
        Some(s) => {
            let next = cover.neighbors(s).min().expect("on cycle");
            cover.walk(s, next)
        }
        None => Vec::new(),
    }
}

/// Tuning for the unvisited-SLoI absorption stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PlannerOptions {
    /// Maximum displacement-chain length tried after the V/Z fixpoint stalls.
    /// Zero restricts absorption to V- and Z-modifications.
    pub repair_depth: usize,
    /// Largest hop radius for exhaustive local re-wiring around a stuck
    /// node. Zero disables it.
    pub window_radius: usize,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        Self {
            repair_depth: 4,
            window_radius: 3,
        }
    }
}

/// Builds one closed coverage cycle with default options.
pub fn plan_coverage(
    acc: &AccGrid,
    slois: &SloiSet,
    graph: &TriangularGraph,
    start: Point2,
) -> Result<CoverageOutcome, PlanError> {
    plan_coverage_with(acc, slois, graph, start, PlannerOptions::default())
}

/// Builds one closed coverage cycle. Never fails on partial coverage; the
/// outcome's report lists what was left out.
pub fn plan_coverage_with(
    acc: &AccGrid,
    slois: &SloiSet,
    graph: &TriangularGraph,
    start: Point2,
    options: PlannerOptions,
) -> Result<CoverageOutcome, PlanError> {
    let n = slois.len();
    if n < 3 {
        return Err(PlanError::TooFewSlois(n));
    }
    let mut cover = CycleCover::from_edges(n, full_cell_edges(acc))?;
    let (_, initial) = cover.labels();
    if initial == 0 && !seed_triangle(graph, &mut cover) {
        return Err(PlanError::NoCycle);
    }
    cover.merge_all(graph);
    absorb_unvisited(acc, slois, graph, &mut cover, options);
    if cover.merge_all(graph) > 1 {
        debug!("could not merge all cycles; keeping the largest");
        cover.keep_largest();
        absorb_unvisited(acc, slois, graph, &mut cover, options);
    }
    let cycle = PathCycle::new(sequence_from(&cover, slois, start));
    let report = validate_cycle(&cycle, slois, graph);
    debug_assert!(
        report.is_valid(),
        "planner produced an invalid cycle: {report:?}"
    );
    if !report.is_valid() {
        return Err(PlanError::Internal(format!("invalid cycle: {report:?}")));
    }
    Ok(CoverageOutcome { cycle, report })
}

/// Builds a closed coverage cycle starting at the SLoI nearest `start`.
/// Unabsorbed SLoIs surface as [`PlanError::PartialCoverage`].
pub fn gen_coverage_path_cycle(
    acc: &AccGrid,
    slois: &SloiSet,
    graph: &TriangularGraph,
    start: Point2,
) -> Result<PathCycle, PlanError> {
    let outcome = plan_coverage(acc, slois, graph, start)?;
    if outcome.report.unvisited.is_empty() {
        Ok(outcome.cycle)
    } else {
        Err(PlanError::PartialCoverage(Box::new(outcome)))
    }
}

fn cover_of(path: &PathCycle, graph: &TriangularGraph) -> Result<CycleCover, PlanError> {
    let n = graph.node_count();
    if path.len() < 3 {
        return Err(PlanError::Precondition(
            "path has fewer than 3 nodes".into(),
        ));
    }
    if let Some(&k) = path.sequence().iter().find(|&&k| k >= n) {
        return Err(PlanError::Precondition(format!(
            "node {k} is not in the graph"
        )));
    }
    let mut seen = vec![false; n];
    for &k in path.sequence() {
        if std::mem::replace(&mut seen[k], true) {
            return Err(PlanError::Precondition(format!("node {k} repeats")));
        }
    }
    Ok(CycleCover::from_sequence(n, path.sequence()))
}

fn resequence(cover: &CycleCover, first: usize, prefer_next: usize) -> PathCycle {
    let next = if cover.has_edge(first, prefer_next) {
        prefer_next
    } else {
        cover.neighbors(first).min().expect("on cycle")
    };
    PathCycle::new(cover.walk(first, next))
}

/// Inserts unvisited `u` between the path-adjacent pair `(a, b)`.
pub fn v_modification(
    path: &PathCycle,
    graph: &TriangularGraph,
    u: usize,
    pair: (usize, usize),
) -> Result<PathCycle, PlanError> {
    let (a, b) = pair;
    let mut cover = cover_of(path, graph)?;
    if u >= graph.node_count() || cover.on_cycle(u) {
        return Err(PlanError::Precondition(format!(
            "node {u} is not an unvisited graph node"
        )));
    }
    if !cover.has_edge(a, b) {
        return Err(PlanError::Precondition(format!(
            "({a},{b}) is not a path edge"
        )));
    }
    if !graph.has_edge(u, a) || !graph.has_edge(u, b) {
        return Err(PlanError::Precondition(format!(
            "node {u} is not adjacent to both {a} and {b}"
        )));
    }
    cover.apply_v(u, a, b);
    let seq = path.sequence();
    Ok(resequence(&cover, seq[0], seq[1]))
}

/// Z-shaped rewiring: unvisited `u` sits next to the lattice edge `(v, w)`;
/// path edges `(v, v_next)` and `(w, w_next)` lie on the far side with
/// `v_next ~ w_next`. The two path edges are replaced by `v-u-w` and
/// `v_next-w_next`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZPattern {
    pub u: usize,
    pub v: usize,
    pub v_next: usize,
    pub w: usize,
    pub w_next: usize,
}

pub fn z_modification(
    path: &PathCycle,
    graph: &TriangularGraph,
    pattern: ZPattern,
) -> Result<PathCycle, PlanError> {
    let ZPattern {
        u,
        v,
        v_next,
        w,
        w_next,
    } = pattern;
    let mut cover = cover_of(path, graph)?;
    let fail = |msg: &str| Err(PlanError::Precondition(format!("{msg}: {pattern:?}")));
    if u >= graph.node_count() || cover.on_cycle(u) {
        return fail("u must be an unvisited graph node");
    }
    if !graph.has_edge(u, v) || !graph.has_edge(u, w) || !graph.has_edge(v, w) {
        return fail("u, v, w must form a lattice triangle");
    }
    if !cover.has_edge(v, v_next) || !cover.has_edge(w, w_next) {
        return fail("(v, v_next) and (w, w_next) must be path edges");
    }
    if v_next == w || w_next == v || v_next == w_next || !graph.has_edge(v_next, w_next) {
        return fail("v_next and w_next must be distinct lattice neighbors");
    }
    let (labels, _) = cover.labels();
    if !cover.z_orientation_ok(&labels, v, v_next, w, w_next) {
        return fail("rewiring would split the cycle");
    }
    cover.apply_z(u, v, v_next, w, w_next);
    let seq = path.sequence();
    Ok(resequence(&cover, seq[0], seq[1]))
}

/// Joins vertex-disjoint cycles into one by repeated two-edge swaps.
pub fn combine_cycles(
    cycles: &[PathCycle],
    graph: &TriangularGraph,
) -> Result<PathCycle, PlanError> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    for c in cycles {
        cover_of(c, graph)?;
        for &k in c.sequence() {
            if std::mem::replace(&mut seen[k], true) {
                return Err(PlanError::Precondition(format!(
                    "node {k} appears in two cycles"
                )));
            }
        }
    }
    if cycles.is_empty() {
        return Err(PlanError::NoCycle);
    }
    let mut cover =
        CycleCover::from_edges(n, cycles.iter().flat_map(|c| c.edges().collect::<Vec<_>>()))?;
    let remaining = cover.merge_all(graph);
    if remaining > 1 {
        return Err(PlanError::MergeFailure { cycles: remaining });
    }
    let first = cycles[0].sequence();
    Ok(resequence(&cover, first[0], first[1]))
}
