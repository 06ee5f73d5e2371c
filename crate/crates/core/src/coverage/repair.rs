//! Exhaustive re-wiring inside a small hop window around an unvisited node.

use std::collections::{HashMap, VecDeque};

use crate::geometry::TriangularGraph;

use super::cover::CycleCover;

/// Search budget per window, in backtracking steps.
const STEP_LIMIT: usize = 200_000;

struct Window {
    nodes: Vec<usize>,
    local: HashMap<usize, usize>,
    /// Degree each node must reach from in-window edges; `None` marks an
    /// unvisited node that may stay unvisited (0) or join (2).
    need: Vec<Option<usize>>,
    /// In-window lattice edges per node, to higher local indices only.
    forward: Vec<Vec<usize>>,
}

fn hop_window(graph: &TriangularGraph, u: usize, radius: usize) -> Vec<usize> {
    let mut dist = HashMap::from([(u, 0usize)]);
    let mut queue = VecDeque::from([u]);
    let mut out = vec![u];
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        if d == radius {
            continue;
        }
        for y in graph.neighbors(x) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(y) {
                e.insert(d + 1);
                queue.push_back(y);
                out.push(y);
            }
        }
    }
    out
}

fn build_window(graph: &TriangularGraph, cover: &CycleCover, u: usize, radius: usize) -> Window {
    let mut nodes = hop_window(graph, u, radius);
    nodes.sort_unstable();
    let local: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let need = nodes
        .iter()
        .map(|&n| {
            if n == u {
                Some(2)
            } else if cover.on_cycle(n) {
                let outside = cover
                    .neighbors(n)
                    .filter(|m| !local.contains_key(m))
                    .count();
                Some(2 - outside)
            } else {
                None
            }
        })
        .collect();
    let forward = nodes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut f: Vec<usize> = graph
                .neighbors(n)
                .filter_map(|m| local.get(&m).copied())
                .filter(|&j| j > i)
                .collect();
            f.sort_unstable();
            f
        })
        .collect();
    Window {
        nodes,
        local,
        need,
        forward,
    }
}

struct Search<'a> {
    win: &'a Window,
    cover: &'a mut CycleCover,
    cycles_before: usize,
    deg: Vec<usize>,
    chosen: Vec<(usize, usize)>,
    old: Vec<(usize, usize)>,
    steps: usize,
}

impl Search<'_> {
    fn max_need(&self, j: usize) -> usize {
        self.win.need[j].unwrap_or(2)
    }

    fn node(&mut self, i: usize) -> bool {
        self.steps += 1;
        if self.steps > STEP_LIMIT {
            return false;
        }
        if i == self.win.nodes.len() {
            return self.accept();
        }
        let d = self.deg[i];
        let targets: &[usize] = match self.win.need[i] {
            Some(2) => &[2],
            Some(1) => &[1],
            Some(_) => &[0],
            None if d == 0 => &[0, 2],
            None => &[2],
        };
        for &t in targets {
            if t < d {
                continue;
            }
            if self.pick(i, 0, t - d) {
                return true;
            }
        }
        false
    }

    /// Chooses `left` more edges from `i` to later nodes, starting at `from`.
    fn pick(&mut self, i: usize, from: usize, left: usize) -> bool {
        if left == 0 {
            return self.node(i + 1);
        }
        let fwd = &self.win.forward[i];
        for k in from..fwd.len() {
            let j = fwd[k];
            if self.deg[j] >= self.max_need(j) {
                continue;
            }
            self.deg[i] += 1;
            self.deg[j] += 1;
            self.chosen.push((i, j));
            if self.pick(i, k + 1, left - 1) {
                return true;
            }
            self.chosen.pop();
            self.deg[i] -= 1;
            self.deg[j] -= 1;
            if self.steps > STEP_LIMIT {
                return false;
            }
        }
        false
    }

    fn accept(&mut self) -> bool {
        let nodes = &self.win.nodes;
        let new: Vec<(usize, usize)> = self
            .chosen
            .iter()
            .map(|&(i, j)| (nodes[i], nodes[j]))
            .collect();
        let mut same = new.len() == self.old.len();
        if same {
            same = new.iter().all(|&(a, b)| self.cover.has_edge(a, b));
        }
        if same {
            return false;
        }
        for &(a, b) in &self.old {
            self.cover.unlink(a, b);
        }
        for &(a, b) in &new {
            self.cover.link(a, b);
        }
        if self.cover.labels().1 <= self.cycles_before {
            return true;
        }
        for &(a, b) in &new {
            self.cover.unlink(a, b);
        }
        for &(a, b) in &self.old {
            self.cover.link(a, b);
        }
        false
    }
}

/// Re-solves the cycle edges inside the hop window of `u`, keeping every
/// visited node visited, adding `u`, and never increasing the cycle count.
pub(crate) fn resolve_window(
    graph: &TriangularGraph,
    cover: &mut CycleCover,
    u: usize,
    radius: usize,
) -> bool {
    let win = build_window(graph, cover, u, radius);
    let mut old = Vec::new();
    for &n in &win.nodes {
        for m in cover.neighbors(n) {
            if n < m && win.local.contains_key(&m) {
                old.push((n, m));
            }
        }
    }
    let cycles_before = cover.labels().1;
    let mut search = Search {
        deg: vec![0; win.nodes.len()],
        win: &win,
        cover,
        cycles_before,
        chosen: Vec::new(),
        old,
        steps: 0,
    };
    search.node(0)
}
