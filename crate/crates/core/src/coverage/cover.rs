//! Mutable set of vertex-disjoint cycles over the SLoI nodes. Every node has
//! degree 0 (unvisited) or 2 (on a cycle) between rewiring steps.

use crate::geometry::TriangularGraph;

use super::PlanError;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct CycleCover {
    nbr: Vec<[usize; 2]>,
}

impl CycleCover {
    pub fn new(n: usize) -> Self {
        Self {
            nbr: vec![[NONE, NONE]; n],
        }
    }

    pub fn from_sequence(n: usize, seq: &[usize]) -> Self {
        let mut cover = Self::new(n);
        for k in 0..seq.len() {
            let a = seq[k];
            let b = seq[(k + 1) % seq.len()];
            cover.link(a, b);
        }
        cover
    }

    pub fn len(&self) -> usize {
        self.nbr.len()
    }

    pub fn on_cycle(&self, k: usize) -> bool {
        self.nbr[k][0] != NONE
    }

    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.nbr[k].iter().copied().filter(|&x| x != NONE)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.nbr[a].contains(&b)
    }

    pub fn link(&mut self, a: usize, b: usize) {
        for (x, y) in [(a, b), (b, a)] {
            let slots = &mut self.nbr[x];
            if slots[0] == NONE {
                slots[0] = y;
            } else {
                debug_assert_eq!(slots[1], NONE, "node {x} already has degree 2");
                slots[1] = y;
            }
        }
    }

    pub fn unlink(&mut self, a: usize, b: usize) {
        for (x, y) in [(a, b), (b, a)] {
            let slots = &mut self.nbr[x];
            if slots[0] == y {
                slots[0] = slots[1];
                slots[1] = NONE;
            } else if slots[1] == y {
                slots[1] = NONE;
            }
        }
    }

    /// Builds a cover from an edge list; fails if any node ends with degree other than 0 or 2.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PlanError> {
        let mut deg = vec![0usize; n];
        let mut list = Vec::new();
        for (a, b) in edges {
            deg[a] += 1;
            deg[b] += 1;
            if deg[a] > 2 || deg[b] > 2 {
                return Err(PlanError::Internal(format!(
                    "edge ({a},{b}) exceeds degree 2"
                )));
            }
            list.push((a, b));
        }
        if let Some(k) = deg.iter().position(|&d| d == 1) {
            return Err(PlanError::Internal(format!("node {k} left with degree 1")));
        }
        let mut cover = Self::new(n);
        for (a, b) in list {
            cover.link(a, b);
        }
        Ok(cover)
    }

    /// Walks the cycle through `start`, first stepping to `next`.
    pub fn walk(&self, start: usize, next: usize) -> Vec<usize> {
        let mut out = vec![start];
        let (mut prev, mut cur) = (start, next);
        while cur != start {
            out.push(cur);
            let [a, b] = self.nbr[cur];
            let step = if a == prev { b } else { a };
            prev = cur;
            cur = step;
        }
        out
    }

    /// Component label per node (`NONE` for unvisited), plus the number of cycles.
    pub fn labels(&self) -> (Vec<usize>, usize) {
        let mut label = vec![NONE; self.len()];
        let mut count = 0;
        for k in 0..self.len() {
            if label[k] != NONE || !self.on_cycle(k) {
                continue;
            }
            let (mut prev, mut cur) = (NONE, k);
            loop {
                label[cur] = count;
                let [a, b] = self.nbr[cur];
                let step = if a != prev { a } else { b };
                prev = cur;
                cur = step;
                if cur == k {
                    break;
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Cycles as node sequences, each starting at its lowest node and stepping
    /// toward its lower-indexed neighbor.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for k in 0..self.len() {
            if seen[k] || !self.on_cycle(k) {
                continue;
            }
            let [a, b] = self.nbr[k];
            let seq = self.walk(k, a.min(b));
            for &s in &seq {
                seen[s] = true;
            }
            out.push(seq);
        }
        out
    }

    /// Inserts `u` between the cycle-adjacent pair `(a, b)`.
    pub fn apply_v(&mut self, u: usize, a: usize, b: usize) {
        self.unlink(a, b);
        self.link(u, a);
        self.link(u, b);
    }

    /// Whether rewiring `(v, v2)` and `(w, w2)` into `v-u-w` and `v2-w2` keeps a single cycle.
    pub fn z_orientation_ok(
        &self,
        labels: &[usize],
        v: usize,
        v2: usize,
        w: usize,
        w2: usize,
    ) -> bool {
        if labels[v] != labels[w] {
            return true;
        }
        let (mut prev, mut cur) = (v, v2);
        loop {
            if cur == w {
                let [a, b] = self.nbr[cur];
                let after = if a == prev { b } else { a };
                return after == w2;
            }
            if cur == v {
                return false;
            }
            let [a, b] = self.nbr[cur];
            let step = if a == prev { b } else { a };
            prev = cur;
            cur = step;
        }
    }

    pub fn apply_z(&mut self, u: usize, v: usize, v2: usize, w: usize, w2: usize) {
        self.unlink(v, v2);
        self.unlink(w, w2);
        self.link(v, u);
        self.link(u, w);
        self.link(v2, w2);
    }

    /// Replaces on-cycle `x` (between `p` and `q`) with off-cycle `u`.
    pub fn apply_swap(&mut self, x: usize, u: usize, p: usize, q: usize) {
        self.unlink(p, x);
        self.unlink(x, q);
        self.link(p, u);
        self.link(u, q);
    }

    /// Swaps `(u1,u2)`, `(v1,v2)` for `(u1,v1)`, `(u2,v2)`.
    pub fn apply_merge(&mut self, u1: usize, u2: usize, v1: usize, v2: usize) {
        self.unlink(u1, u2);
        self.unlink(v1, v2);
        self.link(u1, v1);
        self.link(u2, v2);
    }

    /// First mergeable edge pair between two distinct cycles, scanning nodes
    /// in ascending order.
    pub fn find_merge(
        &self,
        graph: &TriangularGraph,
        labels: &[usize],
    ) -> Option<(usize, usize, usize, usize)> {
        for u1 in 0..self.len() {
            if !self.on_cycle(u1) {
                continue;
            }
            for u2 in self.neighbors(u1) {
                for v1 in graph.neighbors(u1) {
                    if labels[v1] == NONE || labels[v1] == labels[u1] {
                        continue;
                    }
                    for v2 in self.neighbors(v1) {
                        if graph.has_edge(u2, v2) {
                            return Some((u1, u2, v1, v2));
                        }
                    }
                }
            }
        }
        None
    }

    /// Merges cycles pairwise until one remains or no mergeable pair exists.
    /// Returns the final cycle count.
    pub fn merge_all(&mut self, graph: &TriangularGraph) -> usize {
        loop {
            let (labels, count) = self.labels();
            if count <= 1 {
                return count;
            }
            match self.find_merge(graph, &labels) {
                Some((u1, u2, v1, v2)) => self.apply_merge(u1, u2, v1, v2),
                None => return count,
            }
        }
    }

    /// Drops every cycle except the largest (ties: the one holding the lowest node).
    pub fn keep_largest(&mut self) {
        let cycles = self.cycles();
        let Some(best) = cycles
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
            .map(|(i, _)| i)
        else {
            return;
        };
        for (i, c) in cycles.iter().enumerate() {
            if i != best {
                for &k in c {
                    self.nbr[k] = [NONE, NONE];
                }
            }
        }
    }
}
