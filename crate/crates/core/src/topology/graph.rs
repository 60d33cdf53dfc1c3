use std::collections::{BTreeSet, VecDeque};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{config_err, Result};

/// A directed graph on nodes `0..n` with implicit self-loops.
///
/// `edges` holds ordered pairs `(from, to)` with `from != to`; an edge
/// `(j, i)` means node `i` receives from node `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl DirectedGraph {
    /// Graph with `n` nodes and self-loops only.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return config_err("a graph needs at least one node");
        }
        Ok(Self { n, edges: BTreeSet::new() })
    }

    /// Build from `(from, to)` pairs. Self-loops in the input are accepted and
    /// ignored since every node already has one; repeated pairs collapse.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::new(n)?;
        for (from, to) in edges {
            g.add_edge(from, to)?;
        }
        Ok(g)
    }

    /// Directed ring `i → i+1 (mod n)`.
    pub fn ring(n: usize) -> Result<Self> {
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Returns whether the edge was new.
    pub fn add_edge(&mut self, from: usize, to: usize) -> Result<bool> {
        if from >= self.n || to >= self.n {
            return config_err(format!(
                "edge ({from}, {to}) out of range for {} nodes",
                self.n
            ));
        }
        if from == to {
            return Ok(false);
        }
        Ok(self.edges.insert((from, to)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Non-self-loop edges in `(from, to)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Number of edges excluding self-loops.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        from == to && from < self.n || self.edges.contains(&(from, to))
    }

    /// Nodes `i` receives from, including itself, ascending.
    pub fn in_neighbors(&self, i: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.edges.iter().filter(|e| e.1 == i).map(|e| e.0).collect();
        v.push(i);
        v.sort_unstable();
        v
    }

    /// Nodes receiving from `j`, including itself, ascending.
    pub fn out_neighbors(&self, j: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.edges.iter().filter(|e| e.0 == j).map(|e| e.1).collect();
        v.push(j);
        v.sort_unstable();
        v
    }

    pub fn reversed(&self) -> Self {
        Self { n: self.n, edges: self.edges.iter().map(|&(a, b)| (b, a)).collect() }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(from, to) in &self.edges {
            adj[from].push(to);
        }
        adj
    }

    /// Nodes from which every node is reachable along edge direction, i.e.
    /// the possible roots of a spanning tree. Ascending.
    pub fn roots(&self) -> Vec<usize> {
        let adj = self.adjacency();
        (0..self.n)
            .filter(|&r| {
                let mut seen = vec![false; self.n];
                seen[r] = true;
                let mut count = 1;
                let mut queue = VecDeque::from([r]);
                while let Some(v) = queue.pop_front() {
                    for &w in &adj[v] {
                        if !seen[w] {
                            seen[w] = true;
                            count += 1;
                            queue.push_back(w);
                        }
                    }
                }
                count == self.n
            })
            .collect()
    }

    pub fn has_spanning_tree(&self) -> bool {
        !self.roots().is_empty()
    }

    /// Number of ordered non-ring, non-self pairs still free to hold an edge
    /// when starting from the directed ring.
    fn non_ring_slots(n: usize) -> Vec<(usize, usize)> {
        let ring: BTreeSet<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        (0..n)
            .flat_map(|j| (0..n).map(move |i| (j, i)))
            .filter(|&(j, i)| j != i && !ring.contains(&(j, i)))
            .collect()
    }
}

/// Directed ring plus `extra` distinct random non-ring edges, drawn without
/// replacement. Deterministic in `seed`.
pub fn generate_ring_plus_random(n: usize, extra: usize, seed: u64) -> Result<DirectedGraph> {
    let mut g = DirectedGraph::ring(n)?;
    let slots = DirectedGraph::non_ring_slots(n);
    if extra > slots.len() {
        return config_err(format!(
            "cannot add {extra} random edges: only {} non-ring slots on {n} nodes",
            slots.len()
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for idx in index::sample(&mut rng, slots.len(), extra) {
        let (from, to) = slots[idx];
        g.add_edge(from, to)?;
    }
    Ok(g)
}

/// The first failing clause of the network assumption, if any.
pub fn assumption2_violation(ga: &DirectedGraph, gbt: &DirectedGraph) -> Option<String> {
    if ga.n() != gbt.n() {
        return Some(format!(
            "node sets differ: G_A has {} nodes, G_B^T has {}",
            ga.n(),
            gbt.n()
        ));
    }
    let ra = ga.roots();
    if ra.is_empty() {
        return Some("G_A has no spanning tree".into());
    }
    let rb = gbt.roots();
    if rb.is_empty() {
        return Some("G_B^T has no spanning tree".into());
    }
    if !ra.iter().any(|r| rb.contains(r)) {
        return Some("root sets of G_A and G_B^T do not intersect".into());
    }
    None
}

/// Both graphs contain a spanning tree and share at least one root.
pub fn check_assumption2(ga: &DirectedGraph, gbt: &DirectedGraph) -> bool {
    assumption2_violation(ga, gbt).is_none()
}
