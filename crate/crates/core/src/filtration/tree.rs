use std::ops::Range;

use super::TimeGrid;
use crate::error::{Error, Result};

pub type NodeId = usize;

/// Upper bound on the node count of a materialized event tree.
pub const MAX_NODES: usize = 4_000_000;

const PROB_TOL: f64 = 1e-12;

/// Nodes grouped by time level, with one-step transition probabilities.
///
/// Implemented both by non-recombining event trees (nodes are atoms of the
/// filtration) and by recombining lattices (nodes are Markov states).
/// Nodes of each level occupy a contiguous id range, levels in order.
pub trait NodeGraph {
    fn grid(&self) -> &TimeGrid;
    fn node_count(&self) -> usize;
    fn level_range(&self, k: usize) -> Range<NodeId>;
    fn level_of(&self, node: NodeId) -> usize;
    /// Unconditional probability of reaching `node`.
    fn prob(&self, node: NodeId) -> f64;
    /// `(successor, transition probability)` pairs; empty at the last level.
    fn successors(&self, node: NodeId) -> &[(NodeId, f64)];

    fn levels(&self) -> usize {
        self.grid().len()
    }
}

/// Finite filtration represented as a tree: the nodes at level `k` are the
/// atoms of `F(t_k)` and every leaf (at the last level) is one path `ω`.
#[derive(Debug, Clone)]
pub struct EventTree {
    grid: TimeGrid,
    parent: Vec<Option<NodeId>>,
    level: Vec<usize>,
    cond_prob: Vec<f64>,
    prob: Vec<f64>,
    succ: Vec<Vec<(NodeId, f64)>>,
    level_start: Vec<NodeId>,
    // paths through a node form a contiguous range of leaf order
    path_range: Vec<(usize, usize)>,
    // node visited at each level, per path
    paths: Vec<Vec<NodeId>>,
}

impl EventTree {
    /// Builds a tree level by level. `branching(level, node)` returns the
    /// conditional probabilities of the children of `node`; it is not called
    /// for nodes on the last level.
    pub fn from_fn<F>(grid: TimeGrid, mut branching: F) -> Result<Self>
    where
        F: FnMut(usize, NodeId) -> Vec<f64>,
    {
        let n_levels = grid.len();
        let mut parent = vec![None];
        let mut level = vec![0];
        let mut cond_prob = vec![1.0];
        let mut prob = vec![1.0];
        let mut succ: Vec<Vec<(NodeId, f64)>> = vec![Vec::new()];
        let mut level_start = vec![0, 1];

        for k in 0..n_levels - 1 {
            let (lo, hi) = (level_start[k], level_start[k + 1]);
            for node in lo..hi {
                let probs = branching(k, node);
                if probs.is_empty() {
                    return Err(Error::InvalidTree(format!(
                        "node {node} at level {k} has no children"
                    )));
                }
                if let Some(p) = probs.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
                    return Err(Error::InvalidTree(format!(
                        "node {node} has non-positive transition probability {p}"
                    )));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidTree(format!(
                        "children of node {node} have probabilities summing to {total}"
                    )));
                }
                for p in probs {
                    let id = parent.len();
                    if id >= MAX_NODES {
                        return Err(Error::InvalidTree(format!(
                            "tree exceeds {MAX_NODES} nodes"
                        )));
                    }
                    parent.push(Some(node));
                    level.push(k + 1);
                    cond_prob.push(p);
                    prob.push(prob[node] * p);
                    succ.push(Vec::new());
                    succ[node].push((id, p));
                }
            }
            level_start.push(parent.len());
        }

        let n_nodes = parent.len();
        let leaves = level_start[n_levels - 1]..level_start[n_levels];
        let n_paths = leaves.len();
        let mut path_range = vec![(usize::MAX, 0usize); n_nodes];
        let mut paths = Vec::with_capacity(n_paths);
        for (path, leaf) in leaves.enumerate() {
            let mut chain = vec![0; n_levels];
            let mut cur = Some(leaf);
            while let Some(n) = cur {
                chain[level[n]] = n;
                let r = &mut path_range[n];
                r.0 = r.0.min(path);
                r.1 = r.1.max(path + 1);
                cur = parent[n];
            }
            paths.push(chain);
        }

        Ok(Self {
            grid,
            parent,
            level,
            cond_prob,
            prob,
            succ,
            level_start,
            path_range,
            paths,
        })
    }

    /// Builds a tree from explicit child probabilities, one entry per
    /// non-terminal node in level order.
    pub fn new(grid: TimeGrid, transitions: Vec<Vec<f64>>) -> Result<Self> {
        let mut used = 0usize;
        let tree = Self::from_fn(grid, |_, node| {
            used = used.max(node + 1);
            transitions.get(node).cloned().unwrap_or_default()
        })?;
        if used != transitions.len() {
            return Err(Error::InvalidTree(format!(
                "{} transition rows given for {} non-terminal nodes",
                transitions.len(),
                used
            )));
        }
        Ok(tree)
    }

    /// Every non-terminal node has the same children probabilities.
    pub fn uniform_branching(grid: TimeGrid, probs: &[f64]) -> Result<Self> {
        Self::from_fn(grid, |_, _| probs.to_vec())
    }

    /// Binary tree with probability 1/2 on each branch over `steps` equal steps.
    pub fn symmetric_binomial(horizon: f64, steps: usize) -> Result<Self> {
        Self::uniform_branching(TimeGrid::uniform(horizon, steps)?, &[0.5, 0.5])
    }

    /// A single path: no uncertainty.
    pub fn deterministic(grid: TimeGrid) -> Result<Self> {
        Self::uniform_branching(grid, &[1.0])
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn last_level(&self) -> usize {
        self.grid.last_index()
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent[node]
    }

    pub fn level(&self, node: NodeId) -> usize {
        self.level[node]
    }

    pub fn time_of(&self, node: NodeId) -> f64 {
        self.grid.time(self.level[node])
    }

    pub fn children(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.succ[node].iter().map(|&(c, _)| c)
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.succ[node].is_empty()
    }

    /// Unconditional probability of the atom `node`.
    pub fn prob(&self, node: NodeId) -> f64 {
        self.prob[node]
    }

    /// Probability of `node` given its parent.
    pub fn cond_prob(&self, node: NodeId) -> f64 {
        self.cond_prob[node]
    }

    pub fn nodes_at(&self, k: usize) -> Range<NodeId> {
        self.level_start[k]..self.level_start[k + 1]
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn path_prob(&self, path: usize) -> f64 {
        self.prob[self.paths[path][self.last_level()]]
    }

    pub fn path_probs(&self) -> Vec<f64> {
        (0..self.n_paths()).map(|p| self.path_prob(p)).collect()
    }

    /// Node visited by `path` at level `k`.
    pub fn node_on_path(&self, path: usize, k: usize) -> NodeId {
        self.paths[path][k]
    }

    pub fn path(&self, path: usize) -> &[NodeId] {
        &self.paths[path]
    }

    /// Paths passing through `node`.
    pub fn paths_through(&self, node: NodeId) -> Range<usize> {
        let (lo, hi) = self.path_range[node];
        lo..hi
    }

    /// Whether `a` is an ancestor of (or equal to) `b`.
    pub fn is_ancestor_or_self(&self, a: NodeId, b: NodeId) -> bool {
        let (la, lb) = (self.level[a], self.level[b]);
        la <= lb && self.paths[self.path_range[b].0][la] == a
    }

    /// Ancestor of `node` at level `k <= level(node)`.
    pub fn ancestor_at(&self, node: NodeId, k: usize) -> NodeId {
        debug_assert!(k <= self.level[node]);
        self.paths[self.path_range[node].0][k]
    }

    /// Expectation of a path-indexed random variable.
    pub fn expectation(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n_paths());
        f.iter()
            .enumerate()
            .map(|(p, v)| self.path_prob(p) * v)
            .sum()
    }

    /// `(E |f|^p)^{1/p}`, or the maximum of `|f|` when `p` is infinite.
    pub fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return f.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        }
        let s: f64 = f
            .iter()
            .enumerate()
            .map(|(path, v)| self.path_prob(path) * v.abs().powf(p))
            .sum();
        s.powf(1.0 / p)
    }

    pub fn check_node_len(&self, len: usize, what: &'static str) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                what,
                expected: self.len(),
                found: len,
            });
        }
        Ok(())
    }

    pub fn check_path_len(&self, len: usize, what: &'static str) -> Result<()> {
        if len != self.n_paths() {
            return Err(Error::LengthMismatch {
                what,
                expected: self.n_paths(),
                found: len,
            });
        }
        Ok(())
    }
}

impl NodeGraph for EventTree {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn node_count(&self) -> usize {
        self.len()
    }

    fn level_range(&self, k: usize) -> Range<NodeId> {
        self.nodes_at(k)
    }

    fn level_of(&self, node: NodeId) -> usize {
        self.level[node]
    }

    fn prob(&self, node: NodeId) -> f64 {
        self.prob[node]
    }

    fn successors(&self, node: NodeId) -> &[(NodeId, f64)] {
        &self.succ[node]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2() -> EventTree {
        EventTree::symmetric_binomial(2.0, 2).unwrap()
    }

    #[test]
    fn binomial_layout() {
        let t = t2();
        assert_eq!(t.len(), 7);
        assert_eq!(t.n_paths(), 4);
        assert_eq!(t.nodes_at(1), 1..3);
        assert_eq!(t.nodes_at(2), 3..7);
        assert_eq!(t.path(0), &[0, 1, 3]);
        assert_eq!(t.path(3), &[0, 2, 6]);
        assert_eq!(t.paths_through(1), 0..2);
        assert_eq!(t.paths_through(2), 2..4);
        assert_eq!(t.paths_through(0), 0..4);
        let total: f64 = t.path_probs().iter().sum();
        assert_eq!(total, 1.0);
        assert!(t.is_ancestor_or_self(1, 4));
        assert!(!t.is_ancestor_or_self(2, 4));
        assert_eq!(t.ancestor_at(5, 1), 2);
    }

    #[test]
    fn probabilities_must_be_positive_and_normalized() {
        let g = TimeGrid::uniform(1.0, 1).unwrap();
        assert!(EventTree::uniform_branching(g.clone(), &[0.5, 0.6]).is_err());
        assert!(EventTree::uniform_branching(g.clone(), &[1.0, 0.0]).is_err());
        assert!(EventTree::uniform_branching(g.clone(), &[]).is_err());
        assert!(EventTree::uniform_branching(g, &[0.3, 0.7]).is_ok());
    }

    #[test]
    fn explicit_transitions() {
        let g = TimeGrid::uniform(2.0, 2).unwrap();
        let t = EventTree::new(g.clone(), vec![vec![0.25, 0.75], vec![1.0], vec![0.5, 0.5]]).unwrap();
        assert_eq!(t.n_paths(), 3);
        assert!((t.path_prob(0) - 0.25).abs() < 1e-15);
        assert!((t.path_prob(2) - 0.375).abs() < 1e-15);
        assert!(EventTree::new(g, vec![vec![0.25, 0.75], vec![1.0]]).is_err());
    }

    #[test]
    fn lp_norms() {
        let t = t2();
        let f = [1.0, -1.0, 2.0, 0.0];
        assert_eq!(t.lp_norm(&f, f64::INFINITY), 2.0);
        assert!((t.lp_norm(&f, 1.0) - 1.0).abs() < 1e-15);
        assert!((t.lp_norm(&f, 2.0) - 1.5f64.sqrt()).abs() < 1e-15);
    }
}
