use super::{EventTree, NodeId, OptionalProcess};
use crate::error::{Error, Result};

/// Stopping time given by an antichain `S` of nodes: on each path, `τ` is
/// the time of the unique `S`-node the path crosses, or "never" if it
/// crosses none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingTime {
    nodes: Vec<NodeId>,
    hit: Vec<Option<NodeId>>,
}

impl StoppingTime {
    pub fn from_nodes(tree: &EventTree, mut nodes: Vec<NodeId>) -> Result<Self> {
        nodes.sort_unstable();
        nodes.dedup();
        if let Some(&n) = nodes.iter().find(|&&n| n >= tree.len()) {
            return Err(Error::IndexOutOfRange {
                what: "node",
                index: n,
                len: tree.len(),
            });
        }
        let mut hit = vec![None; tree.n_paths()];
        for &n in &nodes {
            for path in tree.paths_through(n) {
                if let Some(prev) = hit[path] {
                    return Err(Error::InvalidStoppingTime(format!(
                        "nodes {prev} and {n} lie on the same path"
                    )));
                }
                hit[path] = Some(n);
            }
        }
        Ok(Self { nodes, hit })
    }

    /// `τ ≡ t_k`.
    pub fn constant(tree: &EventTree, k: usize) -> Result<Self> {
        if k > tree.last_level() {
            return Err(Error::IndexOutOfRange {
                what: "time",
                index: k,
                len: tree.last_level() + 1,
            });
        }
        Self::from_nodes(tree, tree.nodes_at(k).collect())
    }

    /// `τ ≡ ∞`.
    pub fn never(tree: &EventTree) -> Self {
        Self {
            nodes: Vec::new(),
            hit: vec![None; tree.n_paths()],
        }
    }

    /// First time the path enters a node satisfying `pred`; if it never
    /// does, `fallback` decides: `Some(k)` stops at level `k` (which must
    /// be the last level or lie beyond every hit), `None` means never.
    pub fn first_hitting(
        tree: &EventTree,
        mut pred: impl FnMut(NodeId) -> bool,
        fallback: Option<usize>,
    ) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut stopped = vec![false; tree.len()];
        for n in 0..tree.len() {
            let ancestor_stopped = tree.parent(n).is_some_and(|p| stopped[p]);
            if ancestor_stopped {
                stopped[n] = true;
                continue;
            }
            let at_fallback = fallback == Some(tree.level(n));
            if pred(n) || at_fallback {
                stopped[n] = true;
                nodes.push(n);
            }
        }
        Self::from_nodes(tree, nodes)
    }

    /// First time `psi >= level`, never if that does not happen.
    pub fn first_passage_above(tree: &EventTree, psi: &OptionalProcess, level: f64) -> Self {
        Self::first_hitting(tree, |n| psi[n] >= level, None)
            .expect("first hits form an antichain")
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// The `S`-node crossed by `path`, if any.
    pub fn node_on(&self, path: usize) -> Option<NodeId> {
        self.hit[path]
    }

    pub fn time_index(&self, tree: &EventTree, path: usize) -> Option<usize> {
        self.hit[path].map(|n| tree.level(n))
    }

    pub fn is_never_somewhere(&self) -> bool {
        self.hit.iter().any(Option::is_none)
    }

    /// Whether `τ <= t_k` on every path (finite everywhere and bounded).
    pub fn is_bounded_by(&self, tree: &EventTree, k: usize) -> bool {
        self.hit.iter().all(|h| h.is_some_and(|n| tree.level(n) <= k))
    }

    /// Paths on which `self` and `other` stop at the same finite time.
    pub fn coincidence(&self, tree: &EventTree, other: &Self) -> Vec<usize> {
        (0..tree.n_paths())
            .filter(|&p| matches!((self.hit[p], other.hit[p]), (Some(a), Some(b)) if a == b))
            .collect()
    }

    /// Path-wise `|τ - σ|` in time units; infinite if exactly one is never,
    /// zero if both are.
    pub fn max_distance(&self, tree: &EventTree, other: &Self) -> f64 {
        (0..tree.n_paths())
            .map(|p| match (self.hit[p], other.hit[p]) {
                (Some(a), Some(b)) => (tree.time_of(a) - tree.time_of(b)).abs(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// Spreads per-`S`-node values to a path-indexed random variable that is
    /// zero on `{τ = ∞}`.
    pub fn atoms_to_paths(&self, tree: &EventTree, atom_values: &[f64]) -> Result<Vec<f64>> {
        if atom_values.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                what: "stopping-time atoms",
                expected: self.nodes.len(),
                found: atom_values.len(),
            });
        }
        let mut out = vec![0.0; tree.n_paths()];
        for (&n, &v) in self.nodes.iter().zip(atom_values) {
            for p in tree.paths_through(n) {
                out[p] = v;
            }
        }
        Ok(out)
    }

    /// Per-`S`-node values of a path-indexed random variable, failing if it
    /// is not constant on each atom of `F(τ)`.
    pub fn paths_to_atoms(&self, tree: &EventTree, h: &[f64]) -> Result<Vec<f64>> {
        tree.check_path_len(h.len(), "random variable")?;
        self.nodes
            .iter()
            .map(|&n| {
                let mut paths = tree.paths_through(n);
                let first = h[paths.next().expect("every node carries a path")];
                if paths.any(|p| h[p] != first) {
                    Err(Error::Measurability { node: n })
                } else {
                    Ok(first)
                }
            })
            .collect()
    }
}
