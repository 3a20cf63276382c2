use std::ops::Index;

use super::{EventTree, NodeId};
use crate::error::{Error, Result};

/// Adapted process: one value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionalProcess {
    values: Vec<f64>,
}

impl OptionalProcess {
    pub fn new(tree: &EventTree, values: Vec<f64>) -> Result<Self> {
        tree.check_node_len(values.len(), "optional process")?;
        if let Some(n) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "process value at node {n} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn constant(tree: &EventTree, c: f64) -> Self {
        Self {
            values: vec![c; tree.len()],
        }
    }

    pub fn from_fn(tree: &EventTree, f: impl FnMut(NodeId) -> f64) -> Self {
        Self {
            values: (0..tree.len()).map(f).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value along `path` at each level.
    pub fn path_values(&self, tree: &EventTree, path: usize) -> Vec<f64> {
        tree.path(path).iter().map(|&n| self.values[n]).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<NodeId> for OptionalProcess {
    type Output = f64;

    fn index(&self, node: NodeId) -> &f64 {
        &self.values[node]
    }
}

/// Not necessarily adapted process: one value per `(path, time index)`.
///
/// Between grid times the process is extended by linear interpolation, so
/// every sample path is continuous on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawProcess {
    n_levels: usize,
    values: Vec<f64>,
}

impl RawProcess {
    /// `values[path][k]`.
    pub fn new(tree: &EventTree, values: Vec<Vec<f64>>) -> Result<Self> {
        tree.check_path_len(values.len(), "raw process paths")?;
        let n_levels = tree.time_grid().len();
        let mut flat = Vec::with_capacity(values.len() * n_levels);
        for row in values {
            if row.len() != n_levels {
                return Err(Error::LengthMismatch {
                    what: "raw process times",
                    expected: n_levels,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("raw process value is not finite".into()));
            }
            flat.extend(row);
        }
        Ok(Self {
            n_levels,
            values: flat,
        })
    }

    /// `f(path, k)`.
    pub fn from_fn(tree: &EventTree, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n_levels = tree.time_grid().len();
        let mut values = Vec::with_capacity(tree.n_paths() * n_levels);
        for path in 0..tree.n_paths() {
            for k in 0..n_levels {
                values.push(f(path, k));
            }
        }
        Self { n_levels, values }
    }

    /// The adapted raw process that reads `psi` along each path.
    pub fn from_optional(tree: &EventTree, psi: &OptionalProcess) -> Self {
        Self::from_fn(tree, |path, k| psi[tree.node_on_path(path, k)])
    }

    pub fn get(&self, path: usize, k: usize) -> f64 {
        self.values[path * self.n_levels + k]
    }

    pub fn path_values(&self, path: usize) -> &[f64] {
        &self.values[path * self.n_levels..(path + 1) * self.n_levels]
    }

    pub fn n_paths(&self) -> usize {
        self.values.len() / self.n_levels.max(1)
    }

    /// Continuous-time value at `t` on `path` (linear between grid times).
    pub fn value_at(&self, tree: &EventTree, path: usize, t: f64) -> f64 {
        let times = tree.time_grid().times();
        let row = self.path_values(path);
        if t <= times[0] {
            return row[0];
        }
        let last = times.len() - 1;
        if t >= times[last] {
            return row[last];
        }
        let k = times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (times[k], times[k + 1]);
        let a = (t - t0) / (t1 - t0);
        row[k] * (1.0 - a) + row[k + 1] * a
    }

    /// `E sup_t |ξ_t|`; the supremum of a piecewise-linear path is attained on the grid.
    pub fn expected_sup_abs(&self, tree: &EventTree) -> f64 {
        (0..self.n_paths())
            .map(|p| {
                tree.path_prob(p)
                    * self
                        .path_values(p)
                        .iter()
                        .fold(0.0, |m: f64, v| m.max(v.abs()))
            })
            .sum()
    }

    /// Largest slope of any sample path between consecutive grid times.
    pub fn lipschitz_constant(&self, tree: &EventTree) -> f64 {
        let w = tree.time_grid().times();
        let mut l: f64 = 0.0;
        for p in 0..self.n_paths() {
            for (k, pair) in self.path_values(p).windows(2).enumerate() {
                l = l.max((pair[1] - pair[0]).abs() / (w[k + 1] - w[k]));
            }
        }
        l
    }
}

/// Signed random measure on the grid, not necessarily adapted: a mass per
/// `(path, time index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMeasure {
    n_levels: usize,
    mass: Vec<f64>,
}

impl RawMeasure {
    pub fn from_fn(tree: &EventTree, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n_levels = tree.time_grid().len();
        let mut mass = Vec::with_capacity(tree.n_paths() * n_levels);
        for path in 0..tree.n_paths() {
            for k in 0..n_levels {
                mass.push(f(path, k));
            }
        }
        Self { n_levels, mass }
    }

    pub fn zero(tree: &EventTree) -> Self {
        Self::from_fn(tree, |_, _| 0.0)
    }

    /// `δ_S h`: mass `h(path)` at the random time index `S(path)`.
    pub fn dirac_at_random_time(tree: &EventTree, times: &[usize], h: &[f64]) -> Result<Self> {
        tree.check_path_len(times.len(), "random time")?;
        tree.check_path_len(h.len(), "random mass")?;
        let n_levels = tree.time_grid().len();
        if let Some(&k) = times.iter().find(|&&k| k >= n_levels) {
            return Err(Error::IndexOutOfRange {
                what: "time",
                index: k,
                len: n_levels,
            });
        }
        Ok(Self::from_fn(tree, |p, k| if times[p] == k { h[p] } else { 0.0 }))
    }

    pub fn get(&self, path: usize, k: usize) -> f64 {
        self.mass[path * self.n_levels + k]
    }

    pub fn path_masses(&self, path: usize) -> &[f64] {
        &self.mass[path * self.n_levels..(path + 1) * self.n_levels]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_linear_between_grid_times() {
        let tree = EventTree::symmetric_binomial(2.0, 2).unwrap();
        let xi = RawProcess::from_fn(&tree, |p, k| (p * 10 + k) as f64);
        assert_eq!(xi.value_at(&tree, 1, 0.0), 10.0);
        assert_eq!(xi.value_at(&tree, 1, 0.5), 10.5);
        assert_eq!(xi.value_at(&tree, 1, 1.75), 11.75);
        assert_eq!(xi.value_at(&tree, 1, 5.0), 12.0);
        assert_eq!(xi.lipschitz_constant(&tree), 1.0);
        assert_eq!(xi.expected_sup_abs(&tree), 0.25 * (2.0 + 12.0 + 22.0 + 32.0));
    }

    #[test]
    fn rejects_wrong_shapes() {
        let tree = EventTree::symmetric_binomial(1.0, 1).unwrap();
        assert!(OptionalProcess::new(&tree, vec![0.0; 2]).is_err());
        assert!(OptionalProcess::new(&tree, vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(RawProcess::new(&tree, vec![vec![0.0, 1.0]]).is_err());
        assert!(RawProcess::new(&tree, vec![vec![0.0, 1.0], vec![0.0]]).is_err());
        assert!(RawMeasure::dirac_at_random_time(&tree, &[0, 2], &[1.0, 1.0]).is_err());
    }
}
