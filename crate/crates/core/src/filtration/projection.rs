//! Conditional expectations on the atoms of the filtration, optional and
//! dual optional projections, and evaluation at stopping times.

use super::{EventTree, NodeId, OptionalProcess, RawMeasure, RawProcess, StoppingTime};
use crate::consumption::SignedPlan;
use crate::error::{Error, Result};

/// `E[f | F(t_k)]` for every atom at level `k`, aligned with `tree.nodes_at(k)`.
pub fn conditional_expectation(tree: &EventTree, f: &[f64], k: usize) -> Result<Vec<f64>> {
    tree.check_path_len(f.len(), "random variable")?;
    if k > tree.last_level() {
        return Err(Error::IndexOutOfRange {
            what: "time",
            index: k,
            len: tree.last_level() + 1,
        });
    }
    let all = martingale_of(tree, f);
    Ok(all[tree.nodes_at(k)].to_vec())
}

/// The martingale `E[f | F(t)]` as a node-indexed vector, by backward
/// induction over one-step transition probabilities.
pub(crate) fn martingale_of(tree: &EventTree, f: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; tree.len()];
    let last = tree.last_level();
    for (path, n) in tree.nodes_at(last).enumerate() {
        v[n] = f[path];
    }
    for k in (0..last).rev() {
        for n in tree.nodes_at(k) {
            v[n] = tree.children(n).map(|c| tree.cond_prob(c) * v[c]).sum();
        }
    }
    v
}

/// `E[f | F(t)]` over all levels, as an optional process.
pub fn martingale(tree: &EventTree, f: &[f64]) -> Result<OptionalProcess> {
    tree.check_path_len(f.len(), "random variable")?;
    Ok(OptionalProcess::from_fn(tree, {
        let v = martingale_of(tree, f);
        move |n| v[n]
    }))
}

/// Optional projection: at each node `n` at level `k`, `E[ξ(·, t_k) | n]`.
pub fn optional_projection(tree: &EventTree, xi: &RawProcess) -> OptionalProcess {
    let mut out = vec![0.0; tree.len()];
    for k in 0..=tree.last_level() {
        let f: Vec<f64> = (0..tree.n_paths()).map(|p| xi.get(p, k)).collect();
        let level = cond_exp_level(tree, &f, k);
        for (n, v) in tree.nodes_at(k).zip(level) {
            out[n] = v;
        }
    }
    OptionalProcess::from_fn(tree, |n| out[n])
}

/// Dual optional projection of a raw random measure: the adapted measure
/// whose increment at node `n` (level `k`) is `E[m({t_k}) | n]`.
pub fn dual_optional_projection(tree: &EventTree, m: &RawMeasure) -> SignedPlan {
    let mut inc = vec![0.0; tree.len()];
    for k in 0..=tree.last_level() {
        let f: Vec<f64> = (0..tree.n_paths()).map(|p| m.get(p, k)).collect();
        for (n, v) in tree.nodes_at(k).zip(cond_exp_level(tree, &f, k)) {
            inc[n] = v;
        }
    }
    SignedPlan::from_increments_unchecked(inc)
}

// conditional expectation at one level, weighting paths inside each atom
fn cond_exp_level(tree: &EventTree, f: &[f64], k: usize) -> Vec<f64> {
    tree.nodes_at(k)
        .map(|n| {
            let mut num = 0.0;
            let mut den = 0.0;
            for p in tree.paths_through(n) {
                let w = tree.path_prob(p);
                num += w * f[p];
                den += w;
            }
            num / den
        })
        .collect()
}

/// `ψ_τ`, with the convention `ψ_τ = 0` on `{τ = ∞}`.
pub fn evaluate_at_stopping_time(
    tree: &EventTree,
    psi: &OptionalProcess,
    tau: &StoppingTime,
) -> Vec<f64> {
    (0..tree.n_paths())
        .map(|p| tau.node_on(p).map_or(0.0, |n| psi[n]))
        .collect()
}

/// Per-`S`-node values of `ψ_τ`.
pub fn evaluate_on_atoms(psi: &OptionalProcess, tau: &StoppingTime) -> Vec<f64> {
    tau.nodes().iter().map(|&n: &NodeId| psi[n]).collect()
}

/// For each path, the earliest time index at which the path attains its
/// maximum of `p`.
pub fn cross_section(tree: &EventTree, p: &OptionalProcess) -> Vec<usize> {
    (0..tree.n_paths())
        .map(|path| {
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for (k, &n) in tree.path(path).iter().enumerate() {
                if p[n] > best_val {
                    best_val = p[n];
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// `E ∫ ξ dm` for a raw process against a raw measure.
pub fn raw_pairing(tree: &EventTree, xi: &RawProcess, m: &RawMeasure) -> f64 {
    (0..tree.n_paths())
        .map(|p| {
            let s: f64 = xi
                .path_values(p)
                .iter()
                .zip(m.path_masses(p))
                .map(|(a, b)| a * b)
                .sum();
            tree.path_prob(p) * s
        })
        .sum()
}
