//! Exhaustive search for a coalition that blocks an allocation.
//!
//! Coalitions carry rational weights `λ^i ∈ [0, 1]`; a certificate is a
//! plan per member with `Σ λ^i y^i = Σ λ^i e^i` that every member strictly
//! prefers to their current plan.

use crate::consumption::ConsumptionPlan;

use super::{Economy, EquilibriumError};

const MAX_AGENTS: usize = 2;
const MAX_NODES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockingCertificate {
    /// `(numerator, denominator)` per agent.
    pub weights: Vec<(u32, u32)>,
    /// Proposed plans; zero for agents outside the coalition.
    pub plans: Vec<ConsumptionPlan>,
    /// `V^i(y^i) − V^i(x^i)` for the members.
    pub gains: Vec<f64>,
}

/// Searches weights with denominators up to `max_denominator` (one-member
/// coalitions first) and, for two-member coalitions, plans of the first
/// member on a grid of fractions `grid_step` of what the coalition owns.
pub fn edgeworth_blocking_search(
    eco: &Economy,
    x: &[ConsumptionPlan],
    grid_step: f64,
    max_denominator: u32,
) -> Result<Option<BlockingCertificate>, EquilibriumError> {
    let tree = eco.tree();
    if eco.n_agents() > MAX_AGENTS || tree.len() > MAX_NODES {
        return Err(EquilibriumError::SizeError(format!(
            "{} agents and {} nodes (limits {MAX_AGENTS} and {MAX_NODES})",
            eco.n_agents(),
            tree.len()
        )));
    }
    if x.len() != eco.n_agents() {
        return Err(EquilibriumError::InvalidEconomy(format!(
            "{} plans for {} agents",
            x.len(),
            eco.n_agents()
        )));
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) || max_denominator == 0 {
        return Err(EquilibriumError::InvalidSettings(format!(
            "grid step {grid_step}, max denominator {max_denominator}"
        )));
    }
    let current: Vec<f64> = (0..eco.n_agents())
        .map(|i| eco.utility_of(i, x[i].signed()))
        .collect();
    let improves = |i: usize, v: f64| v > current[i] + 1e-12 * current[i].abs().max(1.0);

    // one-member coalitions: the member must live off their endowment
    for (i, agent) in eco.agents().iter().enumerate() {
        let v = eco.utility_of(i, agent.endowment.signed());
        if improves(i, v) {
            let mut plans = vec![ConsumptionPlan::zero(tree); eco.n_agents()];
            plans[i] = agent.endowment.clone();
            let mut weights = vec![(0, 1); eco.n_agents()];
            weights[i] = (1, 1);
            return Ok(Some(BlockingCertificate {
                weights,
                plans,
                gains: vec![v - current[i]],
            }));
        }
    }
    if eco.n_agents() < 2 {
        return Ok(None);
    }

    let e1 = eco.agents()[0].endowment.increments();
    let e2 = eco.agents()[1].endowment.increments();
    let steps = (1.0 / grid_step).round() as usize;
    let n_nodes = tree.len();
    for (a, b, d) in coalition_weights(max_denominator) {
        let (l1, l2) = (a as f64 / d as f64, b as f64 / d as f64);
        let pool: Vec<f64> = (0..n_nodes).map(|n| l1 * e1[n] + l2 * e2[n]).collect();
        let mut idx = vec![0usize; n_nodes];
        loop {
            let y1: Vec<f64> = (0..n_nodes)
                .map(|n| (idx[n] as f64 / steps as f64).min(1.0) * pool[n] / l1)
                .collect();
            let y2: Vec<f64> = (0..n_nodes)
                .map(|n| ((pool[n] - l1 * y1[n]) / l2).max(0.0))
                .collect();
            let p1 = ConsumptionPlan::new(tree, y1)?;
            let p2 = ConsumptionPlan::new(tree, y2)?;
            let v1 = eco.utility_of(0, p1.signed());
            let v2 = eco.utility_of(1, p2.signed());
            if improves(0, v1) && improves(1, v2) {
                return Ok(Some(BlockingCertificate {
                    weights: vec![(a, d), (b, d)],
                    plans: vec![p1, p2],
                    gains: vec![v1 - current[0], v2 - current[1]],
                }));
            }
            if !advance(&mut idx, steps) {
                break;
            }
        }
    }
    Ok(None)
}

// Distinct ratios a : b with a, b ≥ 1, written over the smallest denominator.
fn coalition_weights(max_den: u32) -> Vec<(u32, u32, u32)> {
    let mut out: Vec<(u32, u32, u32)> = Vec::new();
    for d in 1..=max_den {
        for a in 1..=d {
            for b in 1..=d {
                if out.iter().all(|&(a2, b2, _)| a * b2 != b * a2) {
                    out.push((a, b, d));
                }
            }
        }
    }
    out
}

fn advance(idx: &mut [usize], max: usize) -> bool {
    for v in idx.iter_mut() {
        if *v < max {
            *v += 1;
            return true;
        }
        *v = 0;
    }
    false
}
