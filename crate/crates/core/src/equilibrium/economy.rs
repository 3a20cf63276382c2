use crate::consumption::{ConsumptionPlan, NormParams, SignedPlan};
use crate::filtration::EventTree;
use crate::preferences::{validate_felicity, HHKUtility};

use super::EquilibriumError;

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub utility: HHKUtility,
    pub endowment: ConsumptionPlan,
}

#[derive(Debug, Clone)]
pub struct Economy {
    tree: EventTree,
    agents: Vec<Agent>,
    norm: NormParams,
    aggregate: ConsumptionPlan,
}

impl Economy {
    /// Rejects zero or negative endowments and felicities that fail
    /// validation on the tree's grid.
    pub fn new(tree: EventTree, agents: Vec<Agent>, p: f64) -> Result<Self, EquilibriumError> {
        if agents.is_empty() {
            return Err(EquilibriumError::InvalidEconomy("no agents".into()));
        }
        let norm = NormParams::new(p)?;
        let mut total = vec![0.0; tree.len()];
        for (i, a) in agents.iter().enumerate() {
            let e = a.endowment.increments();
            if e.len() != tree.len() {
                return Err(EquilibriumError::InvalidEconomy(format!(
                    "agent {i}: endowment has {} nodes, tree has {}",
                    e.len(),
                    tree.len()
                )));
            }
            if a.endowment.signed().is_zero() {
                return Err(EquilibriumError::InvalidEconomy(format!(
                    "agent {i}: endowment is zero"
                )));
            }
            let report = validate_felicity(a.utility.felicity(), tree.time_grid());
            if !report.passed() {
                return Err(EquilibriumError::InvalidEconomy(format!("agent {i}: {report}")));
            }
            for (t, v) in total.iter_mut().zip(e) {
                *t += v;
            }
        }
        let aggregate = ConsumptionPlan::new(&tree, total)?;
        Ok(Self {
            tree,
            agents,
            norm,
            aggregate,
        })
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn norm(&self) -> NormParams {
        self.norm
    }

    pub fn aggregate(&self) -> &ConsumptionPlan {
        &self.aggregate
    }

    pub fn utility_of(&self, i: usize, x: &SignedPlan) -> f64 {
        self.agents[i].utility.utility(&self.tree, x)
    }
}

/// Per-agent plans stored as shares of the aggregate endowment, so that
/// markets clear by construction. Nodes without aggregate endowment carry
/// zero for everyone.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    shares: Vec<Vec<f64>>,
    plans: Vec<ConsumptionPlan>,
}

impl Allocation {
    pub fn from_shares(eco: &Economy, shares: Vec<Vec<f64>>) -> Result<Self, EquilibriumError> {
        let e = eco.aggregate().increments();
        if shares.len() != eco.n_agents() || shares.iter().any(|s| s.len() != e.len()) {
            return Err(EquilibriumError::InvalidEconomy(
                "share table does not match the economy".into(),
            ));
        }
        let plans = shares
            .iter()
            .map(|s| ConsumptionPlan::new(eco.tree(), s.iter().zip(e).map(|(a, b)| a * b).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { shares, plans })
    }

    /// Shares recovered from increments that add up to the aggregate.
    pub fn from_plans(eco: &Economy, plans: Vec<ConsumptionPlan>) -> Result<Self, EquilibriumError> {
        let e = eco.aggregate().increments();
        if plans.len() != eco.n_agents() {
            return Err(EquilibriumError::InvalidEconomy(format!(
                "{} plans for {} agents",
                plans.len(),
                eco.n_agents()
            )));
        }
        let shares = plans
            .iter()
            .map(|x| {
                x.increments()
                    .iter()
                    .zip(e)
                    .map(|(&xi, &en)| if en > 0.0 { xi / en } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(Self { shares, plans })
    }

    pub fn autarky(eco: &Economy) -> Self {
        let plans = eco.agents().iter().map(|a| a.endowment.clone()).collect();
        Self::from_plans(eco, plans).expect("endowments match the economy")
    }

    pub fn shares(&self) -> &[Vec<f64>] {
        &self.shares
    }

    pub fn plans(&self) -> &[ConsumptionPlan] {
        &self.plans
    }

    pub fn plan(&self, i: usize) -> &ConsumptionPlan {
        &self.plans[i]
    }

    /// `max_n |Σ_i Δx^i(n) − Δe(n)|`.
    pub fn clearing_residual(&self, eco: &Economy) -> f64 {
        let e = eco.aggregate().increments();
        (0..e.len())
            .map(|n| (self.plans.iter().map(|x| x.increments()[n]).sum::<f64>() - e[n]).abs())
            .fold(0.0, f64::max)
    }
}
