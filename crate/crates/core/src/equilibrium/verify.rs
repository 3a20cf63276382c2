//! Arrow–Debreu check of a price and an allocation.

use std::fmt;

use crate::consumption::ConsumptionPlan;
use crate::filtration::OptionalProcess;
use crate::pricing::pair;

use super::Economy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    /// Market clearing, relative to the largest aggregate increment.
    pub clearing: f64,
    /// `min(share, 1 − ∇V / (μ ψ))` per agent and node.
    pub kkt: f64,
    /// `|pair(ψ, x^i − e^i)|` relative to `pair(ψ, e)`.
    pub budget: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            clearing: 1e-12,
            kkt: 1e-6,
            budget: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    /// (a) `ψ ≥ 0` and `pair(ψ, e) > 0`.
    Price,
    /// (b) plans are nonnegative and add up to the aggregate endowment.
    Attainability,
    /// (c) supergradient dominated by a positive multiple of `ψ`.
    Domination { agent: usize },
    /// (c) equality wherever the agent consumes.
    Slackness { agent: usize },
    /// (c) the budget binds.
    Budget { agent: usize },
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Price => f.write_str("(a) price"),
            Clause::Attainability => f.write_str("(b) attainability"),
            Clause::Domination { agent } => write!(f, "(c) domination, agent {agent}"),
            Clause::Slackness { agent } => {
                write!(f, "(c) complementary slackness, agent {agent}")
            }
            Clause::Budget { agent } => write!(f, "(c) budget, agent {agent}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrowDebreuReport {
    pub endowment_value: f64,
    pub clearing_residual: f64,
    /// `μ^i = max_n ∇V^i(n) / ψ(n)`.
    pub multipliers: Vec<f64>,
    pub kkt_residuals: Vec<f64>,
    /// `pair(ψ, e^i − x^i)`.
    pub budget_gaps: Vec<f64>,
    pub violations: Vec<(Clause, String)>,
}

impl ArrowDebreuReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn price_ok(&self) -> bool {
        !self.violations.iter().any(|(c, _)| *c == Clause::Price)
    }

    pub fn attainable(&self) -> bool {
        !self.violations.iter().any(|(c, _)| *c == Clause::Attainability)
    }

    pub fn optimal(&self) -> bool {
        !self.violations.iter().any(|(c, _)| {
            matches!(
                c,
                Clause::Domination { .. } | Clause::Slackness { .. } | Clause::Budget { .. }
            )
        })
    }

    pub fn slackness_ok(&self) -> bool {
        !self.violations.iter().any(|(c, _)| matches!(c, Clause::Slackness { .. }))
    }

    pub fn budgets_bind(&self) -> bool {
        !self.violations.iter().any(|(c, _)| matches!(c, Clause::Budget { .. }))
    }
}

impl fmt::Display for ArrowDebreuReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return f.write_str("all clauses hold");
        }
        for (i, (c, msg)) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{c}: {msg}")?;
        }
        Ok(())
    }
}

pub fn verify_arrow_debreu(
    eco: &Economy,
    psi: &OptionalProcess,
    plans: &[ConsumptionPlan],
    tol: &VerifyTolerances,
) -> ArrowDebreuReport {
    let tree = eco.tree();
    let e = eco.aggregate().increments();
    let mut violations = Vec::new();
    let n_agents = eco.n_agents();

    if psi.len() != tree.len() || plans.len() != n_agents || plans.iter().any(|x| x.increments().len() != tree.len()) {
        violations.push((Clause::Attainability, "dimensions do not match the economy".into()));
        return ArrowDebreuReport {
            endowment_value: f64::NAN,
            clearing_residual: f64::NAN,
            multipliers: Vec::new(),
            kkt_residuals: Vec::new(),
            budget_gaps: Vec::new(),
            violations,
        };
    }

    let endowment_value = pair(tree, psi, eco.aggregate().signed());
    if let Some(n) = (0..tree.len()).find(|&n| !(psi[n] >= 0.0)) {
        violations.push((Clause::Price, format!("ψ = {} at node {n}", psi[n])));
    }
    if !(endowment_value > 0.0) {
        violations.push((Clause::Price, format!("pair(ψ, e) = {endowment_value}")));
    }

    let scale = e.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let mut clearing_residual: f64 = 0.0;
    for n in 0..tree.len() {
        let s: f64 = plans.iter().map(|x| x.increments()[n]).sum();
        clearing_residual = clearing_residual.max((s - e[n]).abs());
    }
    if clearing_residual > tol.clearing * scale {
        violations.push((
            Clause::Attainability,
            format!("clearing residual {clearing_residual:e}"),
        ));
    }

    let mut multipliers = Vec::with_capacity(n_agents);
    let mut kkt_residuals = Vec::with_capacity(n_agents);
    let mut budget_gaps = Vec::with_capacity(n_agents);
    for (i, (agent, x)) in eco.agents().iter().zip(plans).enumerate() {
        let g = agent.utility.gradient(tree, x.signed());
        let gap = pair(tree, psi, &(agent.endowment.signed() - x.signed()));
        budget_gaps.push(gap);
        if !(gap.abs() <= tol.budget * endowment_value) {
            violations.push((
                Clause::Budget { agent: i },
                format!("pair(ψ, e − x) = {gap:e}"),
            ));
        }

        if let Some(n) = (0..tree.len()).find(|&n| psi[n] <= 0.0 && g[n] > 0.0) {
            violations.push((
                Clause::Domination { agent: i },
                format!("∇V = {} where ψ = {}", g[n], psi[n]),
            ));
            multipliers.push(f64::INFINITY);
            kkt_residuals.push(f64::INFINITY);
            continue;
        }
        let mu = (0..tree.len())
            .filter(|&n| psi[n] > 0.0)
            .map(|n| g[n] / psi[n])
            .fold(0.0, f64::max);
        multipliers.push(mu);
        if !(mu > 0.0) {
            violations.push((Clause::Domination { agent: i }, "no positive multiplier".into()));
            kkt_residuals.push(f64::INFINITY);
            continue;
        }
        let mut r: f64 = 0.0;
        let mut worst = 0;
        for n in 0..tree.len() {
            let xn = x.increments()[n];
            let share = if e[n] > 0.0 { xn / e[n] } else if xn > 0.0 { 1.0 } else { 0.0 };
            let slack = if psi[n] > 0.0 { 1.0 - g[n] / (mu * psi[n]) } else { 0.0 };
            let v = share.min(slack);
            if v > r {
                r = v;
                worst = n;
            }
        }
        kkt_residuals.push(r);
        if r > tol.kkt {
            violations.push((
                Clause::Slackness { agent: i },
                format!("residual {r:e} at node {worst}"),
            ));
        }
    }

    ArrowDebreuReport {
        endowment_value,
        clearing_residual,
        multipliers,
        kkt_residuals,
        budget_gaps,
        violations,
    }
}
