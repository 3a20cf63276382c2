//! Outer loop: adjust Negishi weights until every budget binds.

use crate::filtration::OptionalProcess;
use crate::pricing::{pair, StatePrice};

use super::welfare::welfare_optimum_from;
use super::{Allocation, Economy, EquilibriumError, SolverSettings, WelfareSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub allocation: Allocation,
    pub state_price: StatePrice,
    /// Positive, summing to one.
    pub weights: Vec<f64>,
    pub gradients: Vec<OptionalProcess>,
    pub clearing_residual: f64,
    /// `b^i = pair(ψ, e^i − x^i)`.
    pub budget_gaps: Vec<f64>,
    /// `pair(ψ, e)`.
    pub endowment_value: f64,
    pub kkt_residual: f64,
    /// Accepted welfare solves, the first one included.
    pub iterations: usize,
    pub inner_iterations: usize,
}

impl EquilibriumResult {
    pub(crate) fn from_welfare(
        eco: &Economy,
        weights: &[f64],
        sol: WelfareSolution,
        iterations: usize,
    ) -> Self {
        let tree = eco.tree();
        let psi = sol.state_price.psi();
        let budget_gaps = eco
            .agents()
            .iter()
            .zip(sol.allocation.plans())
            .map(|(a, x)| pair(tree, psi, &(a.endowment.signed() - x.signed())))
            .collect();
        Self {
            clearing_residual: sol.allocation.clearing_residual(eco),
            endowment_value: pair(tree, psi, eco.aggregate().signed()),
            budget_gaps,
            kkt_residual: sol.kkt_residual,
            inner_iterations: sol.iterations,
            allocation: sol.allocation,
            state_price: sol.state_price,
            gradients: sol.gradients,
            weights: weights.to_vec(),
            iterations,
        }
    }

    /// `max_i |b^i| / pair(ψ, e)`.
    pub fn relative_budget_gap(&self) -> f64 {
        let m = self.budget_gaps.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
        m / self.endowment_value
    }
}

/// Negishi iteration from equal weights: `λ^i ← λ^i exp(η b^i / pair(ψ, e))`,
/// renormalized. A step that does not shrink the largest budget gap is
/// undone and `η` halved; an accepted step lengthens `η`.
pub fn solve_equilibrium(
    eco: &Economy,
    settings: &SolverSettings,
) -> Result<EquilibriumResult, EquilibriumError> {
    settings.validate()?;
    let n = eco.n_agents();
    let mut weights = vec![1.0 / n as f64; n];
    let sol = welfare_optimum_from(eco, &weights, &Allocation::autarky(eco), settings)?;
    let mut inner = sol.iterations;
    let mut best = EquilibriumResult::from_welfare(eco, &weights, sol, 1);
    let mut eta = settings.damping;
    let max_eta = 64.0 * settings.damping;

    while best.relative_budget_gap() > settings.budget_tol {
        if best.iterations >= settings.max_outer_iters || eta < 1e-14 {
            return Err(EquilibriumError::NonConvergence {
                iterations: best.iterations,
                residual: best.relative_budget_gap(),
                best: Box::new(best),
            });
        }
        let mut trial: Vec<f64> = weights
            .iter()
            .zip(&best.budget_gaps)
            .map(|(w, b)| w * (eta * b / best.endowment_value).exp())
            .collect();
        let total: f64 = trial.iter().sum();
        trial.iter_mut().for_each(|w| *w /= total);

        let sol = welfare_optimum_from(eco, &trial, &best.allocation, settings)?;
        inner += sol.iterations;
        let cand = EquilibriumResult::from_welfare(eco, &trial, sol, best.iterations + 1);
        if cand.relative_budget_gap() < best.relative_budget_gap() {
            weights = trial;
            best = cand;
            eta = (eta * 1.5).min(max_eta);
        } else {
            eta *= 0.5;
        }
    }
    best.inner_iterations = inner;
    Ok(best)
}
