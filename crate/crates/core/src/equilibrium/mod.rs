//! Exchange economies with HHK agents: welfare optima, Negishi equilibria,
//! Arrow–Debreu verification and a small-instance Edgeworth oracle.

mod economy;
mod edgeworth;
mod negishi;
mod verify;
mod welfare;

use thiserror::Error;

pub use economy::{Agent, Allocation, Economy};
pub use edgeworth::{edgeworth_blocking_search, BlockingCertificate};
pub use negishi::{solve_equilibrium, EquilibriumResult};
pub use verify::{verify_arrow_debreu, ArrowDebreuReport, Clause, VerifyTolerances};
pub use welfare::{kkt_residual, welfare_optimum, WelfareSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Inner stopping rule on the KKT residual.
    pub kkt_tol: f64,
    pub max_inner_iters: usize,
    /// Outer stopping rule: `max |b^i| ≤ budget_tol · pair(ψ, e)`.
    pub budget_tol: f64,
    pub max_outer_iters: usize,
    /// Initial step of the multiplicative weight update.
    pub damping: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            kkt_tol: 1e-8,
            max_inner_iters: 100_000,
            budget_tol: 1e-8,
            max_outer_iters: 2_000,
            damping: 1.0,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), EquilibriumError> {
        let ok = self.kkt_tol > 0.0
            && self.budget_tol > 0.0
            && self.damping > 0.0
            && self.damping.is_finite()
            && self.max_inner_iters > 0
            && self.max_outer_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(EquilibriumError::InvalidSettings(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum EquilibriumError {
    #[error("invalid economy: {0}")]
    InvalidEconomy(String),

    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Box<EquilibriumResult>,
    },

    #[error("instance too large for exhaustive search: {0}")]
    SizeError(String),

    #[error(transparent)]
    Core(#[from] crate::error::Error),
}
