//! Inner problem: maximize `Σ_i λ^i V^i(x^i)` over node-wise splits of the
//! aggregate endowment.
//!
//! Active-set projected Newton. Each iteration fixes the variables that sit
//! at zero and want to stay there, solves the equality-constrained Newton
//! system on the rest, and searches along the projected arc. A projected
//! gradient step takes over when the Newton step makes no progress.

use nalgebra::{DMatrix, DVector};

use crate::consumption::SignedPlan;
use crate::filtration::OptionalProcess;
use crate::pricing::StatePrice;

use super::{Allocation, Economy, EquilibriumError, EquilibriumResult, SolverSettings};

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WelfareSolution {
    pub allocation: Allocation,
    pub state_price: StatePrice,
    /// `∇V^i(x^i)` per agent.
    pub gradients: Vec<OptionalProcess>,
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// `max_{i,n} min(share^i(n), 1 − λ^i ∇V^i(n) / ψ(n))` over nodes with
/// positive aggregate endowment.
pub fn kkt_residual(eco: &Economy, weights: &[f64], xs: &[Vec<f64>], grads: &[Vec<f64>]) -> f64 {
    let e = eco.aggregate().increments();
    let mut r: f64 = 0.0;
    for n in 0..e.len() {
        if e[n] <= 0.0 {
            continue;
        }
        let psi = (0..xs.len()).map(|i| weights[i] * grads[i][n]).fold(f64::MIN, f64::max);
        for i in 0..xs.len() {
            let slack = 1.0 - weights[i] * grads[i][n] / psi;
            r = r.max(f64::min(xs[i][n] / e[n], slack));
        }
    }
    r
}

pub fn welfare_optimum(
    eco: &Economy,
    weights: &[f64],
    settings: &SolverSettings,
) -> Result<WelfareSolution, EquilibriumError> {
    welfare_optimum_from(eco, weights, &Allocation::autarky(eco), settings)
}

pub(crate) fn welfare_optimum_from(
    eco: &Economy,
    weights: &[f64],
    start: &Allocation,
    settings: &SolverSettings,
) -> Result<WelfareSolution, EquilibriumError> {
    settings.validate()?;
    check_weights(eco, weights)?;
    let mut solver = Inner::new(eco, weights, start);
    let mut iterations = 0;
    loop {
        let r = solver.residual();
        if r <= settings.kkt_tol {
            break;
        }
        if iterations >= settings.max_inner_iters || !solver.step() {
            let best = solver.finish(iterations)?;
            return Err(EquilibriumError::NonConvergence {
                iterations,
                residual: r,
                best: Box::new(EquilibriumResult::from_welfare(eco, weights, best, 0)),
            });
        }
        iterations += 1;
    }
    solver.finish(iterations)
}

fn check_weights(eco: &Economy, weights: &[f64]) -> Result<(), EquilibriumError> {
    let sum: f64 = weights.iter().sum();
    if weights.len() != eco.n_agents()
        || weights.iter().any(|&w| !(w > 0.0 && w.is_finite()))
        || (sum - 1.0).abs() > 1e-12
    {
        return Err(EquilibriumError::InvalidSettings(format!(
            "Negishi weights must be positive and sum to one, got {weights:?}"
        )));
    }
    Ok(())
}

struct Inner<'a> {
    eco: &'a Economy,
    weights: &'a [f64],
    e: Vec<f64>,
    active: Vec<usize>,
    xs: Vec<Vec<f64>>,
    grads: Vec<Vec<f64>>,
    value: f64,
}

impl<'a> Inner<'a> {
    fn new(eco: &'a Economy, weights: &'a [f64], start: &Allocation) -> Self {
        let e = eco.aggregate().increments().to_vec();
        let active = (0..e.len()).filter(|&n| e[n] > 0.0).collect();
        let xs: Vec<Vec<f64>> = start
            .shares()
            .iter()
            .map(|s| s.iter().zip(&e).map(|(a, b)| a * b).collect())
            .collect();
        let mut me = Self {
            eco,
            weights,
            e,
            active,
            xs: Vec::new(),
            grads: Vec::new(),
            value: 0.0,
        };
        me.set(xs);
        me
    }

    fn set(&mut self, xs: Vec<Vec<f64>>) {
        let (value, grads) = self.evaluate(&xs);
        self.xs = xs;
        self.value = value;
        self.grads = grads;
    }

    fn evaluate(&self, xs: &[Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
        let tree = self.eco.tree();
        let mut value = 0.0;
        let mut grads = Vec::with_capacity(xs.len());
        for (i, a) in self.eco.agents().iter().enumerate() {
            let plan = SignedPlan::from_increments_unchecked(xs[i].clone());
            value += self.weights[i] * a.utility.utility(tree, &plan);
            grads.push(a.utility.gradient(tree, &plan).into_values());
        }
        (value, grads)
    }

    fn residual(&self) -> f64 {
        kkt_residual(self.eco, self.weights, &self.xs, &self.grads)
    }

    /// One iteration; false when neither search direction makes progress.
    fn step(&mut self) -> bool {
        if let Some(d) = self.newton_direction() {
            if self.search(&d) {
                return true;
            }
        }
        let d = self.gradient_direction();
        self.search(&d)
    }

    // Euclidean gradient of the weighted welfare in the increments.
    fn euclidean_gradient(&self, i: usize, n: usize) -> f64 {
        self.weights[i] * self.eco.tree().prob(n) * self.grads[i][n]
    }

    fn newton_direction(&self) -> Option<Vec<Vec<f64>>> {
        let tree = self.eco.tree();
        let n_agents = self.xs.len();
        let n_nodes = self.e.len();

        let mut var_index = vec![vec![usize::MAX; n_nodes]; n_agents];
        let mut vars = Vec::new();
        for &n in &self.active {
            let pivot = (0..n_agents)
                .max_by(|&a, &b| self.xs[a][n].total_cmp(&self.xs[b][n]))
                .unwrap();
            let mu = self.weights[pivot] * self.grads[pivot][n];
            for i in 0..n_agents {
                let at_bound = self.xs[i][n] <= 1e-14 * self.e[n];
                if i == pivot || !at_bound || self.weights[i] * self.grads[i][n] > mu {
                    var_index[i][n] = vars.len();
                    vars.push((i, n));
                }
            }
        }
        let nv = vars.len();
        let nc = self.active.len();
        let mut kkt = DMatrix::<f64>::zeros(nv + nc, nv + nc);
        let mut rhs = DVector::<f64>::zeros(nv + nc);

        for (i, a) in self.eco.agents().iter().enumerate() {
            let plan = SignedPlan::from_increments_unchecked(self.xs[i].clone());
            let h = a.utility.hessian(tree, &plan);
            for &(ia, m) in vars.iter().filter(|v| v.0 == i) {
                let r = var_index[ia][m];
                for &(_, m2) in vars.iter().filter(|v| v.0 == i) {
                    kkt[(r, var_index[i][m2])] = self.weights[i] * h[m * n_nodes + m2];
                }
            }
        }
        for (c, &n) in self.active.iter().enumerate() {
            for i in 0..n_agents {
                let v = var_index[i][n];
                if v != usize::MAX {
                    kkt[(nv + c, v)] = 1.0;
                    kkt[(v, nv + c)] = 1.0;
                }
            }
        }
        for (v, &(i, n)) in vars.iter().enumerate() {
            rhs[v] = -self.euclidean_gradient(i, n);
        }
        let sol = kkt.lu().solve(&rhs)?;
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mut d = vec![vec![0.0; n_nodes]; n_agents];
        for (v, &(i, n)) in vars.iter().enumerate() {
            d[i][n] = sol[v];
        }
        Some(d)
    }

    fn gradient_direction(&self) -> Vec<Vec<f64>> {
        let n_agents = self.xs.len();
        let mut d = vec![vec![0.0; self.e.len()]; n_agents];
        for &n in &self.active {
            let psi = (0..n_agents)
                .map(|i| self.weights[i] * self.grads[i][n])
                .fold(f64::MIN, f64::max);
            for i in 0..n_agents {
                d[i][n] = self.e[n] * self.weights[i] * self.grads[i][n] / psi;
            }
        }
        d
    }

    fn search(&mut self, d: &[Vec<f64>]) -> bool {
        let r0 = self.residual();
        let mut alpha = 1.0;
        while alpha >= MIN_STEP {
            let trial = self.project_step(d, alpha);
            let (value, grads) = self.evaluate(&trial);
            let mut slope = 0.0;
            for i in 0..trial.len() {
                for &n in &self.active {
                    slope += self.euclidean_gradient(i, n) * (trial[i][n] - self.xs[i][n]);
                }
            }
            let gain = value - self.value;
            let moved = trial
                .iter()
                .zip(&self.xs)
                .any(|(a, b)| a.iter().zip(b).any(|(u, v)| u != v));
            if !moved {
                return false;
            }
            let armijo = gain >= ARMIJO * slope && slope > 0.0;
            // Near the optimum the welfare change drowns in rounding; fall back
            // on the residual for full steps.
            let noisy = gain.abs() <= 1e-14 * self.value.abs().max(1.0) && alpha == 1.0;
            let accept = armijo
                || (noisy && kkt_residual(self.eco, self.weights, &trial, &grads) < r0);
            if accept {
                self.xs = trial;
                self.value = value;
                self.grads = grads;
                return true;
            }
            alpha *= 0.5;
        }
        false
    }

    fn project_step(&self, d: &[Vec<f64>], alpha: f64) -> Vec<Vec<f64>> {
        let n_agents = self.xs.len();
        let mut out = vec![vec![0.0; self.e.len()]; n_agents];
        let mut buf = vec![0.0; n_agents];
        for &n in &self.active {
            for i in 0..n_agents {
                buf[i] = self.xs[i][n] + alpha * d[i][n];
            }
            project_simplex(&mut buf, self.e[n]);
            for i in 0..n_agents {
                out[i][n] = buf[i];
            }
        }
        out
    }

    fn finish(self, iterations: usize) -> Result<WelfareSolution, EquilibriumError> {
        let eco = self.eco;
        let tree = eco.tree();
        let kkt = self.residual();
        let shares = self
            .xs
            .iter()
            .map(|x| {
                x.iter()
                    .zip(&self.e)
                    .map(|(&a, &b)| if b > 0.0 { a / b } else { 0.0 })
                    .collect()
            })
            .collect();
        let allocation = Allocation::from_shares(eco, shares)?;
        let psi: Vec<f64> = (0..tree.len())
            .map(|n| {
                (0..self.xs.len())
                    .map(|i| self.weights[i] * self.grads[i][n])
                    .fold(f64::MIN, f64::max)
            })
            .collect();
        let state_price =
            StatePrice::new(tree, OptionalProcess::new(tree, psi)?, eco.norm().p())?;
        let gradients = self
            .grads
            .into_iter()
            .map(|g| OptionalProcess::new(tree, g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WelfareSolution {
            allocation,
            state_price,
            gradients,
            kkt_residual: kkt,
            iterations,
        })
    }
}

/// Euclidean projection onto `{v ≥ 0, Σ v = total}`.
pub(crate) fn project_simplex(v: &mut [f64], total: f64) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - total) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}
