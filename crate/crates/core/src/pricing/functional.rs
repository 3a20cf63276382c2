//! Price functionals on the commodity space and the recovery of a state
//! price from a functional through Riesz densities at stopping times.

use crate::consumption::{dirac_atoms, SignedPlan};
use crate::error::{Error, Result};
use crate::filtration::{aggregate_tsystem, EventTree, OptionalProcess, RawProcess, StoppingTime, TSystem};

use super::StatePrice;

/// A linear rule assigning a value to every signed plan.
pub trait PriceFunctional {
    fn price(&self, z: &SignedPlan) -> f64;
}

impl<F> PriceFunctional for F
where
    F: Fn(&SignedPlan) -> f64,
{
    fn price(&self, z: &SignedPlan) -> f64 {
        self(z)
    }
}

/// `⟨ψ, z⟩ = E Σ_n ψ(n) Δz(n)`.
pub fn pair(tree: &EventTree, psi: &OptionalProcess, z: &SignedPlan) -> f64 {
    z.increments()
        .iter()
        .enumerate()
        .filter(|(_, dz)| **dz != 0.0)
        .map(|(n, dz)| tree.prob(n) * psi[n] * dz)
        .sum()
}

/// `E ∫ ξ dz` for a raw (not necessarily adapted) process.
pub fn pair_raw(tree: &EventTree, xi: &RawProcess, z: &SignedPlan) -> f64 {
    let inc = z.increments();
    (0..tree.n_paths())
        .map(|p| {
            let s: f64 = tree
                .path(p)
                .iter()
                .enumerate()
                .map(|(k, &n)| xi.get(p, k) * inc[n])
                .sum();
            tree.path_prob(p) * s
        })
        .sum()
}

/// The functional `⟨ψ, ·⟩`.
#[derive(Debug, Clone, Copy)]
pub struct Represented<'a> {
    pub tree: &'a EventTree,
    pub psi: &'a OptionalProcess,
}

impl PriceFunctional for Represented<'_> {
    fn price(&self, z: &SignedPlan) -> f64 {
        pair(self.tree, self.psi, z)
    }
}

/// The functional `E ∫ ξ d(·)` of a raw process.
#[derive(Debug, Clone, Copy)]
pub struct RawRepresented<'a> {
    pub tree: &'a EventTree,
    pub xi: &'a RawProcess,
}

impl PriceFunctional for RawRepresented<'_> {
    fn price(&self, z: &SignedPlan) -> f64 {
        pair_raw(self.tree, self.xi, z)
    }
}

/// Riesz density of `Z ↦ π(δ_τ Z)` on `F(τ)`: one value per node `A` of the
/// antichain of `τ`, `z^τ(A) = π(δ_τ 1_A) / P(A)`.
pub fn riesz_density<P: PriceFunctional + ?Sized>(
    tree: &EventTree,
    pi: &P,
    tau: &StoppingTime,
) -> Result<Vec<f64>> {
    let mut unit = vec![0.0; tau.nodes().len()];
    tau.nodes()
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let prob = tree.prob(n);
            if !(prob > 0.0) {
                return Err(Error::DegenerateAtom { node: n });
            }
            unit[i] = 1.0;
            let v = pi.price(&dirac_atoms(tree, tau, &unit)) / prob;
            unit[i] = 0.0;
            Ok(v)
        })
        .collect()
}

/// The T-system `(z^τ)` of a functional over the given stopping times.
pub fn riesz_tsystem<'a, P: PriceFunctional + ?Sized>(
    tree: &EventTree,
    pi: &P,
    times: impl IntoIterator<Item = &'a StoppingTime>,
) -> Result<TSystem> {
    let mut ts = TSystem::new();
    for tau in times {
        ts.insert(tau.clone(), riesz_density(tree, pi, tau)?)?;
    }
    Ok(ts)
}

/// Relative tolerance of the representation identity check.
pub const REPRESENTATION_TOL: f64 = 1e-9;

/// Recovers the state price of a nonnegative linear functional.
///
/// Densities at the constant times `τ ≡ t_k` are aggregated node by node;
/// the result is then checked against `π` on a fixed battery of plans
/// (sums, multiples and mixtures of node deliveries). A functional that
/// disagrees with `⟨ψ, ·⟩` there, or has a negative density, is rejected.
pub fn extract_state_price<P: PriceFunctional + ?Sized>(
    tree: &EventTree,
    pi: &P,
    p: f64,
) -> Result<StatePrice> {
    let constants: Vec<StoppingTime> = (0..=tree.last_level())
        .map(|k| StoppingTime::constant(tree, k))
        .collect::<Result<_>>()?;
    let ts = riesz_tsystem(tree, pi, &constants)?;
    let psi = aggregate_tsystem(tree, &ts)?;

    for plan in probe_plans(tree) {
        let lhs = pi.price(&plan);
        let rhs = pair(tree, &psi, &plan);
        let scale = 1.0_f64.max(lhs.abs()).max(rhs.abs());
        if !lhs.is_finite() || (lhs - rhs).abs() > REPRESENTATION_TOL * scale {
            return Err(Error::NotRepresentable(format!(
                "functional gives {lhs} where the aggregated density gives {rhs}"
            )));
        }
    }
    if let Some(n) = psi.values().iter().position(|&v| v < 0.0) {
        return Err(Error::NotRepresentable(format!(
            "negative density {} at node {n}",
            psi[n]
        )));
    }
    StatePrice::new(tree, psi, p)
}

fn probe_plans(tree: &EventTree) -> Vec<SignedPlan> {
    let len = tree.len();
    let ones = SignedPlan::from_fn(tree, |_| 1.0);
    let ramp = SignedPlan::from_fn(tree, |n| (n + 1) as f64 / len as f64);
    let scrambled = SignedPlan::from_fn(tree, |n| ((n * 7919 + 13) % 17) as f64 / 17.0 - 0.3);
    vec![
        ones.scale(2.5),
        &ones + &ramp,
        scrambled.clone(),
        &scrambled.scale(-3.0) + &ramp,
    ]
}
