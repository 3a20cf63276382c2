//! The commodity space: adapted random measures on the grid, stored as one
//! increment per node. Cumulative consumption along a path is the running
//! sum of the increments of the nodes it visits, with `x(0-) = 0`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::filtration::{EventTree, NodeId, StoppingTime};

/// Element of `E`: signed increment per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPlan {
    increments: Vec<f64>,
}

/// Element of `E₊`: nonnegative increment per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsumptionPlan(SignedPlan);

/// Exponent `p >= 1` and its conjugate `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormParams {
    p: f64,
    q: f64,
}

impl NormParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "norm exponent must be finite and >= 1, got {p}"
            )));
        }
        let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

impl SignedPlan {
    pub fn new(tree: &EventTree, increments: Vec<f64>) -> Result<Self> {
        tree.check_node_len(increments.len(), "plan increments")?;
        if let Some(n) = increments.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "plan increment at node {n} is not finite"
            )));
        }
        Ok(Self { increments })
    }

    pub(crate) fn from_increments_unchecked(increments: Vec<f64>) -> Self {
        Self { increments }
    }

    pub fn zero(tree: &EventTree) -> Self {
        Self {
            increments: vec![0.0; tree.len()],
        }
    }

    pub fn from_fn(tree: &EventTree, f: impl FnMut(NodeId) -> f64) -> Self {
        Self {
            increments: (0..tree.len()).map(f).collect(),
        }
    }

    /// Unit mass at a single node.
    pub fn unit_at(tree: &EventTree, node: NodeId) -> Self {
        let mut inc = vec![0.0; tree.len()];
        inc[node] = 1.0;
        Self { increments: inc }
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn increment(&self, node: NodeId) -> f64 {
        self.increments[node]
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.increments.iter().all(|&v| v == 0.0)
    }

    /// Cumulative value `x(path, t_k)` for every level.
    pub fn cumulative_path(&self, tree: &EventTree, path: usize) -> Vec<f64> {
        let mut acc = 0.0;
        tree.path(path)
            .iter()
            .map(|&n| {
                acc += self.increments[n];
                acc
            })
            .collect()
    }

    /// Cumulative value at every node (it only depends on the node's history).
    pub fn cumulative(&self, tree: &EventTree) -> Vec<f64> {
        let mut c = vec![0.0; tree.len()];
        for n in 0..tree.len() {
            c[n] = self.increments[n] + tree.parent(n).map_or(0.0, |p| c[p]);
        }
        c
    }

    /// Terminal value `x_T` per path.
    pub fn terminal(&self, tree: &EventTree) -> Vec<f64> {
        let c = self.cumulative(tree);
        tree.nodes_at(tree.last_level()).map(|n| c[n]).collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            increments: self.increments.iter().map(|v| v * c).collect(),
        }
    }

    pub fn is_nonneg(&self) -> bool {
        self.increments.iter().all(|&v| v >= 0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.increments
            .iter()
            .zip(&other.increments)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            increments: self
                .increments
                .iter()
                .zip(&other.increments)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Add for &SignedPlan {
    type Output = SignedPlan;
    fn add(self, rhs: Self) -> SignedPlan {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SignedPlan {
    type Output = SignedPlan;
    fn sub(self, rhs: Self) -> SignedPlan {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &SignedPlan {
    type Output = SignedPlan;
    fn neg(self) -> SignedPlan {
        self.scale(-1.0)
    }
}

impl Mul<&SignedPlan> for f64 {
    type Output = SignedPlan;
    fn mul(self, rhs: &SignedPlan) -> SignedPlan {
        rhs.scale(self)
    }
}

impl ConsumptionPlan {
    pub fn new(tree: &EventTree, increments: Vec<f64>) -> Result<Self> {
        Self::try_from_signed(SignedPlan::new(tree, increments)?)
    }

    pub fn try_from_signed(plan: SignedPlan) -> Result<Self> {
        if let Some((node, &value)) = plan
            .increments
            .iter()
            .enumerate()
            .find(|(_, &v)| v < 0.0)
        {
            return Err(Error::NegativeIncrement { node, value });
        }
        Ok(Self(plan))
    }

    pub fn zero(tree: &EventTree) -> Self {
        Self(SignedPlan::zero(tree))
    }

    pub fn signed(&self) -> &SignedPlan {
        &self.0
    }

    pub fn into_signed(self) -> SignedPlan {
        self.0
    }

    pub fn increments(&self) -> &[f64] {
        &self.0.increments
    }

    pub fn add(&self, other: &ConsumptionPlan) -> ConsumptionPlan {
        ConsumptionPlan(&self.0 + &other.0)
    }

    /// `c · x` for `c >= 0`.
    pub fn scale(&self, c: f64) -> Result<ConsumptionPlan> {
        Self::try_from_signed(self.0.scale(c))
    }

    /// `ε y + (1 - ε) x` for `ε ∈ [0, 1]`.
    pub fn convex_combination(&self, other: &ConsumptionPlan, eps: f64) -> ConsumptionPlan {
        let inc = self
            .increments()
            .iter()
            .zip(other.increments())
            .map(|(&x, &y)| (eps * y + (1.0 - eps) * x).max(0.0))
            .collect();
        ConsumptionPlan(SignedPlan { increments: inc })
    }
}

impl AsRef<SignedPlan> for SignedPlan {
    fn as_ref(&self) -> &SignedPlan {
        self
    }
}

impl AsRef<SignedPlan> for ConsumptionPlan {
    fn as_ref(&self) -> &SignedPlan {
        &self.0
    }
}

/// Intertemporal norm `[Σ_k w_k E|x(t_k)|^p]^{1/p}` with the κ-weights of the grid.
pub fn intertemporal_norm(tree: &EventTree, z: &SignedPlan, p: f64) -> f64 {
    let grid = tree.time_grid();
    let cum = z.cumulative(tree);
    let mut s = 0.0;
    for (n, &c) in cum.iter().enumerate() {
        s += grid.weight(tree.level(n)) * tree.prob(n) * c.abs().powf(p);
    }
    s.powf(1.0 / p)
}

/// Strong norm: expected total variation, `Σ_n P(n) |Δz(n)|`.
pub fn strong_norm(tree: &EventTree, z: &SignedPlan) -> f64 {
    z.increments
        .iter()
        .enumerate()
        .map(|(n, v)| tree.prob(n) * v.abs())
        .sum()
}

/// `δ_τ h`: deliver `h` at `τ`. `h` is path-indexed and must be constant on
/// each atom of `F(τ)`; nothing is delivered on `{τ = ∞}`.
pub fn dirac(tree: &EventTree, tau: &StoppingTime, h: &[f64]) -> Result<SignedPlan> {
    let atoms = tau.paths_to_atoms(tree, h)?;
    Ok(dirac_atoms(tree, tau, &atoms))
}

/// `δ_τ h` with `h` given directly per node of the antichain of `τ`.
pub fn dirac_atoms(tree: &EventTree, tau: &StoppingTime, atom_values: &[f64]) -> SignedPlan {
    let mut inc = vec![0.0; tree.len()];
    for (&n, &v) in tau.nodes().iter().zip(atom_values) {
        inc[n] = v;
    }
    SignedPlan { increments: inc }
}

/// `x <= y` in the order of `E₊`: every increment of `y - x` is nonnegative.
pub fn order_leq(x: &SignedPlan, y: &SignedPlan) -> bool {
    x.increments.iter().zip(&y.increments).all(|(a, b)| a <= b)
}

pub fn lattice_meet(x: &SignedPlan, y: &SignedPlan) -> SignedPlan {
    x.zip_with(y, f64::min)
}

pub fn lattice_join(x: &SignedPlan, y: &SignedPlan) -> SignedPlan {
    x.zip_with(y, f64::max)
}

/// `x ∧ k`: cumulative consumption capped at `k` on every path.
pub fn truncate(tree: &EventTree, x: &ConsumptionPlan, k: f64) -> ConsumptionPlan {
    let k = k.max(0.0);
    let cum = x.signed().cumulative(tree);
    let inc = (0..tree.len())
        .map(|n| {
            let before = tree.parent(n).map_or(0.0, |p| cum[p].min(k));
            (cum[n].min(k) - before).max(0.0)
        })
        .collect();
    ConsumptionPlan(SignedPlan { increments: inc })
}

/// `φ(x)`: the increment at time `t` is scaled by `e^{βt}`.
pub fn phi(tree: &EventTree, x: &SignedPlan, beta: f64) -> SignedPlan {
    SignedPlan::from_fn(tree, |n| (beta * tree.time_of(n)).exp() * x.increments[n])
}

/// `φ⁻¹(x)`: the increment at time `t` is scaled by `e^{-βt}`.
pub fn phi_inverse(tree: &EventTree, x: &SignedPlan, beta: f64) -> SignedPlan {
    SignedPlan::from_fn(tree, |n| (-beta * tree.time_of(n)).exp() * x.increments[n])
}

/// `ρ(x) = ‖φ(x)‖`.
pub fn rho_norm(tree: &EventTree, x: &SignedPlan, beta: f64, p: f64) -> f64 {
    intertemporal_norm(tree, &phi(tree, x, beta), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::TimeGrid;

    fn t2() -> EventTree {
        EventTree::symmetric_binomial(2.0, 2).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn conjugate_exponents() {
        assert_eq!(NormParams::new(1.0).unwrap().q(), f64::INFINITY);
        assert_eq!(NormParams::new(2.0).unwrap().q(), 2.0);
        assert_eq!(NormParams::new(3.0).unwrap().q(), 1.5);
        assert!(NormParams::new(0.5).is_err());
    }

    #[test]
    fn intertemporal_norm_examples() {
        let t = t2();
        let root_jump = SignedPlan::unit_at(&t, 0);
        assert!(close(intertemporal_norm(&t, &root_jump, 1.0), 3.0));
        assert_eq!(intertemporal_norm(&t, &SignedPlan::zero(&t), 1.0), 0.0);
        let tau = StoppingTime::constant(&t, 2).unwrap();
        let terminal = dirac(&t, &tau, &[1.0; 4]).unwrap();
        assert!(close(intertemporal_norm(&t, &terminal, 2.0), 1.0));
    }

    #[test]
    fn strong_norm_examples() {
        let t = t2();
        let at_end = dirac(&t, &StoppingTime::constant(&t, 2).unwrap(), &[1.0; 4]).unwrap();
        let z = &SignedPlan::unit_at(&t, 0) - &at_end;
        assert!(close(strong_norm(&t, &z), 2.0));
        assert_eq!(strong_norm(&t, &SignedPlan::zero(&t)), 0.0);
        let x = ConsumptionPlan::new(&t, vec![1.0, 0.5, 2.0, 0.0, 1.0, 3.0, 0.25]).unwrap();
        assert!(close(strong_norm(&t, x.signed()), t.expectation(&x.signed().terminal(&t))));
    }

    #[test]
    fn dirac_deliveries() {
        let t = t2();
        let root = dirac(&t, &StoppingTime::constant(&t, 0).unwrap(), &[1.0; 4]).unwrap();
        assert_eq!(root, SignedPlan::unit_at(&t, 0));
        let one = StoppingTime::constant(&t, 1).unwrap();
        let at_u = dirac(&t, &one, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(at_u, SignedPlan::unit_at(&t, 1));
        assert!(close(strong_norm(&t, &at_u), 0.5));
        assert_eq!(
            dirac(&t, &one, &[1.0, 2.0, 0.0, 0.0]),
            Err(Error::Measurability { node: 1 })
        );
        // nothing delivered where τ never stops
        let hit_u = StoppingTime::first_hitting(&t, |n| n == 1, None).unwrap();
        assert_eq!(dirac(&t, &hit_u, &[3.0, 3.0, 9.0, 7.0]).unwrap().increments()[2..], [0.0; 5]);
    }

    #[test]
    fn meet_and_join() {
        let g = TimeGrid::uniform(1.0, 1).unwrap();
        let t = EventTree::deterministic(g).unwrap();
        let x = SignedPlan::new(&t, vec![2.0, 0.0]).unwrap();
        let y = SignedPlan::new(&t, vec![1.0, 3.0]).unwrap();
        assert_eq!(lattice_meet(&x, &y).increments(), &[1.0, 0.0]);
        assert_eq!(lattice_join(&x, &y).increments(), &[2.0, 3.0]);
        assert!(order_leq(&SignedPlan::zero(&t), &x));
        assert!(!order_leq(&x, &y));
    }

    #[test]
    fn truncation() {
        let g = TimeGrid::uniform(1.0, 1).unwrap();
        let t = EventTree::deterministic(g).unwrap();
        let x = ConsumptionPlan::new(&t, vec![2.0, 3.0]).unwrap();
        assert_eq!(truncate(&t, &x, 4.0).increments(), &[2.0, 2.0]);
        assert_eq!(truncate(&t, &x, 5.0), x);
        assert_eq!(truncate(&t, &x, 0.0), ConsumptionPlan::zero(&t));
        assert_eq!(truncate(&t, &x, 1.0).increments(), &[1.0, 0.0]);
    }

    #[test]
    fn negative_increments_rejected() {
        let t = t2();
        assert_eq!(
            ConsumptionPlan::new(&t, vec![0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]),
            Err(Error::NegativeIncrement { node: 2, value: -1.0 })
        );
    }

    #[test]
    fn phi_and_rho() {
        let t = t2();
        let beta = 0.7;
        let x = dirac(&t, &StoppingTime::constant(&t, 1).unwrap(), &[1.0; 4]).unwrap();
        let fx = phi(&t, &x, beta);
        assert!(close(fx.increments()[1], beta.exp()));
        assert!(close(rho_norm(&t, &x, beta, 1.0), 2.0 * beta.exp()));
        let back = phi_inverse(&t, &fx, beta);
        assert!(back.max_abs_diff(&x) < 1e-15);
        assert_eq!(rho_norm(&t, &x, 0.0, 1.0), intertemporal_norm(&t, &x, 1.0));
    }
}
