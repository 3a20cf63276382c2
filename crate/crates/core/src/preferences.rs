//! Hindy–Huang–Kreps preferences.
//!
//! Utility depends on consumption only through the satisfaction process
//! `Y_k = e^{−β(t_k − t_{k−1})} Y_{k−1} + β Δx_k`, `Y_0 = β Δx_0`, and is
//! integrated against the grid weights:
//! `V(x) = E Σ_k w_k u(t_k, Y_k)`.

use std::fmt;

use crate::consumption::SignedPlan;
use crate::error::{Error, Result};
use crate::filtration::{EventTree, NodeId, OptionalProcess, TimeGrid};

/// Positive time weight `a(t)` in front of the felicity.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeWeight {
    Constant(f64),
    /// One value per grid index.
    Samples(Vec<f64>),
    /// `scale · e^{−rate·t}`.
    Discount { scale: f64, rate: f64 },
}

impl TimeWeight {
    pub fn at(&self, k: usize, t: f64) -> f64 {
        match self {
            TimeWeight::Constant(a) => *a,
            TimeWeight::Samples(v) => v[k],
            TimeWeight::Discount { scale, rate } => scale * (-rate * t).exp(),
        }
    }

    fn check(&self, grid: &TimeGrid) -> Result<()> {
        if let TimeWeight::Samples(v) = self {
            if v.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    what: "time weight samples",
                    expected: grid.len(),
                    found: v.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FelicityFamily {
    /// `1 − e^{−θy}`.
    Exponential { theta: f64 },
    /// `((y + η)^γ − η^γ) / γ`.
    ShiftedPower { gamma: f64, eta: f64 },
    /// `y^γ / γ`; infinite marginal at zero.
    Power { gamma: f64 },
    /// `slope · y`.
    Linear { slope: f64 },
}

/// `u(t, y) = a(t) · f(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FelicitySpec {
    pub family: FelicityFamily,
    pub weight: TimeWeight,
}

impl FelicitySpec {
    pub fn exponential(theta: f64) -> Self {
        Self {
            family: FelicityFamily::Exponential { theta },
            weight: TimeWeight::Constant(1.0),
        }
    }

    pub fn shifted_power(gamma: f64, eta: f64) -> Self {
        Self {
            family: FelicityFamily::ShiftedPower { gamma, eta },
            weight: TimeWeight::Constant(1.0),
        }
    }

    pub fn with_weight(mut self, weight: TimeWeight) -> Self {
        self.weight = weight;
        self
    }

    pub fn value(&self, k: usize, t: f64, y: f64) -> f64 {
        let a = self.weight.at(k, t);
        a * match self.family {
            FelicityFamily::Exponential { theta } => -(-theta * y).exp_m1(),
            FelicityFamily::ShiftedPower { gamma, eta } => {
                ((y + eta).powf(gamma) - eta.powf(gamma)) / gamma
            }
            FelicityFamily::Power { gamma } => y.powf(gamma) / gamma,
            FelicityFamily::Linear { slope } => slope * y,
        }
    }

    /// `∂_y u(t, y)`.
    pub fn marginal(&self, k: usize, t: f64, y: f64) -> f64 {
        let a = self.weight.at(k, t);
        a * match self.family {
            FelicityFamily::Exponential { theta } => theta * (-theta * y).exp(),
            FelicityFamily::ShiftedPower { gamma, eta } => (y + eta).powf(gamma - 1.0),
            FelicityFamily::Power { gamma } => y.powf(gamma - 1.0),
            FelicityFamily::Linear { slope } => slope,
        }
    }

    /// `∂²_y u(t, y)`.
    pub fn curvature(&self, k: usize, t: f64, y: f64) -> f64 {
        let a = self.weight.at(k, t);
        a * match self.family {
            FelicityFamily::Exponential { theta } => -theta * theta * (-theta * y).exp(),
            FelicityFamily::ShiftedPower { gamma, eta } => {
                (gamma - 1.0) * (y + eta).powf(gamma - 2.0)
            }
            FelicityFamily::Power { gamma } => (gamma - 1.0) * y.powf(gamma - 2.0),
            FelicityFamily::Linear { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FelicityCondition {
    /// Continuous, strictly increasing and concave in `y`.
    V1,
    /// `u(·, 0)` integrable.
    V2,
    /// Finite right marginal at zero, bounded in time.
    V3,
}

impl fmt::Display for FelicityCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FelicityCondition::V1 => "V.1",
            FelicityCondition::V2 => "V.2",
            FelicityCondition::V3 => "V.3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FelicityReport {
    pub violations: Vec<(FelicityCondition, String)>,
}

impl FelicityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn fails(&self, cond: FelicityCondition) -> bool {
        self.violations.iter().any(|(c, _)| *c == cond)
    }
}

impl fmt::Display for FelicityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return f.write_str("V.1, V.2, V.3 hold");
        }
        for (i, (c, msg)) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{c} fails: {msg}")?;
        }
        Ok(())
    }
}

const SAMPLE_YS: [f64; 12] = [
    0.0, 1e-6, 1e-3, 0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0, 50.0,
];

/// Sampled check of the felicity conditions on the grid times.
pub fn validate_felicity(f: &FelicitySpec, grid: &TimeGrid) -> FelicityReport {
    let mut report = FelicityReport::default();
    if let Err(e) = f.weight.check(grid) {
        report.violations.push((FelicityCondition::V1, e.to_string()));
        return report;
    }
    let mut v1 = None;
    let mut v2 = None;
    let mut v3 = None;
    for (k, &t) in grid.times().iter().enumerate() {
        let a = f.weight.at(k, t);
        if !(a > 0.0 && a.is_finite()) && v1.is_none() {
            v1 = Some(format!("time weight {a} at t = {t} is not positive"));
        }
        let u0 = f.value(k, t, 0.0);
        if !u0.is_finite() && v2.is_none() {
            v2 = Some(format!("u({t}, 0) = {u0}"));
        }
        let m0 = f.marginal(k, t, 0.0);
        if !m0.is_finite() && v3.is_none() {
            v3 = Some(format!("marginal felicity at y = 0+ is {m0} at t = {t}"));
        }
        if v1.is_some() {
            continue;
        }
        let mut prev: Option<(f64, f64, f64)> = None;
        for &y in &SAMPLE_YS {
            let (u, m) = (f.value(k, t, y), f.marginal(k, t, y));
            if !u.is_finite() {
                v1 = Some(format!("u({t}, {y}) = {u}"));
                break;
            }
            if y > 0.0 && !(m > 0.0) {
                v1 = Some(format!("marginal felicity {m} at y = {y} is not positive"));
                break;
            }
            if let Some((py, pu, pm)) = prev {
                if !(u > pu) {
                    v1 = Some(format!("u is not increasing between y = {py} and y = {y}"));
                    break;
                }
                if py > 0.0 && m > pm * (1.0 + 1e-12) {
                    v1 = Some(format!("marginal felicity increases between y = {py} and y = {y}"));
                    break;
                }
            }
            prev = Some((y, u, m));
        }
    }
    for (c, msg) in [
        (FelicityCondition::V1, v1),
        (FelicityCondition::V2, v2),
        (FelicityCondition::V3, v3),
    ] {
        if let Some(m) = msg {
            report.violations.push((c, m));
        }
    }
    report
}

/// Satisfaction process of a plan, node by node.
pub fn satisfaction(tree: &EventTree, x: &SignedPlan, beta: f64) -> OptionalProcess {
    let grid = tree.time_grid();
    let mut y = vec![0.0; tree.len()];
    for n in 0..tree.len() {
        y[n] = beta * x.increment(n);
        if let Some(p) = tree.parent(n) {
            let dt = grid.time(tree.level(n)) - grid.time(tree.level(p));
            y[n] += (-beta * dt).exp() * y[p];
        }
    }
    OptionalProcess::from_fn(tree, |n| y[n])
}

#[derive(Debug, Clone, PartialEq)]
pub struct HHKUtility {
    felicity: FelicitySpec,
    beta: f64,
}

impl HHKUtility {
    pub fn new(felicity: FelicitySpec, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "satisfaction decay rate must be positive, got {beta}"
            )));
        }
        Ok(Self { felicity, beta })
    }

    pub fn felicity(&self) -> &FelicitySpec {
        &self.felicity
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn satisfaction(&self, tree: &EventTree, x: &SignedPlan) -> OptionalProcess {
        satisfaction(tree, x, self.beta)
    }

    pub fn utility(&self, tree: &EventTree, x: &SignedPlan) -> f64 {
        let y = self.satisfaction(tree, x);
        let grid = tree.time_grid();
        (0..tree.len())
            .map(|n| {
                let k = tree.level(n);
                tree.prob(n) * grid.weight(k) * self.felicity.value(k, grid.time(k), y[n])
            })
            .sum()
    }

    /// Riesz representative of the derivative: `pair(∇V(x), h)` is the
    /// directional derivative of `V` at `x` along `h`.
    pub fn gradient(&self, tree: &EventTree, x: &SignedPlan) -> OptionalProcess {
        let y = self.satisfaction(tree, x);
        let grid = tree.time_grid();
        let mut g = vec![0.0; tree.len()];
        for n in (0..tree.len()).rev() {
            let k = tree.level(n);
            let t = grid.time(k);
            let mut v = grid.weight(k) * self.beta * self.felicity.marginal(k, t, y[n]);
            if k < tree.last_level() {
                let decay = (-self.beta * (grid.time(k + 1) - t)).exp();
                let cont: f64 = tree.children(n).map(|c| tree.cond_prob(c) * g[c]).sum();
                v += decay * cont;
            }
            g[n] = v;
        }
        OptionalProcess::from_fn(tree, |n| g[n])
    }

    /// Dense Hessian of `V` with respect to the increment vector, row-major.
    pub fn hessian(&self, tree: &EventTree, x: &SignedPlan) -> Vec<f64> {
        let n_nodes = tree.len();
        let y = self.satisfaction(tree, x);
        let grid = tree.time_grid();
        let mut h = vec![0.0; n_nodes * n_nodes];
        let mut chain: Vec<(NodeId, f64)> = Vec::new();
        for n in 0..n_nodes {
            let k = tree.level(n);
            let t = grid.time(k);
            let c = tree.prob(n)
                * grid.weight(k)
                * self.beta
                * self.beta
                * self.felicity.curvature(k, t, y[n]);
            if c == 0.0 {
                continue;
            }
            chain.clear();
            let mut m = Some(n);
            while let Some(a) = m {
                chain.push((a, (-self.beta * (t - tree.time_of(a))).exp()));
                m = tree.parent(a);
            }
            for &(a, ea) in &chain {
                for &(b, eb) in &chain {
                    h[a * n_nodes + b] += c * ea * eb;
                }
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_period() -> EventTree {
        EventTree::deterministic(TimeGrid::new(vec![0.0, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn satisfaction_of_initial_jump() {
        let tree = EventTree::deterministic(TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap()).unwrap();
        let x = SignedPlan::new(&tree, vec![1.0, 0.0, 0.0]).unwrap();
        let y = satisfaction(&tree, &x, 1.0);
        let want = [1.0, (-1.0f64).exp(), (-2.0f64).exp()];
        for n in 0..3 {
            assert!((y[n] - want[n]).abs() < 1e-15);
        }
    }

    #[test]
    fn utility_closed_form() {
        let tree = two_period();
        let u = HHKUtility::new(FelicitySpec::exponential(1.0), 1.0).unwrap();
        let x = SignedPlan::new(&tree, vec![1.0, 0.0]).unwrap();
        let e1 = (-1.0f64).exp();
        let want = (1.0 - e1) + (1.0 - (-e1).exp());
        assert!((u.utility(&tree, &x) - want).abs() < 1e-15);
        assert_eq!(u.utility(&tree, &SignedPlan::zero(&tree)), 0.0);
    }

    #[test]
    fn gradient_at_zero_closed_form() {
        let tree = two_period();
        let u = HHKUtility::new(FelicitySpec::exponential(1.0), 1.0).unwrap();
        let g = u.gradient(&tree, &SignedPlan::zero(&tree));
        assert!((g[0] - (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert!((g[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation_names_the_condition() {
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        assert!(validate_felicity(&FelicitySpec::exponential(1.0), &grid).passed());
        assert!(validate_felicity(&FelicitySpec::shifted_power(0.5, 0.1), &grid).passed());

        let sqrt = FelicitySpec {
            family: FelicityFamily::Power { gamma: 0.5 },
            weight: TimeWeight::Constant(1.0),
        };
        let r = validate_felicity(&sqrt, &grid);
        assert!(r.fails(FelicityCondition::V3) && !r.fails(FelicityCondition::V1));
        assert!(r.to_string().contains("V.3"));

        let neg = FelicitySpec {
            family: FelicityFamily::Linear { slope: -1.0 },
            weight: TimeWeight::Constant(1.0),
        };
        let r = validate_felicity(&neg, &grid);
        assert!(r.fails(FelicityCondition::V1));
        assert!(r.to_string().contains("V.1"));

        let convex = FelicitySpec::shifted_power(2.0, 0.1);
        assert!(validate_felicity(&convex, &grid).fails(FelicityCondition::V1));

        let short = FelicitySpec::exponential(1.0).with_weight(TimeWeight::Samples(vec![1.0]));
        assert!(!validate_felicity(&short, &grid).passed());
    }

    #[test]
    fn beta_must_be_positive() {
        assert!(HHKUtility::new(FelicitySpec::exponential(1.0), 0.0).is_err());
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let tree = EventTree::symmetric_binomial(1.0, 2).unwrap();
        let u = HHKUtility::new(FelicitySpec::exponential(1.5), 0.7).unwrap();
        let x = SignedPlan::from_fn(&tree, |n| 0.2 + 0.1 * n as f64);
        let h = u.hessian(&tree, &x);
        let n_nodes = tree.len();
        let eps = 1e-6;
        for j in 0..n_nodes {
            let bump = SignedPlan::unit_at(&tree, j);
            let gp = u.gradient(&tree, &(&x + &(eps * &bump)));
            let gm = u.gradient(&tree, &(&x - &(eps * &bump)));
            for i in 0..n_nodes {
                let fd = tree.prob(i) * (gp[i] - gm[i]) / (2.0 * eps);
                assert!((fd - h[i * n_nodes + j]).abs() < 1e-7, "{i} {j}");
            }
        }
    }
}
