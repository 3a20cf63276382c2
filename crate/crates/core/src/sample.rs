//! Random instances for tests, benchmarks and demos.

use rand::Rng;

use crate::consumption::{ConsumptionPlan, SignedPlan};
use crate::equilibrium::{Agent, Economy};
use crate::filtration::{EventTree, OptionalProcess, RawProcess, StoppingTime, TimeGrid};
use crate::preferences::{FelicitySpec, HHKUtility, TimeWeight};

/// Grid with `steps` random step lengths in `[0.25, 1)`.
pub fn random_grid<R: Rng + ?Sized>(rng: &mut R, steps: usize) -> TimeGrid {
    let mut times = vec![0.0];
    for _ in 0..steps {
        let last = *times.last().unwrap();
        times.push(last + rng.random_range(0.25..1.0));
    }
    TimeGrid::new(times).expect("increasing times")
}

/// Tree with `1..=max_steps` steps and `1..=max_branching` children per node.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, max_steps: usize, max_branching: usize) -> EventTree {
    let steps = rng.random_range(1..=max_steps.max(1));
    random_tree_with_steps(rng, steps, max_branching)
}

pub fn random_tree_with_steps<R: Rng + ?Sized>(
    rng: &mut R,
    steps: usize,
    max_branching: usize,
) -> EventTree {
    let grid = random_grid(rng, steps);
    EventTree::from_fn(grid, |_, _| {
        let b = rng.random_range(1..=max_branching.max(1));
        random_probabilities(rng, b)
    })
    .expect("valid random tree")
}

/// Positive weights summing to one, none below a tenth of uniform.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|r| r / total).collect();
    // absorb rounding in the last entry
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    p
}

pub fn random_signed_plan<R: Rng + ?Sized>(rng: &mut R, tree: &EventTree) -> SignedPlan {
    SignedPlan::from_fn(tree, |_| rng.random_range(-1.0..1.0))
}

/// Nonnegative plan; each increment is zero with probability `zero_prob`.
pub fn random_consumption_plan<R: Rng + ?Sized>(
    rng: &mut R,
    tree: &EventTree,
    zero_prob: f64,
) -> ConsumptionPlan {
    let inc = (0..tree.len())
        .map(|_| {
            if rng.random_bool(zero_prob) {
                0.0
            } else {
                rng.random_range(0.0..1.0)
            }
        })
        .collect();
    ConsumptionPlan::new(tree, inc).expect("nonnegative increments")
}

pub fn random_raw_process<R: Rng + ?Sized>(rng: &mut R, tree: &EventTree) -> RawProcess {
    RawProcess::from_fn(tree, |_, _| rng.random_range(-2.0..2.0))
}

pub fn random_positive_process<R: Rng + ?Sized>(rng: &mut R, tree: &EventTree) -> OptionalProcess {
    OptionalProcess::from_fn(tree, |_| rng.random_range(0.01..2.0))
}

/// Stops at each reached node with probability `stop_prob`; paths that are
/// never stopped get `τ = never`.
pub fn random_stopping_time<R: Rng + ?Sized>(
    rng: &mut R,
    tree: &EventTree,
    stop_prob: f64,
) -> StoppingTime {
    let mut blocked = vec![false; tree.len()];
    let mut nodes = Vec::new();
    for n in 0..tree.len() {
        if let Some(p) = tree.parent(n) {
            blocked[n] = blocked[p];
        }
        if !blocked[n] && rng.random_bool(stop_prob) {
            nodes.push(n);
            blocked[n] = true;
        }
    }
    StoppingTime::from_nodes(tree, nodes).expect("antichain by construction")
}

pub fn random_felicity<R: Rng + ?Sized>(rng: &mut R) -> FelicitySpec {
    let base = if rng.random_bool(0.7) {
        FelicitySpec::exponential(rng.random_range(0.5..3.0))
    } else {
        FelicitySpec::shifted_power(rng.random_range(0.3..0.8), rng.random_range(0.2..1.0))
    };
    if rng.random_bool(0.5) {
        base.with_weight(TimeWeight::Discount {
            scale: rng.random_range(0.5..2.0),
            rate: rng.random_range(0.0..0.5),
        })
    } else {
        base
    }
}

pub fn random_utility<R: Rng + ?Sized>(rng: &mut R) -> HHKUtility {
    HHKUtility::new(random_felicity(rng), rng.random_range(0.3..2.0)).expect("positive beta")
}

/// Economy with `agents` agents on a random tree with `steps` steps.
/// Endowments are positive at every node so that no node is degenerate.
pub fn random_economy<R: Rng + ?Sized>(
    rng: &mut R,
    agents: usize,
    steps: usize,
    max_branching: usize,
) -> Economy {
    let tree = random_tree_with_steps(rng, steps, max_branching);
    let agents = (0..agents)
        .map(|_| Agent {
            utility: random_utility(rng),
            endowment: ConsumptionPlan::new(
                &tree,
                (0..tree.len()).map(|_| rng.random_range(0.05..1.5)).collect(),
            )
            .expect("positive endowment"),
        })
        .collect();
    Economy::new(tree, agents, 2.0).expect("valid random economy")
}
