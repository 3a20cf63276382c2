//! Continuity in expectation, measured on refining grids.
//!
//! On one finite grid every optional process is a legitimate price, so the
//! distinction between compatible and incompatible prices only shows up as
//! the grid is refined: the modulus
//!
//! ```text
//! m(Δ) = sup |E ψ_σ − E ψ_τ|   over stopping times with |σ − τ| ≤ Δ
//! ```
//!
//! shrinks with `Δ` for compatible prices and stays at the jump height for a
//! price that jumps at a date known in advance.
//!
//! The supremum runs over a base family of stopping times `τ` (all constant
//! times plus first passages of `ψ` above and below a set of thresholds) and,
//! for each `τ`, over every `σ = τ + D` with an `F(τ)`-measurable delay
//! `0 ≤ D ≤ Δ`. For a fixed `τ` the latter supremum has a closed form: the
//! expected positive (resp. negative) part of the best one-atom drift
//! `max_j E[ψ_{τ+j} − ψ_τ | F(τ)]`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::filtration::{NodeGraph, NodeId, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusSettings {
    /// Cap on the number of first-passage times per level.
    pub max_hitting_times: usize,
}

impl Default for ModulusSettings {
    fn default() -> Self {
        Self {
            max_hitting_times: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulusDelta {
    /// `Δ` equal to the grid step of each level (uniform grids).
    OneStep,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusRow {
    pub steps: usize,
    pub delta: f64,
    pub modulus: f64,
}

/// A price on one level of a refinement.
#[derive(Debug, Clone)]
pub struct RefinementLevel<G> {
    pub graph: G,
    pub psi: Vec<f64>,
}

/// `m(Δ)` for node values `psi` on a single graph.
pub fn modulus_at_level<G: NodeGraph>(
    g: &G,
    psi: &[f64],
    delta: f64,
    settings: &ModulusSettings,
) -> Result<f64> {
    if psi.len() != g.node_count() {
        return Err(Error::LengthMismatch {
            what: "price on refinement level",
            expected: g.node_count(),
            found: psi.len(),
        });
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("Δ must be nonnegative, got {delta}")));
    }
    let (up, down) = best_drifts(g, psi, delta);

    let mut m: f64 = 0.0;
    let mut score = |mass: &[(NodeId, f64)]| {
        let (mut pos, mut neg) = (0.0, 0.0);
        for &(n, s) in mass {
            pos += s * up[n];
            neg += s * down[n];
        }
        m = m.max(pos).max(neg);
    };

    for k in 0..g.levels() {
        let mass: Vec<(NodeId, f64)> = g.level_range(k).map(|n| (n, g.prob(n))).collect();
        score(&mass);
    }
    for (above, level) in passage_thresholds(psi, settings.max_hitting_times) {
        let mass = first_passage_mass(g, |n| {
            if above {
                psi[n] >= level
            } else {
                psi[n] <= level
            }
        });
        score(&mass);
    }
    Ok(m)
}

// For each node: the largest positive and negative conditional drift of ψ
// over the admissible delays.
fn best_drifts<G: NodeGraph>(g: &G, psi: &[f64], delta: f64) -> (Vec<f64>, Vec<f64>) {
    let grid = g.grid();
    let times = grid.times();
    let last = grid.last_index();
    let slack = 1e-9 * delta + 1e-12;
    let mut up = vec![0.0; psi.len()];
    let mut down = vec![0.0; psi.len()];
    let max_delay = (0..=last)
        .map(|k| (k..=last).take_while(|&j| times[j] - times[k] <= delta + slack).count() - 1)
        .max()
        .unwrap_or(0);

    let mut cur = psi.to_vec();
    for j in 1..=max_delay {
        let mut next = vec![f64::NAN; psi.len()];
        for k in 0..last {
            if k + j > last {
                break;
            }
            for n in g.level_range(k) {
                next[n] = g.successors(n).iter().map(|&(c, p)| p * cur[c]).sum();
            }
        }
        for k in 0..=last.saturating_sub(j) {
            if times[k + j] - times[k] > delta + slack {
                continue;
            }
            for n in g.level_range(k) {
                let d = next[n] - psi[n];
                up[n] = f64::max(up[n], d);
                down[n] = f64::max(down[n], -d);
            }
        }
        cur = next;
    }
    (up, down)
}

fn passage_thresholds(psi: &[f64], cap: usize) -> Vec<(bool, f64)> {
    let mut vals: Vec<f64> = psi.to_vec();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    if vals.len() < 2 || cap == 0 {
        return Vec::new();
    }
    let per_side = (cap / 2).max(1);
    let picks = per_side.min(vals.len() - 1);
    let mut out = Vec::with_capacity(2 * picks);
    for i in 0..picks {
        // quantiles strictly inside the range of values
        let idx = 1 + i * (vals.len() - 1) / picks;
        let idx = idx.min(vals.len() - 1);
        out.push((true, vals[idx]));
        out.push((false, vals[vals.len() - 1 - idx]));
    }
    out.truncate(cap);
    out
}

/// Stopped mass `P(τ stops at n)` for the first entrance into `{pred}`.
fn first_passage_mass<G: NodeGraph>(
    g: &G,
    mut pred: impl FnMut(NodeId) -> bool,
) -> Vec<(NodeId, f64)> {
    let mut alive = vec![0.0; g.node_count()];
    let mut out = Vec::new();
    alive[0] = 1.0;
    for k in 0..g.levels() {
        for n in g.level_range(k) {
            let a = alive[n];
            if a == 0.0 {
                continue;
            }
            if pred(n) {
                out.push((n, a));
            } else {
                for &(c, p) in g.successors(n) {
                    alive[c] += a * p;
                }
            }
        }
    }
    out
}

/// `m(Δ)` on every level of a refinement. Consecutive grids must be nested
/// and share a horizon.
pub fn continuity_modulus<G: NodeGraph>(
    levels: &[RefinementLevel<G>],
    delta: ModulusDelta,
    settings: &ModulusSettings,
) -> Result<Vec<ModulusRow>> {
    for pair in levels.windows(2) {
        if !pair[0].graph.grid().is_nested_in(pair[1].graph.grid()) {
            return Err(Error::RefinementMismatch(format!(
                "grid with {} steps is not nested in the grid with {} steps",
                pair[0].graph.grid().last_index(),
                pair[1].graph.grid().last_index()
            )));
        }
    }
    levels
        .iter()
        .map(|lvl| {
            let grid = lvl.graph.grid();
            let steps = grid.last_index();
            let d = match delta {
                ModulusDelta::Fixed(d) => d,
                ModulusDelta::OneStep => grid.horizon() / steps.max(1) as f64,
            };
            Ok(ModulusRow {
                steps,
                delta: d,
                modulus: modulus_at_level(&lvl.graph, &lvl.psi, d, settings)?,
            })
        })
        .collect()
}

/// Recombining symmetric binomial lattice for a scaled random walk
/// `W_{t_k} = (2j − k) √h`, `j` the number of up moves.
///
/// Nodes are Markov states rather than atoms of the path filtration; prices
/// that are functions of `(t, W_t)` and first passages of state sets carry
/// over unchanged.
#[derive(Debug, Clone)]
pub struct BinomialLattice {
    grid: TimeGrid,
    prob: Vec<f64>,
    level: Vec<usize>,
    succ: Vec<Vec<(NodeId, f64)>>,
}

impl BinomialLattice {
    pub fn symmetric(horizon: f64, steps: usize) -> Result<Self> {
        let grid = TimeGrid::uniform(horizon, steps)?;
        let n_nodes = (steps + 1) * (steps + 2) / 2;
        let mut prob = vec![0.0; n_nodes];
        let mut level = vec![0; n_nodes];
        let mut succ = vec![Vec::new(); n_nodes];
        prob[0] = 1.0;
        for k in 0..=steps {
            for j in 0..=k {
                let n = Self::id(k, j);
                level[n] = k;
                if k < steps {
                    let up = Self::id(k + 1, j + 1);
                    let dn = Self::id(k + 1, j);
                    succ[n] = vec![(up, 0.5), (dn, 0.5)];
                    prob[up] += 0.5 * prob[n];
                    prob[dn] += 0.5 * prob[n];
                }
            }
        }
        Ok(Self {
            grid,
            prob,
            level,
            succ,
        })
    }

    fn id(k: usize, j: usize) -> NodeId {
        k * (k + 1) / 2 + j
    }

    pub fn steps(&self) -> usize {
        self.grid.last_index()
    }

    /// `(level, number of up moves)`.
    pub fn state(&self, node: NodeId) -> (usize, usize) {
        let k = self.level[node];
        (k, node - Self::id(k, 0))
    }

    pub fn walk_value(&self, node: NodeId) -> f64 {
        let (k, j) = self.state(node);
        let h = self.grid.horizon() / self.steps().max(1) as f64;
        (2.0 * j as f64 - k as f64) * h.sqrt()
    }

    /// Node values `E[f(t_k, W_T) | W_{t_k}]`: the optional projection of the
    /// raw process `ξ(ω, t) = f(t, W_T(ω))`.
    pub fn project_terminal_functional(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let steps = self.steps();
        let mut out = vec![0.0; self.prob.len()];
        let terminal: Vec<f64> = self
            .level_range(steps)
            .map(|n| self.walk_value(n))
            .collect();
        for k in 0..=steps {
            let t = self.grid.time(k);
            let mut v: Vec<f64> = terminal.iter().map(|&w| f(t, w)).collect();
            for lvl in (k..steps).rev() {
                v = (0..=lvl).map(|j| 0.5 * (v[j + 1] + v[j])).collect();
            }
            for (j, val) in v.into_iter().enumerate() {
                out[Self::id(k, j)] = val;
            }
        }
        out
    }
}

impl NodeGraph for BinomialLattice {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn node_count(&self) -> usize {
        self.prob.len()
    }

    fn level_range(&self, k: usize) -> Range<NodeId> {
        Self::id(k, 0)..Self::id(k + 1, 0)
    }

    fn level_of(&self, node: NodeId) -> usize {
        self.level[node]
    }

    fn prob(&self, node: NodeId) -> f64 {
        self.prob[node]
    }

    fn successors(&self, node: NodeId) -> &[(NodeId, f64)] {
        &self.succ[node]
    }
}

/// Price sources for refinement studies on binomial lattices.
#[derive(Debug, Clone, PartialEq)]
pub enum RefinementPrice {
    /// Optional projection of `ξ(ω, t) = level + drift·t + loading·t·W_T(ω)`,
    /// whose paths are Lipschitz with constant `|drift + loading·W_T|`.
    LinearRaw { level: f64, drift: f64, loading: f64 },
    /// `height · 1{t ≥ at·T}`.
    Jump { at: f64, height: f64 },
    Constant(f64),
}

impl RefinementPrice {
    pub fn on_lattice(&self, lattice: &BinomialLattice) -> Vec<f64> {
        match *self {
            RefinementPrice::LinearRaw {
                level,
                drift,
                loading,
            } => lattice.project_terminal_functional(|t, w| level + drift * t + loading * t * w),
            RefinementPrice::Jump { at, height } => {
                let grid = lattice.grid();
                let cut = at * grid.horizon() - 1e-12 * grid.horizon();
                (0..lattice.node_count())
                    .map(|n| {
                        if grid.time(lattice.level_of(n)) >= cut {
                            height
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            RefinementPrice::Constant(c) => vec![c; lattice.node_count()],
        }
    }
}

pub fn refinement_family(
    horizon: f64,
    steps: &[usize],
    price: &RefinementPrice,
) -> Result<Vec<RefinementLevel<BinomialLattice>>> {
    steps
        .iter()
        .map(|&n| {
            let graph = BinomialLattice::symmetric(horizon, n)?;
            let psi = price.on_lattice(&graph);
            Ok(RefinementLevel { graph, psi })
        })
        .collect()
}

/// `m(T/N)` for each `N` in `steps`.
pub fn refinement_study(
    horizon: f64,
    steps: &[usize],
    price: &RefinementPrice,
    settings: &ModulusSettings,
) -> Result<Vec<ModulusRow>> {
    let family = refinement_family(horizon, steps, price)?;
    continuity_modulus(&family, ModulusDelta::OneStep, settings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compatibility {
    /// `m` does not increase under refinement and ends below the threshold.
    CompatibleLike,
    /// `m` stays at or above the threshold on every level.
    IncompatibleLike,
    Inconclusive,
}

impl Compatibility {
    pub fn as_str(&self) -> &'static str {
        match self {
            Compatibility::CompatibleLike => "compatible-like",
            Compatibility::IncompatibleLike => "incompatible-like",
            Compatibility::Inconclusive => "inconclusive",
        }
    }
}

pub fn classify(rows: &[ModulusRow], threshold: f64) -> Compatibility {
    if rows.is_empty() {
        return Compatibility::Inconclusive;
    }
    if rows.iter().all(|r| r.modulus >= threshold) {
        return Compatibility::IncompatibleLike;
    }
    let nonincreasing = rows.windows(2).all(|w| w[1].modulus <= w[0].modulus);
    let last = rows[rows.len() - 1].modulus;
    if nonincreasing && last < threshold {
        Compatibility::CompatibleLike
    } else {
        Compatibility::Inconclusive
    }
}
