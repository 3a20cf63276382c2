//! Scenario files (TOML).
//!
//! ```toml
//! seed = 7
//! mode = "solve"            # solve | refine | verify
//! output = "out"
//!
//! [tree]
//! horizon = 1.0
//! levels = 2                # number of time steps
//! kind = "symmetric-binomial"
//!
//! [norm]
//! p = 2.0
//!
//! [[agents]]
//! beta = 1.0
//! endowment = [1.0, 0.5, 0.5]   # one increment per node, level-major
//! [agents.felicity]
//! family = "exponential"
//! theta = 1.0
//! ```

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use sprice_core::consumption::ConsumptionPlan;
use sprice_core::equilibrium::{Agent, Economy, SolverSettings};
use sprice_core::filtration::{EventTree, TimeGrid};
use sprice_core::preferences::{FelicityFamily, FelicitySpec, HHKUtility, TimeWeight};
use sprice_core::pricing::{ModulusSettings, RefinementPrice};
use sprice_core::sample;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Solve,
    Refine,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    pub output: Option<PathBuf>,
    pub tree: Option<TreeSpec>,
    #[serde(default)]
    pub norm: NormSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    pub refine: Option<RefineSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeKind {
    #[default]
    SymmetricBinomial,
    /// Same child probabilities at every node.
    Uniform,
    /// One probability row per non-terminal node.
    Explicit,
    /// Random branching drawn from the seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub horizon: f64,
    pub levels: usize,
    #[serde(default)]
    pub kind: TreeKind,
    pub probabilities: Option<Vec<f64>>,
    pub transitions: Option<Vec<Vec<f64>>>,
    pub max_branching: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub p: f64,
}

impl Default for NormSpec {
    fn default() -> Self {
        Self { p: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub kkt_tol: f64,
    pub budget_tol: f64,
    pub max_inner_iters: usize,
    pub max_outer_iters: usize,
    pub damping: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            kkt_tol: s.kkt_tol,
            budget_tol: s.budget_tol,
            max_inner_iters: s.max_inner_iters,
            max_outer_iters: s.max_outer_iters,
            damping: s.damping,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    Exponential,
    ShiftedPower,
    Power,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Constant(f64),
    Samples(Vec<f64>),
    Discount { scale: f64, rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FelicityConfig {
    pub family: FamilyTag,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub slope: Option<f64>,
    pub weight: Option<WeightSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub beta: f64,
    pub felicity: FelicityConfig,
    /// One increment per node.
    pub endowment: Option<Vec<f64>>,
    /// One increment per level, the same at every node of the level.
    pub endowment_levels: Option<Vec<f64>>,
    /// Uniform draws in `[low, high)` from the scenario seed.
    pub endowment_random: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PriceSpec {
    LinearRaw { level: f64, drift: f64, loading: f64 },
    Jump {
        #[serde(default = "half")]
        at: f64,
        #[serde(default = "one")]
        height: f64,
    },
    Constant { value: f64 },
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

impl PriceSpec {
    pub fn to_price(&self) -> RefinementPrice {
        match *self {
            PriceSpec::LinearRaw {
                level,
                drift,
                loading,
            } => RefinementPrice::LinearRaw {
                level,
                drift,
                loading,
            },
            PriceSpec::Jump { at, height } => RefinementPrice::Jump { at, height },
            PriceSpec::Constant { value } => RefinementPrice::Constant(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineSpec {
    pub levels: Vec<usize>,
    #[serde(default = "one")]
    pub horizon: f64,
    /// Modulus at or above this on every level reads as incompatible.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_hitting_times")]
    pub hitting_times: usize,
    pub price: PriceSpec,
}

fn default_threshold() -> f64 {
    0.99
}

fn default_hitting_times() -> usize {
    ModulusSettings::default().max_hitting_times
}

fn err(field: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {msg}", field.into()))
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(err(field, format!("must be positive, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn solver_settings(&self) -> Result<SolverSettings, CliError> {
        let s = &self.solver;
        positive("solver.kkt_tol", s.kkt_tol)?;
        positive("solver.budget_tol", s.budget_tol)?;
        positive("solver.damping", s.damping)?;
        if s.max_inner_iters == 0 {
            return Err(err("solver.max_inner_iters", "must be at least 1"));
        }
        if s.max_outer_iters == 0 {
            return Err(err("solver.max_outer_iters", "must be at least 1"));
        }
        Ok(SolverSettings {
            kkt_tol: s.kkt_tol,
            max_inner_iters: s.max_inner_iters,
            budget_tol: s.budget_tol,
            max_outer_iters: s.max_outer_iters,
            damping: s.damping,
        })
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn build_tree(&self) -> Result<EventTree, CliError> {
        let spec = self.tree.as_ref().ok_or_else(|| err("tree", "section is missing"))?;
        positive("tree.horizon", spec.horizon)?;
        if spec.levels == 0 {
            return Err(err("tree.levels", "must be at least 1"));
        }
        let grid = TimeGrid::uniform(spec.horizon, spec.levels).map_err(|e| err("tree", e))?;
        let tree = match spec.kind {
            TreeKind::SymmetricBinomial => EventTree::symmetric_binomial(spec.horizon, spec.levels),
            TreeKind::Uniform => {
                let p = spec
                    .probabilities
                    .as_ref()
                    .ok_or_else(|| err("tree.probabilities", "required for kind = \"uniform\""))?;
                EventTree::uniform_branching(grid, p)
            }
            TreeKind::Explicit => {
                let rows = spec
                    .transitions
                    .clone()
                    .ok_or_else(|| err("tree.transitions", "required for kind = \"explicit\""))?;
                EventTree::new(grid, rows)
            }
            TreeKind::Random => {
                let b = spec
                    .max_branching
                    .ok_or_else(|| err("tree.max_branching", "required for kind = \"random\""))?;
                if b == 0 {
                    return Err(err("tree.max_branching", "must be at least 1"));
                }
                // the tree gets its own stream so endowment draws do not
                // depend on the tree shape
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x7472_6565);
                EventTree::from_fn(grid, |_, _| {
                    let n = rng.random_range(1..=b);
                    sample::random_probabilities(&mut rng, n)
                })
            }
        };
        tree.map_err(|e| err("tree", e))
    }

    pub fn build_economy(&self) -> Result<Economy, CliError> {
        let tree = self.build_tree()?;
        if self.agents.is_empty() {
            return Err(err("agents", "at least one agent is required"));
        }
        let mut rng = self.rng();
        let mut agents = Vec::with_capacity(self.agents.len());
        for (i, a) in self.agents.iter().enumerate() {
            let field = format!("agents[{i}]");
            let felicity = a.felicity.to_spec(&format!("{field}.felicity"))?;
            let utility = HHKUtility::new(felicity, a.beta).map_err(|e| err(format!("{field}.beta"), e))?;
            let endowment = a.endowment_plan(&tree, &field, &mut rng)?;
            agents.push(Agent { utility, endowment });
        }
        Economy::new(tree, agents, self.norm.p).map_err(|e| err("economy", e))
    }

    pub fn refine_spec(&self, levels_override: Option<&[usize]>) -> Result<RefineSpec, CliError> {
        let mut spec = self
            .refine
            .clone()
            .ok_or_else(|| err("refine", "section is missing"))?;
        if let Some(l) = levels_override {
            spec.levels = l.to_vec();
        }
        if spec.levels.is_empty() {
            return Err(err("refine.levels", "must not be empty"));
        }
        if let Some(&l) = spec.levels.iter().find(|l| !l.is_power_of_two()) {
            return Err(err("refine.levels", format!("{l} is not dyadic")));
        }
        if spec.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(err("refine.levels", "must be strictly increasing"));
        }
        positive("refine.horizon", spec.horizon)?;
        positive("refine.threshold", spec.threshold)?;
        if let PriceSpec::Jump { at, .. } = spec.price {
            if !(at > 0.0 && at < 1.0) {
                return Err(err("refine.price.at", format!("must lie in (0, 1), got {at}")));
            }
        }
        Ok(spec)
    }
}

impl FelicityConfig {
    fn need(&self, v: Option<f64>, name: &str, field: &str) -> Result<f64, CliError> {
        v.ok_or_else(|| err(format!("{field}.{name}"), "missing"))
    }

    pub fn to_spec(&self, field: &str) -> Result<FelicitySpec, CliError> {
        let family = match self.family {
            FamilyTag::Exponential => FelicityFamily::Exponential {
                theta: self.need(self.theta, "theta", field)?,
            },
            FamilyTag::ShiftedPower => FelicityFamily::ShiftedPower {
                gamma: self.need(self.gamma, "gamma", field)?,
                eta: self.need(self.eta, "eta", field)?,
            },
            FamilyTag::Power => FelicityFamily::Power {
                gamma: self.need(self.gamma, "gamma", field)?,
            },
            FamilyTag::Linear => FelicityFamily::Linear {
                slope: self.need(self.slope, "slope", field)?,
            },
        };
        let weight = match &self.weight {
            None => TimeWeight::Constant(1.0),
            Some(WeightSpec::Constant(a)) => TimeWeight::Constant(*a),
            Some(WeightSpec::Samples(v)) => TimeWeight::Samples(v.clone()),
            Some(WeightSpec::Discount { scale, rate }) => TimeWeight::Discount {
                scale: *scale,
                rate: *rate,
            },
        };
        Ok(FelicitySpec { family, weight })
    }
}

impl AgentSpec {
    fn endowment_plan(
        &self,
        tree: &EventTree,
        field: &str,
        rng: &mut ChaCha8Rng,
    ) -> Result<ConsumptionPlan, CliError> {
        let given = [
            self.endowment.is_some(),
            self.endowment_levels.is_some(),
            self.endowment_random.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(err(
                field,
                "exactly one of endowment, endowment_levels, endowment_random is required",
            ));
        }
        let inc: Vec<f64> = if let Some(v) = &self.endowment {
            if v.len() != tree.len() {
                return Err(err(
                    format!("{field}.endowment"),
                    format!("{} values for {} nodes", v.len(), tree.len()),
                ));
            }
            v.clone()
        } else if let Some(v) = &self.endowment_levels {
            if v.len() != tree.last_level() + 1 {
                return Err(err(
                    format!("{field}.endowment_levels"),
                    format!("{} values for {} levels", v.len(), tree.last_level() + 1),
                ));
            }
            (0..tree.len()).map(|n| v[tree.level(n)]).collect()
        } else {
            let [lo, hi] = self.endowment_random.unwrap();
            if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                return Err(err(
                    format!("{field}.endowment_random"),
                    format!("need 0 <= low < high, got [{lo}, {hi}]"),
                ));
            }
            (0..tree.len()).map(|_| rng.random_range(lo..hi)).collect()
        };
        ConsumptionPlan::new(tree, inc).map_err(|e| err(format!("{field}.endowment"), e))
    }
}
