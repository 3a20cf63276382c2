use std::path::{Path, PathBuf};

use serde::Serialize;

use sprice_core::consumption::ConsumptionPlan;
use sprice_core::equilibrium::{
    solve_equilibrium, verify_arrow_debreu, ArrowDebreuReport, Economy, EquilibriumError,
    EquilibriumResult, VerifyTolerances,
};
use sprice_core::filtration::OptionalProcess;
use sprice_core::pricing::{
    classify, extract_state_price, refinement_study, ModulusRow, ModulusSettings, Represented,
};

use crate::config::{PriceSpec, ScenarioConfig};
use crate::{tables, CliError, OUT_DIR_ENV};

pub const PRICES_FILE: &str = "prices.csv";
pub const ALLOCATION_FILE: &str = "allocation.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MODULUS_FILE: &str = "modulus.csv";

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub message: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

pub fn resolve_out_dir(flag: Option<&Path>, cfg: &ScenarioConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn prepare(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Verification {
    passed: bool,
    violations: Vec<String>,
    multipliers: Vec<f64>,
    kkt_residuals: Vec<f64>,
}

impl From<&ArrowDebreuReport> for Verification {
    fn from(r: &ArrowDebreuReport) -> Self {
        Self {
            passed: r.passed(),
            violations: r.violations.iter().map(|(c, m)| format!("{c}: {m}")).collect(),
            multipliers: r.multipliers.clone(),
            kkt_residuals: r.kkt_residuals.clone(),
        }
    }
}

#[derive(Serialize)]
struct SolveSummary {
    mode: &'static str,
    seed: u64,
    converged: bool,
    agents: usize,
    nodes: usize,
    weights: Vec<f64>,
    budget_gaps: Vec<f64>,
    relative_budget_gap: f64,
    endowment_value: f64,
    clearing_residual: f64,
    kkt_residual: f64,
    iterations: usize,
    inner_iterations: usize,
    /// `max_n ψ(n)`.
    operator_norm: f64,
    /// `‖ψ*‖_q`.
    psi_star_norm: Option<f64>,
    psi_star_max: f64,
    verification: Verification,
}

/// Solves the scenario's economy and writes prices, allocation and summary.
/// Exit status follows [`Outcome::exit_code`]; a solver that stops short of
/// convergence still writes its best iterate before reporting.
pub fn run_solve(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let eco = cfg.build_economy()?;
    let settings = cfg.solver_settings()?;
    let (res, converged, note) = match solve_equilibrium(&eco, &settings) {
        Ok(r) => (r, true, String::new()),
        Err(EquilibriumError::NonConvergence {
            iterations,
            residual,
            best,
        }) => (
            *best,
            false,
            format!("{iterations} iterations, residual {residual:e}"),
        ),
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    let report = verify_arrow_debreu(
        &eco,
        res.state_price.psi(),
        res.allocation.plans(),
        &VerifyTolerances::default(),
    );
    prepare(out)?;
    write_solution(cfg, &eco, &res, &report, converged, out)?;
    if !converged {
        return Err(CliError::NonConvergence(note));
    }
    Ok(Outcome {
        passed: report.passed(),
        message: format!(
            "weights {:?}, relative budget gap {:e}, verification: {report}",
            res.weights,
            res.relative_budget_gap()
        ),
    })
}

fn write_solution(
    cfg: &ScenarioConfig,
    eco: &Economy,
    res: &EquilibriumResult,
    report: &ArrowDebreuReport,
    converged: bool,
    out: &Path,
) -> Result<(), CliError> {
    let tree = eco.tree();
    tables::write_prices(&out.join(PRICES_FILE), tree, res.state_price.psi())?;
    tables::write_allocation(&out.join(ALLOCATION_FILE), eco, &res.allocation)?;
    let sp = &res.state_price;
    let q_norm = sp.q_norm();
    let summary = SolveSummary {
        mode: "solve",
        seed: cfg.seed,
        converged,
        agents: eco.n_agents(),
        nodes: tree.len(),
        weights: res.weights.clone(),
        budget_gaps: res.budget_gaps.clone(),
        relative_budget_gap: res.relative_budget_gap(),
        endowment_value: res.endowment_value,
        clearing_residual: res.clearing_residual,
        kkt_residual: res.kkt_residual,
        iterations: res.iterations,
        inner_iterations: res.inner_iterations,
        operator_norm: sp.operator_norm(),
        psi_star_norm: q_norm.is_finite().then_some(q_norm),
        psi_star_max: sp.psi_star().iter().cloned().fold(0.0, f64::max),
        verification: report.into(),
    };
    write_json(&out.join(SUMMARY_FILE), &summary)
}

#[derive(Serialize)]
struct RefineSummary {
    mode: &'static str,
    price: PriceSpec,
    horizon: f64,
    levels: Vec<usize>,
    threshold: f64,
    classification: &'static str,
    moduli: Vec<f64>,
}

/// Continuity modulus of the configured price across the refinement levels.
/// Always passes once the study runs; the classification is reported.
pub fn run_refinement_study(
    cfg: &ScenarioConfig,
    levels: Option<&[usize]>,
    out: &Path,
) -> Result<(Outcome, Vec<ModulusRow>), CliError> {
    let spec = cfg.refine_spec(levels)?;
    let settings = ModulusSettings {
        max_hitting_times: spec.hitting_times,
    };
    let rows = refinement_study(spec.horizon, &spec.levels, &spec.price.to_price(), &settings)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let class = classify(&rows, spec.threshold);
    prepare(out)?;
    tables::write_modulus(&out.join(MODULUS_FILE), &rows)?;
    write_json(
        &out.join(SUMMARY_FILE),
        &RefineSummary {
            mode: "refine",
            price: spec.price.clone(),
            horizon: spec.horizon,
            levels: spec.levels.clone(),
            threshold: spec.threshold,
            classification: class.as_str(),
            moduli: rows.iter().map(|r| r.modulus).collect(),
        },
    )?;
    Ok((
        Outcome {
            passed: true,
            message: format!("{}: {:?}", class.as_str(), rows.iter().map(|r| r.modulus).collect::<Vec<_>>()),
        },
        rows,
    ))
}

/// Replays the Arrow–Debreu check and the representation identity on
/// previously written tables.
pub fn run_verify(
    cfg: &ScenarioConfig,
    prices: &Path,
    allocation: &Path,
) -> Result<Outcome, CliError> {
    let eco = cfg.build_economy()?;
    let tree = eco.tree();
    let psi = tables::read_prices(prices, tree)?;
    let cells = tables::read_allocation(allocation, tree, eco.n_agents())?;
    let mut plans = Vec::with_capacity(cells.len());
    for (i, (e, x)) in cells.into_iter().enumerate() {
        let want = eco.agents()[i].endowment.increments();
        if let Some(n) = (0..e.len()).find(|&n| e[n] != want[n]) {
            return Err(CliError::Schema(format!(
                "{}: agent {i}, node {n}: endowment {} does not match the scenario ({})",
                allocation.display(),
                e[n],
                want[n]
            )));
        }
        plans.push(ConsumptionPlan::new(tree, x).map_err(|e| {
            CliError::Schema(format!("{}: agent {i}: {e}", allocation.display()))
        })?);
    }

    let report = verify_arrow_debreu(&eco, &psi, &plans, &VerifyTolerances::default());
    let identity = representation_identity(&eco, &psi);
    let passed = report.passed() && identity.is_ok();
    let mut message = format!("verification: {report}");
    if let Err(e) = identity {
        message.push_str(&format!("; representation: {e}"));
    }
    Ok(Outcome { passed, message })
}

fn representation_identity(eco: &Economy, psi: &OptionalProcess) -> Result<(), String> {
    let tree = eco.tree();
    let pi = Represented { tree, psi };
    let sp = extract_state_price(tree, &pi, eco.norm().p()).map_err(|e| e.to_string())?;
    let scale = psi.values().iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let diff = sp.psi().max_abs_diff(psi);
    if diff <= 1e-12 * scale {
        Ok(())
    } else {
        Err(format!("recovered state price differs by {diff:e}"))
    }
}
