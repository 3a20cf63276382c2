//! CSV artifacts. Numbers are written with 17 significant digits so that
//! reading a table back gives the exact values.

use std::path::Path;

use sprice_core::equilibrium::{Allocation, Economy};
use sprice_core::filtration::{EventTree, OptionalProcess};
use sprice_core::pricing::ModulusRow;

use crate::CliError;

pub const PRICES_HEADER: [&str; 4] = ["level", "node_id", "time", "psi"];
pub const ALLOCATION_HEADER: [&str; 6] =
    ["agent", "level", "node_id", "time", "endowment", "consumption"];
pub const MODULUS_HEADER: [&str; 3] = ["steps", "delta", "modulus"];

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_prices(path: &Path, tree: &EventTree, psi: &OptionalProcess) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(PRICES_HEADER).map_err(|e| io(path, e))?;
    for n in 0..tree.len() {
        w.write_record([
            tree.level(n).to_string(),
            n.to_string(),
            num(tree.time_of(n)),
            num(psi[n]),
        ])
        .map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

pub fn write_allocation(path: &Path, eco: &Economy, alloc: &Allocation) -> Result<(), CliError> {
    let tree = eco.tree();
    let mut w = writer(path)?;
    w.write_record(ALLOCATION_HEADER).map_err(|e| io(path, e))?;
    for (i, (agent, x)) in eco.agents().iter().zip(alloc.plans()).enumerate() {
        for n in 0..tree.len() {
            w.write_record([
                i.to_string(),
                tree.level(n).to_string(),
                n.to_string(),
                num(tree.time_of(n)),
                num(agent.endowment.increments()[n]),
                num(x.increments()[n]),
            ])
            .map_err(|e| io(path, e))?;
        }
    }
    w.flush().map_err(|e| io(path, e))
}

pub fn write_modulus(path: &Path, rows: &[ModulusRow]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(MODULUS_HEADER).map_err(|e| io(path, e))?;
    for r in rows {
        w.write_record([r.steps.to_string(), num(r.delta), num(r.modulus)])
            .map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

struct Table {
    path: String,
    columns: Vec<usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let name = path.display().to_string();
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Schema(format!("{name}: {e}")))?;
        let found = r
            .headers()
            .map_err(|e| CliError::Schema(format!("{name}: {e}")))?
            .clone();
        let mut columns = Vec::with_capacity(header.len());
        for h in header {
            let idx = found.iter().position(|f| f == *h).ok_or_else(|| {
                CliError::Schema(format!("{name}: missing column `{h}`"))
            })?;
            columns.push(idx);
        }
        let rows = r
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Schema(format!("{name}: {e}")))?;
        Ok(Self {
            path: name,
            columns,
            rows,
        })
    }

    fn field<T: std::str::FromStr>(&self, row: usize, col: usize, header: &[&str]) -> Result<T, CliError> {
        let raw = self.rows[row].get(self.columns[col]).unwrap_or("");
        raw.trim().parse().map_err(|_| {
            // row numbers count the header as line 1
            CliError::Schema(format!(
                "{} line {}: column `{}` has invalid value `{raw}`",
                self.path,
                row + 2,
                header[col]
            ))
        })
    }

    fn schema(&self, row: usize, msg: impl std::fmt::Display) -> CliError {
        CliError::Schema(format!("{} line {}: {msg}", self.path, row + 2))
    }
}

fn check_node(t: &Table, row: usize, tree: &EventTree, level: usize, node: usize) -> Result<(), CliError> {
    if node >= tree.len() {
        return Err(t.schema(row, format!("node_id {node} does not exist")));
    }
    if tree.level(node) != level {
        return Err(t.schema(row, format!("node {node} is on level {}, not {level}", tree.level(node))));
    }
    Ok(())
}

pub fn read_prices(path: &Path, tree: &EventTree) -> Result<OptionalProcess, CliError> {
    let t = Table::read(path, &PRICES_HEADER)?;
    let mut psi = vec![None; tree.len()];
    for row in 0..t.rows.len() {
        let level: usize = t.field(row, 0, &PRICES_HEADER)?;
        let node: usize = t.field(row, 1, &PRICES_HEADER)?;
        let value: f64 = t.field(row, 3, &PRICES_HEADER)?;
        check_node(&t, row, tree, level, node)?;
        if psi[node].replace(value).is_some() {
            return Err(t.schema(row, format!("node {node} appears twice")));
        }
    }
    let values = psi
        .into_iter()
        .enumerate()
        .map(|(n, v)| v.ok_or_else(|| CliError::Schema(format!("{}: no row for node {n}", t.path))))
        .collect::<Result<Vec<_>, _>>()?;
    OptionalProcess::new(tree, values).map_err(|e| CliError::Schema(format!("{}: {e}", t.path)))
}

/// `(endowment, consumption)` increments of one agent.
pub type AgentColumns = (Vec<f64>, Vec<f64>);

pub fn read_allocation(
    path: &Path,
    tree: &EventTree,
    n_agents: usize,
) -> Result<Vec<AgentColumns>, CliError> {
    let t = Table::read(path, &ALLOCATION_HEADER)?;
    let mut cells = vec![vec![None; tree.len()]; n_agents];
    for row in 0..t.rows.len() {
        let agent: usize = t.field(row, 0, &ALLOCATION_HEADER)?;
        let level: usize = t.field(row, 1, &ALLOCATION_HEADER)?;
        let node: usize = t.field(row, 2, &ALLOCATION_HEADER)?;
        let e: f64 = t.field(row, 4, &ALLOCATION_HEADER)?;
        let x: f64 = t.field(row, 5, &ALLOCATION_HEADER)?;
        if agent >= n_agents {
            return Err(t.schema(row, format!("agent {agent} does not exist")));
        }
        check_node(&t, row, tree, level, node)?;
        if cells[agent][node].replace((e, x)).is_some() {
            return Err(t.schema(row, format!("agent {agent}, node {node} appears twice")));
        }
    }
    cells
        .into_iter()
        .enumerate()
        .map(|(i, col)| {
            let mut e = Vec::with_capacity(col.len());
            let mut x = Vec::with_capacity(col.len());
            for (n, c) in col.into_iter().enumerate() {
                let (ev, xv) = c.ok_or_else(|| {
                    CliError::Schema(format!("{}: no row for agent {i}, node {n}", t.path))
                })?;
                e.push(ev);
                x.push(xv);
            }
            Ok((e, x))
        })
        .collect()
}
