use super::{EventTree, OptionalProcess, StoppingTime};
use crate::error::{Error, Result};

/// A family of random variables indexed by stopping times, each one
/// `F(τ)`-measurable and stored as one value per node of the antichain of
/// `τ`.
#[derive(Debug, Clone, Default)]
pub struct TSystem {
    entries: Vec<(StoppingTime, Vec<f64>)>,
}

impl TSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, tau: StoppingTime, atom_values: Vec<f64>) -> Result<()> {
        if atom_values.len() != tau.nodes().len() {
            return Err(Error::LengthMismatch {
                what: "T-system entry",
                expected: tau.nodes().len(),
                found: atom_values.len(),
            });
        }
        self.entries.push((tau, atom_values));
        Ok(())
    }

    /// The family `τ ↦ ψ_τ` generated by an optional process.
    pub fn from_process<'a>(
        psi: &OptionalProcess,
        times: impl IntoIterator<Item = &'a StoppingTime>,
    ) -> Self {
        let entries = times
            .into_iter()
            .map(|tau| {
                let vals = tau.nodes().iter().map(|&n| psi[n]).collect();
                (tau.clone(), vals)
            })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[(StoppingTime, Vec<f64>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks `z^τ = z^σ` on `{τ = σ}` for every pair of entries, up to `tol`.
    ///
    /// Two stopping times coincide on a path exactly when they stop it at the
    /// same node, so the check runs node by node.
    pub fn check_consistency(&self, tree: &EventTree, tol: f64) -> Result<()> {
        let mut seen: Vec<Option<f64>> = vec![None; tree.len()];
        for (tau, vals) in &self.entries {
            for (&n, &v) in tau.nodes().iter().zip(vals) {
                match seen[n] {
                    Some(prev) if (prev - v).abs() > tol => {
                        return Err(Error::ConsistencyViolation {
                            node: n,
                            left: prev,
                            right: v,
                        })
                    }
                    Some(_) => {}
                    None => seen[n] = Some(v),
                }
            }
        }
        Ok(())
    }
}

/// Recollects a consistent T-system into one optional process `ψ` with
/// `ψ_τ = z^τ` on every entry. The constant times `τ ≡ t_k` must all be
/// present; they fix `ψ` node by node.
pub fn aggregate_tsystem(tree: &EventTree, ts: &TSystem) -> Result<OptionalProcess> {
    ts.check_consistency(tree, 0.0)?;
    let mut values: Vec<Option<f64>> = vec![None; tree.len()];
    for k in 0..=tree.last_level() {
        let level: Vec<_> = tree.nodes_at(k).collect();
        let entry = ts
            .entries()
            .iter()
            .find(|(tau, _)| tau.nodes() == level.as_slice())
            .ok_or(Error::MissingConstantTime(k))?;
        for (&n, &v) in entry.0.nodes().iter().zip(&entry.1) {
            values[n] = Some(v);
        }
    }
    let psi: Vec<f64> = values
        .into_iter()
        .map(|v| v.expect("every node lies on some level"))
        .collect();
    OptionalProcess::new(tree, psi)
}
