use crate::consumption::{strong_norm, NormParams};
use crate::error::{Error, Result};
use crate::filtration::{cross_section, dual_optional_projection, EventTree, OptionalProcess, RawMeasure};

use super::pair;

/// Nonnegative optional process together with its path-wise supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePrice {
    psi: OptionalProcess,
    psi_star: Vec<f64>,
    params: NormParams,
    q_norm: f64,
}

impl StatePrice {
    pub fn new(tree: &EventTree, psi: OptionalProcess, p: f64) -> Result<Self> {
        let params = NormParams::new(p)?;
        tree.check_node_len(psi.len(), "state price")?;
        if let Some(node) = psi.values().iter().position(|&v| v < 0.0) {
            return Err(Error::NegativePrice {
                node,
                value: psi[node],
            });
        }
        let (psi_star, q_norm) = sup_process(tree, &psi, params.q());
        Ok(Self {
            psi,
            psi_star,
            params,
            q_norm,
        })
    }

    pub fn psi(&self) -> &OptionalProcess {
        &self.psi
    }

    /// `ψ* = max_t ψ_t` per path.
    pub fn psi_star(&self) -> &[f64] {
        &self.psi_star
    }

    /// `L^q` norm of `ψ*`.
    pub fn q_norm(&self) -> f64 {
        self.q_norm
    }

    pub fn params(&self) -> NormParams {
        self.params
    }

    /// Operator norm of `⟨ψ, ·⟩` for the strong norm.
    pub fn operator_norm(&self) -> f64 {
        operator_norm_strong(&self.psi)
    }

    pub fn scaled(&self, tree: &EventTree, c: f64) -> Result<Self> {
        Self::new(tree, self.psi.map(|v| v * c), self.params.p())
    }
}

/// `K = max_n ψ(n)`: for `ψ >= 0` on a finite tree this is the smallest `K`
/// with `|⟨ψ, z⟩| <= K ‖z‖_strong` for every `z`.
pub fn operator_norm_strong(psi: &OptionalProcess) -> f64 {
    psi.values().iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// `ψ*` per path and its `L^q` norm.
pub fn sup_process(tree: &EventTree, psi: &OptionalProcess, q: f64) -> (Vec<f64>, f64) {
    let star: Vec<f64> = (0..tree.n_paths())
        .map(|p| {
            tree.path(p)
                .iter()
                .map(|&n| psi[n])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let norm = tree.lp_norm(&star, q);
    (star, norm)
}

/// Terms of the bound `E[ψ* H] <= (K + 1) ‖H‖_p`, computed twice: directly,
/// and through the dual projection of `δ_S |H|` where `S` is the cross
/// section of `ψ`'s path maxima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBoundReport {
    /// `E[ψ* |H|]`.
    pub expectation: f64,
    /// `⟨ψ, (δ_S |H|)°⟩`.
    pub via_cross_section: f64,
    /// `‖(δ_S |H|)°‖_strong`, which equals `E |H|`.
    pub projected_mass: f64,
    pub operator_norm: f64,
    pub h_norm: f64,
}

impl SupBoundReport {
    pub fn weak_bound(&self) -> f64 {
        (self.operator_norm + 1.0) * self.h_norm
    }

    pub fn sharp_bound(&self) -> f64 {
        self.operator_norm * self.h_norm
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.expectation <= self.weak_bound() + tol
            && self.expectation <= self.sharp_bound() + tol
            && self.via_cross_section <= self.operator_norm * self.projected_mass + tol
            && (self.expectation - self.via_cross_section).abs() <= tol
    }
}

pub fn sup_bound_check(
    tree: &EventTree,
    psi: &OptionalProcess,
    h: &[f64],
    p: f64,
) -> Result<SupBoundReport> {
    tree.check_path_len(h.len(), "H")?;
    NormParams::new(p)?;
    let abs_h: Vec<f64> = h.iter().map(|v| v.abs()).collect();
    let (star, _) = sup_process(tree, psi, 1.0);
    let expectation = tree.expectation(
        &star.iter().zip(&abs_h).map(|(s, h)| s * h).collect::<Vec<_>>(),
    );
    let section = cross_section(tree, psi);
    let m = RawMeasure::dirac_at_random_time(tree, &section, &abs_h)?;
    let projected = dual_optional_projection(tree, &m);
    Ok(SupBoundReport {
        expectation,
        via_cross_section: pair(tree, psi, &projected),
        projected_mass: strong_norm(tree, &projected),
        operator_norm: operator_norm_strong(psi),
        h_norm: tree.lp_norm(&abs_h, p),
    })
}

/// Node-wise maximum of two state prices.
pub fn max_price(tree: &EventTree, a: &StatePrice, b: &StatePrice) -> Result<StatePrice> {
    StatePrice::new(
        tree,
        a.psi().zip_with(b.psi(), f64::max),
        a.params().p(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2() -> EventTree {
        EventTree::symmetric_binomial(2.0, 2).unwrap()
    }

    fn up_martingale(t: &EventTree) -> OptionalProcess {
        OptionalProcess::new(t, vec![0.5, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn sup_of_martingale() {
        let t = t2();
        let sp = StatePrice::new(&t, up_martingale(&t), 1.0).unwrap();
        assert_eq!(sp.psi_star(), &[1.0, 1.0, 0.5, 0.5]);
        assert_eq!(sp.q_norm(), 1.0);
        assert_eq!(sp.operator_norm(), 1.0);
        let c = StatePrice::new(&t, OptionalProcess::constant(&t, 0.3), 2.0).unwrap();
        assert_eq!(c.psi_star(), &[0.3; 4]);
        assert_eq!(c.operator_norm(), 0.3);
    }

    #[test]
    fn negative_price_rejected() {
        let t = t2();
        let psi = OptionalProcess::from_fn(&t, |n| if n == 4 { -0.1 } else { 1.0 });
        assert_eq!(
            StatePrice::new(&t, psi, 1.0),
            Err(Error::NegativePrice { node: 4, value: -0.1 })
        );
    }

    #[test]
    fn sup_bound_on_martingale() {
        let t = t2();
        let r = sup_bound_check(&t, &up_martingale(&t), &[1.0, 2.0, 0.5, 3.0], 2.0).unwrap();
        // E ψ* H = (1 + 2 + .25 + 1.5) / 4
        assert!((r.expectation - 4.75 / 4.0).abs() < 1e-15);
        assert!((r.projected_mass - 6.5 / 4.0).abs() < 1e-15);
        assert!(r.holds(1e-12));
    }

    #[test]
    fn max_with_constant() {
        let t = t2();
        let a = StatePrice::new(&t, up_martingale(&t), 1.0).unwrap();
        let b = StatePrice::new(&t, OptionalProcess::constant(&t, 0.75), 1.0).unwrap();
        let m = max_price(&t, &a, &b).unwrap();
        assert_eq!(m.psi().values(), &[0.75, 1.0, 0.75, 1.0, 1.0, 0.75, 0.75]);
        assert_eq!(max_price(&t, &a, &a).unwrap(), a);
        let zero = StatePrice::new(&t, OptionalProcess::constant(&t, 0.0), 1.0).unwrap();
        assert_eq!(max_price(&t, &a, &zero).unwrap(), a);
    }
}
