use crate::filtration::{martingale, EventTree, OptionalProcess};

/// Price in the semimartingale form `ψ = A + M`, where `A` accumulates the
/// density `A'` against the grid weights (`A_0 = 0`) and
/// `M_t = E[-A'_T - A_T | F_t]`.
///
/// No sign adjustment is made: a positive density gives a negative `ψ`, so
/// nonnegativity has to be checked by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct KPrice {
    pub a_prime: OptionalProcess,
    pub a: OptionalProcess,
    pub m: OptionalProcess,
    pub psi: OptionalProcess,
}

pub fn k_price_build(tree: &EventTree, a_prime: &OptionalProcess) -> KPrice {
    let grid = tree.time_grid();
    let mut a = vec![0.0; tree.len()];
    for n in 1..tree.len() {
        let parent = tree.parent(n).expect("non-root node has a parent");
        a[n] = a[parent] + grid.weight(tree.level(parent)) * a_prime[parent];
    }
    let last = tree.last_level();
    let terminal: Vec<f64> = tree
        .nodes_at(last)
        .map(|leaf| -a_prime[leaf] - a[leaf])
        .collect();
    let m = martingale(tree, &terminal).expect("one value per path");
    let a = OptionalProcess::from_fn(tree, |n| a[n]);
    let psi = a.zip_with(&m, |x, y| x + y);
    KPrice {
        a_prime: a_prime.clone(),
        a,
        m,
        psi,
    }
}
