//! Price functionals, state prices and their diagnostics.

mod functional;
mod kprice;
pub mod modulus;
mod state_price;

pub use functional::{
    extract_state_price, pair, pair_raw, riesz_density, riesz_tsystem, PriceFunctional,
    RawRepresented, Represented, REPRESENTATION_TOL,
};
pub use kprice::{k_price_build, KPrice};
pub use modulus::{
    classify, continuity_modulus, modulus_at_level, refinement_study, BinomialLattice,
    Compatibility, ModulusDelta, ModulusRow, ModulusSettings, RefinementLevel, RefinementPrice,
};
pub use state_price::{
    max_price, operator_norm_strong, sup_bound_check, sup_process, StatePrice, SupBoundReport,
};
