//! Rate functions: initial entropy, exclusion functional, walker cost, contraction.

pub mod breakdown;
pub mod contract;
pub mod entropy;
pub mod exclusion;
pub mod orlicz;
pub mod walker;

pub use breakdown::{rate_breakdown, RateBreakdown};
pub use contract::{contract_rate, controlled_cost, ContractConfig, ContractResult};
pub use entropy::{entropy_h, initial_entropy};
pub use exclusion::{assemble, i_ex, j_exclusion, BasisSpec, IexResult};
pub use orlicz::{luxemburg_norm, phi, phi_star, Young};
pub use walker::{
    a_star, a_star_forms, i_rw, i_rw_with, j_walker, j_walker_with, legendre_cost, FinitenessFlags, RwCost,
    WalkerPath,
};
