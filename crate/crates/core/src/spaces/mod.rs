//! Dyadic frequency analysis: Littlewood–Paley blocks, Bony paraproducts and
//! norm estimators on the periodic grid.

mod lacunary;
mod lp;
mod norms;
mod rough;

pub use lacunary::gen_lacunary;
pub use lp::{
    block_symbol, bony_decompose, lp_decompose, lp_decompose_with, paraproduct, paraproduct_with,
    remainder, remainder_with, rough_product_terms, theta, BonyConfig, BonyTerms, DyadicPartition,
    LPDecomposition,
};
pub use norms::{
    bmo_norm, lipschitz_seminorm, regularity_profile, sobolev_multiplier_norm, sobolev_norm,
    sup_norm_report, zygmund_from_blocks, zygmund_norm, NormReport, RegularityProfile,
};
pub use rough::{rough_product_derivative, RoughProduct, TermReport};
