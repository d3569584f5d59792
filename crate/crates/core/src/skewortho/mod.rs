//! Skew-orthogonal polynomials, pre-kernels and the monomial skew-product
//! matrix.

mod basis;
mod closed_form;
mod product;

pub use basis::{BasisJson, BasisSource, KernelDerivatives, SkewBasis};
pub use closed_form::{chgse_skew_basis, chgse_skew_polys, chgse_unit_norms, gse_skew_basis, gse_skew_polys, MAX_PAIRS};
pub use product::{
    general_skew_basis, kernel_via_w, monomial_w, projected_monomial_w, projected_rule, projected_skew_product,
    skew_product, SkewProductMatrix, CONDITION_LIMIT,
};
