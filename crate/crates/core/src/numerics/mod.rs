//! Complex polynomials, tensor Gauss-Legendre quadrature over the plane and
//! Pfaffians of antisymmetric matrices.

pub mod pfaffian;
pub mod poly;
pub mod quadrature;

pub use pfaffian::{determinant, pfaffian, pfaffian_with_diagnostics, AntisymMatrix, PfaffianOutcome};
pub use poly::Polynomial;
pub use quadrature::{build_grid, build_grid_for_degree, fundamental_grid, gauss_legendre, symmetry_fold, quad2d, quad2d_real, QuadratureGrid, QuadratureRule};

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Double factorial with `0!! = 1`.
pub fn double_factorial(n: usize) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinatorics() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert_eq!(binomial(6, 2), 15.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(double_factorial(0), 1.0);
        assert_eq!(double_factorial(6), 48.0);
        assert_eq!(double_factorial(7), 105.0);
    }
}
