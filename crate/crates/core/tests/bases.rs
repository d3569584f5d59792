//! Numerically constructed bases against closed forms and the freedom in
//! choosing odd polynomials.

use num_complex::Complex64;

use sympf::correlators::{partition_function, Correlator};
use sympf::numerics::fundamental_grid;
use sympf::skewortho::{chgse_skew_polys, general_skew_basis, gse_skew_polys, monomial_w, SkewBasis};
use sympf::weights::{chgse_weight, gse_weight};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Coefficient `c` with `a.q_{2k+1} = b.q_{2k+1} + c b.q_{2k}` and the
/// residual of that decomposition.
fn odd_gauge(a: &SkewBasis, b: &SkewBasis, k: usize) -> (Complex64, f64) {
    let diff = a.poly(2 * k + 1) - b.poly(2 * k + 1);
    let even = b.poly(2 * k);
    let lead = even.coeffs()[2 * k];
    let gauge = diff.coeffs().get(2 * k).copied().unwrap_or_default() / lead;
    let residual = (&diff - &even.scale(gauge)).coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
    (gauge, residual)
}

#[test]
fn chiral_odd_polynomials_differ_by_even_multiples() {
    for nu in [0, 1, 2] {
        let w = chgse_weight(1, 0.5, nu).unwrap();
        let g = fundamental_grid(&w, 160, 6).unwrap();
        let general = general_skew_basis(&monomial_w(&w, 6, &g).unwrap()).unwrap();
        let closed = chgse_skew_polys(1, 0.5, nu, 6).unwrap();
        for k in 0..3 {
            let (gauge, residual) = odd_gauge(&general, &closed, k);
            assert!(residual < 1e-7 * gauge.norm().max(1.0), "nu {nu} k {k}: residual {residual:.2e}");
        }
    }
}

#[test]
fn gse_general_basis_reproduces_closed_form() {
    let w = gse_weight(2, 0.3).unwrap();
    let g = fundamental_grid(&w, 160, 8).unwrap();
    let general = general_skew_basis(&monomial_w(&w, 8, &g).unwrap()).unwrap();
    let closed = gse_skew_polys(2, 0.3, 8).unwrap();
    for k in 0..4 {
        let (gauge, residual) = odd_gauge(&general, &closed, k);
        assert!(gauge.norm() < 1e-7 && residual < 1e-7, "k {k}: gauge {gauge} residual {residual:.2e}");
    }
}

#[test]
fn correlators_agree_between_bases() {
    let w = chgse_weight(1, 0.6, 1).unwrap();
    let g = fundamental_grid(&w, 160, 6).unwrap();
    let general = general_skew_basis(&monomial_w(&w, 6, &g).unwrap()).unwrap();
    let closed = chgse_skew_polys(1, 0.6, 1, 6).unwrap();
    let masses = [c(0.7, 0.1)];
    let pts = [c(-0.6, 0.9)];
    let a = Correlator::new(&general, &w, 1, &masses).unwrap().eval(&pts).unwrap().value;
    let b = Correlator::new(&closed, &w, 1, &masses).unwrap().eval(&pts).unwrap().value;
    assert!((a - b).norm() / b.norm() < 1e-7, "{a} vs {b}");
}

#[test]
fn arbitrary_gauge_leaves_partition_function_unchanged() {
    let b = gse_skew_polys(3, 0.5, 9).unwrap();
    let shifted = b.with_odd_shift(0, c(0.7, -0.2)).with_odd_shift(2, c(-1.3, 0.4));
    let masses = [c(0.2, 0.5), c(-0.4, 0.1)];
    let z0 = partition_function(&b, 3, &masses).unwrap().value;
    let z1 = partition_function(&shifted, 3, &masses).unwrap().value;
    assert!((z0 - z1).norm() / z0.norm() < 1e-12);
}

#[test]
fn bases_round_trip_through_json() {
    let b = chgse_skew_polys(2, 0.4, 2, 6).unwrap();
    let text = serde_json::to_string(&b.to_json()).unwrap();
    let back = SkewBasis::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    for k in 0..6 {
        assert_eq!(back.poly(k).coeffs(), b.poly(k).coeffs());
    }
    assert_eq!(back.norms(), b.norms());
}
