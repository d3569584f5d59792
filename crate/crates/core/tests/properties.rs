//! Randomized invariants of Pfaffians, kernels and correlators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use sympf::correlators::{char_poly_expectation, Correlator};
use sympf::numerics::{determinant, pfaffian, AntisymMatrix};
use sympf::skewortho::{chgse_skew_polys, gse_skew_polys};
use sympf::weights::{chgse_weight, gse_weight};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn antisym(dim: usize, entries: &[(f64, f64)]) -> AntisymMatrix {
    let mut it = entries.iter().cycle();
    AntisymMatrix::from_upper(dim, |_, _| {
        let &(a, b) = it.next().unwrap();
        c(a, b)
    })
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn point() -> impl Strategy<Value = Complex64> {
    (-1.5f64..1.5, 0.05f64..1.5).prop_map(|(x, y)| c(x, y))
}

fn chiral_point() -> impl Strategy<Value = Complex64> {
    (0.05f64..1.5, 0.05f64..1.5).prop_map(|(x, y)| c(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfaffian_squares_to_determinant(
        half in 1usize..=6,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 66),
    ) {
        let a = antisym(2 * half, &entries);
        let pf = pfaffian(&a).unwrap();
        let det = determinant(a.as_matrix());
        prop_assert!(rel(pf * pf, det) < 1e-9, "{} vs {}", pf * pf, det);
    }

    #[test]
    fn odd_dimension_pfaffian_vanishes(
        half in 0usize..=5,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 66),
    ) {
        prop_assert_eq!(pfaffian(&antisym(2 * half + 1, &entries)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn pair_swap_flips_sign_exactly(
        half in 1usize..=6,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 66),
        i in 0usize..12,
        j in 0usize..12,
    ) {
        let dim = 2 * half;
        let (i, j) = (i % dim, j % dim);
        prop_assume!(i != j);
        let a = antisym(dim, &entries);
        let mut b = a.clone();
        b.swap_pair(i, j);
        prop_assert_eq!(pfaffian(&b).unwrap(), -pfaffian(&a).unwrap());
    }

    #[test]
    fn congruence_scales_by_determinant(
        half in 1usize..=5,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 45),
        bentries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 100),
    ) {
        let dim = 2 * half;
        let a = antisym(dim, &entries);
        let b = DMatrix::from_fn(dim, dim, |r, s| {
            let (x, y) = bentries[r * dim + s];
            c(x, y) + if r == s { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let lhs = pfaffian(&a.congruence(&b).unwrap()).unwrap();
        let rhs = pfaffian(&a).unwrap() * determinant(&b);
        prop_assert!(rel(lhs, rhs) < 1e-9);
    }

    #[test]
    fn gse_prekernel_is_antisymmetric(z in point(), v in point(), tau in 0.1f64..0.9, r in 1usize..=4) {
        let b = gse_skew_polys(2, tau, 2 * r + 1).unwrap();
        let k1 = b.prekernel(r, z, v).unwrap();
        let k2 = b.prekernel(r, v, z).unwrap();
        prop_assert!((k1 + k2).norm() <= 1e-12 * k1.norm().max(1.0));
    }

    #[test]
    fn odd_shift_leaves_prekernel_unchanged(
        z in chiral_point(),
        v in chiral_point(),
        k in 0usize..3,
        shift in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let b = chgse_skew_polys(2, 0.5, 1, 7).unwrap();
        let shifted = b.with_odd_shift(k, c(shift.0, shift.1));
        let k1 = b.prekernel(3, z, v).unwrap();
        let k2 = shifted.prekernel(3, z, v).unwrap();
        prop_assert!(rel(k1, k2) < 1e-10, "{k1} vs {k2}");
    }

    #[test]
    fn correlator_is_symmetric_in_its_arguments(z1 in point(), z2 in point(), m in point()) {
        let w = gse_weight(3, 0.5).unwrap();
        let b = gse_skew_polys(3, 0.5, 9).unwrap();
        let corr = Correlator::new(&b, &w, 3, &[m]).unwrap();
        let a = corr.eval(&[z1, z2]).unwrap().value;
        let s = corr.eval(&[z2, z1]).unwrap().value;
        prop_assert!((a - s).norm() <= 1e-9 * a.norm().max(1e-12));
    }

    #[test]
    fn massless_density_is_real_and_nonnegative(z in point(), tau in 0.1f64..0.9) {
        let w = gse_weight(2, tau).unwrap();
        let b = gse_skew_polys(2, tau, 5).unwrap();
        let r = Correlator::new(&b, &w, 2, &[]).unwrap().eval(&[z]).unwrap().value;
        prop_assert!(r.re >= -1e-12 && r.im.abs() <= 1e-10 * r.re.abs().max(1e-12), "{r}");
    }

    #[test]
    fn chiral_density_is_invariant_under_reflections(z in chiral_point()) {
        let w = chgse_weight(2, 0.5, 1).unwrap();
        let b = chgse_skew_polys(2, 0.5, 1, 5).unwrap();
        let corr = Correlator::new(&b, &w, 2, &[]).unwrap();
        let r = corr.eval(&[z]).unwrap().value;
        for image in [c(-z.re, z.im), -z] {
            let s = corr.eval(&[image]).unwrap().value;
            prop_assert!((r - s).norm() <= 1e-9 * r.norm(), "{r} vs {s} at {image}");
        }
    }

    #[test]
    fn char_poly_of_conjugate_pairs_is_real(m in point(), n in 1usize..=3) {
        let b = gse_skew_polys(n, 0.5, 2 * n + 3).unwrap();
        let e = char_poly_expectation(&b, n, &[m, m.conj()]).unwrap().value;
        prop_assert!(e.im.abs() <= 1e-9 * e.norm(), "{e}");
    }
}
