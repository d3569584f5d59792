//! Convergence of complex-plane observables to their real-line limits as
//! `tau -> 1` (gse) or `mu -> 0` (chgse).

use num_complex::Complex64;
use serde::Serialize;

use super::{char_poly_expectation, Correlator, RealCorrelator};
use crate::error::{Error, Result};
use crate::numerics::QuadratureRule;
use crate::skewortho::{chgse_skew_polys, gse_skew_polys, SkewBasis};
use crate::weights::{chgse_weight, gse_weight, projected_chgse, projected_gse, Family, RealWeightSpec, WeightSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// One-point density integrated over `y`, compared in sup norm on `xs`.
    Density { xs: Vec<f64> },
    /// Characteristic-polynomial expectation at fixed masses.
    CharPoly { masses: Vec<Complex64> },
    /// Ratios `r_k / r_bar_k` for `k < pairs`.
    Norms { pairs: usize },
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::Density { .. } => "density",
            Observable::CharPoly { .. } => "charpoly",
            Observable::Norms { .. } => "norms",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    /// Relative deviation from the projected value.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub family: Family,
    pub n: usize,
    pub nu: usize,
    pub observable: String,
    pub rows: Vec<SweepRow>,
    /// Deviations strictly decrease along the sequence.
    pub monotone: bool,
    pub final_deviation: f64,
}

/// Default parameter sequences approaching the Hermitean limit.
pub fn default_sequence(family: Family) -> Vec<f64> {
    match family {
        Family::Chgse => vec![0.3, 0.1, 0.03],
        _ => vec![0.9, 0.99, 0.999],
    }
}

struct Ensemble {
    weight: WeightSpec,
    basis: SkewBasis,
}

fn ensemble(family: Family, n: usize, nu: usize, param: f64, count: usize) -> Result<Ensemble> {
    match family {
        Family::Gse => Ok(Ensemble { weight: gse_weight(n, param)?, basis: gse_skew_polys(n, param, count)? }),
        Family::Chgse => Ok(Ensemble {
            weight: chgse_weight(n, param, nu)?,
            basis: chgse_skew_polys(n, param, nu, count)?,
        }),
        Family::Custom => Err(Error::Unsupported("Hermitean sweeps need a gse or chgse family".into())),
    }
}

fn projected(family: Family, n: usize, nu: usize, count: usize) -> Result<(RealWeightSpec, SkewBasis)> {
    match family {
        Family::Gse => Ok((projected_gse(n), gse_skew_polys(n, 1.0, count)?)),
        Family::Chgse => Ok((projected_chgse(n, nu), chgse_skew_polys(n, 0.0, nu, count)?)),
        Family::Custom => Err(Error::Unsupported("Hermitean sweeps need a gse or chgse family".into())),
    }
}

/// `int dy R_{N,1}(x + i y)` by Gauss-Legendre over `|y| <= 10 sigma_y`.
pub fn y_integrated_density(weight: &WeightSpec, basis: &SkewBasis, n: usize, x: f64) -> Result<f64> {
    let sy = weight.decay().map(|d| d.sigma_y).unwrap_or(1.0);
    let rule = QuadratureRule::new(0.0, 10.0 * sy, 96)?;
    let corr = Correlator::new(basis, weight, n, &[])?;
    let mut acc = Vec::with_capacity(rule.len());
    for (&y, &h) in rule.nodes.iter().zip(&rule.weights) {
        acc.push(h * corr.eval(&[Complex64::new(x, y)])?.value.re);
    }
    // the density is even in y
    Ok(2.0 * crate::numerics::quadrature::pairwise_sum_real(&acc))
}

/// Evaluates `observable` along `params` and reports the relative deviation
/// from the projected value at each step. Non-convergence is reported via
/// `monotone = false`, not as an error.
pub fn hermitean_limit_sweep(
    family: Family,
    n: usize,
    nu: usize,
    params: &[f64],
    observable: &Observable,
) -> Result<SweepReport> {
    let count = match observable {
        Observable::Density { .. } => 2 * n,
        Observable::CharPoly { masses } => 2 * (n + masses.len() / 2) + 1,
        Observable::Norms { pairs } => 2 * pairs,
    };
    let (wbar, pbasis) = projected(family, n, nu, count)?;
    let mut rows = Vec::with_capacity(params.len());
    for &p in params {
        let e = ensemble(family, n, nu, p, count)?;
        let deviation = match observable {
            Observable::Density { xs } => {
                let target = RealCorrelator::new(&pbasis, &wbar, n, &[])?;
                let mut sup_diff: f64 = 0.0;
                let mut sup_ref: f64 = 0.0;
                for &x in xs {
                    let a = y_integrated_density(&e.weight, &e.basis, n, x)?;
                    let b = target.eval(&[x])?.value.re;
                    sup_diff = sup_diff.max((a - b).abs());
                    sup_ref = sup_ref.max(b.abs());
                }
                sup_diff / sup_ref
            }
            Observable::CharPoly { masses } => {
                let a = char_poly_expectation(&e.basis, n, masses)?.value;
                let b = char_poly_expectation(&pbasis, n, masses)?.value;
                (a - b).norm() / b.norm()
            }
            Observable::Norms { pairs } => (0..*pairs)
                .map(|k| (e.basis.norms()[k] / pbasis.norms()[k] - 1.0).norm())
                .fold(0.0, f64::max),
        };
        rows.push(SweepRow { param: p, deviation });
    }
    let monotone = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    let final_deviation = rows.last().map(|r| r.deviation).unwrap_or(f64::NAN);
    Ok(SweepReport { family, n, nu, observable: observable.name().into(), rows, monotone, final_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gse_charpoly_converges() {
        let obs = Observable::CharPoly { masses: vec![Complex64::new(0.4, 0.0)] };
        let rep = hermitean_limit_sweep(Family::Gse, 1, 0, &default_sequence(Family::Gse), &obs).unwrap();
        assert!(rep.monotone);
        // q_2(m) = m^2 + (2 - tau) -> m^2 + 1
        assert!((rep.final_deviation - 0.001 / 1.16).abs() < 1e-12);
    }

    #[test]
    fn gse_norms_converge() {
        let rep = hermitean_limit_sweep(Family::Gse, 2, 0, &[0.9, 0.99, 0.999], &Observable::Norms { pairs: 3 }).unwrap();
        assert!(rep.monotone);
        assert!(rep.final_deviation < 1e-3);
    }
}
