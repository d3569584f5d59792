//! Hermite (GSE) and Laguerre (chGSE) skew-orthogonal polynomials expanded
//! into monomial coefficients.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::basis::{BasisSource, SkewBasis};
use crate::error::{Error, Result};
use crate::numerics::{binomial, double_factorial, factorial, Polynomial};

/// Largest number of pairs supported before double precision breaks down.
pub const MAX_PAIRS: usize = 12;

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::Size("basis needs at least one polynomial".into()));
    }
    if count > 2 * MAX_PAIRS + 1 {
        return Err(Error::Size(format!(
            "{count} polynomials exceed the cap of {} (R <= {MAX_PAIRS})",
            2 * MAX_PAIRS + 1
        )));
    }
    Ok(())
}

/// GSE basis with `2R` polynomials and `R` norms.
pub fn gse_skew_basis(n: usize, tau: f64, r: usize) -> Result<SkewBasis> {
    gse_skew_polys(n, tau, 2 * r)
}

/// GSE basis with `count` polynomials `q_0 .. q_{count-1}`; `tau = 1` gives
/// the real-line Gaussian basis.
pub fn gse_skew_polys(n: usize, tau: f64, count: usize) -> Result<SkewBasis> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau = {tau} outside [0, 1]")));
    }
    check_count(count)?;
    let nf = n as f64;
    let polys = (0..count)
        .map(|j| if j % 2 == 1 { gse_odd(nf, tau, j) } else { gse_even(nf, tau, j / 2) })
        .collect();
    let norms = (0..count / 2)
        .map(|k| {
            let v = PI.sqrt() * (1.0 + tau).sqrt() * factorial(2 * k + 1) / nf.powf(2.0 * k as f64 + 0.5);
            Complex64::new(v, 0.0)
        })
        .collect();
    SkewBasis::new(polys, norms, false, 0, BasisSource::ClosedForm)
}

/// `(tau/2N)^{n/2} H_n(z sqrt(N/(2 tau)))`, coefficient of `z^{n-2m}` equal to
/// `(-1)^m n!/(m!(n-2m)!) (tau/(2N))^m`.
fn gse_odd(nf: f64, tau: f64, deg: usize) -> Polynomial {
    let mut c = vec![0.0; deg + 1];
    let t = tau / (2.0 * nf);
    for m in 0..=deg / 2 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        c[deg - 2 * m] = sign * factorial(deg) / (factorial(m) * factorial(deg - 2 * m)) * t.powi(m as i32);
    }
    Polynomial::from_real(&c)
}

/// `(2/N)^k k! sum_j (tau/2)^j / (2j)!! H_{2j}(z sqrt(N/(2 tau)))`.
fn gse_even(nf: f64, tau: f64, k: usize) -> Polynomial {
    let mut c = vec![0.0; 2 * k + 1];
    let pre = (2.0 / nf).powi(k as i32) * factorial(k);
    for j in 0..=k {
        let dj = 1.0 / double_factorial(2 * j);
        for m in 0..=j {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * factorial(2 * j) / (factorial(m) * factorial(2 * j - 2 * m))
                * (0.5 * tau).powi(m as i32)
                * nf.powi((j - m) as i32);
            c[2 * j - 2 * m] += pre * dj * term;
        }
    }
    Polynomial::from_real(&c)
}

/// chGSE basis with `2R` polynomials in `s = z^2` and `R` norms.
pub fn chgse_skew_basis(n: usize, mu: f64, nu: usize, r: usize) -> Result<SkewBasis> {
    chgse_skew_polys(n, mu, nu, 2 * r)
}

/// chGSE basis with `count` polynomials; `mu = 0` gives the real-line
/// Laguerre basis.
pub fn chgse_skew_polys(n: usize, mu: f64, nu: usize, count: usize) -> Result<SkewBasis> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("mu = {mu} outside [0, 1]")));
    }
    check_count(count)?;
    let nf = n as f64;
    let m2 = mu * mu;
    let polys = (0..count)
        .map(|j| if j % 2 == 1 { chgse_odd(nf, m2, nu, j) } else { chgse_even(nf, m2, nu, j / 2) })
        .collect();
    let norms = (0..count / 2)
        .map(|k| {
            let v = 4.0 * factorial(2 * k + 1) * factorial(2 * k + 2 * nu + 1) * (1.0 - m2).powf(1.5)
                * (1.0 + m2).powi((4 * k + 2 * nu) as i32)
                / nf.powi((4 * k + 2 * nu + 2) as i32);
            Complex64::new(v, 0.0)
        })
        .collect();
    SkewBasis::new(polys, norms, true, nu, BasisSource::ClosedForm)
}

/// `r_k` divided by the chGSE weight prefactor, i.e. the norms under
/// `WeightSpec::unit_normalized`; finite at `mu = 1` where the prefactor vanishes.
pub fn chgse_unit_norms(n: usize, mu: f64, nu: usize, pairs: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!("mu = {mu} outside (0, 1]")));
    }
    let nf = n as f64;
    let m2 = mu * mu;
    Ok((0..pairs)
        .map(|k| {
            8.0 * PI * m2 * m2 * factorial(2 * k + 1) * factorial(2 * k + 2 * nu + 1) * (1.0 + m2).powi((4 * k + 2 * nu) as i32)
                / nf.powi((4 * k + 2 * nu + 4) as i32)
        })
        .collect())
}

/// Coefficient of `s^i` in `L_n^{a}(N s / (1 - mu^2))` times `((1-mu^2)/N)^n`,
/// i.e. `(-1)^i C(n+a, n-i)/i! ((1-mu^2)/N)^{n-i}`.
fn scaled_laguerre(nf: f64, m2: f64, a: usize, deg: usize, i: usize) -> f64 {
    let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    let base = (1.0 - m2) / nf;
    sign * binomial(deg + a, deg - i) / factorial(i) * base.powi((deg - i) as i32)
}

fn chgse_odd(nf: f64, m2: f64, nu: usize, deg: usize) -> Polynomial {
    let c: Vec<f64> = (0..=deg)
        .map(|i| -factorial(deg) * scaled_laguerre(nf, m2, 2 * nu, deg, i))
        .collect();
    Polynomial::from_real(&c)
}

fn chgse_even(nf: f64, m2: f64, nu: usize, k: usize) -> Polynomial {
    let mut c = vec![0.0; 2 * k + 1];
    let pre = factorial(k) * factorial(k + nu) / nf.powi(2 * k as i32);
    for j in 0..=k {
        // 2^{2k-2j}(1+mu^2)^{2k-2j} (2j)!/(j!(j+nu)!) times (N/(1-mu^2))^{2j}
        // undoing the scaling carried by `scaled_laguerre`.
        let outer = (2.0 * (1.0 + m2)).powi(2 * (k - j) as i32) * factorial(2 * j)
            / (factorial(j) * factorial(j + nu));
        for (i, ci) in c.iter_mut().enumerate().take(2 * j + 1) {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let lag = sign * binomial(2 * j + 2 * nu, 2 * j - i) / factorial(i)
                * (1.0 - m2).powi((2 * j - i) as i32)
                * nf.powi(i as i32);
            *ci += pre * outer * lag;
        }
    }
    Polynomial::from_real(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(p: &Polynomial) -> Vec<f64> {
        p.coeffs().iter().map(|c| c.re).collect()
    }

    #[test]
    fn gse_low_orders() {
        let b = gse_skew_polys(1, 0.5, 4).unwrap();
        assert_eq!(re(b.poly(0)), vec![1.0]);
        assert_eq!(re(b.poly(1)), vec![0.0, 1.0]);
        let q2 = re(b.poly(2));
        assert!((q2[0] - 1.5).abs() < 1e-14 && q2[1] == 0.0 && q2[2] == 1.0);
        // H_3 scaled: z^3 - 6 (tau/2N) z
        let q3 = re(b.poly(3));
        assert!((q3[1] + 1.5).abs() < 1e-14 && q3[3] == 1.0);
        assert!((b.norms()[0].re - 2.170803).abs() < 1e-6);
        assert!((b.norms()[1].re - 13.024818).abs() < 1e-5);
        for n in 1..4 {
            for tau in [0.0, 0.3, 1.0] {
                let b = gse_skew_polys(n, tau, 3).unwrap();
                assert_eq!(re(b.poly(1)), vec![0.0, 1.0]);
                assert!((b.poly(2).coeff(0).re - (2.0 - tau) / n as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn chgse_low_orders() {
        let b = chgse_skew_polys(1, 0.0, 0, 2).unwrap();
        assert_eq!(re(b.poly(1)), vec![-1.0, 1.0]);
        let b = chgse_skew_polys(1, 0.5, 0, 2).unwrap();
        assert!((b.norms()[0].re - 2.598076).abs() < 1e-6);
        let b = chgse_skew_polys(2, 0.4, 1, 7).unwrap();
        for k in 0..7 {
            assert!(b.poly(k).is_monic(1e-12));
            assert_eq!(b.poly(k).degree(), k);
        }
    }

    #[test]
    fn unit_norms_match_prefactor_ratio() {
        let w = crate::weights::chgse_weight(2, 0.5, 1).unwrap();
        let b = chgse_skew_polys(2, 0.5, 1, 6).unwrap();
        let u = chgse_unit_norms(2, 0.5, 1, 3).unwrap();
        for k in 0..3 {
            assert!((b.norms()[k].re / w.prefactor() / u[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn caps_and_domains() {
        assert!(matches!(gse_skew_polys(1, 1.2, 2), Err(Error::Domain(_))));
        assert!(matches!(chgse_skew_polys(1, -0.1, 0, 2), Err(Error::Domain(_))));
        assert!(matches!(gse_skew_basis(1, 0.5, 13), Err(Error::Size(_))));
        assert!(gse_skew_basis(1, 0.5, 12).is_ok());
    }
}
