//! Modified Bessel functions of the second kind for integer order.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_TERMS: usize = 10_000;

/// `e^x K_n(x)` for integer `n >= 0` and `x > 0`.
///
/// `K_0` and `K_1` come from the power series for `x <= 2` and Temme's
/// continued fraction otherwise; higher orders use the upward recurrence
/// `K_{n+1} = K_{n-1} + (2n/x) K_n`, which is stable in this direction.
pub fn bessel_k_scaled(n: usize, x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return if x == 0.0 { f64::INFINITY } else { f64::NAN };
    }
    if x.is_infinite() {
        return 0.0;
    }
    let (k0, k1) = if x <= 2.0 { k01_series(x) } else { k01_continued_fraction(x) };
    if n == 0 {
        return k0;
    }
    let (mut km, mut k) = (k0, k1);
    for j in 1..n {
        let next = km + 2.0 * j as f64 / x * k;
        km = k;
        k = next;
    }
    k
}

/// `K_n(x)` for integer `n >= 0` and `x > 0`.
pub fn bessel_k(n: usize, x: f64) -> f64 {
    bessel_k_scaled(n, x) * (-x).exp()
}

/// Scaled `(K_0, K_1)` from the ascending series.
fn k01_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let l = (0.5 * x).ln();
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    // term = t^k / (k!)^2, harmonic numbers give psi(k+1) = H_k - gamma
    let mut term = 1.0;
    let mut h = 0.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        if k > 0 {
            term *= t / (kf * kf);
            h += 1.0 / kf;
        }
        let psi1 = h - EULER_GAMMA;
        let psi2 = psi1 + 1.0 / (kf + 1.0);
        let term1 = term / (kf + 1.0);
        i0 += term;
        i1 += term1;
        s0 += psi1 * term;
        s1 += (psi1 + psi2) * term1;
        if term < EPS * i0 && k > 2 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -l * i0 + s0;
    let k1 = 1.0 / x + l * i1 - 0.25 * x * s1;
    let e = x.exp();
    (k0 * e, k1 * e)
}

/// Scaled `(K_0, K_1)` from Steed's evaluation of Temme's CF2.
fn k01_continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::QuadratureRule;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn matches_reference_values() {
        // (order, x, e^x K_n(x))
        let table = [
            (0, 0.01, 4.768694028544461),
            (0, 0.5, 1.5241093857739092),
            (0, 1.9, 0.8614506167517544),
            (0, 2.1, 0.8230171525316622),
            (0, 30.0, 0.22788666561625373),
            (1, 0.01, 100.97864845824003),
            (1, 1.9, 1.0674709298145704),
            (1, 2.1, 1.0023680527405792),
            (1, 5.0, 0.6002738587883125),
            (2, 0.5, 12.448148218621052),
            (2, 5.0, 0.7879171078288439),
            (4, 0.01, 4848200400.249833),
            (4, 1.9, 18.553433880787935),
            (4, 2.1, 14.315866296234413),
            (4, 30.0, 0.2961499074300818),
        ];
        for (n, x, expected) in table {
            let got = bessel_k_scaled(n, x);
            assert!(rel(got, expected) < 1e-13, "K_{n}({x}) = {got}, expected {expected}");
        }
        assert!(rel(bessel_k(0, 5.0), 0.0036910983340425942) < 1e-13);
    }

    #[test]
    fn matches_integral_representation() {
        // K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt
        let rule = QuadratureRule::new(0.0, 12.0, 400).unwrap();
        for n in [0usize, 1, 2, 3, 6] {
            for x in [0.3, 1.0, 2.0, 2.5, 7.0] {
                let integral = rule.integrate(|t| (-x * t.cosh()).exp() * (n as f64 * t).cosh());
                assert!(rel(bessel_k(n, x), integral) < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let (a0, a1) = k01_series(2.0);
        let (b0, b1) = k01_continued_fraction(2.0);
        assert!(rel(a0, b0) < 1e-14);
        assert!(rel(a1, b1) < 1e-14);
    }
}
