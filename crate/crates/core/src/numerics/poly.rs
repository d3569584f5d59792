use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Dense univariate polynomial with complex coefficients in ascending degree.
///
/// Trailing zero coefficients are stripped on construction, except that the
/// zero polynomial keeps a single `0` coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == Complex64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    pub fn is_monic(&self, tol: f64) -> bool {
        (self.leading() - Complex64::new(1.0, 0.0)).norm() <= tol
    }

    /// True when every coefficient has an imaginary part below `tol`
    /// relative to the largest coefficient modulus.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        self.coeffs.iter().all(|c| c.im.abs() <= tol * scale)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in a single Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Maximum coefficient-wise distance to another polynomial.
    pub fn max_coeff_diff(&self, other: &Polynomial) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| (self.coeff(i) - other.coeff(i)).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn horner_examples() {
        let q2 = Polynomial::from_real(&[1.5, 0.0, 1.0]);
        assert_eq!(q2.eval(c(0.0, 0.0)), c(1.5, 0.0));
        let id = Polynomial::from_real(&[0.0, 1.0]);
        assert_eq!(id.eval(c(2.0, 1.0)), c(2.0, 1.0));
        let one = Polynomial::from_real(&[1.0]);
        assert_eq!(one.eval(c(-7.3, 11.0)), c(1.0, 0.0));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(Polynomial::from_real(&[4.2]).derivative(), Polynomial::from_real(&[0.0]));
        assert_eq!(
            Polynomial::from_real(&[0.0, 0.0, 1.0]).derivative(),
            Polynomial::from_real(&[0.0, 2.0])
        );
    }

    #[test]
    fn derivative_matches_central_difference() {
        let p = Polynomial::new(vec![c(0.3, 0.0), c(-1.2, 0.5), c(0.7, 0.0), c(0.0, -0.2), c(1.0, 0.0)]);
        let dp = p.derivative();
        let h = 1e-5;
        for &z in &[c(0.4, -0.3), c(-1.1, 0.9), c(2.0, 0.0)] {
            let fd = (p.eval(z + h) - p.eval(z - h)) / (2.0 * h);
            let exact = dp.eval(z);
            assert!((fd - exact).norm() / exact.norm() < 1e-6, "{fd} vs {exact}");
            let (v, d) = p.eval_with_derivative(z);
            assert!((v - p.eval(z)).norm() < 1e-13);
            assert!((d - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn trailing_zeros_are_stripped() {
        let p = Polynomial::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(Polynomial::zero().coeffs().len(), 1);
        assert!(Polynomial::monomial(3).is_monic(1e-12));
    }

    #[test]
    fn arithmetic() {
        let a = Polynomial::from_real(&[1.0, 1.0]);
        let b = Polynomial::from_real(&[-1.0, 1.0]);
        assert_eq!(&a * &b, Polynomial::from_real(&[-1.0, 0.0, 1.0]));
        assert_eq!(&a - &a, Polynomial::zero());
        assert_eq!(&a + &b, Polynomial::from_real(&[0.0, 2.0]));
    }
}
