use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance on `|A + A^T|` accepted by [`AntisymMatrix::new`].
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Dense complex antisymmetric matrix.
///
/// The stored entries are exactly antisymmetric with a zero diagonal; input
/// that deviates by more than [`ANTISYMMETRY_TOL`] (relative to the largest
/// entry) is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymMatrix {
    entries: DMatrix<Complex64>,
}

impl AntisymMatrix {
    pub fn new(a: DMatrix<Complex64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Validation(format!(
                "antisymmetric matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let mut scale: f64 = 1.0;
        for v in a.iter() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Numeric("non-finite entry in antisymmetric matrix".into()));
            }
            scale = scale.max(v.norm());
        }
        for i in 0..n {
            for j in i..n {
                let r = (a[(i, j)] + a[(j, i)]).norm();
                if r > ANTISYMMETRY_TOL * scale {
                    return Err(Error::Validation(format!(
                        "matrix is not antisymmetric: |A[{i}][{j}] + A[{j}][{i}]| = {r:.3e}"
                    )));
                }
            }
        }
        let entries = DMatrix::from_fn(n, n, |i, j| (a[(i, j)] - a[(j, i)]) * 0.5);
        Ok(AntisymMatrix { entries })
    }

    /// Builds the matrix from its strict upper triangle `f(i, j)`, `i < j`.
    pub fn from_upper<F>(dim: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        let mut entries = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = f(i, j);
                entries[(i, j)] = v;
                entries[(j, i)] = -v;
            }
        }
        AntisymMatrix { entries }
    }

    pub fn empty() -> Self {
        AntisymMatrix { entries: DMatrix::zeros(0, 0) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// Simultaneous exchange of rows `i, j` and columns `i, j`.
    pub fn swap_pair(&mut self, i: usize, j: usize) {
        self.entries.swap_rows(i, j);
        self.entries.swap_columns(i, j);
    }

    /// `B A B^T`, which is again antisymmetric.
    pub fn congruence(&self, b: &DMatrix<Complex64>) -> Result<Self> {
        AntisymMatrix::new(b * &self.entries * b.transpose())
    }

    /// Largest `|A[i][j] + A[j][i]|`; zero by construction.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                r = r.max((self.entries[(i, j)] + self.entries[(j, i)]).norm());
            }
        }
        r
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Pfaffian together with the largest intermediate pivot product, used to
/// flag catastrophic cancellation.
#[derive(Debug, Clone, Copy)]
pub struct PfaffianOutcome {
    pub value: Complex64,
    /// Largest modulus of the running pivot product during elimination.
    pub max_partial: f64,
}

impl PfaffianOutcome {
    /// `max_partial / |value|`; infinite for a vanishing Pfaffian.
    pub fn cancellation_ratio(&self) -> f64 {
        let v = self.value.norm();
        if v == 0.0 {
            if self.max_partial == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.max_partial / v).max(1.0)
        }
    }
}

/// Pfaffian with the convention `Pf([[0, a], [-a, 0]]) = a`; zero for odd
/// dimension and one for the empty matrix.
pub fn pfaffian(a: &AntisymMatrix) -> Result<Complex64> {
    pfaffian_with_diagnostics(a).map(|o| o.value)
}

/// Skew-symmetric elimination with complete pivoting, O(n^3).
///
/// Each step takes the largest remaining entry `a_pq` (p before q) as pivot,
/// multiplies it into the result with the sign `(-1)^(p+q+1)` of moving the
/// pair to the front, and replaces the remaining block by its Schur
/// complement `a_rs + (a_qr a_ps - a_pr a_qs) / a_pq`. The arithmetic only
/// depends on entry values, so permuting rows and columns changes the result
/// by the permutation sign and nothing else.
pub fn pfaffian_with_diagnostics(a: &AntisymMatrix) -> Result<PfaffianOutcome> {
    let n = a.dim();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if n == 0 {
        return Ok(PfaffianOutcome { value: one, max_partial: 1.0 });
    }
    if n % 2 == 1 {
        return Ok(PfaffianOutcome { value: zero, max_partial: 0.0 });
    }
    if a.as_matrix().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numeric("non-finite entry passed to pfaffian".into()));
    }

    let mut m = a.as_matrix().clone();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut pf = one;
    let mut max_partial: f64 = 0.0;
    while !alive.is_empty() {
        let (mut bp, mut bq, mut best) = (0, 1, -1.0);
        for x in 0..alive.len() {
            for y in (x + 1)..alive.len() {
                let v = m[(alive[x], alive[y])].norm();
                if v > best {
                    (bp, bq, best) = (x, y, v);
                }
            }
        }
        let (p, q) = (alive[bp], alive[bq]);
        let pivot = m[(p, q)];
        if pivot == zero {
            return Ok(PfaffianOutcome { value: zero, max_partial });
        }
        pf *= if (bp + bq) % 2 == 1 { pivot } else { -pivot };
        max_partial = max_partial.max(pf.norm());
        alive.retain(|&i| i != p && i != q);
        for x in 0..alive.len() {
            for y in (x + 1)..alive.len() {
                let (r, s) = (alive[x], alive[y]);
                let v = m[(r, s)] + (m[(q, r)] * m[(p, s)] - m[(p, r)] * m[(q, s)]) / pivot;
                m[(r, s)] = v;
                m[(s, r)] = -v;
            }
        }
    }
    if !pf.re.is_finite() || !pf.im.is_finite() {
        return Err(Error::Numeric("pfaffian overflowed".into()));
    }
    Ok(PfaffianOutcome { value: pf, max_partial })
}

/// Determinant by LU with partial pivoting.
pub fn determinant(a: &DMatrix<Complex64>) -> Complex64 {
    if a.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    a.clone().lu().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_convention() {
        let a = AntisymMatrix::from_upper(2, |_, _| c(3.0, 4.0));
        assert_eq!(pfaffian(&a).unwrap(), c(3.0, 4.0));
    }

    #[test]
    fn four_by_four_expansion() {
        let u = [[0.0, 1.3, -0.4, 2.2], [0.0, 0.0, 0.7, -1.9], [0.0, 0.0, 0.0, 0.6], [0.0; 4]];
        let a = AntisymMatrix::from_upper(4, |i, j| c(u[i][j], 0.1 * (i + 2 * j) as f64));
        let g = |i: usize, j: usize| a.get(i, j);
        let expected = g(0, 1) * g(2, 3) - g(0, 2) * g(1, 3) + g(0, 3) * g(1, 2);
        assert!((pfaffian(&a).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn odd_and_empty() {
        let a = AntisymMatrix::from_upper(3, |i, j| c((i + j) as f64, 1.0));
        assert_eq!(pfaffian(&a).unwrap(), c(0.0, 0.0));
        assert_eq!(pfaffian(&AntisymMatrix::empty()).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn rejects_symmetric_input() {
        let m = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(AntisymMatrix::new(m), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_nan() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        m[(1, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(AntisymMatrix::new(m), Err(Error::Numeric(_))));
    }

    #[test]
    fn zero_column_gives_zero() {
        let a = AntisymMatrix::from_upper(4, |i, _| if i == 0 { c(0.0, 0.0) } else { c(1.0, 2.0) });
        assert_eq!(pfaffian(&a).unwrap(), c(0.0, 0.0));
    }
}
