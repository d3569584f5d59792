//! Skew products, the monomial skew-product matrix and the basis built from
//! it by skew Gram-Schmidt.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::{BasisSource, SkewBasis};
use super::closed_form::MAX_PAIRS;
use crate::error::{Error, Result};
use crate::numerics::quadrature::pairwise_sum_real;
use crate::numerics::{quad2d_real, symmetry_fold, AntisymMatrix, Polynomial, QuadratureGrid, QuadratureRule};
use crate::weights::{RealWeightSpec, WeightSpec};

/// Condition estimates above this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

fn require_real(p: &Polynomial, name: &str) -> Result<()> {
    if !p.is_real(1e-12) {
        return Err(Error::Validation(format!(
            "skew product needs real coefficients; {name} has complex coefficients"
        )));
    }
    Ok(())
}

/// `<f, g> = int d^2z w(z, z*) (z* - z) [f(z) g(z*) - f(z*) g(z)]`, with
/// `(z*^2 - z^2)` and arguments `z^2` for chiral weights.
///
/// For real coefficients `f(z*) = f(z)*`, so the integrand reduces to
/// `4 y Im(f g*) w` (chiral: `8 x y Im(f g*) w`) and the result is real.
pub fn skew_product(f: &Polynomial, g: &Polynomial, w: &WeightSpec, grid: &QuadratureGrid) -> Result<Complex64> {
    require_real(f, "f")?;
    require_real(g, "g")?;
    let chiral = w.chiral();
    let v = quad2d_real(
        |x, y| {
            let z = Complex64::new(x, y);
            let u = if chiral { z * z } else { z };
            let im = (f.eval(u) * g.eval(u).conj()).im;
            let jac = if chiral { 8.0 * x * y } else { 4.0 * y };
            jac * im * w.eval(x, y)
        },
        grid,
    )?;
    Ok(Complex64::new(v * symmetry_fold(grid, chiral), 0.0))
}

/// Hermitean-limit skew product `int dx w_bar(x) (f' g - f g')(x)`; chiral
/// weights use `int dx w_bar(x) 4 x^2 (f' g - f g')(x^2)`.
pub fn projected_skew_product(f: &Polynomial, g: &Polynomial, w: &RealWeightSpec, rule: &QuadratureRule) -> Result<Complex64> {
    require_real(f, "f")?;
    require_real(g, "g")?;
    let terms: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &h)| {
            let u = Complex64::new(if w.chiral { x * x } else { x }, 0.0);
            let (fv, fd) = f.eval_with_derivative(u);
            let (gv, gd) = g.eval_with_derivative(u);
            let jac = if w.chiral { 4.0 * x * x } else { 1.0 };
            h * jac * w.eval(x) * (fd * gv - fv * gd).re
        })
        .collect();
    Ok(Complex64::new(pairwise_sum_real(&terms), 0.0))
}

/// Default quadrature rule for projected skew products.
pub fn projected_rule(w: &RealWeightSpec, nodes: usize) -> Result<QuadratureRule> {
    QuadratureRule::new(w.support.0, w.support.1, nodes)
}

/// Matrix of monomial skew products `W_{m,n} = <u^m, u^n>`, stored for the
/// rescaled variable `u / s^m` to keep entries of comparable size.
#[derive(Debug, Clone)]
pub struct SkewProductMatrix {
    /// Skew products of the rescaled monomials `(u/s)^m`.
    scaled: AntisymMatrix,
    scaled_inverse: DMatrix<Complex64>,
    /// Rescaling length `s` applied to the polynomial variable.
    scale: f64,
    chiral: bool,
    nu: usize,
    pub condition_estimate: f64,
}

impl SkewProductMatrix {
    /// Wraps skew products of the rescaled monomials `(u / scale)^m`.
    pub fn from_scaled(scaled: AntisymMatrix, scale: f64, chiral: bool, nu: usize) -> Result<Self> {
        let dim = scaled.dim();
        if dim == 0 || dim % 2 == 1 {
            return Err(Error::Size(format!("skew-product matrix must have positive even size, got {dim}")));
        }
        if dim > 2 * MAX_PAIRS {
            return Err(Error::Size(format!("size {dim} exceeds the cap of {}", 2 * MAX_PAIRS)));
        }
        let m = scaled.as_matrix();
        let inv = m.clone().try_inverse().ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
            limit: CONDITION_LIMIT,
        })?;
        let condition = norm1(m) * norm1(&inv);
        if !condition.is_finite() || condition > CONDITION_LIMIT {
            return Err(Error::IllConditioned { condition, limit: CONDITION_LIMIT });
        }
        let inv = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (inv[(i, j)] - inv[(j, i)]));
        Ok(SkewProductMatrix { scaled, scaled_inverse: inv, scale, chiral, nu, condition_estimate: condition })
    }

    pub fn dim(&self) -> usize {
        self.scaled.dim()
    }

    pub fn chiral(&self) -> bool {
        self.chiral
    }

    /// `s^{m}` factor relating a rescaled monomial to the true one.
    fn power(&self, m: usize) -> f64 {
        self.scale.powi(m as i32)
    }

    /// `W_{m,n} = <u^m, u^n>` in the original variable.
    pub fn w(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.scaled.get(i, j) * self.power(i + j))
    }

    pub fn w_inverse(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.scaled_inverse[(i, j)] / self.power(i + j))
    }

    pub fn scaled(&self) -> &AntisymMatrix {
        &self.scaled
    }

    /// Largest entry of `W'(W')^{-1} - 1` for the rescaled matrix.
    pub fn inverse_residual(&self) -> f64 {
        let p = self.scaled.as_matrix() * &self.scaled_inverse;
        let d = self.dim();
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let e = if i == j { 1.0 } else { 0.0 };
                r = r.max((p[(i, j)] - e).norm());
            }
        }
        r
    }

    /// Basis-free kernel `sum_{m,n} z^m (W^{-1})_{n,m} v^n`; chiral uses
    /// `z^2, v^2`.
    pub fn kernel(&self, z: Complex64, v: Complex64) -> Complex64 {
        let (a, b) = if self.chiral { (z * z, v * v) } else { (z, v) };
        let (a, b) = (a / self.scale, b / self.scale);
        let d = self.dim();
        let pa = powers(a, d);
        let pb = powers(b, d);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..d {
            for n in 0..d {
                acc += pa[m] * self.scaled_inverse[(n, m)] * pb[n];
            }
        }
        acc
    }
}

fn powers(u: Complex64, d: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(d);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..d {
        out.push(p);
        p *= u;
    }
    out
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Kernel evaluated through `W^{-1}`, independent of any basis choice.
pub fn kernel_via_w(wm: &SkewProductMatrix, z: Complex64, v: Complex64) -> Complex64 {
    wm.kernel(z, v)
}

/// Fills the `size x size` monomial skew-product matrix by quadrature.
pub fn monomial_w(w: &WeightSpec, size: usize, grid: &QuadratureGrid) -> Result<SkewProductMatrix> {
    if size == 0 || size % 2 == 1 {
        return Err(Error::Size(format!("size must be positive and even, got {size}")));
    }
    if size > 2 * MAX_PAIRS {
        return Err(Error::Size(format!("size {size} exceeds the cap of {}", 2 * MAX_PAIRS)));
    }
    let chiral = w.chiral();
    let ls = w.length_scale();
    let scale = if chiral { ls * ls } else { ls };
    // entries (m, n), m < n, accumulated per node then summed pairwise
    let pairs: Vec<(usize, usize)> = (0..size).flat_map(|m| ((m + 1)..size).map(move |n| (m, n))).collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); pairs.len()];
    let fold = symmetry_fold(grid, chiral);
    for (x, y, h) in grid.points() {
        let wv = w.eval(x, y);
        if !wv.is_finite() {
            return Err(Error::Numeric(format!("weight is not finite at ({x}, {y})")));
        }
        if wv == 0.0 {
            continue;
        }
        let z = Complex64::new(x, y);
        let u = if chiral { z * z } else { z } / scale;
        let p = powers(u, size);
        let jac = if chiral { 8.0 * x * y } else { 4.0 * y };
        let f = h * jac * wv * fold;
        for (c, &(m, n)) in columns.iter_mut().zip(&pairs) {
            c.push(f * (p[m] * p[n].conj()).im);
        }
    }
    let mut entries = vec![0.0; pairs.len()];
    for (e, c) in entries.iter_mut().zip(&columns) {
        *e = pairwise_sum_real(c);
    }
    let mut it = entries.into_iter();
    let scaled = AntisymMatrix::from_upper(size, |_, _| Complex64::new(it.next().unwrap(), 0.0));
    SkewProductMatrix::from_scaled(scaled, scale, chiral, w.nu())
}

/// Monomial matrix of the projected skew product on the real line.
pub fn projected_monomial_w(w: &RealWeightSpec, size: usize, rule: &QuadratureRule) -> Result<SkewProductMatrix> {
    if size == 0 || size % 2 == 1 {
        return Err(Error::Size(format!("size must be positive and even, got {size}")));
    }
    let (a, b) = w.support;
    let ls = 0.25 * (b - a) / 10.0;
    let scale = if w.chiral { ls * ls } else { ls };
    let mono: Vec<Polynomial> = (0..size)
        .map(|m| {
            let mut c = vec![0.0; m + 1];
            c[m] = scale.powi(-(m as i32));
            Polynomial::from_real(&c)
        })
        .collect();
    let mut vals = Vec::new();
    for m in 0..size {
        for n in (m + 1)..size {
            vals.push(projected_skew_product(&mono[m], &mono[n], w, rule)?);
        }
    }
    let mut it = vals.into_iter();
    let scaled = AntisymMatrix::from_upper(size, |_, _| it.next().unwrap());
    SkewProductMatrix::from_scaled(scaled, scale, w.chiral, w.nu)
}

/// Monic skew-orthogonal basis by skew Gram-Schmidt on the monomials.
///
/// `q_{2k}` and `q_{2k+1}` are the monomials `u^{2k}`, `u^{2k+1}` minus
/// their components along the lower pairs; no multiple of `q_{2k}` is added
/// to `q_{2k+1}`.
pub fn general_skew_basis(wm: &SkewProductMatrix) -> Result<SkewBasis> {
    let d = wm.dim();
    let w = wm.scaled.as_matrix();
    let scale_w = wm.scaled.max_abs();
    let zero = Complex64::new(0.0, 0.0);
    let sp = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        let mut acc = zero;
        for (i, &ai) in a.iter().enumerate() {
            if ai == zero {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                acc += ai * w[(i, j)] * bj;
            }
        }
        acc
    };
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    let mut norms: Vec<Complex64> = Vec::with_capacity(d / 2);
    for j in 0..d {
        let mut c = vec![zero; d];
        c[j] = Complex64::new(1.0, 0.0);
        let k = j / 2;
        let mut update = vec![zero; d];
        for l in 0..k {
            let (e, o) = (&q[2 * l], &q[2 * l + 1]);
            let a = sp(&c, o) / norms[l];
            let b = -sp(&c, e) / norms[l];
            for i in 0..d {
                update[i] += a * e[i] + b * o[i];
            }
        }
        for i in 0..d {
            c[i] += update[i];
        }
        q.push(c);
        if j % 2 == 1 {
            let r = sp(&q[j], &q[j - 1]);
            if r.norm() < 1e-10 * scale_w {
                return Err(Error::DegenerateWeight { index: k, pivot: r.norm(), scale: scale_w });
            }
            norms.push(r);
        }
    }
    let polys = q
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let coeffs: Vec<Complex64> = (0..=j).map(|i| c[i] * wm.power(j - i)).collect();
            Polynomial::new(coeffs)
        })
        .collect();
    let norms = norms.iter().enumerate().map(|(k, &r)| r * wm.power(4 * k + 1)).collect();
    SkewBasis::new(polys, norms, wm.chiral, wm.nu, BasisSource::WMatrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{build_grid, pfaffian};
    use crate::skewortho::{chgse_skew_polys, gse_skew_polys};
    use crate::weights::{chgse_weight, gse_weight, projected_gse};

    #[test]
    fn gse_r0_from_skew_product() {
        let w = gse_weight(1, 0.5).unwrap();
        let g = build_grid(&w, 96).unwrap();
        let one = Polynomial::from_real(&[1.0]);
        let z = Polynomial::from_real(&[0.0, 1.0]);
        let r0 = skew_product(&z, &one, &w, &g).unwrap();
        assert!((r0.re - 2.170803).abs() < 1e-6);
        assert_eq!(skew_product(&one, &one, &w, &g).unwrap().re, 0.0);
        let c = Polynomial::new(vec![Complex64::new(0.0, 1.0)]);
        assert!(matches!(skew_product(&c, &one, &w, &g), Err(Error::Validation(_))));
    }

    #[test]
    fn w_matrix_small() {
        let w = gse_weight(1, 0.5).unwrap();
        let g = build_grid(&w, 96).unwrap();
        let wm = monomial_w(&w, 2, &g).unwrap();
        let full = wm.w();
        assert_eq!(full[(0, 0)].re, 0.0);
        assert!((full[(0, 1)].re + 2.170803).abs() < 1e-6);
        let k = wm.kernel(Complex64::new(0.3, 0.2), Complex64::new(-0.1, 0.5));
        let expected = Complex64::new(0.4, -0.3) / (std::f64::consts::PI.sqrt() * 1.5f64.sqrt());
        assert!((k - expected).norm() < 1e-12);
        for size in [2, 4, 6, 8] {
            let wm = monomial_w(&w, size, &g).unwrap();
            let pf = pfaffian(wm.scaled()).unwrap();
            assert!(pf.norm() > 1e-6);
            assert!(wm.inverse_residual() < 1e-8);
        }
    }

    #[test]
    fn general_basis_matches_closed_forms() {
        let w = gse_weight(1, 0.5).unwrap();
        let g = build_grid(&w, 160).unwrap();
        let b = general_skew_basis(&monomial_w(&w, 8, &g).unwrap()).unwrap();
        let cf = gse_skew_polys(1, 0.5, 8).unwrap();
        for k in 0..8 {
            assert!(b.poly(k).max_coeff_diff(cf.poly(k)) < 1e-8, "q_{k}");
        }
        for k in 0..4 {
            assert!((b.norms()[k] / cf.norms()[k] - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn chiral_general_basis_matches_even_polys() {
        let w = chgse_weight(1, 0.5, 1).unwrap();
        let g = build_grid(&w, 160).unwrap();
        let b = general_skew_basis(&monomial_w(&w, 6, &g).unwrap()).unwrap();
        let cf = chgse_skew_polys(1, 0.5, 1, 6).unwrap();
        for k in 0..3 {
            assert!(b.poly(2 * k).max_coeff_diff(cf.poly(2 * k)) < 1e-8, "q_{}", 2 * k);
            assert!((b.norms()[k] / cf.norms()[k] - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn projected_basis_matches_tau_one() {
        let wb = projected_gse(1);
        let rule = projected_rule(&wb, 200).unwrap();
        let b = general_skew_basis(&projected_monomial_w(&wb, 6, &rule).unwrap()).unwrap();
        let cf = gse_skew_polys(1, 1.0, 6).unwrap();
        for k in 0..6 {
            assert!(b.poly(k).max_coeff_diff(cf.poly(k)) < 1e-9, "q_{k}");
        }
        assert!((b.norms()[0].re - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }
}
