//! Direct quadrature of the eigenvalue integrals for one or two eigenvalue
//! pairs, independent of skew-orthogonal polynomials.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::quadrature::{pairwise_sum, pairwise_sum_real};
use crate::numerics::{factorial, fundamental_grid, symmetry_fold, QuadratureGrid, QuadratureRule};
use crate::weights::{RealWeightSpec, WeightSpec};

/// Value of a brute-force integral with a grid-refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    /// `|fine - coarse| / |fine|` between two node counts.
    pub error: f64,
}

fn sq(z: Complex64, chiral: bool) -> Complex64 {
    if chiral {
        z * z
    } else {
        z
    }
}

/// Single-eigenvalue factor `w(z) |z - z*|^2 prod_f (m_f - z)(m_f - z*)`,
/// chiral: squared arguments throughout.
pub fn one_body(w: &WeightSpec, z: Complex64, masses: &[Complex64]) -> Complex64 {
    let chiral = w.chiral();
    let u = sq(z, chiral);
    let mut v = Complex64::new(w.eval_z(z) * (u - u.conj()).norm_sqr(), 0.0);
    for &m in masses {
        let mm = sq(m, chiral);
        v *= (mm - u) * (mm - u.conj());
    }
    v
}

/// Pair factor `|z_1 - z_2|^2 |z_1 - z_2*|^2` (squared arguments when chiral).
pub fn two_body(a: Complex64, b: Complex64, chiral: bool) -> f64 {
    let (u, v) = (sq(a, chiral), sq(b, chiral));
    (u - v).norm_sqr() * (u - v.conj()).norm_sqr()
}

fn chiral_mass_factor(w: &WeightSpec, masses: &[Complex64]) -> Complex64 {
    if !w.chiral() {
        return Complex64::new(1.0, 0.0);
    }
    masses.iter().fold(Complex64::new(1.0, 0.0), |a, &m| a * m.powu(2 * w.nu() as u32))
}

/// `int prod d^2z_i` of the joint integrand with the first `fixed.len()`
/// eigenvalues held at `fixed` and the remaining `free` ones integrated over
/// the grid. `free <= 2`.
fn integrate_free(
    w: &WeightSpec,
    fixed: &[Complex64],
    free: usize,
    masses: &[Complex64],
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    let chiral = w.chiral();
    let mut base = Complex64::new(1.0, 0.0);
    for (i, &a) in fixed.iter().enumerate() {
        base *= one_body(w, a, masses);
        for &b in &fixed[..i] {
            base *= two_body(a, b, chiral);
        }
    }
    if free == 0 {
        return Ok(base);
    }
    // The integrand is even in y (and in x when chiral), so a grid covering
    // only that fundamental domain is unfolded here.
    let fold = symmetry_fold(grid, chiral);
    let nodes: Vec<(Complex64, Complex64)> = grid
        .points()
        .into_iter()
        .map(|(x, y, h)| {
            let z = Complex64::new(x, y);
            let mut a = one_body(w, z, masses) * h;
            for &f in fixed {
                a *= two_body(z, f, chiral);
            }
            (z, a)
        })
        .collect();
    for (z, a) in &nodes {
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::Numeric(format!("brute-force integrand not finite at {z}")));
        }
    }
    let total = match free {
        1 => pairwise_sum(&nodes.iter().map(|n| n.1).collect::<Vec<_>>()),
        2 => {
            let rows: Vec<Complex64> = nodes
                .par_iter()
                .map(|&(z1, a1)| {
                    let terms: Vec<Complex64> =
                        nodes.iter().map(|&(z2, a2)| a2 * two_body(z1, z2, chiral)).collect();
                    a1 * pairwise_sum(&terms)
                })
                .collect();
            pairwise_sum(&rows)
        }
        _ => return Err(Error::Unsupported(format!("brute force integrates at most 2 eigenvalues, asked for {free}"))),
    };
    Ok(base * total * fold.powi(free as i32))
}

/// `Z_N^{(M)}` by direct quadrature of the eigenvalue integral, `N <= 2`.
pub fn brute_force_partition(w: &WeightSpec, n: usize, masses: &[Complex64], grid: &QuadratureGrid) -> Result<Complex64> {
    if n == 0 || n > 2 {
        return Err(Error::Unsupported(format!("brute-force partition function needs N in {{1, 2}}, got {n}")));
    }
    Ok(integrate_free(w, &[], n, masses, grid)? * chiral_mass_factor(w, masses))
}

/// `R_{N,k}^{(M)}(z_1..z_k)` from its definition: `N!/(N-k)!` times the
/// integral over the remaining `N - k <= 2` eigenvalues, over `Z_N^{(M)}`.
pub fn brute_force_correlator(
    w: &WeightSpec,
    n: usize,
    points: &[Complex64],
    masses: &[Complex64],
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    let k = points.len();
    if k == 0 || k > n || n > 2 + k {
        return Err(Error::Unsupported(format!("brute-force correlator needs 1 <= k <= N <= k + 2, got N={n}, k={k}")));
    }
    let z = integrate_free(w, &[], n, masses, grid)?;
    let part = integrate_free(w, points, n - k, masses, grid)?;
    Ok(part / z * (factorial(n) / factorial(n - k)))
}

/// Grid over the fundamental domain (`y > 0`, and `x > 0` when chiral) with
/// `nodes` points per axis, wide enough for polynomial factors of the given
/// degree.
pub fn oracle_grid(w: &WeightSpec, nodes: usize, degree: usize) -> Result<QuadratureGrid> {
    fundamental_grid(w, nodes, degree)
}

/// Runs `f` on grids with `nodes` and `3 nodes / 4` points per axis and
/// fails when the relative difference exceeds `tolerance`.
pub fn with_refinement<F>(w: &WeightSpec, nodes: usize, degree: usize, tolerance: f64, f: F) -> Result<Estimate>
where
    F: Fn(&QuadratureGrid) -> Result<Complex64>,
{
    let fine = f(&oracle_grid(w, nodes, degree)?)?;
    let coarse = f(&oracle_grid(w, (3 * nodes) / 4, degree)?)?;
    let error = (fine - coarse).norm() / fine.norm().max(f64::MIN_POSITIVE);
    if !(error <= tolerance) {
        return Err(Error::Accuracy { estimate: error, tolerance });
    }
    Ok(Estimate { value: fine, error })
}

/// Real-line integrand factor for one eigenvalue: `w_bar(x) prod_f (m_f - x)^2`;
/// chiral: `4 x^2 w_bar(x) prod_f (m_f^2 - x^2)^2`.
fn real_one_body(w: &RealWeightSpec, x: f64, masses: &[Complex64]) -> Complex64 {
    let (u, jac) = if w.chiral { (x * x, 4.0 * x * x) } else { (x, 1.0) };
    let mut v = Complex64::new(jac * w.eval(x), 0.0);
    for &m in masses {
        let mm = if w.chiral { m * m } else { m };
        v *= (mm - u) * (mm - u);
    }
    v
}

fn real_two_body(a: f64, b: f64, chiral: bool) -> f64 {
    let d = if chiral { a * a - b * b } else { a - b };
    d.powi(4)
}

fn real_integrate_free(w: &RealWeightSpec, fixed: &[f64], free: usize, masses: &[Complex64], rule: &QuadratureRule) -> Result<Complex64> {
    let mut base = Complex64::new(1.0, 0.0);
    for (i, &a) in fixed.iter().enumerate() {
        base *= real_one_body(w, a, masses);
        for &b in &fixed[..i] {
            base *= real_two_body(a, b, w.chiral);
        }
    }
    let nodes: Vec<(f64, Complex64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &h)| {
            let mut a = real_one_body(w, x, masses) * h;
            for &f in fixed {
                a *= real_two_body(x, f, w.chiral);
            }
            (x, a)
        })
        .collect();
    // chiral integrands are even in x; a rule on [0, L] is unfolded here
    let fold: f64 = if w.chiral && rule.nodes.iter().all(|&x| x >= 0.0) { 2.0 } else { 1.0 };
    let total = match free {
        0 => Complex64::new(1.0, 0.0),
        1 => pairwise_sum(&nodes.iter().map(|n| n.1).collect::<Vec<_>>()),
        2 => {
            let rows: Vec<Complex64> = nodes
                .iter()
                .map(|&(x1, a1)| {
                    let t: Vec<Complex64> = nodes.iter().map(|&(x2, a2)| a2 * real_two_body(x1, x2, w.chiral)).collect();
                    a1 * pairwise_sum(&t)
                })
                .collect();
            pairwise_sum(&rows)
        }
        3 => {
            let mut rows = Vec::with_capacity(nodes.len());
            for &(x1, a1) in &nodes {
                let mut inner = Vec::with_capacity(nodes.len());
                for &(x2, a2) in &nodes {
                    let p12 = real_two_body(x1, x2, w.chiral);
                    let t: Vec<Complex64> = nodes
                        .iter()
                        .map(|&(x3, a3)| a3 * real_two_body(x1, x3, w.chiral) * real_two_body(x2, x3, w.chiral))
                        .collect();
                    inner.push(a2 * p12 * pairwise_sum(&t));
                }
                rows.push(a1 * pairwise_sum(&inner));
            }
            pairwise_sum(&rows)
        }
        _ => return Err(Error::Unsupported(format!("real brute force integrates at most 3 eigenvalues, asked for {free}"))),
    };
    Ok(base * total * fold.powi(free as i32))
}

/// Real-line partition function `int prod dx_i w_bar(x_i) prod (m - x_i)^2 Delta(x)^4`
/// (chiral: squared variables and the Jacobian `4 x^2`), `N <= 3`.
pub fn brute_force_real_partition(w: &RealWeightSpec, n: usize, masses: &[Complex64], rule: &QuadratureRule) -> Result<Complex64> {
    real_integrate_free(w, &[], n, masses, rule)
}

/// Real-line correlator `N!/(N-k)! / Z int prod_{j>k} dx_j (...)`.
pub fn brute_force_real_correlator(
    w: &RealWeightSpec,
    n: usize,
    xs: &[f64],
    masses: &[Complex64],
    rule: &QuadratureRule,
) -> Result<Complex64> {
    let k = xs.len();
    if k == 0 || k > n {
        return Err(Error::Validation(format!("need 1 <= k <= N, got k={k}, N={n}")));
    }
    let z = real_integrate_free(w, &[], n, masses, rule)?;
    let part = real_integrate_free(w, xs, n - k, masses, rule)?;
    Ok(part / z * (factorial(n) / factorial(n - k)))
}

/// Sum of real node values, exposed for oracle consumers.
pub fn sum_real(v: &[f64]) -> f64 {
    pairwise_sum_real(v)
}
