use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::weights::WeightSpec;

/// Half-width of the default truncation box in units of the weight's
/// Gaussian scale on each axis.
pub const BOX_HALF_WIDTH_SIGMAS: f64 = 10.0;

/// Default number of Gauss-Legendre nodes per axis.
pub const DEFAULT_POINTS_PER_AXIS: usize = 160;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Roots of `P_n` are located by Newton iteration from the Tricomi initial
/// guess; weights are `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// One-dimensional Gauss-Legendre rule mapped onto `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Config(format!("invalid quadrature interval [{a}, {b}]")));
        }
        if n == 0 {
            return Err(Error::Config("quadrature rule needs at least one node".into()));
        }
        let (t, w) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Ok(QuadratureRule {
            nodes: t.iter().map(|&t| mid + half * t).collect(),
            weights: w.iter().map(|&w| half * w).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect();
        pairwise_sum_real(&terms)
    }
}

/// Tensor-product Gauss-Legendre grid over a rectangle of the complex plane.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes_x: Vec<f64>,
    pub weights_x: Vec<f64>,
    pub nodes_y: Vec<f64>,
    pub weights_y: Vec<f64>,
    /// Largest `|x|` and `|y|` covered by the rectangle.
    pub truncation_box: (f64, f64),
    /// Estimated relative mass of the weight outside the rectangle, zero when
    /// no weight was supplied.
    pub tail_estimate: f64,
}

impl QuadratureGrid {
    pub fn rectangle(x: (f64, f64), nx: usize, y: (f64, f64), ny: usize) -> Result<Self> {
        let rx = QuadratureRule::new(x.0, x.1, nx)?;
        let ry = QuadratureRule::new(y.0, y.1, ny)?;
        Ok(QuadratureGrid {
            nodes_x: rx.nodes,
            weights_x: rx.weights,
            nodes_y: ry.nodes,
            weights_y: ry.weights,
            truncation_box: (x.0.abs().max(x.1.abs()), y.0.abs().max(y.1.abs())),
            tail_estimate: 0.0,
        })
    }

    /// Box `[-x_max, x_max] x [-y_max, y_max]`.
    pub fn symmetric(x_max: f64, nx: usize, y_max: f64, ny: usize) -> Result<Self> {
        Self::rectangle((-x_max, x_max), nx, (-y_max, y_max), ny)
    }

    pub fn len(&self) -> usize {
        self.nodes_x.len() * self.nodes_y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Restriction to `y > 0`, assuming a box symmetric in `y`.
    pub fn upper_half(&self) -> QuadratureGrid {
        let keep: Vec<usize> = (0..self.nodes_y.len()).filter(|&j| self.nodes_y[j] > 0.0).collect();
        QuadratureGrid {
            nodes_y: keep.iter().map(|&j| self.nodes_y[j]).collect(),
            weights_y: keep.iter().map(|&j| self.weights_y[j]).collect(),
            ..self.clone()
        }
    }

    /// Restriction to the open first quadrant `x > 0, y > 0`.
    pub fn first_quadrant(&self) -> QuadratureGrid {
        let g = self.upper_half();
        let keep: Vec<usize> = (0..g.nodes_x.len()).filter(|&i| g.nodes_x[i] > 0.0).collect();
        QuadratureGrid {
            nodes_x: keep.iter().map(|&i| g.nodes_x[i]).collect(),
            weights_x: keep.iter().map(|&i| g.weights_x[i]).collect(),
            ..g
        }
    }

    /// Flattened `(x, y, weight)` triples in row-major order (x outer).
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for (&x, &wx) in self.nodes_x.iter().zip(&self.weights_x) {
            for (&y, &wy) in self.nodes_y.iter().zip(&self.weights_y) {
                out.push((x, y, wx * wy));
            }
        }
        out
    }
}

/// Truncation box for `w`: half-width `BOX_HALF_WIDTH_SIGMAS` times the
/// weight's Gaussian scale on each axis.
pub fn build_grid(w: &WeightSpec, points_per_axis: usize) -> Result<QuadratureGrid> {
    build_grid_with_width(w, points_per_axis, BOX_HALF_WIDTH_SIGMAS)
}

/// Like [`build_grid`], but with the box widened so that `|z|^(2 degree)`
/// times the weight is still negligible at the edge.
pub fn build_grid_for_degree(w: &WeightSpec, points_per_axis: usize, degree: usize) -> Result<QuadratureGrid> {
    let c = BOX_HALF_WIDTH_SIGMAS.max((2.0 * degree as f64).sqrt() + 7.0);
    build_grid_with_width(w, points_per_axis, c)
}

pub fn build_grid_with_width(w: &WeightSpec, points_per_axis: usize, c: f64) -> Result<QuadratureGrid> {
    let decay = w.decay().ok_or_else(|| {
        Error::Config("weight has no decay metadata; supply Gaussian scales (sigma_x, sigma_y)".into())
    })?;
    if c < 8.0 {
        return Err(Error::Config(format!("box half-width {c} sigma is below the minimum of 8")));
    }
    if points_per_axis < 2 {
        return Err(Error::Config("need at least 2 quadrature points per axis".into()));
    }
    let mut g = QuadratureGrid::symmetric(
        c * decay.sigma_x,
        points_per_axis,
        c * decay.sigma_y,
        points_per_axis,
    )?;
    g.tail_estimate = 2.0 * gaussian_tail(c);
    Ok(g)
}

/// Grid over the fundamental domain of the weight's reflection symmetries:
/// `y >= 0`, and additionally `x >= 0` for chiral weights. Integrands with
/// the same symmetry are unfolded with [`symmetry_fold`]. Clustering the
/// Gauss-Legendre nodes at the axes resolves the logarithmic behaviour of
/// the chiral weight at the origin far better than a symmetric box.
pub fn fundamental_grid(w: &WeightSpec, points_per_axis: usize, degree: usize) -> Result<QuadratureGrid> {
    let decay = w.decay().ok_or_else(|| {
        Error::Config("weight has no decay metadata; supply Gaussian scales (sigma_x, sigma_y)".into())
    })?;
    if points_per_axis < 2 {
        return Err(Error::Config("need at least 2 quadrature points per axis".into()));
    }
    let c = BOX_HALF_WIDTH_SIGMAS.max((2.0 * degree as f64).sqrt() + 7.0);
    let (lx, ly) = (c * decay.sigma_x, c * decay.sigma_y);
    let x = if w.chiral() { (0.0, lx) } else { (-lx, lx) };
    let mut g = QuadratureGrid::rectangle(x, points_per_axis, (0.0, ly), points_per_axis)?;
    g.tail_estimate = 2.0 * gaussian_tail(c);
    Ok(g)
}

/// Number of images of the grid's domain under `y -> -y` (and `x -> -x` when
/// `chiral`): 1 for a full box, 2 for a half plane, 4 for a chiral quadrant.
pub fn symmetry_fold(grid: &QuadratureGrid, chiral: bool) -> f64 {
    let mut fold = 1.0;
    if grid.nodes_y.iter().all(|&y| y >= 0.0) {
        fold *= 2.0;
    }
    if chiral && grid.nodes_x.iter().all(|&x| x >= 0.0) {
        fold *= 2.0;
    }
    fold
}

/// Upper bound on `P(|X| > c)` for a standard normal variable.
pub fn gaussian_tail(c: f64) -> f64 {
    (2.0 / PI).sqrt() / c * (-0.5 * c * c).exp()
}

/// Tensor-product sum of `f` over the grid.
///
/// Node values are computed in parallel (when a rayon pool with more than
/// one thread is active) but always summed pairwise in the same order, so
/// the result does not depend on the thread count.
pub fn quad2d<F>(f: F, grid: &QuadratureGrid) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let ny = grid.nodes_y.len();
    let rows: Vec<Vec<Complex64>> = grid
        .nodes_x
        .par_iter()
        .zip(grid.weights_x.par_iter())
        .map(|(&x, &wx)| {
            grid.nodes_y
                .iter()
                .zip(&grid.weights_y)
                .map(|(&y, &wy)| f(x, y) * (wx * wy))
                .collect()
        })
        .collect();
    let mut terms = Vec::with_capacity(grid.len());
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Numeric(format!(
                    "integrand is not finite at node ({i}, {j}) = ({}, {})",
                    grid.nodes_x[i], grid.nodes_y[j]
                )));
            }
            terms.push(v);
        }
    }
    debug_assert_eq!(terms.len(), grid.nodes_x.len() * ny);
    Ok(pairwise_sum(&terms))
}

/// Real-valued variant of [`quad2d`].
pub fn quad2d_real<F>(f: F, grid: &QuadratureGrid) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    quad2d(|x, y| Complex64::new(f(x, y), 0.0), grid).map(|v| v.re)
}

pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 16 {
        return v.iter().fold(Complex64::new(0.0, 0.0), |a, &b| a + b);
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn pairwise_sum_real(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_real(&v[..mid]) + pairwise_sum_real(&v[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_small_cases() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert_eq!(x[1], 0.0);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((x[2] - 0.6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn legendre_rule_exact_to_degree() {
        for n in [5, 20, 64, 160] {
            let r = QuadratureRule::new(-1.0, 1.0, n).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let d = 2 * n - 2;
            let got = r.integrate(|x| x.powi(d as i32));
            assert!((got - 2.0 / (d as f64 + 1.0)).abs() < 1e-13, "n={n}");
            assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn gaussian_integral() {
        let g = QuadratureGrid::symmetric(6.0, 64, 6.0, 64).unwrap();
        let v = quad2d(|x, y| Complex64::new((-x * x - y * y).exp(), 0.0), &g).unwrap();
        assert!((v.re - PI).abs() < 1e-10, "{v}");
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = QuadratureGrid::symmetric(3.0, 40, 2.0, 41).unwrap();
        let v = quad2d(|x, y| Complex64::new(y * (x * x + 1.0).ln() + y.powi(3), y), &g).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn nan_names_the_node() {
        let g = QuadratureGrid::symmetric(1.0, 4, 1.0, 4).unwrap();
        let err = quad2d(|x, _| Complex64::new(if x > 0.5 { f64::NAN } else { 1.0 }, 0.0), &g).unwrap_err();
        match err {
            Error::Numeric(msg) => assert!(msg.contains("node (3, 0)"), "{msg}"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn polynomial_exactness_on_box() {
        let g = QuadratureGrid::rectangle((-1.0, 2.0), 6, (0.0, 1.5), 5).unwrap();
        let v = quad2d_real(|x, y| x.powi(11) * y.powi(9), &g).unwrap();
        let exact = (2f64.powi(12) - 1.0) / 12.0 * 1.5f64.powi(10) / 10.0;
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn restrictions_keep_positive_half() {
        let g = QuadratureGrid::symmetric(1.0, 8, 1.0, 9).unwrap();
        let u = g.upper_half();
        assert_eq!(u.nodes_y.len(), 4);
        assert_eq!(g.first_quadrant().len(), 16);
    }
}
