//! Weight functions on the complex plane and their projections onto the
//! real line.

pub mod bessel;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{quad2d_real, QuadratureGrid};

pub use bessel::{bessel_k, bessel_k_scaled};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gse,
    Chgse,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gse => "gse",
            Family::Chgse => "chgse",
            Family::Custom => "custom",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gse" => Ok(Family::Gse),
            "chgse" => Ok(Family::Chgse),
            "custom" => Ok(Family::Custom),
            other => Err(Error::Validation(format!("unknown family '{other}' (expected gse or chgse)"))),
        }
    }
}

/// Gaussian scales of a weight along the real and imaginary axes, used to
/// size quadrature boxes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub sigma_x: f64,
    pub sigma_y: f64,
}

pub type Evaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type RealEvaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real, non-negative weight `w(z, z*)` on the complex plane, even in `y`.
///
/// The value is `prefactor * shape(x, y)`. Keeping the constant apart lets
/// scale-invariant checks run at parameters where the printed normalisation
/// degenerates (chGSE at `mu = 1`).
#[derive(Clone)]
pub struct WeightSpec {
    family: Family,
    n: usize,
    tau: f64,
    mu: f64,
    nu: usize,
    chiral: bool,
    prefactor: f64,
    shape: Evaluator,
    decay: Option<Decay>,
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec")
            .field("family", &self.family)
            .field("n", &self.n)
            .field("tau", &self.tau)
            .field("mu", &self.mu)
            .field("nu", &self.nu)
            .field("chiral", &self.chiral)
            .field("prefactor", &self.prefactor)
            .field("decay", &self.decay)
            .finish()
    }
}

impl WeightSpec {
    /// User-supplied weight. `chiral` selects the `(z*^2 - z^2)` skew product
    /// and `nu` only matters for mass factors in partition functions.
    pub fn custom<F>(f: F, chiral: bool, nu: usize, decay: Option<Decay>) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        WeightSpec {
            family: Family::Custom,
            n: 0,
            tau: f64::NAN,
            mu: f64::NAN,
            nu,
            chiral,
            prefactor: 1.0,
            shape: Arc::new(f),
            decay,
        }
    }

    /// The same weight re-entered as a custom evaluator.
    pub fn as_custom(&self) -> WeightSpec {
        let this = self.clone();
        WeightSpec::custom(move |x, y| this.eval(x, y), self.chiral, self.nu, self.decay)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.prefactor * (self.shape)(x, y)
    }

    pub fn eval_z(&self, z: Complex64) -> f64 {
        self.eval(z.re, z.im)
    }

    /// Copy with the normalisation constant set to one.
    pub fn unit_normalized(&self) -> WeightSpec {
        WeightSpec { prefactor: 1.0, ..self.clone() }
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn chiral(&self) -> bool {
        self.chiral
    }

    pub fn decay(&self) -> Option<Decay> {
        self.decay
    }

    pub fn with_decay(mut self, decay: Decay) -> Self {
        self.decay = Some(decay);
        self
    }

    /// Length scale used to rescale monomials before building skew-product
    /// matrices.
    pub fn length_scale(&self) -> f64 {
        match self.decay {
            Some(d) => (d.sigma_x * d.sigma_x + d.sigma_y * d.sigma_y).sqrt(),
            None => 1.0,
        }
    }

    /// Checks that `|z|^(2d) w` integrates to a finite, positive value on the
    /// grid for every `d <= degree`, and that the integrand is negligible on
    /// the edge of the box.
    pub fn check_moments(&self, grid: &QuadratureGrid, degree: usize) -> Result<()> {
        let (xm, ym) = grid.truncation_box;
        for d in 0..=degree {
            let m = quad2d_real(|x, y| (x * x + y * y).powi(d as i32) * self.eval(x, y), grid)?;
            if !m.is_finite() || m < 0.0 {
                return Err(Error::Numeric(format!("moment of order {d} is not finite: {m}")));
            }
            let peak = [(0.5 * xm, 0.0), (0.0, 0.5 * ym), (0.25 * xm, 0.25 * ym)]
                .iter()
                .map(|&(x, y)| (x * x + y * y).powi(d as i32) * self.eval(x, y))
                .fold(0.0, f64::max);
            let edge = [(xm, 0.0), (0.0, ym), (xm, ym)]
                .iter()
                .map(|&(x, y)| (x * x + y * y).powi(d as i32) * self.eval(x, y))
                .fold(0.0, f64::max);
            if edge > 1e-12 * peak.max(m.abs()) {
                return Err(Error::Numeric(format!(
                    "moment of order {d} not converged: integrand at box edge is {edge:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// Gaussian weight of the complex symplectic ensemble,
/// `N^{3/2} / (2 sqrt(pi) (1 - tau)^{3/2}) exp(-N y^2/(1 - tau)) exp(-N x^2/(1 + tau))`.
pub fn gse_weight(n: usize, tau: f64) -> Result<WeightSpec> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau = {tau} outside [0, 1) for the gse family")));
    }
    let nf = n as f64;
    let prefactor = nf.powf(1.5) / (2.0 * PI.sqrt() * (1.0 - tau).powf(1.5));
    let ax = nf / (1.0 + tau);
    let ay = nf / (1.0 - tau);
    Ok(WeightSpec {
        family: Family::Gse,
        n,
        tau,
        mu: f64::NAN,
        nu: 0,
        chiral: false,
        prefactor,
        shape: Arc::new(move |x, y| (-ay * y * y - ax * x * x).exp()),
        decay: Some(Decay {
            sigma_x: ((1.0 + tau) / (2.0 * nf)).sqrt(),
            sigma_y: ((1.0 - tau) / (2.0 * nf)).sqrt(),
        }),
    })
}

/// The `y`-dependent factor of the GSE weight including its constant; it
/// satisfies `int dy 4 y^2 f(y) = 1` for every `tau`.
pub fn gse_y_factor(n: usize, tau: f64, y: f64) -> f64 {
    let nf = n as f64;
    nf.powf(1.5) / (2.0 * PI.sqrt() * (1.0 - tau).powf(1.5)) * (-nf * y * y / (1.0 - tau)).exp()
}

/// Chiral Gaussian weight with Bessel factor `|z|^{4 nu + 2} K_{2 nu}(a |z|^2)`,
/// `a = N (1 + mu^2) / (2 mu^2)`, times `exp(N (1 - mu^2)(z^2 + z*^2)/(4 mu^2))`.
///
/// The exponentials are combined analytically with the scaled Bessel
/// function, leaving `exp(-N x^2 - N y^2 / mu^2)`, so no overflow occurs for
/// small `mu`.
pub fn chgse_weight(n: usize, mu: f64, nu: usize) -> Result<WeightSpec> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!("mu = {mu} outside (0, 1] for the chgse family")));
    }
    let nf = n as f64;
    let mu2 = mu * mu;
    let prefactor = nf.sqrt() / (mu * PI.sqrt()) / (2.0 * PI.sqrt()) * (nf * (1.0 - mu2) / mu2).powf(1.5);
    let a = nf * (1.0 + mu2) / (2.0 * mu2);
    let order = 2 * nu;
    let power = (2 * nu + 1) as i32;
    let shape = move |x: f64, y: f64| {
        let r2 = x * x + y * y;
        if r2 == 0.0 {
            return 0.0;
        }
        r2.powi(power) * bessel_k_scaled(order, a * r2) * (-nf * x * x - nf * y * y / mu2).exp()
    };
    Ok(WeightSpec {
        family: Family::Chgse,
        n,
        tau: f64::NAN,
        mu,
        nu,
        chiral: true,
        prefactor,
        shape: Arc::new(shape),
        decay: Some(Decay {
            sigma_x: (1.0 / (2.0 * nf)).sqrt(),
            sigma_y: mu / (2.0 * nf).sqrt(),
        }),
    })
}

/// Weight `w_bar(x)` on the real line obtained in the Hermitean limit.
#[derive(Clone)]
pub struct RealWeightSpec {
    evaluator: RealEvaluator,
    /// Interval outside which the weight is negligible.
    pub support: (f64, f64),
    pub chiral: bool,
    pub nu: usize,
    pub n: usize,
}

impl fmt::Debug for RealWeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealWeightSpec")
            .field("support", &self.support)
            .field("chiral", &self.chiral)
            .field("nu", &self.nu)
            .field("n", &self.n)
            .finish()
    }
}

impl RealWeightSpec {
    pub fn new<F>(f: F, support: (f64, f64), chiral: bool, nu: usize, n: usize) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RealWeightSpec { evaluator: Arc::new(f), support, chiral, nu, n }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    /// Per-eigenvalue factor multiplying the Pfaffian in real correlators:
    /// `w_bar(x)` for the non-chiral case and `2 x w_bar(x)` for the chiral
    /// case, where the extra `2 x` is the Jacobian of `s = x^2`.
    pub fn correlator_factor(&self, x: f64) -> f64 {
        if self.chiral {
            2.0 * x * self.eval(x)
        } else {
            self.eval(x)
        }
    }
}

/// Hermitean-limit projection: `exp(-N x^2 / 2)` for gse and
/// `|x|^{4 nu + 1} exp(-N x^2)` for chgse, both on the whole real line.
pub fn projected_weight(w: &WeightSpec) -> Result<RealWeightSpec> {
    let nf = w.n as f64;
    match w.family {
        Family::Gse => {
            let half = 10.0 / nf.sqrt();
            Ok(RealWeightSpec::new(move |x| (-0.5 * nf * x * x).exp(), (-half, half), false, 0, w.n))
        }
        Family::Chgse => Ok(projected_chgse(w.n, w.nu)),
        Family::Custom => Err(Error::Unsupported(
            "projection of a custom weight must be supplied by the caller".into(),
        )),
    }
}

pub fn projected_gse(n: usize) -> RealWeightSpec {
    let nf = n as f64;
    let half = 10.0 / nf.sqrt();
    RealWeightSpec::new(move |x| (-0.5 * nf * x * x).exp(), (-half, half), false, 0, n)
}

pub fn projected_chgse(n: usize, nu: usize) -> RealWeightSpec {
    let nf = n as f64;
    let half = (8.0 + (2.0 * nu as f64 + 1.0).sqrt()) / nf.sqrt();
    let p = (4 * nu + 1) as i32;
    RealWeightSpec::new(move |x| x.abs().powi(p) * (-nf * x * x).exp(), (-half, half), true, nu, n)
}

/// Ensemble parameters as accepted in JSON configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub family: Family,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub tau: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub nu: usize,
}

fn default_mu() -> f64 {
    0.5
}

impl WeightParams {
    pub fn to_spec(&self) -> Result<WeightSpec> {
        match self.family {
            Family::Gse => gse_weight(self.n, self.tau),
            Family::Chgse => chgse_weight(self.n, self.mu, self.nu),
            Family::Custom => Err(Error::Unsupported("custom weights cannot be built from a config".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{build_grid, QuadratureRule};

    #[test]
    fn gse_value_at_origin() {
        let w = gse_weight(1, 0.5).unwrap();
        assert!((w.eval(0.0, 0.0) - 0.7978845608028654).abs() < 1e-12);
    }

    #[test]
    fn gse_domain() {
        assert!(matches!(gse_weight(1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gse_weight(1, -0.1), Err(Error::Domain(_))));
        assert!(matches!(chgse_weight(1, 0.0, 0), Err(Error::Domain(_))));
        assert!(matches!(chgse_weight(1, 1.5, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn gse_norm_r0() {
        let w = gse_weight(1, 0.5).unwrap();
        let g = build_grid(&w, 96).unwrap();
        let r0 = quad2d_real(|x, y| 4.0 * y * y * w.eval(x, y), &g).unwrap();
        assert!((r0 - PI.sqrt() * 1.5f64.sqrt()).abs() < 1e-12);
        assert!((r0 - 2.170803).abs() < 1e-6);
    }

    #[test]
    fn gse_delta_family_normalisation() {
        for tau in [0.0f64, 0.25, 0.5, 0.9] {
            let s = ((1.0 - tau) / 2.0).sqrt();
            let rule = QuadratureRule::new(-12.0 * s, 12.0 * s, 120).unwrap();
            let v = rule.integrate(|y| 4.0 * y * y * gse_y_factor(1, tau, y));
            assert!((v - 1.0).abs() < 1e-10, "tau={tau}: {v}");
        }
    }

    #[test]
    fn gse_hermitean_limit_against_test_function() {
        let tau = 0.999;
        let w = gse_weight(1, tau).unwrap();
        let g = build_grid(&w, 120).unwrap();
        let test = |x: f64| (0.3 * x).cos() + 0.1 * x * x;
        let lhs = quad2d_real(|x, y| 4.0 * y * y * w.eval(x, y) * test(x), &g).unwrap();
        let rhs = QuadratureRule::new(-15.0, 15.0, 200).unwrap().integrate(|x| (-0.5 * x * x).exp() * test(x));
        assert!((lhs - rhs).abs() / rhs < 0.01, "{lhs} vs {rhs}");
    }

    #[test]
    fn chgse_norm_r0() {
        for (mu, nu) in [(0.5, 0usize), (0.5, 1), (0.3, 2)] {
            let w = chgse_weight(1, mu, nu).unwrap();
            let g = build_grid(&w, 160).unwrap();
            let r0 = quad2d_real(|x, y| 16.0 * x * x * y * y * w.eval(x, y), &g).unwrap();
            let mu2: f64 = mu * mu;
            let expected = 4.0
                * crate::numerics::factorial(2 * nu + 1)
                * (1.0 - mu2).powf(1.5)
                * (1.0 + mu2).powi(2 * nu as i32);
            assert!((r0 / expected - 1.0).abs() < 1e-4, "mu={mu} nu={nu}: {r0} vs {expected}");
        }
        let expected = 4.0 * 0.75f64.powf(1.5);
        assert!((expected - 2.598076).abs() < 1e-6);
    }

    #[test]
    fn chgse_hermitean_limit_against_test_function() {
        let nu = 0;
        let w = chgse_weight(1, 0.05, nu).unwrap();
        let g = build_grid(&w, 200).unwrap();
        let test = |x: f64| 1.0 / (1.0 + x * x) + 0.2 * x;
        let lhs = quad2d_real(|x, y| 4.0 * y * y * w.eval(x, y) * test(x), &g).unwrap();
        let wb = projected_chgse(1, nu);
        let rhs = QuadratureRule::new(-10.0, 10.0, 400).unwrap().integrate(|x| wb.eval(x) * test(x));
        assert!((lhs - rhs).abs() / rhs < 0.02, "{lhs} vs {rhs}");
    }

    #[test]
    fn weights_even_in_y() {
        let ws = [gse_weight(2, 0.3).unwrap(), chgse_weight(1, 0.4, 1).unwrap()];
        for w in &ws {
            for i in 0..100 {
                let x = (i as f64 * 0.37).sin() * 2.0;
                let y = (i as f64 * 0.91).cos() * 1.5;
                let (a, b) = (w.eval(x, y), w.eval(x, -y));
                assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));
                assert!(a >= 0.0 && a.is_finite());
            }
        }
    }

    #[test]
    fn projections() {
        let gse = projected_weight(&gse_weight(1, 0.5).unwrap()).unwrap();
        assert_eq!(gse.eval(0.0), 1.0);
        let ch = projected_weight(&chgse_weight(1, 0.5, 0).unwrap()).unwrap();
        assert!((ch.eval(1.0) - (-1f64).exp()).abs() < 1e-15);
        let total = QuadratureRule::new(-12.0, 12.0, 120).unwrap().integrate(|x| gse.eval(x));
        assert!((total - (2.0 * PI).sqrt()).abs() < 1e-12);
        let custom = WeightSpec::custom(|_, _| 1.0, false, 0, None);
        assert!(matches!(projected_weight(&custom), Err(Error::Unsupported(_))));
    }

    #[test]
    fn grid_requires_decay() {
        let custom = WeightSpec::custom(|x, y| (-x * x - y * y).exp(), false, 0, None);
        assert!(matches!(build_grid(&custom, 10), Err(Error::Config(_))));
    }

    #[test]
    fn moments_converge_under_grid_doubling() {
        let w = gse_weight(1, 0.5).unwrap();
        let g1 = crate::numerics::build_grid_for_degree(&w, 80, 8).unwrap();
        let g2 = crate::numerics::build_grid_for_degree(&w, 160, 8).unwrap();
        w.check_moments(&g2, 8).unwrap();
        for d in 0..=8 {
            let f = |x: f64, y: f64| (x * x + y * y).powi(d) * w.eval(x, y);
            let a = quad2d_real(f, &g1).unwrap();
            let b = quad2d_real(f, &g2).unwrap();
            assert!((a - b).abs() < 1e-8 * b, "d={d}");
        }
    }
}
