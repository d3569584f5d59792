//! Pfaffian expressions for characteristic polynomials, massive partition
//! functions and k-point correlators.

mod hermitean;
mod omega;

pub use hermitean::{default_sequence, hermitean_limit_sweep, y_integrated_density, Observable, SweepReport, SweepRow};
pub use omega::{
    isd_kernels, omega_matrix, qdet_cycle, qdet_via_pfaffian, quaternion_kernel_matrix, real_correlation,
    real_correlation_block_form, IsdKernels, RealCorrelator,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{factorial, pfaffian_with_diagnostics, AntisymMatrix, PfaffianOutcome};
use crate::skewortho::SkewBasis;
use crate::weights::WeightSpec;

/// Masses closer than this (relative to their magnitude) are rejected.
pub const MASS_SEPARATION: f64 = 1e-9;
/// Denominator Pfaffians below this fraction of their natural scale are
/// reported as near-singular.
pub const SINGULAR_RATIO: f64 = 1e-12;
/// Cancellation ratios above this trigger a warning in the diagnostics.
pub const CANCELLATION_WARNING: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(m: usize) -> Self {
        if m.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest intermediate pivot product over `|Pf|` for the numerator.
    pub cancellation: f64,
    /// Same for the mass-only denominator (one when there are no masses).
    pub denominator_cancellation: f64,
    /// `|Pf|` of the denominator divided by its scale.
    pub denominator_ratio: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatorResult {
    pub value: Complex64,
    pub r_index: usize,
    pub parity: Parity,
    pub diagnostics: Diagnostics,
}

/// The ordered arguments `(z_1, z_1*, ..., z_k, z_k*, m_1, ..., m_M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentList {
    pub entries: Vec<Complex64>,
    pub k: usize,
    pub m: usize,
}

impl ArgumentList {
    pub fn new(points: &[Complex64], masses: &[Complex64], chiral: bool) -> Result<Self> {
        validate_masses(masses, chiral)?;
        for (i, p) in points.iter().enumerate() {
            if !p.re.is_finite() || !p.im.is_finite() {
                return Err(Error::Validation(format!("point {i} is not finite")));
            }
            for (j, q) in points.iter().enumerate().take(i) {
                if p == q {
                    return Err(Error::Validation(format!("points {j} and {i} coincide")));
                }
            }
        }
        let mut entries = Vec::with_capacity(2 * points.len() + masses.len());
        for p in points {
            entries.push(*p);
            entries.push(p.conj());
        }
        entries.extend_from_slice(masses);
        Ok(ArgumentList { entries, k: points.len(), m: masses.len() })
    }
}

fn mass_key(m: Complex64, chiral: bool) -> Complex64 {
    if chiral {
        m * m
    } else {
        m
    }
}

/// Rejects non-finite or (near-)coincident masses; chiral masses are compared
/// through their squares.
pub fn validate_masses(masses: &[Complex64], chiral: bool) -> Result<()> {
    let keys: Vec<Complex64> = masses.iter().map(|&m| mass_key(m, chiral)).collect();
    let scale = keys.iter().map(|m| m.norm()).fold(1.0, f64::max);
    for (i, m) in masses.iter().enumerate() {
        if !m.re.is_finite() || !m.im.is_finite() {
            return Err(Error::Validation(format!("mass {i} is not finite")));
        }
    }
    for i in 0..keys.len() {
        for j in 0..i {
            let sep = (keys[i] - keys[j]).norm();
            if sep <= MASS_SEPARATION * scale {
                return Err(Error::DegenerateMasses {
                    i: j,
                    j: i,
                    separation: sep,
                    suggested_eps: 1e-4 * scale.sqrt(),
                });
            }
        }
    }
    Ok(())
}

/// Spreads each group of coincident masses symmetrically around its centre
/// with spacing `eps`; distinct masses are returned unchanged.
pub fn perturb_masses(masses: &[Complex64], eps: f64, chiral: bool) -> Vec<Complex64> {
    let keys: Vec<Complex64> = masses.iter().map(|&m| mass_key(m, chiral)).collect();
    let scale = keys.iter().map(|m| m.norm()).fold(1.0, f64::max);
    let mut out = masses.to_vec();
    let mut done = vec![false; masses.len()];
    for i in 0..masses.len() {
        if done[i] {
            continue;
        }
        let group: Vec<usize> = (i..masses.len())
            .filter(|&j| !done[j] && (keys[j] - keys[i]).norm() <= MASS_SEPARATION * scale)
            .collect();
        let c = group.len() as f64;
        for (pos, &j) in group.iter().enumerate() {
            out[j] = masses[i] + eps * (pos as f64 - 0.5 * (c - 1.0));
            done[j] = true;
        }
    }
    out
}

/// `Delta(v) = prod_{k > l} (v_k - v_l)`.
pub fn vandermonde(v: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for k in 0..v.len() {
        for l in 0..k {
            acc *= v[k] - v[l];
        }
    }
    acc
}

/// `Theta_R(u)`: pre-kernel entries, bordered by `q_{2R}` when the number of
/// arguments is odd.
pub fn theta_matrix(basis: &SkewBasis, r: usize, u: &[Complex64]) -> Result<AntisymMatrix> {
    if r > basis.pairs() {
        return Err(Error::Size(format!("Theta_{r} needs {r} norms, basis has {}", basis.pairs())));
    }
    let odd = u.len() % 2 == 1;
    if odd && basis.polys().len() <= 2 * r {
        return Err(Error::Size(format!(
            "odd argument count needs q_{}, basis has {} polynomials",
            2 * r,
            basis.polys().len()
        )));
    }
    let n = u.len();
    let dim = if odd { n + 1 } else { n };
    let mut err = None;
    let a = AntisymMatrix::from_upper(dim, |i, j| {
        if j == n {
            return basis.eval(2 * r, u[i]);
        }
        match basis.prekernel(r, u[i], u[j]) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(a),
    }
}

fn pfaffian_scale(a: &AntisymMatrix) -> f64 {
    a.max_abs().powi((a.dim() / 2) as i32)
}

fn checked_denominator(theta: &AntisymMatrix) -> Result<(PfaffianOutcome, f64)> {
    let out = pfaffian_with_diagnostics(theta)?;
    let scale = pfaffian_scale(theta);
    let ratio = if scale > 0.0 { out.value.norm() / scale } else { 0.0 };
    if theta.dim() > 0 && !(ratio >= SINGULAR_RATIO) {
        return Err(Error::NearSingular { value: out.value.norm(), scale });
    }
    Ok((out, ratio))
}

/// `<prod_f prod_i (m_f - z_i)(m_f - z_i*)>` over `N` eigenvalue pairs:
/// `(-1)^{floor(M/2)} prod_{h=N}^{R-1} r_h / Delta_M(m) Pf Theta_R(m)` with
/// `R = N + floor(M/2)`. Chiral bases use `m^2` in the Vandermonde.
pub fn char_poly_expectation(basis: &SkewBasis, n: usize, masses: &[Complex64]) -> Result<CorrelatorResult> {
    validate_masses(masses, basis.chiral())?;
    let m = masses.len();
    let r = n + m / 2;
    let theta = theta_matrix(basis, r, masses)?;
    let out = pfaffian_with_diagnostics(&theta)?;
    let keys: Vec<Complex64> = masses.iter().map(|&x| mass_key(x, basis.chiral())).collect();
    let sign = if (m / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut pre = Complex64::new(sign, 0.0);
    for h in n..r {
        pre *= basis.norms()[h];
    }
    let value = pre * out.value / vandermonde(&keys);
    let mut diagnostics = Diagnostics {
        cancellation: out.cancellation_ratio(),
        denominator_cancellation: 1.0,
        denominator_ratio: 1.0,
        warnings: vec![],
    };
    if diagnostics.cancellation > CANCELLATION_WARNING {
        diagnostics.warnings.push(format!("Pfaffian cancellation ratio {:.2e}", diagnostics.cancellation));
    }
    Ok(CorrelatorResult { value, r_index: r, parity: Parity::of(m), diagnostics })
}

/// `Z_N^{(0)} = N! prod_{i<N} r_i`.
pub fn massless_partition(basis: &SkewBasis, n: usize) -> Result<Complex64> {
    if n > basis.pairs() {
        return Err(Error::Size(format!("Z_{n} needs {n} norms, basis has {}", basis.pairs())));
    }
    Ok(basis.norms()[..n].iter().fold(Complex64::new(factorial(n), 0.0), |a, &r| a * r))
}

/// `Z_N^{(M)} = Z_N^{(0)} <prod char. polynomials>`, times `prod m^{2 nu}` for
/// chiral bases.
pub fn partition_function(basis: &SkewBasis, n: usize, masses: &[Complex64]) -> Result<CorrelatorResult> {
    let mut res = char_poly_expectation(basis, n, masses)?;
    res.value *= massless_partition(basis, n)?;
    if basis.chiral() {
        for &m in masses {
            res.value *= m.powu(2 * basis.nu() as u32);
        }
    }
    Ok(res)
}

/// Evaluator of `R_{N,k}^{(M)}` for fixed masses; the mass-only
/// denominator is computed once.
#[derive(Debug, Clone)]
pub struct Correlator<'a> {
    basis: &'a SkewBasis,
    weight: &'a WeightSpec,
    masses: Vec<Complex64>,
    r: usize,
    denominator: PfaffianOutcome,
    denominator_ratio: f64,
}

impl<'a> Correlator<'a> {
    pub fn new(basis: &'a SkewBasis, weight: &'a WeightSpec, n: usize, masses: &[Complex64]) -> Result<Self> {
        if basis.chiral() != weight.chiral() {
            return Err(Error::Validation("basis and weight disagree on chirality".into()));
        }
        validate_masses(masses, basis.chiral())?;
        let r = n + masses.len() / 2;
        let theta = theta_matrix(basis, r, masses)?;
        let (denominator, denominator_ratio) = checked_denominator(&theta)?;
        Ok(Correlator { basis, weight, masses: masses.to_vec(), r, denominator, denominator_ratio })
    }

    pub fn r_index(&self) -> usize {
        self.r
    }

    /// `prod_h w(z_h) (z_h* - z_h) Pf Theta_R(u) / Pf Theta_R(m)`; chiral
    /// weights use `(z_h*^2 - z_h^2)`.
    pub fn eval(&self, points: &[Complex64]) -> Result<CorrelatorResult> {
        let args = ArgumentList::new(points, &self.masses, self.basis.chiral())?;
        let theta = theta_matrix(self.basis, self.r, &args.entries)?;
        let out = pfaffian_with_diagnostics(&theta)?;
        let mut pre = Complex64::new(1.0, 0.0);
        for &z in points {
            let d = if self.basis.chiral() { z.conj() * z.conj() - z * z } else { z.conj() - z };
            pre *= d * self.weight.eval_z(z);
        }
        let value = pre * out.value / self.denominator.value;
        let mut diagnostics = Diagnostics {
            cancellation: out.cancellation_ratio(),
            denominator_cancellation: self.denominator.cancellation_ratio(),
            denominator_ratio: self.denominator_ratio,
            warnings: vec![],
        };
        if diagnostics.cancellation > CANCELLATION_WARNING {
            diagnostics.warnings.push(format!("Pfaffian cancellation ratio {:.2e}", diagnostics.cancellation));
        }
        if diagnostics.denominator_cancellation > CANCELLATION_WARNING {
            diagnostics
                .warnings
                .push(format!("denominator cancellation ratio {:.2e}", diagnostics.denominator_cancellation));
        }
        Ok(CorrelatorResult { value, r_index: self.r, parity: Parity::of(self.masses.len()), diagnostics })
    }
}

/// One-shot evaluation of the `k`-point correlator at `points`.
pub fn correlation(
    basis: &SkewBasis,
    weight: &WeightSpec,
    n: usize,
    k: usize,
    points: &[Complex64],
    masses: &[Complex64],
) -> Result<CorrelatorResult> {
    if k != points.len() {
        return Err(Error::Validation(format!("k = {k} but {} points given", points.len())));
    }
    if k == 0 {
        return Err(Error::Validation("correlators need k >= 1".into()));
    }
    if k > n {
        return Err(Error::Validation(format!("k = {k} exceeds N = {n}")));
    }
    Correlator::new(basis, weight, n, masses)?.eval(points)
}
