//! Real-eigenvalue correlators of the Hermitean limit: the Omega matrix of
//! projected kernels and derivatives, and its quaternion (I, S, D) form.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{checked_denominator, validate_masses, CorrelatorResult, Diagnostics, Parity, CANCELLATION_WARNING};
use crate::error::{Error, Result};
use crate::numerics::{pfaffian, pfaffian_with_diagnostics, AntisymMatrix, PfaffianOutcome};
use crate::skewortho::SkewBasis;
use crate::weights::RealWeightSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Deriv(f64),
    Plain(f64),
    Mass(Complex64),
    Border,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_reals(xs: &[f64]) -> Result<()> {
    for (i, x) in xs.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::Domain(format!("eigenvalue argument {i} is not a finite real number")));
        }
    }
    Ok(())
}

fn border_poly(basis: &SkewBasis, r: usize) -> Result<()> {
    if basis.polys().len() <= 2 * r {
        return Err(Error::Size(format!(
            "odd argument count needs q_{}, basis has {} polynomials",
            2 * r,
            basis.polys().len()
        )));
    }
    Ok(())
}

fn slot_entry(basis: &SkewBasis, r: usize, a: Slot, b: Slot) -> Result<Complex64> {
    use Slot::*;
    Ok(match (a, b) {
        (Deriv(x), Deriv(t)) => basis.kernel_derivatives(r, real(x), real(t))?.dxdt,
        (Deriv(x), Plain(t)) => basis.kernel_derivatives(r, real(x), real(t))?.dx,
        (Plain(x), Deriv(t)) => basis.kernel_derivatives(r, real(x), real(t))?.dt,
        (Plain(x), Plain(t)) => basis.prekernel(r, real(x), real(t))?,
        (Deriv(x), Mass(m)) => basis.kernel_derivatives(r, real(x), m)?.dx,
        (Plain(x), Mass(m)) => basis.prekernel(r, real(x), m)?,
        (Mass(m), Mass(n)) => basis.prekernel(r, m, n)?,
        (Deriv(x), Border) => basis.eval_with_derivative(2 * r, real(x)).1,
        (Plain(x), Border) => basis.eval(2 * r, real(x)),
        (Mass(m), Border) => basis.eval(2 * r, m),
        _ => return Err(Error::Validation("slot ordering violated".into())),
    })
}

/// `Omega_R`: for every eigenvalue a derivative row above a plain row, then
/// the masses, then a `q_{2R}` border when `2k + M` is odd.
pub fn omega_matrix(basis: &SkewBasis, r: usize, xs: &[f64], masses: &[Complex64]) -> Result<AntisymMatrix> {
    check_reals(xs)?;
    let mut slots: Vec<Slot> = Vec::with_capacity(2 * xs.len() + masses.len() + 1);
    for &x in xs {
        slots.push(Slot::Deriv(x));
        slots.push(Slot::Plain(x));
    }
    slots.extend(masses.iter().map(|&m| Slot::Mass(m)));
    if masses.len() % 2 == 1 {
        border_poly(basis, r)?;
        slots.push(Slot::Border);
    }
    if r > basis.pairs() {
        return Err(Error::Size(format!("Omega_{r} needs {r} norms, basis has {}", basis.pairs())));
    }
    let mut err = None;
    let a = AntisymMatrix::from_upper(slots.len(), |i, j| match slot_entry(basis, r, slots[i], slots[j]) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            Complex64::new(0.0, 0.0)
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(a),
    }
}

/// Evaluator of real-line correlators for fixed masses.
#[derive(Debug, Clone)]
pub struct RealCorrelator<'a> {
    basis: &'a SkewBasis,
    weight: &'a RealWeightSpec,
    masses: Vec<Complex64>,
    r: usize,
    denominator: PfaffianOutcome,
    denominator_ratio: f64,
}

impl<'a> RealCorrelator<'a> {
    pub fn new(basis: &'a SkewBasis, weight: &'a RealWeightSpec, n: usize, masses: &[Complex64]) -> Result<Self> {
        if basis.chiral() != weight.chiral {
            return Err(Error::Validation("basis and weight disagree on chirality".into()));
        }
        validate_masses(masses, basis.chiral())?;
        let r = n + masses.len() / 2;
        let omega = omega_matrix(basis, r, &[], masses)?;
        let (denominator, denominator_ratio) = checked_denominator(&omega)?;
        Ok(RealCorrelator { basis, weight, masses: masses.to_vec(), r, denominator, denominator_ratio })
    }

    /// `prod_h w_bar(x_h) Pf Omega_R(x, m) / Pf Omega_R(m)`, with the chiral
    /// factor `2 x w_bar(x)`.
    pub fn eval(&self, xs: &[f64]) -> Result<CorrelatorResult> {
        let omega = omega_matrix(self.basis, self.r, xs, &self.masses)?;
        let out = pfaffian_with_diagnostics(&omega)?;
        let pre: f64 = xs.iter().map(|&x| self.weight.correlator_factor(x)).product();
        let value = out.value * pre / self.denominator.value;
        let mut diagnostics = Diagnostics {
            cancellation: out.cancellation_ratio(),
            denominator_cancellation: self.denominator.cancellation_ratio(),
            denominator_ratio: self.denominator_ratio,
            warnings: vec![],
        };
        if diagnostics.cancellation > CANCELLATION_WARNING {
            diagnostics.warnings.push(format!("Pfaffian cancellation ratio {:.2e}", diagnostics.cancellation));
        }
        Ok(CorrelatorResult { value, r_index: self.r, parity: Parity::of(self.masses.len()), diagnostics })
    }
}

pub fn real_correlation(
    basis: &SkewBasis,
    weight: &RealWeightSpec,
    n: usize,
    xs: &[f64],
    masses: &[Complex64],
) -> Result<CorrelatorResult> {
    if xs.is_empty() || xs.len() > n {
        return Err(Error::Validation(format!("need 1 <= k <= N, got k = {} and N = {n}", xs.len())));
    }
    RealCorrelator::new(basis, weight, n, masses)?.eval(xs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsdKernels {
    pub i: Complex64,
    pub s: Complex64,
    pub d: Complex64,
}

fn sqrt_weight(w: &RealWeightSpec, x: f64) -> Result<f64> {
    let v = w.correlator_factor(x);
    if !(v >= 0.0) {
        return Err(Error::Domain(format!("effective weight {v:.3e} at x = {x} is negative")));
    }
    Ok(v.sqrt())
}

/// `I = sqrt(w(x) w(t)) kappa(x, t)`, `S = sqrt(w(x) w(t)) d/dt kappa(t, x)` (derivative in
/// the first slot) and `D = -sqrt(w(x) w(t)) d^2/dx dt kappa(x, t)`, where `w` is the
/// per-eigenvalue factor of [`RealWeightSpec::correlator_factor`].
pub fn isd_kernels(basis: &SkewBasis, w: &RealWeightSpec, r: usize, x: f64, t: f64) -> Result<IsdKernels> {
    check_reals(&[x, t])?;
    let g = sqrt_weight(w, x)? * sqrt_weight(w, t)?;
    let at_xt = basis.kernel_derivatives(r, real(x), real(t))?;
    let at_tx = basis.kernel_derivatives(r, real(t), real(x))?;
    Ok(IsdKernels { i: at_xt.value * g, s: at_tx.dx * g, d: -at_xt.dxdt * g })
}

/// Complex 2k x 2k representation of the self-dual quaternion kernel with
/// blocks `[[S(x_j, x_i), D(x_i, x_j)], [I(x_i, x_j), S(x_i, x_j)]]`.
pub fn quaternion_kernel_matrix(basis: &SkewBasis, w: &RealWeightSpec, r: usize, xs: &[f64]) -> Result<DMatrix<Complex64>> {
    let k = xs.len();
    let mut q = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let ij = isd_kernels(basis, w, r, xs[i], xs[j])?;
            let ji = isd_kernels(basis, w, r, xs[j], xs[i])?;
            q[(2 * i, 2 * j)] = ji.s;
            q[(2 * i, 2 * j + 1)] = ij.d;
            q[(2 * i + 1, 2 * j)] = ij.i;
            q[(2 * i + 1, 2 * j + 1)] = ij.s;
        }
    }
    Ok(q)
}

/// Quaternion determinant of a self-dual matrix as `Pf(Q J)`,
/// `J = 1 (x) [[0, 1], [-1, 0]]`.
pub fn qdet_via_pfaffian(q: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = q.nrows();
    let mut j = DMatrix::zeros(n, n);
    for b in 0..n / 2 {
        j[(2 * b, 2 * b + 1)] = real(1.0);
        j[(2 * b + 1, 2 * b)] = real(-1.0);
    }
    pfaffian(&AntisymMatrix::new(q * j)?)
}

/// Quaternion determinant from the cycle expansion, written out for one and
/// two quaternion rows.
pub fn qdet_cycle(q: &DMatrix<Complex64>) -> Result<Complex64> {
    let block = |i: usize, j: usize| q.view((2 * i, 2 * j), (2, 2)).clone_owned();
    let scalar = |m: &DMatrix<Complex64>| (m[(0, 0)] + m[(1, 1)]) * 0.5;
    match q.nrows() {
        0 => Ok(real(1.0)),
        2 => Ok(scalar(&block(0, 0))),
        4 => {
            let diag = scalar(&block(0, 0)) * scalar(&block(1, 1));
            Ok(diag - scalar(&(block(0, 1) * block(1, 0))))
        }
        n => Err(Error::Unsupported(format!("cycle expansion implemented for k <= 2, got k = {}", n / 2))),
    }
}

/// Real correlator from the rearranged layout: all weighted derivative rows,
/// then all plain rows, then masses and border, expressed through `I, S, D`.
/// The reordering contributes the sign `(-1)^{k(k-1)/2}`.
pub fn real_correlation_block_form(
    basis: &SkewBasis,
    w: &RealWeightSpec,
    n: usize,
    xs: &[f64],
    masses: &[Complex64],
) -> Result<Complex64> {
    let k = xs.len();
    let m = masses.len();
    let r = n + m / 2;
    let odd = m % 2 == 1;
    if odd {
        border_poly(basis, r)?;
    }
    let sw: Vec<f64> = xs.iter().map(|&x| sqrt_weight(w, x)).collect::<Result<_>>()?;
    let mut isd = vec![vec![None; k]; k];
    for a in 0..k {
        for b in 0..k {
            isd[a][b] = Some(isd_kernels(basis, w, r, xs[a], xs[b])?);
        }
    }
    let get = |a: usize, b: usize| isd[a][b].unwrap();
    let dim = 2 * k + m + usize::from(odd);
    let mut mat = DMatrix::zeros(dim, dim);
    for a in 0..k {
        for b in 0..k {
            mat[(a, b)] = -get(a, b).d;
            mat[(a, k + b)] = get(b, a).s;
            mat[(k + a, b)] = -get(a, b).s;
            mat[(k + a, k + b)] = get(a, b).i;
        }
        for (f, &mf) in masses.iter().enumerate() {
            let kd = basis.kernel_derivatives(r, real(xs[a]), mf)?;
            let col = 2 * k + f;
            mat[(a, col)] = kd.dx * sw[a];
            mat[(k + a, col)] = kd.value * sw[a];
        }
        if odd {
            let (q, dq) = basis.eval_with_derivative(2 * r, real(xs[a]));
            mat[(a, dim - 1)] = dq * sw[a];
            mat[(k + a, dim - 1)] = q * sw[a];
        }
    }
    for (f, &mf) in masses.iter().enumerate() {
        for (g, &mg) in masses.iter().enumerate().skip(f + 1) {
            mat[(2 * k + f, 2 * k + g)] = basis.prekernel(r, mf, mg)?;
        }
        if odd {
            mat[(2 * k + f, dim - 1)] = basis.eval(2 * r, mf);
        }
    }
    // lower triangle of the mass/border part from antisymmetry
    for i in 0..dim {
        for j in 0..dim {
            if (i >= 2 * k || j >= 2 * k)
                && j > i {
                    mat[(j, i)] = -mat[(i, j)];
                }
        }
    }
    let num = pfaffian(&AntisymMatrix::new(mat)?)?;
    let den = pfaffian(&omega_matrix(basis, r, &[], masses)?)?;
    let sign = if (k * k.saturating_sub(1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(num * sign / den)
}
