//! Verification suites comparing the Pfaffian formulas with independent
//! oracles. Each suite returns measured residuals next to the tolerances it
//! was run with.

use std::fmt;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlators::{
    char_poly_expectation, default_sequence, hermitean_limit_sweep, partition_function, qdet_cycle, qdet_via_pfaffian,
    quaternion_kernel_matrix, real_correlation, real_correlation_block_form, Correlator, Observable,
};
use crate::error::{Error, Result};
use crate::numerics::{build_grid, determinant, fundamental_grid, pfaffian, quad2d_real, AntisymMatrix, QuadratureRule};
use crate::oracle::{
    brute_force_correlator, brute_force_partition, brute_force_real_correlator, density_compare, mcmc_chains,
    with_refinement, HistogramSpec, McmcOptions,
};
use crate::skewortho::{
    chgse_skew_polys, chgse_unit_norms, gse_skew_polys, kernel_via_w, monomial_w, skew_product, SkewBasis,
};
use crate::weights::{chgse_weight, gse_weight, projected_chgse, projected_gse, Family, RealWeightSpec, WeightSpec};

/// One measured quantity against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `measured < tolerance`; NaN fails.
    pub fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, tolerance, passed: measured < tolerance, detail: String::new() }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, err: &Error) -> Self {
        Check { name: name.into(), measured: f64::NAN, tolerance, passed: false, detail: err.to_string() }
    }

    pub fn flag(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            measured: if ok { 0.0 } else { 1.0 },
            tolerance: 0.5,
            passed: ok,
            detail: detail.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Largest `measured / tolerance` over all checks.
    pub fn worst_ratio(&self) -> f64 {
        self.checks.iter().map(|c| c.measured / c.tolerance).fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} ({:.1} s)", self.suite, self.seconds)?;
        for c in &self.checks {
            let status = if c.passed { "ok  " } else { "FAIL" };
            write!(f, "  {status} {:<52} {:>11.3e} < {:.1e}", c.name, c.measured, c.tolerance)?;
            if !c.detail.is_empty() {
                write!(f, "  {}", c.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn timed(suite: &str, f: impl FnOnce() -> Vec<Check>) -> SuiteReport {
    let start = Instant::now();
    let checks = f();
    SuiteReport { suite: suite.into(), checks, seconds: start.elapsed().as_secs_f64() }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Ensemble with its weight and a closed-form basis of `count` polynomials.
#[derive(Clone)]
pub struct Ensemble {
    pub label: String,
    pub weight: WeightSpec,
    pub basis: SkewBasis,
}

impl Ensemble {
    pub fn gse(n: usize, tau: f64, count: usize) -> Result<Self> {
        Ok(Ensemble {
            label: format!("gse(N={n}, tau={tau})"),
            weight: gse_weight(n, tau)?,
            basis: gse_skew_polys(n, tau, count)?,
        })
    }

    pub fn chgse(n: usize, mu: f64, nu: usize, count: usize) -> Result<Self> {
        Ok(Ensemble {
            label: format!("chgse(N={n}, mu={mu}, nu={nu})"),
            weight: chgse_weight(n, mu, nu)?,
            basis: chgse_skew_polys(n, mu, nu, count)?,
        })
    }
}

/// Tolerances and sizes for [`theorem1`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Options {
    /// Relative agreement required between brute force and Pfaffian values.
    pub tolerance: f64,
    /// Quadrature nodes per axis; the grid-refinement estimate must stay a
    /// factor ten below `tolerance`.
    pub nodes: usize,
}

impl Default for Theorem1Options {
    fn default() -> Self {
        Theorem1Options { tolerance: 1e-5, nodes: 80 }
    }
}

fn test_masses(chiral: bool, m: usize) -> Vec<Complex64> {
    let pool = if chiral {
        [c(0.5, 0.2), c(0.3, -0.25)]
    } else {
        [c(0.3, 0.2), c(-0.4, 0.5)]
    };
    pool[..m].to_vec()
}

fn test_points(chiral: bool) -> [Complex64; 2] {
    if chiral {
        [c(0.45, 0.3), c(0.2, 0.6)]
    } else {
        [c(0.3, 0.4), c(-0.6, 0.25)]
    }
}

/// Brute-force quadrature of the eigenvalue integral against the Pfaffian
/// formulas: `Z_N^{(M)}` for `k = 0` and `R_{N,1}^{(M)}` for `k = 1`, over
/// gse(tau = 0.5) and chgse(mu = 0.5, nu in {0, 1}), `N in {1, 2}`,
/// `M in {0, 1, 2}` with complex masses.
pub fn theorem1(opts: &Theorem1Options) -> SuiteReport {
    timed("theorem1", || {
        let mut cases = vec![];
        for family in [(Family::Gse, 0), (Family::Chgse, 0), (Family::Chgse, 1)] {
            for n in 1..=2 {
                for k in 0..=1 {
                    for m in 0..=2 {
                        cases.push((family, n, k, m));
                    }
                }
            }
        }
        cases
            .into_iter()
            .flat_map(|((family, nu), n, k, m)| theorem1_case(family, nu, n, k, m, opts))
            .collect()
    })
}

fn theorem1_case(family: Family, nu: usize, n: usize, k: usize, m: usize, opts: &Theorem1Options) -> Vec<Check> {
    let count = 2 * (n + m / 2) + 1;
    let ens = match family {
        Family::Gse => Ensemble::gse(n, 0.5, count),
        _ => Ensemble::chgse(n, 0.5, nu, count),
    };
    let name = |extra: &str| format!("{family} nu={nu} N={n} k={k} M={m}{extra}");
    let ens = match ens {
        Ok(e) => e,
        Err(e) => return vec![Check::failed(name(""), opts.tolerance, &e)],
    };
    let chiral = ens.weight.chiral();
    let masses = test_masses(chiral, m);
    let degree = 2 * n + m + 2;
    let oracle_tol = 0.1 * opts.tolerance;
    let w = &ens.weight;
    if k == 0 {
        let run = || -> Result<Check> {
            let pf = partition_function(&ens.basis, n, &masses)?.value;
            let est = with_refinement(w, opts.nodes, degree, oracle_tol, |g| brute_force_partition(w, n, &masses, g))?;
            Ok(Check::below(name(" Z"), rel(est.value, pf), opts.tolerance)
                .with_detail(format!("grid estimate {:.1e}", est.error)))
        };
        return vec![run().unwrap_or_else(|e| Check::failed(name(" Z"), opts.tolerance, &e))];
    }
    test_points(chiral)
        .iter()
        .map(|&z| {
            let label = name(&format!(" R at {z}"));
            let run = || -> Result<Check> {
                let pf = Correlator::new(&ens.basis, w, n, &masses)?.eval(&[z])?.value;
                let est =
                    with_refinement(w, opts.nodes, degree, oracle_tol, |g| brute_force_correlator(w, n, &[z], &masses, g))?;
                Ok(Check::below(label.clone(), rel(est.value, pf), opts.tolerance)
                    .with_detail(format!("grid estimate {:.1e}", est.error)))
            };
            run().unwrap_or_else(|e| Check::failed(label.clone(), opts.tolerance, &e))
        })
        .collect()
}

/// Quadrature nodes per axis used for numerical skew products.
pub const SKEW_PRODUCT_NODES: usize = 160;

/// `max_{i<j} |<q_i, q_j> - expected| / |r_{i/2}|` for a basis whose norms
/// under `w` are `norms`.
pub fn basis_residual(basis: &SkewBasis, w: &WeightSpec, norms: &[f64]) -> Result<f64> {
    let count = basis.polys().len();
    let degree = if w.chiral() { 4 * count } else { 2 * count };
    let grid = fundamental_grid(w, SKEW_PRODUCT_NODES, degree)?;
    let mut worst: f64 = 0.0;
    for i in 0..count {
        for j in i + 1..count {
            let got = skew_product(basis.poly(i), basis.poly(j), w, &grid)?.re;
            // <q_{2k+1}, q_{2k}> = r_k, so the (2k, 2k+1) entry is -r_k
            let expected = if i % 2 == 0 && j == i + 1 { -norms[i / 2] } else { 0.0 };
            worst = worst.max((got - expected).abs() / norms[i / 2].abs());
        }
    }
    Ok(worst)
}

/// `max |<q_i, q_j> - expected| / |r_{i/2}|` for closed-form bases with
/// `2(N + 1)` polynomials over the parameter lattice
/// `N in {1,2,3}`, `tau in {0, 0.5, 0.9}`, `mu in {1, 0.5, 0.1}`, `nu in {0,1,2}`.
pub fn skew_orthogonality(tolerance: f64) -> SuiteReport {
    timed("skew-orthogonality", || {
        let mut jobs: Vec<(Family, usize, f64, usize)> = vec![];
        for n in 1..=3 {
            for tau in [0.0, 0.5, 0.9] {
                jobs.push((Family::Gse, n, tau, 0));
            }
            for mu in [1.0, 0.5, 0.1] {
                for nu in 0..=2 {
                    jobs.push((Family::Chgse, n, mu, nu));
                }
            }
        }
        jobs.par_iter()
            .map(|&(family, n, p, nu)| {
                let count = 2 * (n + 1);
                let label = match family {
                    Family::Gse => format!("gse N={n} tau={p}"),
                    _ => format!("chgse N={n} mu={p} nu={nu}"),
                };
                let run = || -> Result<f64> {
                    match family {
                        Family::Gse => {
                            let b = gse_skew_polys(n, p, count)?;
                            let norms: Vec<f64> = b.norms().iter().map(|r| r.re).collect();
                            basis_residual(&b, &gse_weight(n, p)?, &norms)
                        }
                        _ => {
                            // unit-normalized weight keeps mu = 1 meaningful
                            let b = chgse_skew_polys(n, p, nu, count)?;
                            let w = chgse_weight(n, p, nu)?.unit_normalized();
                            basis_residual(&b, &w, &chgse_unit_norms(n, p, nu, n + 1)?)
                        }
                    }
                };
                match run() {
                    Ok(r) => Check::below(label, r, tolerance),
                    Err(e) => Check::failed(label, tolerance, &e),
                }
            })
            .collect()
    })
}

/// Quadrature `<q_{2k}, q_{2k+1}>` against the closed-form `r_k` for `k <= 3`.
pub fn norm_closed_forms(tolerance: f64) -> SuiteReport {
    timed("norms", || {
        let mut checks = vec![];
        let r0 = gse_skew_polys(1, 0.5, 2).map(|b| b.norms()[0].re);
        checks.push(match r0 {
            Ok(v) => Check::below("gse N=1 tau=0.5 r_0 = 2.170803", (v - 2.170803).abs() / 2.170803, 1e-6),
            Err(e) => Check::failed("gse r_0", 1e-6, &e),
        });
        let mut jobs: Vec<(Family, usize, f64, usize)> = vec![];
        for n in 1..=3 {
            jobs.push((Family::Gse, n, 0.5, 0));
            jobs.push((Family::Gse, n, 0.2, 0));
            for nu in 0..=2 {
                jobs.push((Family::Chgse, n, 0.5, nu));
            }
        }
        let more: Vec<Check> = jobs
            .par_iter()
            .flat_map(|&(family, n, p, nu)| {
                let run = || -> Result<Vec<Check>> {
                    let ens = match family {
                        Family::Gse => Ensemble::gse(n, p, 8)?,
                        _ => Ensemble::chgse(n, p, nu, 8)?,
                    };
                    let degree = if ens.weight.chiral() { 28 } else { 14 };
                    let grid = fundamental_grid(&ens.weight, SKEW_PRODUCT_NODES, degree)?;
                    (0..4)
                        .map(|k| {
                            let got = skew_product(ens.basis.poly(2 * k + 1), ens.basis.poly(2 * k), &ens.weight, &grid)?;
                            Ok(Check::below(format!("{} r_{k}", ens.label), rel(got, ens.basis.norms()[k]), tolerance))
                        })
                        .collect()
                };
                run().unwrap_or_else(|e| vec![Check::failed(format!("{family} N={n}"), tolerance, &e)])
            })
            .collect();
        checks.extend(more);
        checks
    })
}

/// Prekernel of the closed-form basis against `sum z^m (W^{-1})_{n,m} v^n`
/// from the quadrature moment matrix, at `pairs` random point pairs per
/// ensemble. Pairs with `|kappa| <= floor` are skipped.
pub fn kernel_basis_independence(tolerance: f64, pairs: usize, floor: f64, seed: u64) -> SuiteReport {
    timed("kernel", || {
        let ensembles = [Ensemble::gse(2, 0.5, 4), Ensemble::chgse(2, 0.5, 1, 4), Ensemble::chgse(1, 0.5, 0, 4)];
        let mut checks = vec![];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for ens in ensembles {
            let run = |rng: &mut ChaCha8Rng| -> Result<Check> {
                let ens = ens?;
                let degree = if ens.weight.chiral() { 8 } else { 4 };
                let grid = fundamental_grid(&ens.weight, SKEW_PRODUCT_NODES, degree)?;
                let wm = monomial_w(&ens.weight, 4, &grid)?;
                let s = ens.weight.length_scale();
                let mut worst: f64 = 0.0;
                let mut used = 0;
                for _ in 0..pairs {
                    let mut draw = || c(rng.random_range(-1.5..1.5) * s, rng.random_range(-1.5..1.5) * s);
                    let (z, v) = (draw(), draw());
                    let a = ens.basis.prekernel(2, z, v)?;
                    let b = kernel_via_w(&wm, z, v);
                    if a.norm() > floor {
                        used += 1;
                        worst = worst.max(rel(b, a));
                    }
                }
                Ok(Check::below(format!("{} kappa_2 vs W^-1", ens.label), worst, tolerance)
                    .with_detail(format!("{used} of {pairs} pairs above floor")))
            };
            checks.push(run(&mut rng).unwrap_or_else(|e| Check::failed("kernel", tolerance, &e)));
        }
        checks
    })
}

/// Characteristic-polynomial identities: `M = 1` gives `q_{2N}(m)`, `M = 2`
/// gives `r_N kappa_{N+1}(m_2, m_1) / (m_2 - m_1)`, both also against brute
/// force; the coincident-mass limit is checked by Richardson extrapolation
/// over `eps in {1e-2, 1e-3, 1e-4}`.
pub fn char_identities(tolerance: f64, nodes: usize) -> SuiteReport {
    timed("charpoly", || {
        let mut checks = vec![];
        for n in 1..=2 {
            for (family, nu) in [(Family::Gse, 0), (Family::Chgse, 1)] {
                let run = || -> Result<Vec<Check>> {
                    let ens = match family {
                        Family::Gse => Ensemble::gse(n, 0.5, 2 * n + 3)?,
                        _ => Ensemble::chgse(n, 0.5, nu, 2 * n + 3)?,
                    };
                    let b = &ens.basis;
                    let w = &ens.weight;
                    let chiral = w.chiral();
                    let masses = test_masses(chiral, 2);
                    let mut out = vec![];
                    let m1 = char_poly_expectation(b, n, &masses[..1])?.value;
                    let q = b.eval(2 * n, masses[0]);
                    out.push(Check::below(format!("{} M=1 vs q_2N(m)", ens.label), rel(m1, q), 1e-12));
                    let m2 = char_poly_expectation(b, n, &masses)?.value;
                    let key = |x: Complex64| if chiral { x * x } else { x };
                    let kap = b.norms()[n] * b.prekernel(n + 1, masses[1], masses[0])? / (key(masses[1]) - key(masses[0]));
                    out.push(Check::below(format!("{} M=2 vs r_N kappa/(m2-m1)", ens.label), rel(m2, kap), 1e-12));
                    let degree = 2 * n + 4;
                    let z0 = with_refinement(w, nodes, degree, 0.1 * tolerance, |g| brute_force_partition(w, n, &[], g))?;
                    for (mm, pf) in [(&masses[..1], m1), (&masses[..], m2)] {
                        let zm =
                            with_refinement(w, nodes, degree, 0.1 * tolerance, |g| brute_force_partition(w, n, mm, g))?;
                        let mut brute = zm.value / z0.value;
                        if chiral {
                            for &m in mm {
                                brute /= m.powu(2 * nu as u32);
                            }
                        }
                        out.push(Check::below(
                            format!("{} M={} vs brute force", ens.label, mm.len()),
                            rel(brute, pf),
                            tolerance,
                        ));
                    }
                    let base = masses[0];
                    let f = |eps: f64| char_poly_expectation(b, n, &[base, base + eps]).map(|r| r.value);
                    let (a, bb, cc) = (f(1e-2)?, f(1e-3)?, f(1e-4)?);
                    let r1 = (bb * 10.0 - a) / 9.0;
                    let r2 = (cc * 10.0 - bb) / 9.0;
                    out.push(Check::below(
                        format!("{} coincident-mass limit", ens.label),
                        rel(r1, r2),
                        tolerance,
                    ).with_detail(format!("limit {r2:.10}")));
                    Ok(out)
                };
                checks.extend(
                    run().unwrap_or_else(|e| vec![Check::failed(format!("{family} N={n} charpoly"), tolerance, &e)]),
                );
            }
        }
        checks
    })
}

/// Sizes and tolerances for [`hermitean_limit`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermiteanOptions {
    /// Required final sup deviation of the y-integrated density.
    pub sweep_deviation: f64,
    /// Projected correlators against real-line brute force.
    pub brute_tolerance: f64,
    /// Omega Pfaffian against the I/S/D quaternion form.
    pub form_tolerance: f64,
}

impl Default for HermiteanOptions {
    fn default() -> Self {
        HermiteanOptions { sweep_deviation: 0.01, brute_tolerance: 1e-5, form_tolerance: 1e-9 }
    }
}

fn projected_ensemble(family: Family, n: usize, nu: usize, count: usize) -> Result<(RealWeightSpec, SkewBasis)> {
    match family {
        Family::Gse => Ok((projected_gse(n), gse_skew_polys(n, 1.0, count)?)),
        _ => Ok((projected_chgse(n, nu), chgse_skew_polys(n, 0.0, nu, count)?)),
    }
}

/// Hermitean limit: convergence of the y-integrated density along
/// `tau in {0.9, 0.99, 0.999}`, projected correlators against real-line
/// brute force at `N = 2`, and the Omega Pfaffian against the quaternion
/// determinant of I/S/D kernels.
pub fn hermitean_limit(opts: &HermiteanOptions) -> SuiteReport {
    timed("theorem2", || {
        let mut checks = vec![];
        let xs: Vec<f64> = (0..=16).map(|i| -4.0 + 0.5 * i as f64).collect();
        let sweep = hermitean_limit_sweep(Family::Gse, 1, 0, &default_sequence(Family::Gse), &Observable::Density { xs });
        checks.push(match sweep {
            Ok(rep) => {
                let rows: Vec<String> = rep.rows.iter().map(|r| format!("{}:{:.2e}", r.param, r.deviation)).collect();
                let mut c = Check::below("gse N=1 y-integrated R_1 sup deviation", rep.final_deviation, opts.sweep_deviation)
                    .with_detail(rows.join(" "));
                c.passed &= rep.monotone;
                c
            }
            Err(e) => Check::failed("gse N=1 density sweep", opts.sweep_deviation, &e),
        });
        for (family, nu) in [(Family::Gse, 0), (Family::Chgse, 0), (Family::Chgse, 1)] {
            checks.extend(projected_vs_brute(family, nu, opts.brute_tolerance));
            checks.extend(omega_vs_quaternion(family, nu, opts.form_tolerance));
        }
        checks
    })
}

fn projected_vs_brute(family: Family, nu: usize, tolerance: f64) -> Vec<Check> {
    let n = 2;
    let chiral = family == Family::Chgse;
    let mut out = vec![];
    for m in 0..=2 {
        let masses = test_masses(chiral, m);
        let run = || -> Result<Vec<Check>> {
            let (wb, b) = projected_ensemble(family, n, nu, 2 * (n + m / 2) + 1)?;
            let rule = if chiral { QuadratureRule::new(0.0, 6.0, 120)? } else { QuadratureRule::new(-12.0, 12.0, 160)? };
            let pts: [&[f64]; 3] = if chiral { [&[0.4], &[1.1], &[0.5, 0.9]] } else { [&[0.3], &[-1.2], &[0.4, -0.7]] };
            pts.iter()
                .map(|xs| {
                    let pf = real_correlation(&b, &wb, n, xs, &masses)?.value;
                    let brute = brute_force_real_correlator(&wb, n, xs, &masses, &rule)?;
                    Ok(Check::below(
                        format!("{family} nu={nu} projected R_{{2,{}}} M={m} at {xs:?}", xs.len()),
                        rel(brute, pf),
                        tolerance,
                    ))
                })
                .collect()
        };
        out.extend(run().unwrap_or_else(|e| vec![Check::failed(format!("{family} M={m} projected"), tolerance, &e)]));
    }
    out
}

fn omega_vs_quaternion(family: Family, nu: usize, tolerance: f64) -> Vec<Check> {
    let n = 2;
    let chiral = family == Family::Chgse;
    let mut out = vec![];
    for m in [0, 1, 3] {
        let masses: Vec<Complex64> = if chiral {
            [c(0.5, 0.2), c(0.3, -0.25), c(1.1, 0.1)][..m].to_vec()
        } else {
            [c(0.3, 0.2), c(-0.4, 0.5), c(0.9, -0.1)][..m].to_vec()
        };
        let run = || -> Result<Vec<Check>> {
            let (wb, b) = projected_ensemble(family, n, nu, 2 * (n + m / 2) + 1)?;
            // Both forms lose about (cancellation ratio) x eps near zeros of the
            // correlator, so the points stay away from the masses.
            let pts: [&[f64]; 2] = if chiral { [&[0.7], &[0.8, 1.7]] } else { [&[0.3], &[0.4, -0.9]] };
            let mut checks = vec![];
            for xs in pts {
                let res = real_correlation(&b, &wb, n, xs, &masses)?;
                let omega = res.value;
                let block = real_correlation_block_form(&b, &wb, n, xs, &masses)?;
                checks.push(
                    Check::below(format!("{family} nu={nu} Omega vs I/S/D k={} M={m}", xs.len()), rel(block, omega), tolerance)
                        .with_detail(format!("cancellation {:.1e}", res.diagnostics.cancellation)),
                );
                if m == 0 {
                    let q = quaternion_kernel_matrix(&b, &wb, n, xs)?;
                    let (qp, qc) = (qdet_via_pfaffian(&q)?, qdet_cycle(&q)?);
                    checks.push(Check::below(
                        format!("{family} nu={nu} Omega vs Qdet k={}", xs.len()),
                        rel(qp, omega).max(rel(qc, omega)),
                        tolerance,
                    ));
                }
            }
            Ok(checks)
        };
        out.extend(run().unwrap_or_else(|e| vec![Check::failed(format!("{family} M={m} forms"), tolerance, &e)]));
    }
    out
}

/// Parameters of [`mcmc_consistency`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McmcSuiteOptions {
    pub sizes: Vec<usize>,
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Allowed fraction of tested bins beyond three standard deviations.
    pub max_fraction: f64,
    pub min_expected: f64,
    pub bins: (usize, usize),
}

impl Default for McmcSuiteOptions {
    fn default() -> Self {
        McmcSuiteOptions {
            sizes: (2..=6).collect(),
            steps: 1_000_000,
            burn_in: 20_000,
            thin: 10,
            seed: 20_240_601,
            max_fraction: 0.01,
            min_expected: 20.0,
            bins: (40, 20),
        }
    }
}

/// One-point histograms of Metropolis chains against the Pfaffian `R_{N,1}`
/// for gse(tau = 0.5) and chgse(mu = 0.5, nu = 0). Also checks that the
/// prediction integrates to `N`.
pub fn mcmc_consistency(opts: &McmcSuiteOptions) -> SuiteReport {
    timed("mcmc", || {
        let mut jobs = vec![];
        for &n in &opts.sizes {
            jobs.push((Family::Gse, n));
            jobs.push((Family::Chgse, n));
        }
        jobs.par_iter().flat_map(|&(family, n)| mcmc_case(family, n, opts)).collect()
    })
}

fn mcmc_case(family: Family, n: usize, opts: &McmcSuiteOptions) -> Vec<Check> {
    let label = format!("{family} N={n}");
    let run = || -> Result<Vec<Check>> {
        let ens = match family {
            Family::Gse => Ensemble::gse(n, 0.5, 2 * n)?,
            _ => Ensemble::chgse(n, 0.5, 0, 2 * n)?,
        };
        let w = &ens.weight;
        let corr = Correlator::new(&ens.basis, w, n, &[])?;
        let density = |z: Complex64| corr.eval(&[z]).map(|r| r.value.re);
        let grid = build_grid(w, 120)?;
        let total = quad2d_real(|x, y| density(c(x, y)).unwrap_or(f64::NAN), &grid)?;
        let mut checks = vec![Check::below(format!("{label} prediction integrates to N"), (total / n as f64 - 1.0).abs(), 1e-4)];
        let mo = McmcOptions {
            steps: opts.steps,
            burn_in: opts.burn_in,
            thin: opts.thin,
            seed: opts.seed + n as u64 + if w.chiral() { 1000 } else { 0 },
            target_acceptance: 0.3,
        };
        let run = mcmc_chains(w, n, &[], &mo, &[mo.seed])?.remove(0);
        let spec = HistogramSpec::from_samples(&run.samples, w.chiral(), opts.bins.0, opts.bins.1)?;
        let rep = density_compare(&run.samples, w.chiral(), density, &spec, run.stats.autocorrelation_time, opts.min_expected)?;
        checks.push(
            Check::below(format!("{label} fraction of bins beyond 3 sigma"), rep.fraction_over_three_sigma, opts.max_fraction)
                .with_detail(format!(
                    "{}/{} bins, max |z| {:.2}, tau_int {:.2}, acceptance {:.3}",
                    rep.over_three_sigma, rep.used_bins, rep.max_abs_z, run.stats.autocorrelation_time, run.stats.acceptance_rate
                )),
        );
        checks.push(Check::flag(
            format!("{label} acceptance within [0.1, 0.7]"),
            (0.1..=0.7).contains(&run.stats.acceptance_rate),
            format!("{:.3}", run.stats.acceptance_rate),
        ));
        Ok(checks)
    };
    run().unwrap_or_else(|e| vec![Check::failed(label, opts.max_fraction, &e)])
}

fn random_antisym(rng: &mut ChaCha8Rng, dim: usize) -> Result<AntisymMatrix> {
    let mut draw = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut upper = vec![];
    for _ in 0..dim * dim {
        upper.push(draw());
    }
    Ok(AntisymMatrix::from_upper(dim, |i, j| upper[i * dim + j]))
}

/// `Pf^2 = det`, `Pf(B A B^T) = Pf(A) det(B)` and the sign flip under a
/// simultaneous row/column swap, on random complex matrices of even
/// dimension 2..12 (odd dimensions: `Pf = det = 0`).
pub fn pfaffian_identities(tolerance: f64, trials: usize, seed: u64) -> SuiteReport {
    timed("identities", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checks = vec![];
        for dim in 2..=12usize {
            let mut sq: f64 = 0.0;
            let mut cong: f64 = 0.0;
            let mut swap_exact = true;
            let mut swap_rel: f64 = 0.0;
            let mut odd_zero = true;
            let mut run = || -> Result<()> {
                for _ in 0..trials {
                    let a = random_antisym(&mut rng, dim)?;
                    let pf = pfaffian(&a)?;
                    if dim % 2 == 1 {
                        odd_zero &= pf == Complex64::new(0.0, 0.0);
                        continue;
                    }
                    let det = determinant(a.as_matrix());
                    sq = sq.max(rel(pf * pf, det));
                    let b = DMatrix::from_fn(dim, dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                    let lhs = pfaffian(&a.congruence(&b)?)?;
                    cong = cong.max(rel(lhs, pf * determinant(&b)));
                    let (i, j) = (rng.random_range(0..dim), rng.random_range(0..dim));
                    if i != j {
                        let mut s = a.clone();
                        s.swap_pair(i, j);
                        let ps = pfaffian(&s)?;
                        swap_exact &= ps == -pf;
                        swap_rel = swap_rel.max(rel(-ps, pf));
                    }
                }
                Ok(())
            };
            if let Err(e) = run() {
                checks.push(Check::failed(format!("dim {dim}"), tolerance, &e));
                continue;
            }
            if dim % 2 == 1 {
                checks.push(Check::flag(format!("dim {dim} Pf = 0"), odd_zero, ""));
                continue;
            }
            checks.push(Check::below(format!("dim {dim} Pf^2 = det"), sq, tolerance));
            checks.push(Check::below(format!("dim {dim} Pf(B A B^T) = Pf(A) det B"), cong, tolerance));
            checks.push(Check::flag(
                format!("dim {dim} pair swap flips sign"),
                swap_exact,
                format!("max rel {swap_rel:.1e}"),
            ));
        }
        checks
    })
}
