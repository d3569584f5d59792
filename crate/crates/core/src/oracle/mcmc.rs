//! Metropolis sampling of the joint eigenvalue density and histogram
//! comparison against a predicted one-point function.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;
use crate::weights::WeightSpec;

/// Eigenvalues of one configuration, stored as representatives in the upper
/// half plane (first quadrant for chiral ensembles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    pub z: Vec<Complex64>,
}

impl EigenConfig {
    pub fn new(z: Vec<Complex64>, chiral: bool) -> Result<Self> {
        for (i, p) in z.iter().enumerate() {
            if !(p.im > 0.0) || (chiral && !(p.re > 0.0)) {
                let domain = if chiral { "first quadrant" } else { "upper half plane" };
                return Err(Error::Validation(format!("eigenvalue {i} = {p} is not in the open {domain}")));
            }
        }
        Ok(EigenConfig { z })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

fn in_domain(z: Complex64, chiral: bool) -> bool {
    z.im > 0.0 && (!chiral || z.re > 0.0)
}

fn square(z: Complex64, chiral: bool) -> Complex64 {
    if chiral {
        z * z
    } else {
        z
    }
}

fn check_real_masses(masses: &[Complex64]) -> Result<()> {
    if let Some(m) = masses.iter().find(|m| m.im != 0.0) {
        return Err(Error::Validation(format!(
            "sampling needs a non-negative density; mass {m} is not real"
        )));
    }
    Ok(())
}

/// Log of the terms of the joint density that involve eigenvalue `i`.
fn local_log_density(w: &WeightSpec, z: &[Complex64], i: usize, masses: &[Complex64]) -> f64 {
    let chiral = w.chiral();
    let p = z[i];
    if !in_domain(p, chiral) {
        return f64::NEG_INFINITY;
    }
    let u = square(p, chiral);
    let mut acc = w.eval_z(p).ln() + (u - u.conj()).norm_sqr().ln();
    for &m in masses {
        acc += (square(m, chiral) - u).norm_sqr().ln();
    }
    for (j, &q) in z.iter().enumerate() {
        if j != i {
            let v = square(q, chiral);
            acc += ((u - v).norm_sqr() * (u - v.conj()).norm_sqr()).ln();
        }
    }
    acc
}

/// Unnormalized log joint density of a configuration with real masses;
/// `-inf` when an eigenvalue lies on a symmetry axis.
pub fn joint_log_density(w: &WeightSpec, config: &EigenConfig, masses: &[Complex64]) -> Result<f64> {
    check_real_masses(masses)?;
    let chiral = w.chiral();
    let z = &config.z;
    let mut acc = 0.0;
    for (i, &p) in z.iter().enumerate() {
        if !in_domain(p, chiral) {
            return Ok(f64::NEG_INFINITY);
        }
        let u = square(p, chiral);
        acc += w.eval_z(p).ln() + (u - u.conj()).norm_sqr().ln();
        for &m in masses {
            acc += (square(m, chiral) - u).norm_sqr().ln();
        }
        for &q in &z[..i] {
            let v = square(q, chiral);
            acc += ((u - v).norm_sqr() * (u - v.conj()).norm_sqr()).ln();
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcOptions {
    /// Number of sweeps after burn-in; each sweep updates every coordinate once.
    pub steps: usize,
    pub burn_in: usize,
    /// Keep every `thin`-th sweep.
    pub thin: usize,
    pub seed: u64,
    /// Target acceptance rate for step-size tuning during burn-in.
    pub target_acceptance: f64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions { steps: 100_000, burn_in: 10_000, thin: 10, seed: 1, target_acceptance: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Post burn-in acceptance rate over all single-coordinate moves.
    pub acceptance_rate: f64,
    pub step_x: f64,
    pub step_y: f64,
    /// Integrated autocorrelation time of the retained samples, in samples.
    pub autocorrelation_time: f64,
    pub effective_sample_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct McmcRun {
    pub samples: Vec<EigenConfig>,
    pub stats: ChainStats,
}

struct Chain<'a> {
    w: &'a WeightSpec,
    masses: &'a [Complex64],
    z: Vec<Complex64>,
    rng: ChaCha8Rng,
    step: [f64; 2],
}

impl Chain<'_> {
    /// One sweep; returns accepted counts for x and y moves.
    fn sweep(&mut self) -> [usize; 2] {
        let mut accepted = [0; 2];
        for i in 0..self.z.len() {
            for (axis, acc) in accepted.iter_mut().enumerate() {
                let old = self.z[i];
                let before = local_log_density(self.w, &self.z, i, self.masses);
                let d: f64 = self.rng.sample::<f64, _>(StandardNormal) * self.step[axis];
                let new = if axis == 0 { old + d } else { old + Complex64::new(0.0, d) };
                if !in_domain(new, self.w.chiral()) {
                    continue;
                }
                self.z[i] = new;
                let after = local_log_density(self.w, &self.z, i, self.masses);
                let u: f64 = self.rng.random();
                if after.is_finite() && u.ln() < after - before {
                    *acc += 1;
                } else {
                    self.z[i] = old;
                }
            }
        }
        accepted
    }
}

/// Random-walk Metropolis chain over configurations of `n` eigenvalues,
/// with real masses. Step sizes on each axis are tuned during burn-in.
pub fn mcmc_sample(w: &WeightSpec, n: usize, masses: &[Complex64], opts: &McmcOptions) -> Result<McmcRun> {
    check_real_masses(masses)?;
    if n == 0 {
        return Err(Error::Validation("need at least one eigenvalue".into()));
    }
    if opts.thin == 0 || opts.steps < opts.thin {
        return Err(Error::Validation(format!("steps = {} and thin = {} keep no samples", opts.steps, opts.thin)));
    }
    let decay = w
        .decay()
        .ok_or_else(|| Error::Config("weight has no decay metadata; supply Gaussian scales (sigma_x, sigma_y)".into()))?;
    let chiral = w.chiral();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let z: Vec<Complex64> = (0..n)
        .map(|_| {
            let gx: f64 = rng.sample(StandardNormal);
            let gy: f64 = rng.sample(StandardNormal);
            let x = if chiral { gx.abs() + 0.1 } else { gx } * decay.sigma_x;
            Complex64::new(x, (gy.abs() + 0.1) * decay.sigma_y)
        })
        .collect();
    let mut chain = Chain { w, masses, z, rng, step: [decay.sigma_x, 0.5 * decay.sigma_y] };

    const TUNE_EVERY: usize = 50;
    let mut window = [0usize; 2];
    for s in 0..opts.burn_in {
        let a = chain.sweep();
        window[0] += a[0];
        window[1] += a[1];
        if (s + 1) % TUNE_EVERY == 0 {
            for axis in 0..2 {
                let rate = window[axis] as f64 / (TUNE_EVERY * n) as f64;
                chain.step[axis] *= (2.0 * (rate - opts.target_acceptance)).exp();
            }
            window = [0; 2];
        }
    }

    let mut accepted = 0usize;
    let mut samples = Vec::with_capacity(opts.steps / opts.thin);
    for s in 0..opts.steps {
        let a = chain.sweep();
        accepted += a[0] + a[1];
        if (s + 1) % opts.thin == 0 {
            samples.push(EigenConfig { z: chain.z.clone() });
        }
    }
    let tau = [
        integrated_autocorrelation(&samples.iter().map(|c| c.z.iter().map(|p| p.re * p.re).sum()).collect::<Vec<f64>>()),
        integrated_autocorrelation(&samples.iter().map(|c| c.z.iter().map(|p| p.im * p.im).sum()).collect::<Vec<f64>>()),
    ]
    .into_iter()
    .fold(1.0, f64::max);
    let stats = ChainStats {
        steps: opts.steps,
        burn_in: opts.burn_in,
        thin: opts.thin,
        seed: opts.seed,
        acceptance_rate: accepted as f64 / (2 * n * opts.steps) as f64,
        step_x: chain.step[0],
        step_y: chain.step[1],
        autocorrelation_time: tau,
        effective_sample_estimate: samples.len() as f64 / tau,
    };
    Ok(McmcRun { samples, stats })
}

/// Independent chains in parallel, one seed each.
pub fn mcmc_chains(w: &WeightSpec, n: usize, masses: &[Complex64], opts: &McmcOptions, seeds: &[u64]) -> Result<Vec<McmcRun>> {
    seeds
        .par_iter()
        .map(|&seed| mcmc_sample(w, n, masses, &McmcOptions { seed, ..opts.clone() }))
        .collect()
}

/// Integrated autocorrelation time `1 + 2 sum_t rho(t)` with the automatic
/// window `t <= 5 tau`.
pub fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for t in 1..n / 2 {
        let ct = dev[..n - t].iter().zip(&dev[t..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        tau += 2.0 * ct / c0;
        if t as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Rectangular histogram over the fundamental domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub x_range: (f64, f64),
    pub nx: usize,
    pub y_range: (f64, f64),
    pub ny: usize,
}

impl HistogramSpec {
    /// Box covering the 99.9% quantile of `|x|` and `y` over the samples.
    pub fn from_samples(samples: &[EigenConfig], chiral: bool, nx: usize, ny: usize) -> Result<Self> {
        let mut xs: Vec<f64> = samples.iter().flat_map(|c| c.z.iter().map(|p| p.re.abs())).collect();
        let mut ys: Vec<f64> = samples.iter().flat_map(|c| c.z.iter().map(|p| p.im)).collect();
        if xs.is_empty() {
            return Err(Error::Validation("no samples to histogram".into()));
        }
        let q = |v: &mut Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[((v.len() - 1) as f64 * 0.999) as usize]
        };
        let (xm, ym) = (q(&mut xs), q(&mut ys));
        let x_range = if chiral { (0.0, xm) } else { (-xm, xm) };
        Ok(HistogramSpec { x_range, nx, y_range: (0.0, ym), ny })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinCheck {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub observed: f64,
    pub expected: f64,
    /// `(observed - expected) / sqrt(expected * inflation)`.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub configs: usize,
    pub bins: Vec<BinCheck>,
    /// Bins with enough expected counts to be tested.
    pub used_bins: usize,
    pub over_three_sigma: usize,
    pub fraction_over_three_sigma: f64,
    pub inflation: f64,
    pub max_abs_z: f64,
}

impl DensityReport {
    pub fn passes(&self, max_fraction: f64) -> bool {
        self.used_bins > 0 && self.fraction_over_three_sigma < max_fraction
    }
}

/// Compares histogram counts of `samples` with `configs * fold * int_bin R`,
/// where `fold` counts the symmetric images of the fundamental domain.
/// Bins expecting fewer than `min_expected` counts are skipped; counts are
/// treated as Poisson with variance inflated by `inflation`.
pub fn density_compare<F>(
    samples: &[EigenConfig],
    chiral: bool,
    predicted: F,
    spec: &HistogramSpec,
    inflation: f64,
    min_expected: f64,
) -> Result<DensityReport>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    if spec.nx == 0 || spec.ny == 0 {
        return Err(Error::Validation("histogram needs at least one bin per axis".into()));
    }
    let (x0, x1) = spec.x_range;
    let (y0, y1) = spec.y_range;
    let hx = (x1 - x0) / spec.nx as f64;
    let hy = (y1 - y0) / spec.ny as f64;
    let mut counts = vec![0.0; spec.nx * spec.ny];
    for c in samples {
        for p in &c.z {
            let i = ((p.re - x0) / hx).floor();
            let j = ((p.im - y0) / hy).floor();
            if i >= 0.0 && j >= 0.0 && (i as usize) < spec.nx && (j as usize) < spec.ny {
                counts[i as usize * spec.ny + j as usize] += 1.0;
            }
        }
    }
    let fold = if chiral { 4.0 } else { 2.0 };
    let configs = samples.len() as f64;
    let (gn, gw) = gauss_legendre(4);
    let inflation = inflation.max(1.0);
    let bins: Vec<BinCheck> = (0..spec.nx * spec.ny)
        .into_par_iter()
        .map(|b| {
            let (i, j) = (b / spec.ny, b % spec.ny);
            let (ax, ay) = (x0 + i as f64 * hx, y0 + j as f64 * hy);
            let mut integral = 0.0;
            for (u, wu) in gn.iter().zip(&gw) {
                for (v, wv) in gn.iter().zip(&gw) {
                    let z = Complex64::new(ax + 0.5 * hx * (u + 1.0), ay + 0.5 * hy * (v + 1.0));
                    integral += wu * wv * predicted(z)?;
                }
            }
            integral *= 0.25 * hx * hy;
            let expected = configs * fold * integral;
            let observed = counts[b];
            Ok(BinCheck {
                x: (ax, ax + hx),
                y: (ay, ay + hy),
                observed,
                expected,
                z: (observed - expected) / (expected.abs() * inflation).sqrt(),
            })
        })
        .collect::<Result<_>>()?;
    let used: Vec<&BinCheck> = bins.iter().filter(|b| b.expected >= min_expected).collect();
    let over = used.iter().filter(|b| b.z.abs() > 3.0).count();
    let max_abs_z = used.iter().map(|b| b.z.abs()).fold(0.0, f64::max);
    Ok(DensityReport {
        configs: samples.len(),
        used_bins: used.len(),
        over_three_sigma: over,
        fraction_over_three_sigma: if used.is_empty() { 1.0 } else { over as f64 / used.len() as f64 },
        inflation,
        max_abs_z,
        bins,
    })
}
