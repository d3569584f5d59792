//! Reference values computed without skew-orthogonal polynomials: direct
//! quadrature of the eigenvalue integral for small `N` and Metropolis
//! sampling for larger `N`.

pub mod brute;
pub mod mcmc;

pub use brute::{
    brute_force_correlator, brute_force_partition, brute_force_real_correlator, brute_force_real_partition, one_body,
    oracle_grid, two_body, with_refinement, Estimate,
};
pub use mcmc::{
    density_compare, integrated_autocorrelation, joint_log_density, mcmc_chains, mcmc_sample, BinCheck, ChainStats,
    DensityReport, EigenConfig, HistogramSpec, McmcOptions, McmcRun,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::{char_poly_expectation, partition_function, Correlator};
    use crate::numerics::QuadratureRule;
    use crate::skewortho::{chgse_skew_polys, gse_skew_polys};
    use crate::weights::{chgse_weight, gse_weight, projected_chgse, projected_gse};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn n1_gse_partition_is_r0() {
        let w = gse_weight(1, 0.5).unwrap();
        let g = oracle_grid(&w, 64, 3).unwrap();
        let z = brute_force_partition(&w, 1, &[], &g).unwrap();
        assert!((z.re - 2.170803).abs() < 1e-6, "{z}");
    }

    #[test]
    fn n2_gse_partition_matches_pfaffian() {
        let w = gse_weight(2, 0.5).unwrap();
        let b = gse_skew_polys(2, 0.5, 6).unwrap();
        let masses = [c(0.3, 0.2)];
        let est = with_refinement(&w, 64, 7, 1e-7, |g| brute_force_partition(&w, 2, &masses, g)).unwrap();
        let pf = partition_function(&b, 2, &masses).unwrap().value;
        assert!((est.value - pf).norm() / pf.norm() < 1e-7, "{} vs {pf}", est.value);
    }

    #[test]
    fn chgse_correlator_matches_pfaffian() {
        let w = chgse_weight(1, 0.5, 1).unwrap();
        let b = chgse_skew_polys(1, 0.5, 1, 4).unwrap();
        let masses = [c(0.6, 0.0)];
        let z = c(0.4, 0.3);
        let brute = brute_force_correlator(&w, 1, &[z], &masses, &oracle_grid(&w, 64, 6).unwrap()).unwrap();
        let pf = Correlator::new(&b, &w, 1, &masses).unwrap().eval(&[z]).unwrap().value;
        assert!((brute - pf).norm() / pf.norm() < 1e-7, "{brute} vs {pf}");
    }

    #[test]
    fn real_line_charpoly_matches() {
        let rule = QuadratureRule::new(-12.0, 12.0, 120).unwrap();
        let m = [c(0.5, 0.1)];
        let wb = projected_gse(2);
        let b = gse_skew_polys(2, 1.0, 5).unwrap();
        let ratio = brute_force_real_partition(&wb, 2, &m, &rule).unwrap()
            / brute_force_real_partition(&wb, 2, &[], &rule).unwrap();
        let pf = char_poly_expectation(&b, 2, &m).unwrap().value;
        assert!((ratio - pf).norm() / pf.norm() < 1e-10);
        let wb = projected_chgse(2, 1);
        let b = chgse_skew_polys(2, 0.0, 1, 5).unwrap();
        let rule = QuadratureRule::new(0.0, 6.0, 80).unwrap();
        let ratio = brute_force_real_partition(&wb, 2, &m, &rule).unwrap()
            / brute_force_real_partition(&wb, 2, &[], &rule).unwrap();
        let pf = char_poly_expectation(&b, 2, &m).unwrap().value;
        assert!((ratio - pf).norm() / pf.norm() < 1e-10, "{ratio} vs {pf}");
    }

    #[test]
    fn refinement_flags_coarse_grids() {
        let w = gse_weight(2, 0.5).unwrap();
        let r = with_refinement(&w, 6, 4, 1e-12, |g| brute_force_partition(&w, 2, &[], g));
        assert!(matches!(r, Err(crate::Error::Accuracy { .. })));
    }

    #[test]
    fn config_validation_and_axis_density() {
        assert!(EigenConfig::new(vec![c(0.1, -0.2)], false).is_err());
        assert!(EigenConfig::new(vec![c(-0.1, 0.2)], true).is_err());
        let w = gse_weight(2, 0.5).unwrap();
        let cfg = EigenConfig { z: vec![c(0.1, 0.0), c(0.2, 0.3)] };
        assert_eq!(joint_log_density(&w, &cfg, &[]).unwrap(), f64::NEG_INFINITY);
        assert!(joint_log_density(&w, &cfg, &[c(0.1, 0.1)]).is_err());
    }

    #[test]
    fn chains_are_reproducible() {
        let w = gse_weight(2, 0.5).unwrap();
        let opts = McmcOptions { steps: 200, burn_in: 100, thin: 10, seed: 7, target_acceptance: 0.3 };
        let a = mcmc_sample(&w, 2, &[], &opts).unwrap();
        let b = mcmc_sample(&w, 2, &[], &opts).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.samples.len(), 20);
    }

    #[test]
    fn n1_sampler_matches_density() {
        let w = gse_weight(1, 0.5).unwrap();
        let b = gse_skew_polys(1, 0.5, 2).unwrap();
        let opts = McmcOptions { steps: 100_000, burn_in: 5_000, thin: 10, seed: 3, target_acceptance: 0.3 };
        let run = mcmc_sample(&w, 1, &[], &opts).unwrap();
        assert!((run.stats.acceptance_rate - 0.3).abs() < 0.1);
        let corr = Correlator::new(&b, &w, 1, &[]).unwrap();
        let spec = HistogramSpec::from_samples(&run.samples, false, 12, 8).unwrap();
        let rep = density_compare(
            &run.samples,
            false,
            |z| Ok(corr.eval(&[z])?.value.re),
            &spec,
            run.stats.autocorrelation_time,
            20.0,
        )
        .unwrap();
        assert!(rep.used_bins > 30);
        assert!(rep.passes(0.05), "{} of {} bins, max |z| {}", rep.over_three_sigma, rep.used_bins, rep.max_abs_z);
    }

    #[test]
    fn autocorrelation_of_white_noise_is_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        assert!((integrated_autocorrelation(&v) - 1.0).abs() < 0.1);
    }
}
