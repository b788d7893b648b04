//! Randomized check of the error bound against the grid maximizer.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{xi_theorem1, BoundInputs};
use crate::error::{Error, Result};
use crate::estimators::{mcc_estimate_grid, mcc_objective, MccConfig, MccSolver};
use crate::model::{EivDataset, ScalarEivDataset};
use crate::rng::{self, StreamRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Sampled parameters outside the bound ball per trial.
    pub outside_samples: usize,
    /// Every `corollary2_every`-th trial has noise-free clean samples.
    pub corollary2_every: usize,
    pub max_grid_points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 0,
            outside_samples: 100,
            corollary2_every: 5,
            max_grid_points: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub n: usize,
    pub m: usize,
    pub w0: f64,
    pub sigma: f64,
    pub xi: f64,
    pub w_grid: f64,
    pub combined_eps: f64,
    pub bound_violated: bool,
    pub dominance_violations: usize,
}

impl TrialOutcome {
    /// `|w_grid − w0| / ξ`.
    pub fn margin(&self) -> f64 {
        (self.w_grid - self.w0).abs() / self.xi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub bound_violations: usize,
    pub dominance_violations: usize,
    pub corollary2_trials: usize,
    /// Quantiles 0, 0.5, 0.9, 1 of `|w_grid − w0| / ξ`.
    pub margin_quantiles: [f64; 4],
    pub outcomes: Vec<TrialOutcome>,
}

impl VerifyReport {
    pub fn violations(&self) -> usize {
        self.bound_violations + self.dominance_violations
    }
}

fn signed(rng: &mut StreamRng, magnitude: f64) -> f64 {
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

struct TrialData {
    dataset: ScalarEivDataset,
    eps_u: f64,
    eps_v: f64,
}

/// A scalar dataset with exactly `m` clean samples by construction.
fn trial_data(rng: &mut StreamRng, w0: f64, noise_free_clean: bool) -> TrialData {
    let n = rng.random_range(20..=200usize);
    let m = rng.random_range(n / 2 + 1..=n - 1);
    let (eps_u, eps_v) = if noise_free_clean {
        (0.0, 0.0)
    } else {
        (rng.random_range(0.005..0.2), rng.random_range(0.005..0.2))
    };
    let mut x = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let mag = rng.random_range(0.5..2.0);
        x.push(signed(rng, mag));
        if i < m {
            u.push(if eps_u > 0.0 { rng.random_range(-eps_u..=eps_u) } else { 0.0 });
            v.push(if eps_v > 0.0 { rng.random_range(-eps_v..=eps_v) } else { 0.0 });
        } else {
            // At least one of the two noises leaves its clean band.
            let which = rng.random_range(0..3u8);
            let out = |rng: &mut StreamRng, eps: f64| {
                let mag = eps + rng.random_range(0.01..50.0);
                signed(rng, mag)
            };
            let small = |rng: &mut StreamRng, eps: f64| if eps > 0.0 { rng.random_range(-eps..=eps) } else { 0.0 };
            u.push(if which != 1 { out(rng, eps_u) } else { small(rng, eps_u) });
            v.push(if which != 0 { out(rng, eps_v) } else { small(rng, eps_v) });
        }
    }
    let x_obs = x.iter().zip(&u).map(|(x, u)| x + u).collect();
    let d = x.iter().zip(&v).map(|(x, v)| w0 * x + v).collect();
    TrialData {
        dataset: ScalarEivDataset {
            x: Some(x),
            u: Some(u),
            v: Some(v),
            x_obs,
            d,
            w0: Some(w0),
        },
        eps_u,
        eps_v,
    }
}

fn run_trial(opts: &VerifyOptions, t: usize) -> Result<TrialOutcome> {
    let mut rng = rng::stream(opts.seed, "verify", &[t as u64]);
    let w0 = rng.random_range(-5.0..=5.0);
    let cor2 = opts.corollary2_every > 0 && t % opts.corollary2_every == 0;
    let TrialData { dataset, eps_u, eps_v } = trial_data(&mut rng, w0, cor2);
    let n = dataset.len();
    let clean = dataset.clean_set(eps_u, eps_v)?;
    let mut inputs = BoundInputs::from_clean_set(n, &clean, w0.abs());
    let threshold = crate::bounds::sigma_threshold(n, clean.m, eps_u, eps_v, w0.abs())?;
    let sigma = if cor2 {
        rng.random_range(0.01..1.0)
    } else {
        threshold * (1.0 + rng.random_range(0.01..3.0))
    };
    inputs.sigma = Some(sigma);
    let report = xi_theorem1(&inputs)?;
    let xi = report.xi.ok_or_else(|| {
        Error::SolverFailed(format!(
            "trial {t}: bound inadmissible: {}",
            report.failure_reason.unwrap_or_default()
        ))
    })?;

    let design = dataset.design();
    let max_clean = clean
        .indices
        .iter()
        .map(|&i| dataset.x_obs[i].abs())
        .fold(0.0, f64::max);
    let radius = 2.0 * xi + 1.0;
    let spacing = sigma / (8.0 * max_clean);
    let points = ((2.0 * radius / spacing).ceil() as usize + 1).clamp(1001, opts.max_grid_points);
    let cfg = MccConfig {
        sigma,
        solver: MccSolver::Grid,
        search_lo: Some(w0 - radius),
        search_hi: Some(w0 + radius),
        grid_points: points,
        tol: 1e-10,
        ..MccConfig::default()
    };
    let w_grid = mcc_estimate_grid(&design, &cfg)?.scalar();

    let j0 = mcc_objective(&design, &[w0], sigma);
    let dominance_violations = (0..opts.outside_samples)
        .filter(|_| {
            let dist = xi * (1.0 + rng.random::<f64>());
            let w = w0 + signed(&mut rng, dist);
            mcc_objective(&design, &[w], sigma) >= j0
        })
        .count();

    Ok(TrialOutcome {
        n,
        m: clean.m,
        w0,
        sigma,
        xi,
        w_grid,
        combined_eps: report.combined_eps,
        bound_violated: (w_grid - w0).abs() > xi,
        dominance_violations,
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Random admissible scalar configurations: checks that the global grid
/// maximizer lies within `ξ` of `w0` and that sampled parameters farther
/// than `ξ` score strictly below `w0`.
pub fn verify_bound_property(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let outcomes: Vec<TrialOutcome> = (0..opts.trials)
        .into_par_iter()
        .map(|t| run_trial(opts, t))
        .collect::<Result<_>>()?;
    let mut margins: Vec<f64> = outcomes.iter().map(TrialOutcome::margin).collect();
    margins.sort_by(f64::total_cmp);
    Ok(VerifyReport {
        trials: opts.trials,
        bound_violations: outcomes.iter().filter(|o| o.bound_violated).count(),
        dominance_violations: outcomes.iter().map(|o| o.dominance_violations).sum(),
        corollary2_trials: outcomes.iter().filter(|o| o.combined_eps == 0.0).count(),
        margin_quantiles: [0.0, 0.5, 0.9, 1.0].map(|q| quantile(&margins, q)),
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_count_is_exact_by_construction() {
        for t in 0..30 {
            let mut rng = rng::stream(9, "t", &[t]);
            let td = trial_data(&mut rng, 1.5, t % 2 == 0);
            let cs = td.dataset.clean_set(td.eps_u, td.eps_v).unwrap();
            let n = td.dataset.len();
            assert!(2 * cs.m > n && cs.m < n);
            assert_eq!(cs.indices, (0..cs.m).collect::<Vec<_>>());
            assert!(cs.c.unwrap() > 0.0);
        }
    }

    #[test]
    fn small_run_has_no_violations_and_covers_both_paths() {
        let rep = verify_bound_property(&VerifyOptions {
            trials: 20,
            seed: 5,
            ..VerifyOptions::default()
        })
        .unwrap();
        assert_eq!(rep.violations(), 0);
        assert_eq!(rep.corollary2_trials, 4);
        assert!(rep.margin_quantiles[3] <= 1.0);
        let again = verify_bound_property(&VerifyOptions {
            trials: 20,
            seed: 5,
            ..VerifyOptions::default()
        })
        .unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&s, 0.5), 2.0);
        assert_eq!(quantile(&s, 0.9), 3.6);
        assert_eq!(quantile(&s, 1.0), 4.0);
    }
}
