//! Monte Carlo sweeps over the noise and kernel-width settings.
//!
//! Every replicate is a pure function of `(master seed, sweep index,
//! replicate index)`, so results do not depend on scheduling.

mod presets;
mod report;
mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{xi_corollary1, xi_theorem1, BoundInputs};
use crate::error::{Error, Result};
use crate::estimators::{
    auto_grid_points, lad_estimate, mcc_estimate, mse_estimate, tls_estimate_weighted, EstimateResult, Estimator,
    MccConfig, MccSolver,
};
use crate::model::{
    generate_fir_dataset, generate_scalar_dataset, CleanSet, EivDataset, GaussianMixtureSpec, InputSampler,
    NoisePlacement,
};
use crate::rng;

pub use presets::{preset, PRESET_NAMES};
pub use report::{read_summary_csv, summary_csv_string, write_manifest, write_summary_csv, Manifest, SUMMARY_HEADER};
pub use verify::{verify_bound_property, VerifyOptions, VerifyReport};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    #[default]
    Scalar,
    Fir,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    MuU,
    MuV,
    /// Outlier weight of both noises (β tied to α).
    Alpha,
    SigmaKernel,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::MuU => "mu_u",
            SweepParameter::MuV => "mu_v",
            SweepParameter::Alpha => "alpha",
            SweepParameter::SigmaKernel => "sigma_kernel",
        }
    }
}

/// How the MCC kernel width is chosen in each replicate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum KernelWidth {
    Fixed { sigma: f64 },
    /// `σ = λ·threshold` from the replicate's realized clean set; `fallback`
    /// is used where that is undefined (no clean majority, or a zero
    /// threshold).
    Corollary1 { fallback: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// One entry for the scalar model, the tap weights for FIR.
    pub w0: Vec<f64>,
    pub n: usize,
    pub runs: usize,
    /// Scalar input distribution.
    pub input: InputSampler,
    /// FIR input series variance.
    pub input_variance: f64,
    pub placement: NoisePlacement,
    pub alpha: f64,
    pub beta: f64,
    pub mu_u: f64,
    pub mu_v: f64,
    pub var_u: f64,
    pub var_v: f64,
    pub eps_u: f64,
    pub eps_v: f64,
    pub lambda: f64,
    pub kernel: KernelWidth,
    pub estimators: Vec<Estimator>,
    pub mcc: MccConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Scalar,
            w0: vec![3.0],
            n: 1000,
            runs: 100,
            input: InputSampler::default(),
            input_variance: 1.0,
            placement: NoisePlacement::default(),
            alpha: 0.15,
            beta: 0.15,
            mu_u: 10.0,
            mu_v: 10.0,
            var_u: 0.001,
            var_v: 0.001,
            eps_u: 0.07,
            eps_v: 0.07,
            lambda: 1.2,
            kernel: KernelWidth::Corollary1 { fallback: 0.25 },
            estimators: Estimator::ALL.to_vec(),
            mcc: MccConfig {
                solver: MccSolver::Grid,
                ..MccConfig::default()
            },
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn u_spec(&self) -> Result<GaussianMixtureSpec> {
        GaussianMixtureSpec::new(self.alpha, self.mu_u, self.var_u)
    }

    pub fn v_spec(&self) -> Result<GaussianMixtureSpec> {
        GaussianMixtureSpec::new(self.beta, self.mu_v, self.var_v)
    }

    /// Output-to-input noise variance ratio handed to TLS.
    pub fn noise_ratio(&self) -> Result<f64> {
        let (vu, vv) = (self.u_spec()?.implied_variance(), self.v_spec()?.implied_variance());
        Ok(if vu == 0.0 { f64::INFINITY } else { vv / vu })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.n == 0 {
            return bad("sample count must be at least 1".into());
        }
        if self.w0.is_empty() || self.w0.iter().any(|w| !w.is_finite()) {
            return bad("w0 must be nonempty and finite".into());
        }
        if self.scenario == Scenario::Scalar && self.w0.len() != 1 {
            return bad(format!("scalar scenario needs one weight, got {}", self.w0.len()));
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected".into());
        }
        if !(self.lambda > 1.0) {
            return bad(format!("lambda must exceed 1, got {}", self.lambda));
        }
        match self.kernel {
            KernelWidth::Fixed { sigma: s } | KernelWidth::Corollary1 { fallback: s } if !(s.is_finite() && s > 0.0) => {
                return bad(format!("kernel width must be positive, got {s}"));
            }
            _ => {}
        }
        self.u_spec()?;
        self.v_spec()?;
        self.input.validate()?;
        self.mcc.validate()
    }

    fn apply(&mut self, param: SweepParameter, value: f64) {
        match param {
            SweepParameter::MuU => self.mu_u = value,
            SweepParameter::MuV => self.mu_v = value,
            SweepParameter::Alpha => {
                self.alpha = value;
                self.beta = value;
            }
            SweepParameter::SigmaKernel => self.kernel = KernelWidth::Fixed { sigma: value },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub sweep_parameter: SweepParameter,
    pub values: Vec<f64>,
    pub fixed: ExperimentConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidArgument("sweep has no values".into()));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("sweep values must be strictly increasing".into()));
        }
        for &v in &self.values {
            self.point_config(v).validate()?;
        }
        Ok(())
    }

    pub fn point_config(&self, value: f64) -> ExperimentConfig {
        let mut cfg = self.fixed.clone();
        cfg.apply(self.sweep_parameter, value);
        cfg
    }
}

/// One summary line: an estimator at one sweep value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub estimator: Estimator,
    /// Of `w_hat` (scalar) or `‖w_hat − w0‖²` (FIR).
    pub mean: f64,
    pub std: f64,
    pub runs_ok: usize,
    /// Mean bound over replicates where it exists; absent when none does.
    pub xi: Option<f64>,
    /// The bound existed in every replicate.
    pub xi_admissible: bool,
    pub mean_m: f64,
    pub mean_c: Option<f64>,
    /// `w0` (scalar) or `‖w0‖` (FIR).
    pub w0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub name: String,
    pub scenario: Scenario,
    pub sweep_parameter: SweepParameter,
    pub runs: usize,
    pub rows: Vec<SummaryRow>,
}

impl SweepSummary {
    pub fn row(&self, sweep_value: f64, estimator: Estimator) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.estimator == estimator)
    }

    pub fn column(&self, estimator: Estimator) -> Vec<&SummaryRow> {
        self.rows.iter().filter(|r| r.estimator == estimator).collect()
    }
}

/// Sample mean and `n − 1` standard deviation; deviation is 0 below two
/// values, and both are NaN for none.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Outcome of one replicate at one sweep value.
#[derive(Clone, Debug, PartialEq)]
pub struct Replicate {
    pub m: usize,
    pub c: Option<f64>,
    pub sigma: f64,
    pub xi: Option<f64>,
    /// Metric per configured estimator, `None` on failure.
    pub metrics: Vec<(Estimator, Option<f64>)>,
}

fn kernel_width(cfg: &ExperimentConfig, n: usize, clean: &CleanSet) -> (f64, Option<f64>) {
    let w0_abs = cfg.w0[0].abs();
    let theorem = |sigma: f64| {
        let mut inputs = BoundInputs::from_clean_set(n, clean, w0_abs);
        inputs.sigma = Some(sigma);
        xi_theorem1(&inputs).ok().and_then(|r| r.xi)
    };
    match cfg.kernel {
        KernelWidth::Fixed { sigma } => (sigma, theorem(sigma)),
        KernelWidth::Corollary1 { fallback } => {
            let c = clean.c.unwrap_or(0.0);
            match xi_corollary1(n, clean.m, cfg.lambda, c, clean.eps_u, clean.eps_v, w0_abs) {
                Ok(rep) if rep.admissible => (rep.sigma.unwrap_or(fallback), rep.xi),
                // Zero clean noise: any width is admissible.
                _ => (fallback, theorem(fallback)),
            }
        }
    }
}

fn mcc_config(cfg: &ExperimentConfig, sigma: f64, seed: u64, design: &crate::model::Design<'_>) -> MccConfig {
    let mut mcc = cfg.mcc.clone();
    mcc.sigma = sigma;
    mcc.seed = seed;
    if mcc.solver == MccSolver::Grid {
        let (lo, hi) = mcc.window(design);
        mcc.grid_points = auto_grid_points(design, sigma, lo, hi, mcc.grid_points);
    }
    mcc
}

fn estimate(
    estimator: Estimator,
    design: &crate::model::Design<'_>,
    noise_ratio: f64,
    mcc: impl FnOnce() -> MccConfig,
) -> Result<EstimateResult> {
    match estimator {
        Estimator::Mse => mse_estimate(design),
        Estimator::Lad => lad_estimate(design),
        Estimator::Tls => tls_estimate_weighted(design, noise_ratio),
        Estimator::Mcc => mcc_estimate(design, &mcc()),
    }
}

/// Runs one replicate; `point` indexes the sweep value.
pub fn run_replicate(cfg: &ExperimentConfig, point: usize, replicate: usize) -> Result<Replicate> {
    let idx = [point as u64, replicate as u64];
    let data_seed = rng::derive_seed(cfg.seed, "data", &idx);
    let mcc_seed = rng::derive_seed(cfg.seed, "mcc", &idx);
    let (u, v) = (cfg.u_spec()?, cfg.v_spec()?);
    let noise_ratio = cfg.noise_ratio()?;

    let dataset: Box<dyn EivDataset + Send + Sync> = match cfg.scenario {
        Scenario::Scalar => Box::new(generate_scalar_dataset(cfg.w0[0], &cfg.input, &u, &v, cfg.n, data_seed)?),
        Scenario::Fir => Box::new(generate_fir_dataset(
            &cfg.w0,
            cfg.n,
            cfg.input_variance,
            &u,
            &v,
            cfg.placement,
            data_seed,
        )?),
    };
    let design = dataset.design();
    let clean = dataset.clean_set(cfg.eps_u, cfg.eps_v)?;

    let (sigma, xi) = match cfg.scenario {
        Scenario::Scalar => kernel_width(cfg, cfg.n, &clean),
        // No bound theory for the vector model.
        Scenario::Fir => match cfg.kernel {
            KernelWidth::Fixed { sigma } | KernelWidth::Corollary1 { fallback: sigma } => (sigma, None),
        },
    };

    let metrics = cfg
        .estimators
        .iter()
        .map(|&e| {
            let res = estimate(e, &design, noise_ratio, || mcc_config(cfg, sigma, mcc_seed, &design)).ok();
            let metric = res.map(|r| match cfg.scenario {
                Scenario::Scalar => r.scalar(),
                Scenario::Fir => r.w_hat.iter().zip(&cfg.w0).map(|(a, b)| (a - b).powi(2)).sum(),
            });
            (e, metric.filter(|m| m.is_finite()))
        })
        .collect();

    Ok(Replicate {
        m: clean.m,
        c: clean.c,
        sigma,
        xi,
        metrics,
    })
}

fn summarize(spec: &SweepSpec, value: f64, reps: &[Replicate]) -> Vec<SummaryRow> {
    let cfg = &spec.fixed;
    let w0 = match cfg.scenario {
        Scenario::Scalar => cfg.w0[0],
        Scenario::Fir => cfg.w0.iter().map(|w| w * w).sum::<f64>().sqrt(),
    };
    let xis: Vec<f64> = reps.iter().filter_map(|r| r.xi).collect();
    let xi = (!xis.is_empty()).then(|| mean_std(&xis).0);
    let xi_admissible = xis.len() == reps.len();
    let mean_m = reps.iter().map(|r| r.m as f64).sum::<f64>() / reps.len() as f64;
    let cs: Vec<f64> = reps.iter().filter_map(|r| r.c).collect();
    let mean_c = (!cs.is_empty()).then(|| mean_std(&cs).0);

    cfg.estimators
        .iter()
        .enumerate()
        .map(|(k, &estimator)| {
            let vals: Vec<f64> = reps.iter().filter_map(|r| r.metrics[k].1).collect();
            let (mean, std) = mean_std(&vals);
            SummaryRow {
                sweep_param: spec.sweep_parameter.name().to_string(),
                sweep_value: value,
                estimator,
                mean,
                std,
                runs_ok: vals.len(),
                xi,
                xi_admissible,
                mean_m,
                mean_c,
                w0,
            }
        })
        .collect()
}

/// Runs every replicate of every sweep value in parallel and aggregates in
/// sweep order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    spec.validate()?;
    let runs = spec.fixed.runs;
    let configs: Vec<ExperimentConfig> = spec.values.iter().map(|&v| spec.point_config(v)).collect();
    let tasks: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|p| (0..runs).map(move |r| (p, r)))
        .collect();
    let outcomes: Vec<Replicate> = tasks
        .par_iter()
        .map(|&(p, r)| run_replicate(&configs[p], p, r))
        .collect::<Result<_>>()?;

    let rows = outcomes
        .chunks(runs)
        .zip(&spec.values)
        .flat_map(|(reps, &value)| summarize(spec, value, reps))
        .collect();
    Ok(SweepSummary {
        name: spec.name.clone(),
        scenario: spec.fixed.scenario,
        sweep_parameter: spec.sweep_parameter,
        runs,
        rows,
    })
}

fn require(spec: &SweepSpec, scenario: Scenario, params: &[SweepParameter]) -> Result<()> {
    if spec.fixed.scenario != scenario || !params.contains(&spec.sweep_parameter) {
        return Err(Error::InvalidArgument(format!(
            "sweep {:?} over {} does not fit this runner",
            spec.fixed.scenario,
            spec.sweep_parameter.name()
        )));
    }
    Ok(())
}

/// Scalar sweep over an outlier location.
pub fn run_scalar_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    require(spec, Scenario::Scalar, &[SweepParameter::MuU, SweepParameter::MuV])?;
    run_sweep(spec)
}

/// Scalar sweep over the outlier weight, `β = α`.
pub fn run_alpha_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    require(spec, Scenario::Scalar, &[SweepParameter::Alpha])?;
    run_sweep(spec)
}

/// Scalar sweep over the MCC kernel width.
pub fn run_sigma_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    require(spec, Scenario::Scalar, &[SweepParameter::SigmaKernel])?;
    run_sweep(spec)
}

/// FIR sweep; reports squared weight error norms.
pub fn run_fir_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    require(
        spec,
        Scenario::Fir,
        &[SweepParameter::MuU, SweepParameter::MuV, SweepParameter::Alpha, SweepParameter::SigmaKernel],
    )?;
    run_sweep(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(param: SweepParameter, values: Vec<f64>, fixed: ExperimentConfig) -> SweepSpec {
        SweepSpec {
            name: "test".into(),
            sweep_parameter: param,
            values,
            fixed,
        }
    }

    #[test]
    fn sample_deviation_convention() {
        assert_eq!(mean_std(&[2.5; 7]), (2.5, 0.0));
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_std(&[]).0.is_nan());
    }

    #[test]
    fn noise_free_sweep_is_exact() {
        let fixed = ExperimentConfig {
            alpha: 0.0,
            beta: 0.0,
            var_u: 0.0,
            var_v: 0.0,
            eps_u: 0.0,
            eps_v: 0.0,
            n: 50,
            runs: 3,
            ..ExperimentConfig::default()
        };
        let s = run_scalar_sweep(&small(SweepParameter::MuU, vec![0.0, 5.0], fixed)).unwrap();
        assert_eq!(s.rows.len(), 8);
        for r in &s.rows {
            assert!((r.mean - 3.0).abs() < 1e-7, "{r:?}");
            assert_eq!(r.runs_ok, 3);
            assert_eq!(r.mean_m, 50.0);
            // All-clean, noise-free: the bound collapses to zero.
            assert_eq!(r.xi, Some(0.0));
            assert!(r.xi_admissible);
        }
        for e in [Estimator::Mse, Estimator::Lad, Estimator::Tls] {
            assert!((s.row(0.0, e).unwrap().mean - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_free_fir_sweep() {
        let fixed = ExperimentConfig {
            scenario: Scenario::Fir,
            w0: crate::model::fir_reference_weights(),
            n: 300,
            runs: 2,
            alpha: 0.0,
            beta: 0.0,
            var_u: 0.0,
            var_v: 0.0,
            kernel: KernelWidth::Fixed { sigma: 0.5 },
            mcc: MccConfig::default(),
            ..ExperimentConfig::default()
        };
        let s = run_fir_sweep(&small(SweepParameter::MuV, vec![0.0], fixed)).unwrap();
        for r in &s.rows {
            assert!(r.mean < 1e-10, "{r:?}");
            assert!(r.xi.is_none() && !r.xi_admissible);
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let fixed = ExperimentConfig {
            n: 200,
            runs: 6,
            ..ExperimentConfig::default()
        };
        let spec = small(SweepParameter::MuU, vec![0.0, 10.0], fixed);
        let a = run_sweep(&spec).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = single.install(|| run_sweep(&spec).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn runners_check_their_sweep_kind() {
        let spec = small(SweepParameter::Alpha, vec![0.1], ExperimentConfig::default());
        assert!(run_scalar_sweep(&spec).is_err());
        assert!(run_fir_sweep(&spec).is_err());
        let bad = small(SweepParameter::MuU, vec![2.0, 1.0], ExperimentConfig::default());
        assert!(bad.validate().is_err());
    }

    #[test]
    fn alpha_sweep_ties_beta() {
        let spec = small(SweepParameter::Alpha, vec![0.4], ExperimentConfig::default());
        let cfg = spec.point_config(0.4);
        assert_eq!((cfg.alpha, cfg.beta), (0.4, 0.4));
    }

    #[test]
    fn heavy_contamination_loses_the_bound() {
        let fixed = ExperimentConfig {
            n: 300,
            runs: 4,
            mu_u: 5.0,
            mu_v: 5.0,
            ..ExperimentConfig::default()
        };
        let s = run_alpha_sweep(&small(SweepParameter::Alpha, vec![0.05, 0.9], fixed)).unwrap();
        assert!(s.row(0.05, Estimator::Mcc).unwrap().xi_admissible);
        let heavy = s.row(0.9, Estimator::Mcc).unwrap();
        assert!(heavy.xi.is_none() && !heavy.xi_admissible);
        assert!(heavy.mean_m < 150.0);
    }

    #[test]
    fn single_tap_fir_matches_scalar_model() {
        let base = ExperimentConfig {
            n: 1000,
            runs: 40,
            input: InputSampler::Gaussian { variance: 1.0 },
            input_variance: 1.0,
            alpha: 0.1,
            beta: 0.1,
            mu_u: 4.0,
            mu_v: 4.0,
            var_u: 0.01,
            var_v: 0.01,
            estimators: vec![Estimator::Mse, Estimator::Mcc],
            kernel: KernelWidth::Fixed { sigma: 0.5 },
            ..ExperimentConfig::default()
        };
        let scalar = run_sweep(&small(SweepParameter::MuV, vec![4.0], base.clone())).unwrap();
        let fir = run_sweep(&small(
            SweepParameter::MuV,
            vec![4.0],
            ExperimentConfig {
                scenario: Scenario::Fir,
                ..base
            },
        ))
        .unwrap();
        for e in [Estimator::Mse, Estimator::Mcc] {
            let s = scalar.row(4.0, e).unwrap();
            let r = s.runs_ok as f64;
            let mse = (s.mean - 3.0).powi(2) + s.std * s.std * (r - 1.0) / r;
            let f = fir.row(4.0, e).unwrap().mean;
            assert!((mse - f).abs() <= 0.25 * f.max(mse) + 1e-4, "{e}: scalar {mse} vs fir {f}");
        }
    }
}
