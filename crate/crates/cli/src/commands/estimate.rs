use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use mcc_eiv::estimators::{
    auto_grid_points, lad_estimate, mcc_estimate, mse_estimate, tls_estimate_weighted,
};
use mcc_eiv::io::{load_dataset, DatasetMetadata};
use mcc_eiv::{rng, Design, EstimateResult, Estimator, MccConfig, MccSolver};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::parse_name;
use crate::config::Common;
use crate::output::{write_records, Record};

#[derive(clap::Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EstimateArgs {
    /// Dataset CSV; a `.meta.json` sidecar next to it is read when present.
    #[arg(long)]
    pub data: Option<std::path::PathBuf>,
    /// Comma-separated subset of mse, lad, tls, mcc [default: all].
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<String>>,
    /// MCC kernel width [default: 1].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// MCC solver: fixed-point, grid, eda or gradient-ascent.
    #[arg(long)]
    pub solver: Option<String>,
    /// Output-to-input noise variance ratio for TLS [default: from the
    /// sidecar, else 1].
    #[arg(long)]
    pub noise_ratio: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub search_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub search_hi: Option<f64>,
    /// Minimum grid size; raised to resolve the kernel width.
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

fn sidecar_ratio(meta: Option<&DatasetMetadata>) -> Option<f64> {
    meta?.settings.get("noise_ratio")?.as_f64()
}

pub fn mcc_config(args: &EstimateArgs, seed: u64) -> Result<MccConfig> {
    let mut cfg = MccConfig::default();
    if let Some(s) = args.sigma {
        cfg.sigma = s;
    }
    if let Some(s) = &args.solver {
        cfg.solver = parse_name::<MccSolver>("solver", s)?;
    }
    cfg.search_lo = args.search_lo;
    cfg.search_hi = args.search_hi;
    if let Some(g) = args.grid_points {
        cfg.grid_points = g;
    }
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    if let Some(t) = args.tol {
        cfg.tol = t;
    }
    cfg.seed = rng::derive_seed(seed, "mcc", &[0, 0]);
    cfg.validate()?;
    Ok(cfg)
}

fn fit(e: Estimator, design: &Design<'_>, noise_ratio: f64, mcc: &MccConfig) -> mcc_eiv::Result<EstimateResult> {
    match e {
        Estimator::Mse => mse_estimate(design),
        Estimator::Lad => lad_estimate(design),
        Estimator::Tls => tls_estimate_weighted(design, noise_ratio),
        Estimator::Mcc => {
            let mut cfg = mcc.clone();
            if cfg.solver == MccSolver::Grid {
                let (lo, hi) = cfg.window(design);
                cfg.grid_points = auto_grid_points(design, cfg.sigma, lo, hi, cfg.grid_points);
            }
            mcc_estimate(design, &cfg)
        }
    }
}

pub fn columns(p: usize) -> Vec<String> {
    let mut cols = vec!["estimator".to_string(), "failed".to_string()];
    if p == 1 {
        cols.push("w_hat".into());
    } else {
        cols.extend((0..p).map(|k| format!("w_hat_{k}")));
    }
    cols.extend(
        ["objective", "iterations", "converged", "starts_tried", "boundary_hit", "error"]
            .map(str::to_string),
    );
    cols
}

pub fn run(args: &EstimateArgs, common: &Common) -> Result<ExitCode> {
    let Some(path) = &args.data else {
        bail!("estimate needs --data <dataset.csv>");
    };
    let estimators: Vec<Estimator> = match &args.estimators {
        Some(list) => list
            .iter()
            .map(|s| s.trim().parse::<Estimator>())
            .collect::<mcc_eiv::Result<_>>()?,
        None => Estimator::ALL.to_vec(),
    };
    if estimators.is_empty() {
        bail!("no estimators selected");
    }
    let (ds, meta) = load_dataset(path).with_context(|| format!("loading {}", path.display()))?;
    let noise_ratio = args.noise_ratio.or(sidecar_ratio(meta.as_ref())).unwrap_or(1.0);
    if noise_ratio.is_nan() || noise_ratio < 0.0 {
        bail!("noise ratio must be nonnegative, got {noise_ratio}");
    }
    let mcc = mcc_config(args, common.seed)?;
    let design = ds.as_dataset().design();

    let records: Vec<Record> = estimators
        .iter()
        .map(|&e| match fit(e, &design, noise_ratio, &mcc) {
            Ok(r) => {
                let mut rec = r.record();
                rec.insert("failed".into(), Value::from(false));
                rec
            }
            Err(err) => {
                let mut rec = Record::new();
                rec.insert("estimator".into(), Value::from(e.name()));
                rec.insert("failed".into(), Value::from(true));
                rec.insert("error".into(), Value::from(err.to_string()));
                rec
            }
        })
        .collect();
    write_records(common.output.as_deref(), common.format, &columns(design.p()), &records)?;
    Ok(ExitCode::SUCCESS)
}
