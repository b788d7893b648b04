use std::fs::File;
use std::io::BufWriter;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use mcc_eiv::experiments::{preset, ExperimentConfig, Scenario};
use mcc_eiv::io::{metadata_path, write_metadata, write_scalar_csv, write_vector_csv, DatasetMetadata};
use mcc_eiv::model::{generate_fir_dataset, generate_scalar_dataset};
use mcc_eiv::{rng, InputSampler};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::parse_name;
use crate::config::{Common, Format};

#[derive(clap::Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GenerateArgs {
    /// `scalar` or `fir`.
    #[arg(long)]
    pub scenario: Option<String>,
    /// True weight; comma-separated taps for `fir`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub w0: Option<Vec<f64>>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Input outlier probability.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Output outlier probability.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu_u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu_v: Option<f64>,
    #[arg(long)]
    pub var_u: Option<f64>,
    #[arg(long)]
    pub var_v: Option<f64>,
    /// Scalar inputs: random sign, magnitude uniform on [input-lo, input-hi].
    #[arg(long)]
    pub input_lo: Option<f64>,
    #[arg(long)]
    pub input_hi: Option<f64>,
    /// Variance of the FIR input series.
    #[arg(long)]
    pub input_variance: Option<f64>,
    /// FIR input-noise placement: `row-event` or `series`.
    #[arg(long)]
    pub placement: Option<String>,
}

/// Resolves the generation settings; FIR defaults follow the FIR study.
pub fn resolve(args: &GenerateArgs, seed: u64) -> Result<ExperimentConfig> {
    let scenario: Scenario = match &args.scenario {
        Some(s) => parse_name("scenario", s)?,
        None => Scenario::Scalar,
    };
    let mut cfg = match scenario {
        Scenario::Scalar => ExperimentConfig::default(),
        Scenario::Fir => preset("fig6-fir")?.fixed,
    };
    cfg.seed = seed;
    if let Some(w) = &args.w0 {
        cfg.w0 = w.clone();
    }
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    set(&mut cfg.alpha, args.alpha);
    set(&mut cfg.beta, args.beta);
    set(&mut cfg.mu_u, args.mu_u);
    set(&mut cfg.mu_v, args.mu_v);
    set(&mut cfg.var_u, args.var_u);
    set(&mut cfg.var_v, args.var_v);
    set(&mut cfg.input_variance, args.input_variance);
    if args.input_lo.is_some() || args.input_hi.is_some() {
        let InputSampler::SplitUniform { lo, hi } = cfg.input else {
            unreachable!("default scalar input is split-uniform")
        };
        cfg.input = InputSampler::SplitUniform {
            lo: args.input_lo.unwrap_or(lo),
            hi: args.input_hi.unwrap_or(hi),
        };
    }
    if let Some(p) = &args.placement {
        cfg.placement = parse_name("placement", p)?;
    }
    cfg.validate()?;
    if scenario == Scenario::Fir && cfg.n < cfg.w0.len() {
        bail!("invalid argument: need n >= number of taps");
    }
    Ok(cfg)
}

pub fn run(args: &GenerateArgs, common: &Common) -> Result<ExitCode> {
    if common.format != Format::Csv {
        bail!("generate writes CSV only");
    }
    let cfg = resolve(args, common.seed)?;
    let Some(path) = common.output.as_deref().filter(|p| *p != std::path::Path::new("-")) else {
        bail!("generate needs --output <file.csv>");
    };
    let (u, v) = (cfg.u_spec()?, cfg.v_spec()?);
    // Same stream as the first replicate of the first sweep point.
    let data_seed = rng::derive_seed(cfg.seed, "data", &[0, 0]);
    let out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    let p = cfg.w0.len();
    match cfg.scenario {
        Scenario::Scalar => {
            let ds = generate_scalar_dataset(cfg.w0[0], &cfg.input, &u, &v, cfg.n, data_seed)?;
            write_scalar_csv(&ds, out)?;
        }
        Scenario::Fir => {
            let ds = generate_fir_dataset(&cfg.w0, cfg.n, cfg.input_variance, &u, &v, cfg.placement, data_seed)?;
            write_vector_csv(&ds, out)?;
        }
    }

    let settings = json!({
        "scenario": cfg.scenario,
        "w0": cfg.w0,
        "n": cfg.n,
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "mu_u": cfg.mu_u,
        "mu_v": cfg.mu_v,
        "var_u": cfg.var_u,
        "var_v": cfg.var_v,
        "input": cfg.input,
        "input_variance": cfg.input_variance,
        "placement": cfg.placement,
        "noise_ratio": cfg.noise_ratio()?,
        "seed": cfg.seed,
    });
    let meta = DatasetMetadata {
        scenario: serde_json::to_value(cfg.scenario)?.as_str().unwrap_or_default().to_string(),
        n: cfg.n,
        p,
        w0: cfg.w0.clone(),
        seed: cfg.seed,
        settings: settings.as_object().cloned().unwrap_or_default(),
    };
    write_metadata(&metadata_path(path), &meta)?;
    eprintln!("wrote {} rows to {}", cfg.n, path.display());
    Ok(ExitCode::SUCCESS)
}
