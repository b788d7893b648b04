use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use mcc_eiv::bounds::{xi_corollary1, xi_theorem1};
use mcc_eiv::io::{load_dataset, LoadedDataset};
use mcc_eiv::{BoundFormula, BoundInputs, BoundReport, EivDataset, Error};
use serde::{Deserialize, Serialize};

use crate::config::Common;
use crate::output::write_records;

#[derive(clap::Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BoundArgs {
    /// Sample count.
    #[arg(long)]
    pub n: Option<usize>,
    /// Clean-sample count.
    #[arg(long)]
    pub m: Option<usize>,
    /// Clean input-noise threshold [default: 0].
    #[arg(long)]
    pub eps_u: Option<f64>,
    /// Clean output-noise threshold [default: 0].
    #[arg(long)]
    pub eps_v: Option<f64>,
    /// |w0|; taken from the sidecar with --data.
    #[arg(long)]
    pub w0_abs: Option<f64>,
    /// Smallest clean |input|.
    #[arg(long)]
    pub c: Option<f64>,
    /// Kernel width: evaluates the general bound.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Width multiplier over the admissible threshold (> 1).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Scalar dataset with retained noises; n, m and c come from its clean set.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

pub const COLUMNS: [&str; 14] = [
    "n",
    "m",
    "eps_u",
    "eps_v",
    "w0_abs",
    "c",
    "sigma",
    "lambda",
    "combined_eps",
    "sigma_threshold",
    "xi",
    "formula",
    "admissible",
    "failure_reason",
];

fn inputs(args: &BoundArgs) -> Result<BoundInputs> {
    let eps_u = args.eps_u.unwrap_or(0.0);
    let eps_v = args.eps_v.unwrap_or(0.0);
    let Some(path) = &args.data else {
        let (Some(n), Some(m), Some(c)) = (args.n, args.m, args.c) else {
            bail!("bound needs --n, --m and --c, or --data");
        };
        let w0_abs = match args.w0_abs {
            Some(w) => w,
            None if eps_u == 0.0 => 0.0,
            None => bail!("--w0-abs is required when eps-u is positive"),
        };
        return Ok(BoundInputs {
            n,
            m,
            eps_u,
            eps_v,
            w0_abs,
            c,
            sigma: args.sigma,
            lambda: args.lambda,
        });
    };
    if args.n.is_some() || args.m.is_some() || args.c.is_some() {
        bail!("--data determines n, m and c; drop the explicit values");
    }
    let (ds, _) = load_dataset(path).with_context(|| format!("loading {}", path.display()))?;
    let LoadedDataset::Scalar(ds) = ds else {
        bail!("the bound applies to scalar datasets only");
    };
    let w0_abs = match (args.w0_abs, ds.w0) {
        (Some(w), _) => w,
        (None, Some(w)) => w.abs(),
        (None, None) => bail!("no w0 in the dataset sidecar; pass --w0-abs"),
    };
    let clean = ds.clean_set(eps_u, eps_v)?;
    let mut inputs = BoundInputs::from_clean_set(ds.len(), &clean, w0_abs);
    inputs.sigma = args.sigma;
    inputs.lambda = args.lambda;
    Ok(inputs)
}

/// The report for `inputs`; assumption violations become an inadmissible
/// report rather than an error.
pub fn evaluate(inputs: &BoundInputs) -> Result<BoundReport> {
    let result = match (inputs.sigma, inputs.lambda) {
        (Some(_), Some(_)) => bail!("give either --sigma or --lambda, not both"),
        (None, None) => bail!("bound needs --sigma or --lambda"),
        (Some(_), None) => xi_theorem1(inputs),
        (None, Some(l)) => xi_corollary1(inputs.n, inputs.m, l, inputs.c, inputs.eps_u, inputs.eps_v, inputs.w0_abs),
    };
    match result {
        Ok(r) => Ok(r),
        Err(e @ (Error::CleanMajority { .. } | Error::InputMagnitude(_))) => Ok(BoundReport {
            n: inputs.n,
            m: inputs.m,
            eps_u: inputs.eps_u,
            eps_v: inputs.eps_v,
            w0_abs: inputs.w0_abs,
            c: inputs.c,
            sigma: inputs.sigma,
            lambda: inputs.lambda,
            combined_eps: inputs.combined_eps(),
            sigma_threshold: f64::NAN,
            xi: None,
            formula: if inputs.lambda.is_some() {
                BoundFormula::Corollary1
            } else {
                BoundFormula::Theorem1
            },
            admissible: false,
            failure_reason: Some(e.to_string()),
        }),
        Err(e) => Err(e.into()),
    }
}

pub fn run(args: &BoundArgs, common: &Common) -> Result<ExitCode> {
    let report = evaluate(&inputs(args)?)?;
    if let Some(reason) = &report.failure_reason {
        eprintln!("inadmissible: {reason}");
    }
    let cols: Vec<String> = COLUMNS.map(str::to_string).to_vec();
    write_records(common.output.as_deref(), common.format, &cols, &[report.record()])?;
    Ok(ExitCode::SUCCESS)
}
