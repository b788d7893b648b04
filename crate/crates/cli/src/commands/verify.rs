use std::process::ExitCode;

use anyhow::Result;
use mcc_eiv::experiments::{verify_bound_property, VerifyOptions};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Common;
use crate::output::{write_records, Record};

#[derive(clap::Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct VerifyArgs {
    /// Random configurations to check [default: 200].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Parameters sampled beyond the bound per trial [default: 100].
    #[arg(long)]
    pub outside_samples: Option<usize>,
}

const COLUMNS: [&str; 10] = [
    "trial",
    "n",
    "m",
    "w0",
    "sigma",
    "xi",
    "w_grid",
    "margin",
    "bound_violated",
    "dominance_violations",
];

pub fn run(args: &VerifyArgs, common: &Common) -> Result<ExitCode> {
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        trials: args.trials.unwrap_or(defaults.trials),
        outside_samples: args.outside_samples.unwrap_or(defaults.outside_samples),
        seed: common.seed,
        ..defaults
    };
    let rep = verify_bound_property(&opts)?;
    let q = rep.margin_quantiles;
    println!("trials: {}", rep.trials);
    println!("noise-free clean trials: {}", rep.corollary2_trials);
    println!("bound violations: {}", rep.bound_violations);
    println!("dominance violations: {}", rep.dominance_violations);
    println!(
        "margin |w_grid - w0| / xi: min {:.4} median {:.4} p90 {:.4} max {:.4}",
        q[0], q[1], q[2], q[3]
    );
    println!("violations: {}", rep.violations());

    if common.output.is_some() {
        let records: Vec<Record> = rep
            .outcomes
            .iter()
            .enumerate()
            .map(|(t, o)| {
                let mut r = Record::new();
                r.insert("trial".into(), Value::from(t));
                r.insert("n".into(), Value::from(o.n));
                r.insert("m".into(), Value::from(o.m));
                r.insert("w0".into(), Value::from(o.w0));
                r.insert("sigma".into(), Value::from(o.sigma));
                r.insert("xi".into(), Value::from(o.xi));
                r.insert("w_grid".into(), Value::from(o.w_grid));
                r.insert("margin".into(), Value::from(o.margin()));
                r.insert("bound_violated".into(), Value::from(o.bound_violated));
                r.insert("dominance_violations".into(), Value::from(o.dominance_violations));
                r
            })
            .collect();
        let cols: Vec<String> = COLUMNS.map(str::to_string).to_vec();
        write_records(common.output.as_deref(), common.format, &cols, &records)?;
    }
    Ok(if rep.violations() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
