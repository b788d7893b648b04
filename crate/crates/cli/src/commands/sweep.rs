use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use mcc_eiv::experiments::{
    preset, run_sweep, summary_csv_string, write_manifest, Manifest, SweepSpec, PRESET_NAMES,
};
use serde::{Deserialize, Serialize};

use crate::config::{Common, Format};
use crate::output::emit;

#[derive(clap::Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepArgs {
    /// Named sweep: table1, table2, fig4-alpha, fig5-sigma, fig6-fir, fig7-fir.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON file holding a full sweep definition instead of a preset.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Replicates per sweep value.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Samples per replicate.
    #[arg(long)]
    pub n: Option<usize>,
}

pub fn resolve(args: &SweepArgs, seed: u64) -> Result<SweepSpec> {
    let mut spec = match (&args.preset, &args.spec) {
        (Some(_), Some(_)) => bail!("give either --preset or --spec, not both"),
        (None, None) => bail!("sweep needs --preset (one of {}) or --spec", PRESET_NAMES.join(", ")),
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => serde_json::from_reader(File::open(path).with_context(|| format!("opening {}", path.display()))?)
            .with_context(|| format!("parsing {}", path.display()))?,
    };
    spec.fixed.seed = seed;
    if let Some(r) = args.runs {
        spec.fixed.runs = r;
    }
    if let Some(n) = args.n {
        spec.fixed.n = n;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn manifest_path(summary: &Path) -> PathBuf {
    summary.with_extension("manifest.json")
}

pub fn run(args: &SweepArgs, common: &Common) -> Result<ExitCode> {
    let spec = resolve(args, common.seed)?;
    let ext = match common.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = common
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.{ext}", spec.name)));
    if path == Path::new("-") {
        bail!("sweep writes a summary and a manifest; give a file for --output");
    }
    let summary = run_sweep(&spec)?;
    let bytes = match common.format {
        Format::Csv => summary_csv_string(&summary)?.into_bytes(),
        Format::Json => serde_json::to_vec_pretty(&summary.rows)?,
    };
    emit(Some(&path), &bytes)?;
    let file_name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    write_manifest(&manifest_path(&path), &Manifest::new(&spec, &summary, &file_name))?;
    eprintln!("wrote {} rows to {}", summary.rows.len(), path.display());
    Ok(ExitCode::SUCCESS)
}
