//! Fixed datasets shared by the benchmarks.

use mcc_eiv::experiments::{preset, ExperimentConfig};
use mcc_eiv::model::{generate_fir_dataset, generate_scalar_dataset};
use mcc_eiv::{ScalarEivDataset, VectorEivDataset};

/// Scalar data with the default contamination settings.
pub fn scalar_dataset(n: usize) -> ScalarEivDataset {
    let cfg = ExperimentConfig::default();
    generate_scalar_dataset(
        cfg.w0[0],
        &cfg.input,
        &cfg.u_spec().unwrap(),
        &cfg.v_spec().unwrap(),
        n,
        11,
    )
    .unwrap()
}

pub fn fir_dataset(n: usize) -> VectorEivDataset {
    let cfg = preset("fig7-fir").unwrap().fixed;
    generate_fir_dataset(
        &cfg.w0,
        n,
        cfg.input_variance,
        &cfg.u_spec().unwrap(),
        &cfg.v_spec().unwrap(),
        cfg.placement,
        11,
    )
    .unwrap()
}
