//! Named sweep configurations for the scalar tables and figures and the FIR
//! study.

use super::{ExperimentConfig, KernelWidth, Scenario, SweepParameter, SweepSpec};
use crate::error::{Error, Result};
use crate::estimators::{MccConfig, MccSolver};
use crate::model::{fir_reference_weights, NoisePlacement};

pub const PRESET_NAMES: [&str; 6] = ["table1", "table2", "fig4-alpha", "fig5-sigma", "fig6-fir", "fig7-fir"];

fn outlier_locations() -> Vec<f64> {
    (0..=10).map(|k| 2.0 * k as f64).collect()
}

fn scalar(name: &str, param: SweepParameter, values: Vec<f64>, fixed: ExperimentConfig) -> SweepSpec {
    SweepSpec {
        name: name.to_string(),
        sweep_parameter: param,
        values,
        fixed,
    }
}

fn fir_fixed() -> ExperimentConfig {
    ExperimentConfig {
        scenario: Scenario::Fir,
        w0: fir_reference_weights(),
        n: 2000,
        runs: 20,
        input_variance: 1.0,
        placement: NoisePlacement::RowEvent,
        alpha: 0.3,
        beta: 0.3,
        var_u: 0.01,
        var_v: 0.01,
        kernel: KernelWidth::Fixed { sigma: 0.25 },
        mcc: MccConfig {
            solver: MccSolver::FixedPoint,
            ..MccConfig::default()
        },
        ..ExperimentConfig::default()
    }
}

pub fn preset(name: &str) -> Result<SweepSpec> {
    let base = ExperimentConfig::default();
    Ok(match name {
        "table1" => scalar(
            name,
            SweepParameter::MuU,
            outlier_locations(),
            ExperimentConfig { mu_v: 10.0, ..base },
        ),
        "table2" => scalar(
            name,
            SweepParameter::MuV,
            outlier_locations(),
            ExperimentConfig { mu_u: 10.0, ..base },
        ),
        "fig4-alpha" => scalar(
            name,
            SweepParameter::Alpha,
            (0..=18).map(|k| 0.05 * k as f64).collect(),
            ExperimentConfig {
                mu_u: 5.0,
                mu_v: 5.0,
                ..base
            },
        ),
        "fig5-sigma" => scalar(
            name,
            SweepParameter::SigmaKernel,
            vec![0.05, 0.1, 0.2, 0.25, 0.3, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 1000.0],
            ExperimentConfig {
                mu_u: 5.0,
                mu_v: 5.0,
                ..base
            },
        ),
        "fig6-fir" => SweepSpec {
            name: name.to_string(),
            sweep_parameter: SweepParameter::MuU,
            values: outlier_locations(),
            fixed: ExperimentConfig {
                mu_v: 2.0,
                ..fir_fixed()
            },
        },
        "fig7-fir" => SweepSpec {
            name: name.to_string(),
            sweep_parameter: SweepParameter::MuV,
            values: outlier_locations(),
            fixed: ExperimentConfig {
                mu_u: 5.0,
                ..fir_fixed()
            },
        },
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            p.validate().unwrap();
            assert_eq!(p.name, name);
        }
        assert!(preset("table3").is_err());
    }

    #[test]
    fn table_presets_cover_eleven_locations() {
        let t = preset("table1").unwrap();
        assert_eq!(t.values, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0]);
        assert_eq!((t.fixed.n, t.fixed.runs, t.fixed.mu_v), (1000, 100, 10.0));
        assert_eq!(preset("table2").unwrap().fixed.mu_u, 10.0);
    }

    #[test]
    fn fir_presets_fix_the_other_location() {
        let f6 = preset("fig6-fir").unwrap();
        assert_eq!((f6.sweep_parameter, f6.fixed.mu_v), (SweepParameter::MuU, 2.0));
        let f7 = preset("fig7-fir").unwrap();
        assert_eq!((f7.sweep_parameter, f7.fixed.mu_u), (SweepParameter::MuV, 5.0));
        assert_eq!((f7.fixed.n, f7.fixed.runs, f7.fixed.w0.len()), (2000, 20, 9));
    }
}
