//! Point estimators for the errors-in-variables model.

mod baseline;
mod correntropy;
mod solvers;

use serde::{Deserialize, Serialize};

pub use baseline::{
    lad_estimate, lad_estimate_with, lad_objective, mse_estimate, mse_objective, tls_estimate,
    tls_estimate_weighted, tls_objective, weighted_median, LadOptions,
};
pub use correntropy::{mcc_gradient, mcc_objective};
pub use solvers::{
    auto_grid_points, default_window, mcc_estimate, mcc_estimate_eda, mcc_estimate_fixed_point,
    mcc_estimate_gradient, mcc_estimate_grid, MccConfig, MccSolver,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Mse,
    Lad,
    Tls,
    Mcc,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [Estimator::Mse, Estimator::Lad, Estimator::Tls, Estimator::Mcc];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Mse => "mse",
            Estimator::Lad => "lad",
            Estimator::Tls => "tls",
            Estimator::Mcc => "mcc",
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Estimator {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name() == s.to_ascii_lowercase())
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown estimator {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimator: Estimator,
    pub w_hat: Vec<f64>,
    /// Criterion value at `w_hat`: mean squared or absolute residual for
    /// MSE/LAD, the TLS ratio, or the empirical correntropy.
    pub objective: f64,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub starts_tried: usize,
    /// Grid solver only: the best grid point sat on the window edge.
    pub boundary_hit: bool,
}

impl EstimateResult {
    /// First (for scalar models, only) component.
    pub fn scalar(&self) -> f64 {
        self.w_hat[0]
    }

    /// Flat record: estimator, `w_hat` or `w_hat_k`, objective, iterations,
    /// converged, starts_tried, boundary_hit.
    pub fn record(&self) -> serde_json::Map<String, serde_json::Value> {
        use serde_json::Value;
        let mut m = serde_json::Map::new();
        m.insert("estimator".into(), Value::from(self.estimator.name()));
        if self.w_hat.len() == 1 {
            m.insert("w_hat".into(), Value::from(self.w_hat[0]));
        } else {
            for (k, w) in self.w_hat.iter().enumerate() {
                m.insert(format!("w_hat_{k}"), Value::from(*w));
            }
        }
        m.insert("objective".into(), Value::from(self.objective));
        m.insert("iterations".into(), Value::from(self.iterations));
        m.insert("converged".into(), Value::from(self.converged));
        m.insert("starts_tried".into(), Value::from(self.starts_tried));
        m.insert("boundary_hit".into(), Value::from(self.boundary_hit));
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Design;

    #[test]
    fn estimator_names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
        assert!("ols".parse::<Estimator>().is_err());
    }

    #[test]
    fn flat_record_keys() {
        let x = [1.0, 0.0, 0.0, 1.0];
        let d = [2.0, 3.0];
        let r = mse_estimate(&Design::new(&x, &d, 2).unwrap()).unwrap();
        let rec = r.record();
        assert_eq!(rec["estimator"], "mse");
        assert_eq!(rec["w_hat_0"], 2.0);
        assert_eq!(rec["w_hat_1"], 3.0);
        assert!(!rec.contains_key("w_hat"));
        assert_eq!(rec["converged"], true);
    }
}
