//! Kernel-width threshold and error bounds for the MCC solution of the
//! scalar model.
//!
//! With `M` of the `N` samples clean (`|u| ≤ ε_u`, `|v| ≤ ε_v`), `M > N/2`,
//! and every clean input of magnitude at least `c > 0`, any kernel width
//! above the threshold gives `|w_MCC − w0| ≤ ξ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CleanSet, EivDataset};

/// Inner log arguments below this are treated as inadmissible.
pub const INNER_LOG_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundFormula {
    Theorem1,
    Corollary1,
    Corollary2,
}

impl std::fmt::Display for BoundFormula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundFormula::Theorem1 => "theorem1",
            BoundFormula::Corollary1 => "corollary1",
            BoundFormula::Corollary2 => "corollary2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub m: usize,
    pub eps_u: f64,
    pub eps_v: f64,
    pub w0_abs: f64,
    pub c: f64,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
}

impl BoundInputs {
    /// Inputs taken from a clean set; `c` is 0 for an empty set.
    pub fn from_clean_set(n: usize, clean: &CleanSet, w0_abs: f64) -> Self {
        Self {
            n,
            m: clean.m,
            eps_u: clean.eps_u,
            eps_v: clean.eps_v,
            w0_abs,
            c: clean.c.unwrap_or(0.0),
            sigma: None,
            lambda: None,
        }
    }

    pub fn combined_eps(&self) -> f64 {
        combined_eps(self.eps_u, self.eps_v, self.w0_abs)
    }

    pub fn validate(&self) -> Result<()> {
        check_majority(self.n, self.m)?;
        check_nonneg("eps_u", self.eps_u)?;
        check_nonneg("eps_v", self.eps_v)?;
        check_nonneg("w0_abs", self.w0_abs)?;
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "minimum clean input magnitude must be positive, got {}",
                self.c
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub m: usize,
    pub eps_u: f64,
    pub eps_v: f64,
    pub w0_abs: f64,
    pub c: f64,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub combined_eps: f64,
    pub sigma_threshold: f64,
    pub xi: Option<f64>,
    pub formula: BoundFormula,
    pub admissible: bool,
    pub failure_reason: Option<String>,
}

impl BoundReport {
    fn new(inputs: &BoundInputs, formula: BoundFormula) -> Result<Self> {
        Ok(Self {
            n: inputs.n,
            m: inputs.m,
            eps_u: inputs.eps_u,
            eps_v: inputs.eps_v,
            w0_abs: inputs.w0_abs,
            c: inputs.c,
            sigma: inputs.sigma,
            lambda: inputs.lambda,
            combined_eps: inputs.combined_eps(),
            sigma_threshold: sigma_threshold(inputs.n, inputs.m, inputs.eps_u, inputs.eps_v, inputs.w0_abs)?,
            xi: None,
            formula,
            admissible: false,
            failure_reason: None,
        })
    }

    fn reject(mut self, reason: impl Into<String>) -> Self {
        self.admissible = false;
        self.xi = None;
        self.failure_reason = Some(reason.into());
        self
    }

    fn accept(mut self, xi: f64) -> Self {
        self.admissible = true;
        self.xi = Some(xi);
        self
    }

    /// Flat key–value form; absent values are `null`.
    pub fn record(&self) -> serde_json::Map<String, serde_json::Value> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(m)) => m,
            _ => unreachable!("a struct serializes to an object"),
        }
    }
}

fn combined_eps(eps_u: f64, eps_v: f64, w0_abs: f64) -> f64 {
    eps_v + w0_abs * eps_u
}

/// `N/2 < M ≤ N`. `M = N` is the all-clean limit, where the outlier ratio
/// `(N−M)/M` is zero.
fn check_majority(n: usize, m: usize) -> Result<()> {
    if 2 * m <= n || m > n {
        return Err(Error::CleanMajority { n, m });
    }
    Ok(())
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::InvalidArgument(format!("{name} must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

/// Smallest admissible kernel width, `(ε_v + |w0|ε_u) / √(2 ln(M/(N−M)))`.
/// Any width strictly above it is admissible; 0 when there is no clean noise.
pub fn sigma_threshold(n: usize, m: usize, eps_u: f64, eps_v: f64, w0_abs: f64) -> Result<f64> {
    check_majority(n, m)?;
    let ce = combined_eps(eps_u, eps_v, w0_abs);
    if ce == 0.0 || m == n {
        return Ok(0.0);
    }
    Ok(ce / (2.0 * (m as f64 / (n - m) as f64).ln()).sqrt())
}

/// The general bound at a given kernel width. With no clean noise this is
/// the corollary-2 bound and is labelled as such.
pub fn xi_theorem1(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let sigma = inputs
        .sigma
        .ok_or_else(|| Error::InvalidArgument("kernel width is required".into()))?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel width must be positive, got {sigma}")));
    }
    let ce = inputs.combined_eps();
    let formula = if ce == 0.0 {
        BoundFormula::Corollary2
    } else {
        BoundFormula::Theorem1
    };
    let report = BoundReport::new(inputs, formula)?;
    if sigma <= report.sigma_threshold {
        let t = report.sigma_threshold;
        return Ok(report.reject(format!("kernel width {sigma} does not exceed the threshold {t}")));
    }
    let r = (inputs.n - inputs.m) as f64 / inputs.m as f64;
    let inner = (-ce * ce / (2.0 * sigma * sigma)).exp() - r;
    if !(inner >= INNER_LOG_FLOOR) {
        return Ok(report.reject(format!("inner log argument {inner:e} is not positive")));
    }
    let xi = ((-2.0 * sigma * sigma * inner.ln()).sqrt() + ce) / inputs.c;
    Ok(report.accept(xi))
}

/// The bound at `σ = λ·threshold`, `λ > 1`. Needs nonzero clean noise.
pub fn xi_corollary1(n: usize, m: usize, lambda: f64, c: f64, eps_u: f64, eps_v: f64, w0_abs: f64) -> Result<BoundReport> {
    if !(lambda.is_finite() && lambda > 1.0) {
        return Err(Error::InvalidArgument(format!("lambda must exceed 1, got {lambda}")));
    }
    let mut inputs = BoundInputs {
        n,
        m,
        eps_u,
        eps_v,
        w0_abs,
        c,
        sigma: None,
        lambda: Some(lambda),
    };
    inputs.validate()?;
    let ce = inputs.combined_eps();
    if ce == 0.0 {
        return Err(Error::InvalidArgument(
            "combined clean noise is zero; use the noise-free bound".into(),
        ));
    }
    let threshold = sigma_threshold(n, m, eps_u, eps_v, w0_abs)?;
    inputs.sigma = Some(lambda * threshold);
    let report = BoundReport::new(&inputs, BoundFormula::Corollary1)?;

    if m == n {
        // The log ratio tends to 1/λ² as the outlier ratio vanishes, but the
        // implied kernel width is zero.
        return Ok(report.reject("no outliers: the implied kernel width is zero"));
    }
    let r = (n - m) as f64 / m as f64;
    let inner = r.powf(1.0 / (lambda * lambda)) - r;
    if !(inner >= INNER_LOG_FLOOR) {
        return Ok(report.reject(format!("inner log argument {inner:e} is not positive")));
    }
    let xi = (lambda * (inner.ln() / r.ln()).sqrt() + 1.0) * ce / c;
    Ok(report.accept(xi))
}

/// `(σ/c)·√(2 ln(M/(2M−N)))`, the bound when clean samples are noise free.
pub fn xi_corollary2(n: usize, m: usize, sigma: f64, c: f64) -> Result<BoundReport> {
    let inputs = BoundInputs {
        n,
        m,
        eps_u: 0.0,
        eps_v: 0.0,
        w0_abs: 0.0,
        c,
        sigma: Some(sigma),
        lambda: None,
    };
    inputs.validate()?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel width must be positive, got {sigma}")));
    }
    let report = BoundReport::new(&inputs, BoundFormula::Corollary2)?;
    let xi = sigma / c * (2.0 * (m as f64 / (2 * m - n) as f64).ln()).sqrt();
    Ok(report.accept(xi))
}

/// Clean-set statistics and which of the two assumptions hold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub n: usize,
    pub clean: CleanSet,
    pub majority_clean: bool,
    pub inputs_bounded_away: bool,
    pub admissible: bool,
    pub diagnostics: Vec<String>,
}

/// Evaluates `M > N/2` (and `M < N`, needed by the bound) and `c > 0`.
/// Violations are reported, not raised; only missing noises are an error.
pub fn check_assumptions<D: EivDataset + ?Sized>(dataset: &D, eps_u: f64, eps_v: f64) -> Result<AssumptionCheck> {
    let n = dataset.n();
    let clean = dataset.clean_set(eps_u, eps_v)?;
    let mut diagnostics = Vec::new();
    let majority_clean = check_majority(n, clean.m).is_ok();
    if !majority_clean {
        diagnostics.push(format!(
            "clean majority: clean set has M = {} of N = {n}, not a strict majority",
            clean.m
        ));
    }
    let inputs_bounded_away = matches!(clean.c, Some(c) if c > 0.0);
    if !inputs_bounded_away {
        diagnostics.push(match clean.c {
            None => "input bound: clean set is empty, no positive input bound".to_string(),
            Some(_) => "input bound: a clean sample has zero observed input (c = 0)".to_string(),
        });
    }
    Ok(AssumptionCheck {
        n,
        admissible: majority_clean && inputs_bounded_away,
        clean,
        majority_clean,
        inputs_bounded_away,
        diagnostics,
    })
}
