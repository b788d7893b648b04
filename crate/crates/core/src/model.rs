//! Errors-in-variables data model.
//!
//! The scalar model observes `x̃ = x + u` and `d = w0·x + v`; the FIR model
//! applies a weight vector to a tapped-delay line of the true input. Input and
//! output noises follow a symmetric three-component Gaussian mixture whose
//! outer components produce large outliers.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// `weight/2·N(−μ,σ²) + (1−weight)·N(0,σ²) + weight/2·N(+μ,σ²)`.
///
/// `variance = 0` is accepted and turns every component into a point mass,
/// which gives exactly noise-free data when `weight = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub weight: f64,
    pub outlier_mean: f64,
    pub variance: f64,
}

impl GaussianMixtureSpec {
    pub fn new(weight: f64, outlier_mean: f64, variance: f64) -> Result<Self> {
        let spec = Self {
            weight,
            outlier_mean,
            variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Exactly zero noise.
    pub fn silent() -> Self {
        Self {
            weight: 0.0,
            outlier_mean: 0.0,
            variance: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(Error::InvalidMixture(format!(
                "weight must lie in [0, 1], got {}",
                self.weight
            )));
        }
        if !(self.outlier_mean.is_finite() && self.outlier_mean >= 0.0) {
            return Err(Error::InvalidMixture(format!(
                "outlier mean must be finite and nonnegative, got {}",
                self.outlier_mean
            )));
        }
        if !(self.variance.is_finite() && self.variance >= 0.0) {
            return Err(Error::InvalidMixture(format!(
                "variance must be finite and nonnegative, got {}",
                self.variance
            )));
        }
        Ok(())
    }

    pub fn implied_mean(&self) -> f64 {
        0.0
    }

    pub fn implied_variance(&self) -> f64 {
        self.variance + self.weight * self.outlier_mean * self.outlier_mean
    }

    /// Mixture density; only defined for `variance > 0`.
    pub fn density(&self, x: f64) -> f64 {
        let s2 = self.variance;
        let norm = |m: f64| (-(x - m) * (x - m) / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt();
        0.5 * self.weight * (norm(-self.outlier_mean) + norm(self.outlier_mean))
            + (1.0 - self.weight) * norm(0.0)
    }

    /// Picks the component offset (−μ, 0 or +μ) with probabilities
    /// `weight/2, 1−weight, weight/2`.
    pub(crate) fn draw_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let r: f64 = rng.random();
        if r < 0.5 * self.weight {
            -self.outlier_mean
        } else if r < self.weight {
            self.outlier_mean
        } else {
            0.0
        }
    }

    pub(crate) fn draw_around<R: Rng + ?Sized>(&self, offset: f64, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        offset + self.variance.sqrt() * z
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let offset = self.draw_offset(rng);
        self.draw_around(offset, rng)
    }
}

pub fn sample_mixture<R: Rng + ?Sized>(
    spec: &GaussianMixtureSpec,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    Ok((0..n).map(|_| spec.sample(rng)).collect())
}

/// Distribution of the true (unobserved) scalar input.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputSampler {
    /// Random sign, magnitude uniform in `[lo, hi]`.
    SplitUniform { lo: f64, hi: f64 },
    Gaussian { variance: f64 },
    /// Random sign, fixed magnitude.
    ConstantMagnitude { magnitude: f64 },
}

impl Default for InputSampler {
    fn default() -> Self {
        InputSampler::SplitUniform { lo: 1.0, hi: 2.0 }
    }
}

impl InputSampler {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InputSampler::SplitUniform { lo, hi } => lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi,
            InputSampler::Gaussian { variance } => variance.is_finite() && variance >= 0.0,
            InputSampler::ConstantMagnitude { magnitude } => magnitude.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid input sampler {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            InputSampler::SplitUniform { lo, hi } => {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * (lo + (hi - lo) * rng.random::<f64>())
            }
            InputSampler::Gaussian { variance } => {
                let z: f64 = rng.sample(StandardNormal);
                variance.sqrt() * z
            }
            InputSampler::ConstantMagnitude { magnitude } => {
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }
}

/// Borrowed view of observed regressors and outputs, the common input of
/// every estimator. `x` is row-major with `p` columns.
#[derive(Clone, Copy, Debug)]
pub struct Design<'a> {
    x: &'a [f64],
    d: &'a [f64],
    p: usize,
}

impl<'a> Design<'a> {
    pub fn new(x: &'a [f64], d: &'a [f64], p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("parameter dimension must be at least 1".into()));
        }
        if d.is_empty() {
            return Err(Error::InvalidArgument("design has no samples".into()));
        }
        if x.len() != d.len() * p {
            return Err(Error::InvalidArgument(format!(
                "regressor buffer has {} entries, expected {} x {}",
                x.len(),
                d.len(),
                p
            )));
        }
        Ok(Self { x, d, p })
    }

    pub fn scalar(x: &'a [f64], d: &'a [f64]) -> Result<Self> {
        Self::new(x, d, 1)
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_scalar(&self) -> bool {
        self.p == 1
    }

    pub fn x(&self) -> &'a [f64] {
        self.x
    }

    pub fn d(&self) -> &'a [f64] {
        self.d
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'a, f64> {
        self.x.chunks_exact(self.p)
    }

    pub fn predict(&self, i: usize, w: &[f64]) -> f64 {
        self.row(i).iter().zip(w).map(|(a, b)| a * b).sum()
    }

    pub fn residual(&self, i: usize, w: &[f64]) -> f64 {
        self.d[i] - self.predict(i, w)
    }

    pub fn residuals(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|i| self.residual(i, w)).collect()
    }
}

/// Indices whose input and output noises both lie within the thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleanSet {
    pub indices: Vec<usize>,
    pub m: usize,
    pub eps_u: f64,
    pub eps_v: f64,
    /// Minimum observed-input magnitude over the set (Euclidean row norm for
    /// vector data); `None` when the set is empty.
    pub c: Option<f64>,
}

/// Anything that can be fed to the estimators and, when the noises were
/// retained, to the clean-set bookkeeping.
pub trait EivDataset {
    fn design(&self) -> Design<'_>;

    fn clean_set(&self, eps_u: f64, eps_v: f64) -> Result<CleanSet>;

    fn true_params(&self) -> Option<Vec<f64>>;

    fn n(&self) -> usize {
        self.design().n()
    }
}

pub fn clean_index_set<D: EivDataset + ?Sized>(dataset: &D, eps_u: f64, eps_v: f64) -> Result<CleanSet> {
    dataset.clean_set(eps_u, eps_v)
}

fn check_thresholds(eps_u: f64, eps_v: f64) -> Result<()> {
    if eps_u.is_nan() || eps_v.is_nan() || eps_u < 0.0 || eps_v < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "clean-set thresholds must be nonnegative, got ({eps_u}, {eps_v})"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarEivDataset {
    pub x: Option<Vec<f64>>,
    pub u: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub x_obs: Vec<f64>,
    pub d: Vec<f64>,
    pub w0: Option<f64>,
}

impl ScalarEivDataset {
    /// Externally observed data without ground truth.
    pub fn observed(x_obs: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        let ds = Self {
            x: None,
            u: None,
            v: None,
            x_obs,
            d,
            w0: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.d.len();
        if n == 0 {
            return Err(Error::InvalidArgument("dataset is empty".into()));
        }
        if self.x_obs.len() != n {
            return Err(Error::InvalidArgument("x_obs and d lengths differ".into()));
        }
        for (name, arr) in [("x", &self.x), ("u", &self.u), ("v", &self.v)] {
            if let Some(a) = arr {
                if a.len() != n {
                    return Err(Error::InvalidArgument(format!("{name} has length {}, expected {n}", a.len())));
                }
            }
        }
        Ok(())
    }
}

impl EivDataset for ScalarEivDataset {
    fn design(&self) -> Design<'_> {
        Design {
            x: &self.x_obs,
            d: &self.d,
            p: 1,
        }
    }

    fn clean_set(&self, eps_u: f64, eps_v: f64) -> Result<CleanSet> {
        check_thresholds(eps_u, eps_v)?;
        let (u, v) = match (&self.u, &self.v) {
            (Some(u), Some(v)) => (u, v),
            _ => return Err(Error::MissingNoise),
        };
        let indices: Vec<usize> = (0..self.len())
            .filter(|&i| u[i].abs() <= eps_u && v[i].abs() <= eps_v)
            .collect();
        let c = indices
            .iter()
            .map(|&i| self.x_obs[i].abs())
            .min_by(f64::total_cmp);
        Ok(CleanSet {
            m: indices.len(),
            indices,
            eps_u,
            eps_v,
            c,
        })
    }

    fn true_params(&self) -> Option<Vec<f64>> {
        self.w0.map(|w| vec![w])
    }
}

pub fn generate_scalar_dataset(
    w0: f64,
    input: &InputSampler,
    u_spec: &GaussianMixtureSpec,
    v_spec: &GaussianMixtureSpec,
    n: usize,
    seed: u64,
) -> Result<ScalarEivDataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    if !w0.is_finite() {
        return Err(Error::InvalidArgument(format!("w0 must be finite, got {w0}")));
    }
    input.validate()?;
    u_spec.validate()?;
    v_spec.validate()?;

    let mut rng = rng::from_seed(seed);
    let x: Vec<f64> = (0..n).map(|_| input.sample(&mut rng)).collect();
    let u: Vec<f64> = (0..n).map(|_| u_spec.sample(&mut rng)).collect();
    let v: Vec<f64> = (0..n).map(|_| v_spec.sample(&mut rng)).collect();
    let x_obs = x.iter().zip(&u).map(|(x, u)| x + u).collect();
    let d = x.iter().zip(&v).map(|(x, v)| w0 * x + v).collect();

    Ok(ScalarEivDataset {
        x: Some(x),
        u: Some(u),
        v: Some(v),
        x_obs,
        d,
        w0: Some(w0),
    })
}

/// How input noise enters the FIR regressors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePlacement {
    /// Noise is added to the input series before the tapped delay line, so
    /// one noise sample appears in up to `p` consecutive regressors.
    Series,
    /// Each regressor draws one mixture component and every tap of that
    /// regressor receives noise from it: an outlier event corrupts the whole
    /// observed regressor.
    #[default]
    RowEvent,
}

/// Observed regressor rows for a linear model `d = w0ᵀ x + v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorEivDataset {
    pub p: usize,
    /// `n × p`, row-major.
    pub x_obs: Vec<f64>,
    pub d: Vec<f64>,
    pub w0: Option<Vec<f64>>,
    /// Clean regressors, `n × p`.
    pub x: Option<Vec<f64>>,
    /// Input noise per regressor entry, `n × p`.
    pub u: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
}

impl VectorEivDataset {
    pub fn observed(x_obs: Vec<f64>, d: Vec<f64>, p: usize) -> Result<Self> {
        Design::new(&x_obs, &d, p)?;
        Ok(Self {
            p,
            x_obs,
            d,
            w0: None,
            x: None,
            u: None,
            v: None,
        })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x_obs[i * self.p..(i + 1) * self.p]
    }
}

impl EivDataset for VectorEivDataset {
    fn design(&self) -> Design<'_> {
        Design {
            x: &self.x_obs,
            d: &self.d,
            p: self.p,
        }
    }

    /// A row is clean when every tap's input noise and its output noise are
    /// within the thresholds.
    fn clean_set(&self, eps_u: f64, eps_v: f64) -> Result<CleanSet> {
        check_thresholds(eps_u, eps_v)?;
        let (u, v) = match (&self.u, &self.v) {
            (Some(u), Some(v)) => (u, v),
            _ => return Err(Error::MissingNoise),
        };
        let p = self.p;
        let indices: Vec<usize> = (0..self.len())
            .filter(|&i| v[i].abs() <= eps_v && u[i * p..(i + 1) * p].iter().all(|e| e.abs() <= eps_u))
            .collect();
        let c = indices
            .iter()
            .map(|&i| self.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .min_by(f64::total_cmp);
        Ok(CleanSet {
            m: indices.len(),
            indices,
            eps_u,
            eps_v,
            c,
        })
    }

    fn true_params(&self) -> Option<Vec<f64>> {
        self.w0.clone()
    }
}

/// Tapped-delay regressors of a series: row `i` is
/// `[s[i], s[i−1], …, s[i−p+1]]` with zeros before time 0.
pub fn tapped_delay_rows(series: &[f64], p: usize) -> Vec<f64> {
    let n = series.len();
    let mut rows = vec![0.0; n * p];
    for i in 0..n {
        for k in 0..p.min(i + 1) {
            rows[i * p + k] = series[i - k];
        }
    }
    rows
}

pub fn generate_fir_dataset(
    w0: &[f64],
    n: usize,
    input_variance: f64,
    u_spec: &GaussianMixtureSpec,
    v_spec: &GaussianMixtureSpec,
    placement: NoisePlacement,
    seed: u64,
) -> Result<VectorEivDataset> {
    let p = w0.len();
    if p == 0 {
        return Err(Error::InvalidArgument("weight vector must not be empty".into()));
    }
    if n < p {
        return Err(Error::InvalidArgument(format!("need n >= p, got n = {n}, p = {p}")));
    }
    if !(input_variance.is_finite() && input_variance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "input variance must be positive, got {input_variance}"
        )));
    }
    u_spec.validate()?;
    v_spec.validate()?;

    let mut rng = rng::from_seed(seed);
    let sd = input_variance.sqrt();
    let series: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            sd * z
        })
        .collect();
    let x = tapped_delay_rows(&series, p);

    let u = match placement {
        NoisePlacement::Series => {
            let noise: Vec<f64> = (0..n).map(|_| u_spec.sample(&mut rng)).collect();
            tapped_delay_rows(&noise, p)
        }
        NoisePlacement::RowEvent => {
            let mut u = vec![0.0; n * p];
            for i in 0..n {
                let offset = u_spec.draw_offset(&mut rng);
                // Taps before time 0 stay exactly zero.
                for k in 0..p.min(i + 1) {
                    u[i * p + k] = u_spec.draw_around(offset, &mut rng);
                }
            }
            u
        }
    };
    let v: Vec<f64> = (0..n).map(|_| v_spec.sample(&mut rng)).collect();

    let x_obs: Vec<f64> = x.iter().zip(&u).map(|(x, u)| x + u).collect();
    let d: Vec<f64> = x
        .chunks_exact(p)
        .zip(&v)
        .map(|(row, v)| row.iter().zip(w0).map(|(a, b)| a * b).sum::<f64>() + v)
        .collect();

    Ok(VectorEivDataset {
        p,
        x_obs,
        d,
        w0: Some(w0.to_vec()),
        x: Some(x),
        u: Some(u),
        v: Some(v),
    })
}

/// The nine-tap weight vector of the FIR example.
pub fn fir_reference_weights() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.4, 0.3, 0.2, 0.1]
}
