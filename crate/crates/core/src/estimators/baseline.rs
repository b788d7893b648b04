//! Squared-error, absolute-error and total-least-squares baselines.

use nalgebra::{DMatrix, DVector};

use super::{EstimateResult, Estimator};
use crate::error::{Error, Result};
use crate::model::Design;

/// Solves `(Σ wᵢ xᵢxᵢᵀ) θ = Σ wᵢ xᵢ dᵢ`; unit weights when `weights` is `None`.
pub(crate) fn weighted_normal_equations(design: &Design<'_>, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let p = design.p();
    let d = design.d();
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);

    if p == 1 {
        let x = design.x();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..design.n() {
            let g = weight(i);
            num += g * x[i] * d[i];
            den += g * x[i] * x[i];
        }
        if !(den.is_normal() && den > 0.0) {
            return Err(Error::Degenerate("weighted input energy is zero".into()));
        }
        return Ok(vec![num / den]);
    }

    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    for (i, row) in design.rows().enumerate() {
        let g = weight(i);
        if g == 0.0 {
            continue;
        }
        for a in 0..p {
            let ga = g * row[a];
            rhs[a] += ga * d[i];
            for b in a..p {
                gram[(a, b)] += ga * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    let scale = (0..p).map(|a| gram[(a, a)]).fold(0.0, f64::max);
    if !(scale.is_normal() && scale > 0.0) {
        return Err(Error::Degenerate("regressor Gram matrix is zero".into()));
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Degenerate("regressor Gram matrix is singular".into()))?;
    // Cholesky succeeds on some numerically singular matrices; reject those too.
    let diag_min = (0..p).map(|a| chol.l_dirty()[(a, a)]).fold(f64::INFINITY, f64::min);
    if diag_min * diag_min <= scale * 1e-14 {
        return Err(Error::Degenerate("regressor Gram matrix is singular".into()));
    }
    let sol = chol.solve(&rhs);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("normal equations produced non-finite values".into()));
    }
    Ok(sol.iter().copied().collect())
}

fn finish(estimator: Estimator, design: &Design<'_>, w_hat: Vec<f64>, objective: f64) -> EstimateResult {
    EstimateResult {
        estimator,
        residuals: design.residuals(&w_hat),
        w_hat,
        objective,
        iterations: 1,
        converged: true,
        starts_tried: 1,
        boundary_hit: false,
    }
}

pub fn mse_objective(design: &Design<'_>, w: &[f64]) -> f64 {
    (0..design.n()).map(|i| design.residual(i, w).powi(2)).sum::<f64>() / design.n() as f64
}

pub fn lad_objective(design: &Design<'_>, w: &[f64]) -> f64 {
    (0..design.n()).map(|i| design.residual(i, w).abs()).sum::<f64>() / design.n() as f64
}

/// Mean of `e²/(δ + ‖w‖²)`; `δ = ∞` gives the squared-error objective.
pub fn tls_objective(design: &Design<'_>, w: &[f64], noise_ratio: f64) -> f64 {
    if noise_ratio.is_infinite() {
        return mse_objective(design, w);
    }
    let norm2: f64 = w.iter().map(|v| v * v).sum();
    mse_objective(design, w) / (noise_ratio + norm2)
}

/// Least squares: `Σ x̃d / Σ x̃²` for scalars, the normal equations otherwise.
pub fn mse_estimate(design: &Design<'_>) -> Result<EstimateResult> {
    let w = weighted_normal_equations(design, None)?;
    let obj = mse_objective(design, &w);
    Ok(finish(Estimator::Mse, design, w, obj))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Lower bound on |e| inside the IRLS weight 1/|e|.
    pub smoothing: f64,
}

impl Default for LadOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 500,
            smoothing: 1e-8,
        }
    }
}

/// Smallest `r` whose cumulative weight reaches half the total. When the
/// cumulative weight hits exactly half, the lower ratio is returned.
pub fn weighted_median(pairs: &mut [(f64, f64)]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut cum = 0.0;
    for &(r, w) in pairs.iter() {
        cum += w;
        if 2.0 * cum >= total {
            return Some(r);
        }
    }
    pairs.last().map(|p| p.0)
}

pub fn lad_estimate(design: &Design<'_>) -> Result<EstimateResult> {
    lad_estimate_with(design, &LadOptions::default())
}

pub fn lad_estimate_with(design: &Design<'_>, opts: &LadOptions) -> Result<EstimateResult> {
    if design.is_scalar() {
        let mut pairs: Vec<(f64, f64)> = design
            .x()
            .iter()
            .zip(design.d())
            .filter(|(x, _)| **x != 0.0)
            .map(|(x, d)| (d / x, x.abs()))
            .collect();
        let w = weighted_median(&mut pairs).ok_or_else(|| Error::Degenerate("all observed inputs are zero".into()))?;
        let obj = lad_objective(design, &[w]);
        return Ok(finish(Estimator::Lad, design, vec![w], obj));
    }

    // IRLS from the least-squares solution.
    let mut w = weighted_normal_equations(design, None)?;
    let mut weights = vec![0.0; design.n()];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iters {
        iterations = it;
        for (i, g) in weights.iter_mut().enumerate() {
            *g = 1.0 / design.residual(i, &w).abs().max(opts.smoothing);
        }
        let next = weighted_normal_equations(design, Some(&weights))?;
        let step = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        w = next;
        if step < opts.tol {
            converged = true;
            break;
        }
    }
    let obj = lad_objective(design, &w);
    let mut res = finish(Estimator::Lad, design, w, obj);
    res.iterations = iterations;
    res.converged = converged;
    Ok(res)
}

/// Orthogonal regression (equal input and output noise variances).
pub fn tls_estimate(design: &Design<'_>) -> Result<EstimateResult> {
    tls_estimate_weighted(design, 1.0)
}

/// Total least squares with a known noise-variance ratio
/// `δ = var(v) / var(u)`: minimizes `Σ (d − wᵀx̃)² / (δ + ‖w‖²)`.
///
/// Implemented as plain TLS on `[X̃ | d/√δ]` followed by rescaling. `δ = ∞`
/// (no input noise) reduces to least squares; `δ = 0` (no output noise) is
/// supported for the scalar model only.
pub fn tls_estimate_weighted(design: &Design<'_>, noise_ratio: f64) -> Result<EstimateResult> {
    if noise_ratio.is_nan() || noise_ratio < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise variance ratio must be nonnegative, got {noise_ratio}"
        )));
    }
    if noise_ratio.is_infinite() {
        let mut r = mse_estimate(design)?;
        r.estimator = Estimator::Tls;
        return Ok(r);
    }
    let w = if design.is_scalar() {
        vec![scalar_tls(design, noise_ratio)?]
    } else {
        if noise_ratio == 0.0 {
            return Err(Error::InvalidArgument(
                "zero noise ratio is only supported for scalar TLS".into(),
            ));
        }
        vector_tls(design, noise_ratio)?
    };
    let obj = tls_objective(design, &w, noise_ratio);
    Ok(finish(Estimator::Tls, design, w, obj))
}

fn scalar_tls(design: &Design<'_>, delta: f64) -> Result<f64> {
    let (mut sxx, mut sxd, mut sdd) = (0.0, 0.0, 0.0);
    for (x, d) in design.x().iter().zip(design.d()) {
        sxx += x * x;
        sxd += x * d;
        sdd += d * d;
    }
    if delta == 0.0 {
        if sxd == 0.0 {
            return Err(Error::Degenerate("no finite TLS solution: Σx̃d = 0".into()));
        }
        return Ok(sdd / sxd);
    }
    let s = delta.sqrt();
    // Moment matrix of [x̃, d/√δ]: [[a, b], [b, c]].
    let (a, b, c) = (sxx, sxd / s, sdd / delta);
    let half_gap = 0.5 * (a - c);
    let r = half_gap.hypot(b);
    if r == 0.0 {
        return Err(Error::Degenerate(
            "smallest singular direction of [x̃ | d] is not unique".into(),
        ));
    }
    // Eigenvector of the smallest eigenvalue λ is (c − λ, b) ∝ (b, a − λ);
    // use whichever form avoids cancellation.
    let c_minus = -half_gap + r;
    let a_minus = half_gap + r;
    let scaled = if c_minus >= a_minus {
        if b == 0.0 {
            return Err(Error::Degenerate(
                "no finite TLS solution: smallest singular direction has zero output component".into(),
            ));
        }
        c_minus / b
    } else {
        b / a_minus
    };
    Ok(s * scaled)
}

fn vector_tls(design: &Design<'_>, delta: f64) -> Result<Vec<f64>> {
    let (n, p) = (design.n(), design.p());
    if n < p + 1 {
        return Err(Error::Degenerate(format!("TLS needs n >= p + 1, got n = {n}, p = {p}")));
    }
    let s = delta.sqrt();
    let aug = DMatrix::<f64>::from_fn(n, p + 1, |i, j| if j < p { design.row(i)[j] } else { design.d()[i] / s });
    let svd = aug.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::SolverFailed("SVD did not produce right singular vectors".into()))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let (smallest, next) = (order[0], order[1]);
    if sv[next] - sv[smallest] <= 1e-12 * sv[order[order.len() - 1]].max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate(
            "smallest singular direction of [X̃ | d] is not unique".into(),
        ));
    }
    let dir = v_t.row(smallest);
    let last = dir[p];
    if last.abs() <= 1e-14 {
        return Err(Error::Degenerate(
            "no finite TLS solution: smallest singular direction has zero output component".into(),
        ));
    }
    Ok((0..p).map(|k| -s * dir[k] / last).collect())
}
