//! Maximizers of the empirical correntropy.
//!
//! The objective is not concave, so every local method here is run from
//! several starting points and the best terminal point wins. The grid solver
//! is a global oracle for the scalar case.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::{lad_estimate, mse_estimate, weighted_normal_equations};
use super::correntropy::{mcc_deficit, mcc_gradient, mcc_objective, scalar_deficit};
use super::{EstimateResult, Estimator};
use crate::error::{Error, Result};
use crate::model::Design;
use crate::rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MccSolver {
    #[default]
    FixedPoint,
    Grid,
    Eda,
    GradientAscent,
}

impl std::str::FromStr for MccSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-point" => Ok(MccSolver::FixedPoint),
            "grid" => Ok(MccSolver::Grid),
            "eda" => Ok(MccSolver::Eda),
            "gradient-ascent" => Ok(MccSolver::GradientAscent),
            other => Err(Error::InvalidArgument(format!("unknown MCC solver {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MccConfig {
    /// Kernel width.
    pub sigma: f64,
    pub solver: MccSolver,
    pub max_iters: usize,
    /// Convergence threshold on the largest parameter change.
    pub tol: f64,
    /// Search interval for the grid and EDA solvers (every coordinate for
    /// vectors). Defaults to `[−10s, 10s]` with `s = max(1, ‖w_MSE‖∞)`.
    pub search_lo: Option<f64>,
    pub search_hi: Option<f64>,
    pub grid_points: usize,
    pub coarse_grid_points: usize,
    /// Number of fixed-point / gradient starts, taken in order from
    /// LAD, MSE, then the best coarse-grid points (scalar) or the EDA
    /// optimum (vector).
    pub multistart: usize,
    pub eda_population: usize,
    pub eda_elites: usize,
    pub eda_generations: usize,
    pub eda_variance_floor: f64,
    pub seed: u64,
}

impl Default for MccConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            solver: MccSolver::FixedPoint,
            max_iters: 500,
            tol: 1e-8,
            search_lo: None,
            search_hi: None,
            grid_points: 2001,
            coarse_grid_points: 64,
            multistart: 3,
            eda_population: 200,
            eda_elites: 50,
            eda_generations: 100,
            eda_variance_floor: 1e-12,
            seed: 0,
        }
    }
}

impl MccConfig {
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("kernel width must be positive, got {}", self.sigma));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tol));
        }
        if let (Some(lo), Some(hi)) = (self.search_lo, self.search_hi) {
            if !(lo < hi) {
                return bad(format!("search window [{lo}, {hi}] is empty"));
            }
        }
        if self.search_lo.is_some() != self.search_hi.is_some() {
            return bad("search window needs both bounds".into());
        }
        if self.eda_elites == 0 || self.eda_elites >= self.eda_population {
            return bad(format!(
                "need 0 < elites < population, got {} / {}",
                self.eda_elites, self.eda_population
            ));
        }
        if self.multistart == 0 {
            return bad("multistart must be at least 1".into());
        }
        Ok(())
    }

    pub fn window(&self, design: &Design<'_>) -> (f64, f64) {
        match (self.search_lo, self.search_hi) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => default_window(design),
        }
    }
}

pub fn default_window(design: &Design<'_>) -> (f64, f64) {
    let s = mse_estimate(design)
        .map(|r| r.w_hat.iter().fold(1.0f64, |m, w| m.max(w.abs())))
        .unwrap_or(1.0);
    (-10.0 * s, 10.0 * s)
}

/// Grid size giving roughly eight points per kernel width at the typical
/// input magnitude, never fewer than `min_points`.
pub fn auto_grid_points(design: &Design<'_>, sigma: f64, lo: f64, hi: f64, min_points: usize) -> usize {
    let mut mags: Vec<f64> = design.x().iter().map(|x| x.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let typical = mags[mags.len() / 2].max(f64::MIN_POSITIVE);
    let spacing = sigma / (8.0 * typical);
    let needed = ((hi - lo) / spacing).ceil();
    if needed.is_finite() {
        (needed as usize + 1).clamp(min_points, 1_000_000)
    } else {
        min_points
    }
}

pub fn mcc_estimate(design: &Design<'_>, config: &MccConfig) -> Result<EstimateResult> {
    match config.solver {
        MccSolver::FixedPoint => mcc_estimate_fixed_point(design, config),
        MccSolver::Grid => mcc_estimate_grid(design, config),
        MccSolver::Eda => mcc_estimate_eda(design, config),
        MccSolver::GradientAscent => mcc_estimate_gradient(design, config),
    }
}

fn finish(design: &Design<'_>, w: Vec<f64>, sigma: f64) -> EstimateResult {
    EstimateResult {
        estimator: Estimator::Mcc,
        objective: mcc_objective(design, &w, sigma),
        residuals: design.residuals(&w),
        w_hat: w,
        iterations: 0,
        converged: false,
        starts_tried: 1,
        boundary_hit: false,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Starting points in priority order, truncated to `multistart`.
fn initial_points(design: &Design<'_>, config: &MccConfig) -> Vec<Vec<f64>> {
    let mut starts = Vec::new();
    if let Ok(r) = lad_estimate(design) {
        starts.push(r.w_hat);
    }
    if let Ok(r) = mse_estimate(design) {
        starts.push(r.w_hat);
    }
    if starts.len() < config.multistart {
        if design.is_scalar() {
            let (lo, hi) = config.window(design);
            let g = config.coarse_grid_points.max(2);
            let mut coarse: Vec<(f64, f64)> = (0..g)
                .map(|k| {
                    let w = lo + (hi - lo) * k as f64 / (g - 1) as f64;
                    (scalar_deficit(design.x(), design.d(), w, config.sigma), w)
                })
                .collect();
            coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
            starts.extend(coarse.into_iter().map(|(_, w)| vec![w]));
        } else if let Ok(r) = mcc_estimate_eda(design, config) {
            starts.push(r.w_hat);
        }
    }
    starts.truncate(config.multistart);
    starts
}

struct LocalRun {
    w: Vec<f64>,
    deficit: f64,
    iterations: usize,
    converged: bool,
}

/// Picks the best local run; the first run wins ties.
fn best_of(runs: Vec<LocalRun>, starts_tried: usize, design: &Design<'_>, sigma: f64) -> Result<EstimateResult> {
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.deficit < a.deficit { b } else { a })
        .ok_or_else(|| Error::SolverFailed("every starting point failed".into()))?;
    let mut res = finish(design, best.w, sigma);
    res.iterations = best.iterations;
    res.converged = best.converged;
    res.starts_tried = starts_tried;
    Ok(res)
}

fn fixed_point_from(design: &Design<'_>, start: Vec<f64>, config: &MccConfig) -> Option<LocalRun> {
    let k = 1.0 / (2.0 * config.sigma * config.sigma);
    let mut w = start;
    let mut weights = vec![0.0; design.n()];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=config.max_iters {
        iterations = it;
        for (i, g) in weights.iter_mut().enumerate() {
            let e = design.residual(i, &w);
            *g = (-e * e * k).exp();
        }
        // Underflowed weights: this start is abandoned.
        let next = weighted_normal_equations(design, Some(&weights)).ok()?;
        let step = max_abs_diff(&next, &w);
        w = next;
        if step < config.tol {
            converged = true;
            break;
        }
    }
    Some(LocalRun {
        deficit: mcc_deficit(design, &w, config.sigma),
        w,
        iterations,
        converged,
    })
}

/// Fixed-point iteration `w ← (Σ gᵢ x̃ᵢ x̃ᵢᵀ)⁻¹ Σ gᵢ x̃ᵢ dᵢ` with
/// `gᵢ = exp(−eᵢ²/2σ²)`, from each starting point.
pub fn mcc_estimate_fixed_point(design: &Design<'_>, config: &MccConfig) -> Result<EstimateResult> {
    config.validate()?;
    let starts = initial_points(design, config);
    let tried = starts.len();
    let mut runs = Vec::with_capacity(2 * tried);
    for s in starts {
        let at_start = LocalRun {
            deficit: mcc_deficit(design, &s, config.sigma),
            w: s.clone(),
            iterations: 0,
            converged: false,
        };
        if let Some(run) = fixed_point_from(design, s, config) {
            runs.push(run);
        }
        // The start itself is a candidate, so the result never scores below
        // any starting point.
        runs.push(at_start);
    }
    if runs.iter().all(|r| r.iterations == 0) {
        return Err(Error::SolverFailed(
            "fixed-point weights underflowed from every starting point".into(),
        ));
    }
    best_of(runs, tried, design, config.sigma)
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iters: usize) -> (f64, usize, bool) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut it = 0;
    while (b - a) > tol && it < max_iters {
        it += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = if fc <= fd { c } else { d };
    (x, it, (b - a) <= tol)
}

/// Dense scan of the search window followed by golden-section refinement
/// inside the best grid cell. Scalar parameter only.
pub fn mcc_estimate_grid(design: &Design<'_>, config: &MccConfig) -> Result<EstimateResult> {
    config.validate()?;
    if !design.is_scalar() {
        return Err(Error::InvalidArgument("grid solver needs a scalar parameter".into()));
    }
    if config.grid_points < 3 {
        return Err(Error::InvalidArgument("grid solver needs at least 3 points".into()));
    }
    let (x, d, sigma) = (design.x(), design.d(), config.sigma);
    let (lo, hi) = config.window(design);
    let g = config.grid_points;
    let h = (hi - lo) / (g - 1) as f64;
    let at = |k: usize| if k == g - 1 { hi } else { lo + h * k as f64 };

    let deficits: Vec<f64> = (0..g)
        .into_par_iter()
        .map(|k| scalar_deficit(x, d, at(k), sigma))
        .collect();
    let best = (0..g)
        .reduce(|a, b| if deficits[b] < deficits[a] { b } else { a })
        .unwrap_or(0);

    let (a, b) = (at(best.saturating_sub(1)), at((best + 1).min(g - 1)));
    let f = |w: f64| scalar_deficit(x, d, w, sigma);
    let (refined, iterations, converged) = golden_section_min(f, a, b, config.tol, config.max_iters);
    let w = if f(refined) <= deficits[best] { refined } else { at(best) };

    let mut res = finish(design, vec![w], sigma);
    res.iterations = iterations;
    res.converged = converged;
    res.boundary_hit = best == 0 || best == g - 1;
    Ok(res)
}

/// Univariate-Gaussian estimation of distribution algorithm: sample, keep
/// the elites, refit a per-coordinate Gaussian, repeat. Returns the best
/// individual ever evaluated.
pub fn mcc_estimate_eda(design: &Design<'_>, config: &MccConfig) -> Result<EstimateResult> {
    config.validate()?;
    let (pop_size, elites) = (config.eda_population, config.eda_elites);
    if pop_size < 2 * elites {
        return Err(Error::InvalidArgument(format!(
            "EDA population {pop_size} must be at least twice the elite count {elites}"
        )));
    }
    let p = design.p();
    let sigma = config.sigma;
    let (lo, hi) = config.window(design);
    let mut rng = rng::stream(config.seed, "eda", &[]);

    let mut pop: Vec<Vec<f64>> = (0..pop_size)
        .map(|_| (0..p).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect())
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut spread = f64::INFINITY;

    for generation in 0..=config.eda_generations {
        let scores: Vec<f64> = pop.par_iter().map(|w| mcc_deficit(design, w, sigma)).collect();
        let mut order: Vec<usize> = (0..pop_size).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        let top = order[0];
        if best.as_ref().is_none_or(|(s, _)| scores[top] < *s) {
            best = Some((scores[top], pop[top].clone()));
        }
        if generation == config.eda_generations {
            break;
        }

        let mut mean = vec![0.0; p];
        for &i in &order[..elites] {
            for (m, v) in mean.iter_mut().zip(&pop[i]) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= elites as f64);
        let mut sd = vec![0.0; p];
        for &i in &order[..elites] {
            for k in 0..p {
                sd[k] += (pop[i][k] - mean[k]).powi(2);
            }
        }
        for s in sd.iter_mut() {
            *s = (*s / elites as f64).max(config.eda_variance_floor).sqrt();
        }
        spread = sd.iter().copied().fold(0.0, f64::max);

        for ind in pop.iter_mut() {
            for k in 0..p {
                let z: f64 = rng.sample(StandardNormal);
                ind[k] = mean[k] + sd[k] * z;
            }
        }
    }

    let (_, w) = best.expect("at least one generation is evaluated");
    let mut res = finish(design, w, sigma);
    res.iterations = config.eda_generations;
    res.converged = spread <= 1e-6 * (hi - lo);
    Ok(res)
}

fn gradient_ascent_from(design: &Design<'_>, start: Vec<f64>, config: &MccConfig) -> LocalRun {
    let sigma = config.sigma;
    let energy = design.x().iter().map(|x| x * x).sum::<f64>() / design.n() as f64;
    let mut step = sigma * sigma / energy.max(f64::MIN_POSITIVE);
    let mut w = start;
    let mut deficit = mcc_deficit(design, &w, sigma);
    let mut converged = false;
    let mut iterations = 0;
    'outer: for it in 1..=config.max_iters {
        iterations = it;
        let grad = mcc_gradient(design, &w, sigma);
        // Backtracking until the objective does not decrease.
        for _ in 0..60 {
            let next: Vec<f64> = w.iter().zip(&grad).map(|(w, g)| w + step * g).collect();
            let next_deficit = mcc_deficit(design, &next, sigma);
            if next_deficit <= deficit {
                let change = max_abs_diff(&next, &w);
                w = next;
                deficit = next_deficit;
                step *= 1.5;
                if change < config.tol {
                    converged = true;
                    break 'outer;
                }
                continue 'outer;
            }
            step *= 0.5;
        }
        converged = true;
        break;
    }
    LocalRun {
        w,
        deficit,
        iterations,
        converged,
    }
}

/// Gradient ascent with backtracking from the same starts as the
/// fixed-point solver.
pub fn mcc_estimate_gradient(design: &Design<'_>, config: &MccConfig) -> Result<EstimateResult> {
    config.validate()?;
    let starts = initial_points(design, config);
    let tried = starts.len();
    let runs = starts.into_iter().map(|s| gradient_ascent_from(design, s, config)).collect();
    best_of(runs, tried, design, config.sigma)
}
