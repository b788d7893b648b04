//! Empirical correntropy of the residual and its gradient.

use crate::model::Design;

/// `(1/N) Σ exp(−(dᵢ − wᵀx̃ᵢ)² / 2σ²)`, always in `(0, 1]`.
pub fn mcc_objective(design: &Design<'_>, w: &[f64], sigma: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    let k = 1.0 / (2.0 * sigma * sigma);
    let sum: f64 = (0..design.n())
        .map(|i| {
            let e = design.residual(i, w);
            (-e * e * k).exp()
        })
        .sum();
    sum / design.n() as f64
}

/// `1 − Ĵ(w)` accumulated through `expm1`, so that comparisons stay
/// resolvable when σ is large and every kernel value is close to one.
pub(crate) fn mcc_deficit(design: &Design<'_>, w: &[f64], sigma: f64) -> f64 {
    let k = 1.0 / (2.0 * sigma * sigma);
    let sum: f64 = (0..design.n())
        .map(|i| {
            let e = design.residual(i, w);
            -(-e * e * k).exp_m1()
        })
        .sum();
    sum / design.n() as f64
}

/// Scalar fast path for the grid and golden-section searches.
pub(crate) fn scalar_deficit(x: &[f64], d: &[f64], w: f64, sigma: f64) -> f64 {
    let k = 1.0 / (2.0 * sigma * sigma);
    let sum: f64 = x
        .iter()
        .zip(d)
        .map(|(x, d)| {
            let e = d - w * x;
            -(-e * e * k).exp_m1()
        })
        .sum();
    sum / x.len() as f64
}

/// `(1/Nσ²) Σ exp(−eᵢ²/2σ²) eᵢ x̃ᵢ`.
pub fn mcc_gradient(design: &Design<'_>, w: &[f64], sigma: f64) -> Vec<f64> {
    let k = 1.0 / (2.0 * sigma * sigma);
    let mut grad = vec![0.0; design.p()];
    for (i, row) in design.rows().enumerate() {
        let e = design.residual(i, w);
        let ge = (-e * e * k).exp() * e;
        for (g, x) in grad.iter_mut().zip(row) {
            *g += ge * x;
        }
    }
    let scale = 1.0 / (design.n() as f64 * sigma * sigma);
    grad.iter_mut().for_each(|g| *g *= scale);
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_fit_scores_one() {
        let x = [1.0, -2.0, 0.5];
        let d = [3.0, -6.0, 1.5];
        let des = Design::scalar(&x, &d).unwrap();
        assert_eq!(mcc_objective(&des, &[3.0], 0.7), 1.0);
        assert_eq!(mcc_gradient(&des, &[3.0], 0.7), vec![0.0]);
    }

    #[test]
    fn half_height_point() {
        let (x, d) = ([1.0], [3.0]);
        let des = Design::scalar(&x, &d).unwrap();
        for sigma in [0.1, 1.0, 3.7] {
            let w = 3.0 + sigma * (2.0 * std::f64::consts::LN_2).sqrt();
            assert!((mcc_objective(&des, &[w], sigma) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn decays_far_from_the_data() {
        let x = [1.0, 2.0];
        let d = [3.0, 6.0];
        let des = Design::scalar(&x, &d).unwrap();
        assert!(mcc_objective(&des, &[1e6], 1.0) < 1e-300);
        assert!(mcc_objective(&des, &[-1e6], 1.0) < 1e-300);
    }

    #[test]
    fn symmetric_residuals_cancel() {
        let (w, delta) = (2.0, 0.25);
        let x = [1.0, 1.0];
        let d = [w + delta, w - delta];
        let des = Design::scalar(&x, &d).unwrap();
        assert_eq!(mcc_gradient(&des, &[w], 0.5), vec![0.0]);
    }

    #[test]
    fn deficit_complements_objective() {
        let x = [1.0, -2.0, 0.5, 4.0];
        let d = [3.1, -5.0, 1.0, 20.0];
        let des = Design::scalar(&x, &d).unwrap();
        for w in [-1.0, 2.0, 3.0, 5.0] {
            let a = mcc_objective(&des, &[w], 0.8);
            let b = mcc_deficit(&des, &[w], 0.8);
            assert!((a + b - 1.0).abs() < 1e-15);
            assert_eq!(b, scalar_deficit(&x, &d, w, 0.8));
        }
    }

    proptest! {
        #[test]
        fn objective_is_in_unit_interval(
            pts in prop::collection::vec((-5.0f64..5.0, -20.0f64..20.0), 1..30),
            w in -10.0f64..10.0,
            sigma in 0.01f64..10.0,
        ) {
            let (x, d): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let des = Design::scalar(&x, &d).unwrap();
            let j = mcc_objective(&des, &[w], sigma);
            prop_assert!(j >= 0.0 && j <= 1.0);
            let res = des.residuals(&[w]);
            if res.iter().all(|e| *e == 0.0) {
                prop_assert_eq!(j, 1.0);
            }
            if res.iter().any(|e| e * e / (2.0 * sigma * sigma) > 1e-12) {
                prop_assert!(j < 1.0);
            }
        }
    }
}
