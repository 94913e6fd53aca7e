//! Deterministic full-batch solvers for the two linear models.
//!
//! Logistic regression minimizes the L2-regularized negative log-likelihood
//! `sum_i ln(1 + exp(-y_i z_i)) + (l2/2)||w||^2` (bias unregularized) by
//! gradient descent with Armijo backtracking. The SVM minimizes the
//! L2-regularized mean hinge loss by deterministic sub-gradient descent with
//! `1/(l2*t)` steps and averaged iterates.

use super::TrainConfig;
use crate::ingest::ClassLabel;
use crate::scalar::{sigmoid, Scalar};

pub(crate) struct LinearFit<S> {
    pub weights: Vec<S>,
    pub bias: S,
    pub converged: bool,
    pub iterations: usize,
}

fn signs<S: Scalar>(y: &[ClassLabel]) -> Vec<S> {
    y.iter()
        .map(|&l| {
            if l == ClassLabel::Gang {
                S::one()
            } else {
                -S::one()
            }
        })
        .collect()
}

/// Numerically stable `ln(1 + e^t)`.
fn softplus<S: Scalar>(t: S) -> S {
    let cut = S::from_f64_cfg(30.0);
    if t > cut {
        t
    } else if t < -cut {
        t.exp()
    } else {
        (S::one() + t.exp()).ln()
    }
}

/// Regularized logistic loss and its gradient at `(weights, bias)`.
/// Exposed so oracle tests can compare the analytic gradient against finite
/// differences of an independently computed loss.
pub fn logistic_loss_gradient<S: Scalar>(
    x: &[Vec<S>],
    y: &[ClassLabel],
    weights: &[S],
    bias: S,
    l2_strength: f64,
) -> (S, Vec<S>, S) {
    let l2 = S::from_f64_cfg(l2_strength);
    let ys = signs::<S>(y);
    let mut loss = S::zero();
    let mut grad_w = vec![S::zero(); weights.len()];
    let mut grad_b = S::zero();
    for (row, &sign) in x.iter().zip(&ys) {
        let z = weights
            .iter()
            .zip(row)
            .fold(bias, |acc, (&w, &v)| acc + w * v);
        loss += softplus(-sign * z);
        // d/dz ln(1+e^{-yz}) = -y * sigmoid(-yz)
        let coeff = -sign * sigmoid(-sign * z);
        for (g, &v) in grad_w.iter_mut().zip(row) {
            *g += coeff * v;
        }
        grad_b += coeff;
    }
    let half = S::from_f64_cfg(0.5);
    let mut reg = S::zero();
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g += l2 * w;
        reg += w * w;
    }
    loss += half * l2 * reg;
    (loss, grad_w, grad_b)
}

fn norm2<S: Scalar>(grad_w: &[S], grad_b: S) -> S {
    grad_w
        .iter()
        .fold(grad_b * grad_b, |acc, &g| acc + g * g)
}

pub(crate) fn train_logreg<S: Scalar>(
    x: &[Vec<S>],
    y: &[ClassLabel],
    config: &TrainConfig,
) -> LinearFit<S> {
    let d = x[0].len();
    let mut weights = vec![S::zero(); d];
    let mut bias = S::zero();
    let tol2 = S::from_f64_cfg(config.tolerance * config.tolerance);
    let armijo = S::from_f64_cfg(1e-4);
    let half = S::from_f64_cfg(0.5);
    let mut step = S::one();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..config.max_iters {
        iterations = iter;
        let (loss, grad_w, grad_b) =
            logistic_loss_gradient(x, y, &weights, bias, config.l2_strength);
        let grad_norm2 = norm2(&grad_w, grad_b);
        if grad_norm2 <= tol2 {
            converged = true;
            break;
        }
        // Armijo backtracking from a warm-started step
        step = (step + step).min(S::from_f64_cfg(1e4));
        let mut accepted = false;
        for _ in 0..60 {
            let cand_w: Vec<S> = weights
                .iter()
                .zip(&grad_w)
                .map(|(&w, &g)| w - step * g)
                .collect();
            let cand_b = bias - step * grad_b;
            let (cand_loss, _, _) =
                logistic_loss_gradient(x, y, &cand_w, cand_b, config.l2_strength);
            if cand_loss <= loss - armijo * step * grad_norm2 {
                weights = cand_w;
                bias = cand_b;
                accepted = true;
                break;
            }
            step *= half;
        }
        if !accepted {
            break;
        }
    }
    if converged {
        LinearFit {
            weights,
            bias,
            converged,
            iterations,
        }
    } else {
        LinearFit {
            weights,
            bias,
            converged: false,
            iterations: config.max_iters,
        }
    }
}

pub(crate) fn train_svm<S: Scalar>(
    x: &[Vec<S>],
    y: &[ClassLabel],
    config: &TrainConfig,
) -> LinearFit<S> {
    let d = x[0].len();
    let n = S::from_usize(x.len()).expect("sample count fits scalar");
    let ys = signs::<S>(y);
    let l2 = S::from_f64_cfg(config.l2_strength);
    let mut weights = vec![S::zero(); d];
    let mut bias = S::zero();
    let mut avg_w = vec![S::zero(); d];
    let mut avg_b = S::zero();

    for t in 0..config.max_iters {
        let mut sub_w: Vec<S> = weights.iter().map(|&w| l2 * w).collect();
        let mut sub_b = S::zero();
        for (row, &sign) in x.iter().zip(&ys) {
            let z = weights
                .iter()
                .zip(row)
                .fold(bias, |acc, (&w, &v)| acc + w * v);
            if sign * z < S::one() {
                for (g, &v) in sub_w.iter_mut().zip(row) {
                    *g -= sign * v / n;
                }
                sub_b -= sign / n;
            }
        }
        let eta = S::one() / (l2 * S::from_usize(t + 1).expect("iter fits scalar"));
        for (w, &g) in weights.iter_mut().zip(&sub_w) {
            *w -= eta * g;
        }
        bias -= eta * sub_b;
        for (a, &w) in avg_w.iter_mut().zip(&weights) {
            *a += w;
        }
        avg_b += bias;
    }
    let iters = S::from_usize(config.max_iters).expect("iter count fits scalar");
    for a in avg_w.iter_mut() {
        *a /= iters;
    }
    avg_b /= iters;
    LinearFit {
        weights: avg_w,
        bias: avg_b,
        converged: true,
        iterations: config.max_iters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_problem(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<ClassLabel>) {
        let mut rng = crate::seeding::rng_from_seed(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let y: Vec<ClassLabel> = (0..n)
            .map(|i| {
                if i < n / 2 || rng.random::<f64>() < 0.3 {
                    ClassLabel::Gang
                } else {
                    ClassLabel::NonGang
                }
            })
            .collect();
        (x, y)
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let h = 1e-6;
        for seed in 0..5u64 {
            let mut rng = crate::seeding::rng_from_seed(seed + 100);
            let n = 10 + (seed as usize % 20);
            let d = 2 + (seed as usize % 5);
            let (x, y) = random_problem(seed, n, d);
            let weights: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            let bias: f64 = rng.random::<f64>() - 0.5;
            let l2 = 0.7;

            // independent loss implementation for the finite differences
            let loss_at = |w: &[f64], b: f64| -> f64 {
                let mut total = 0.0;
                for (row, &label) in x.iter().zip(&y) {
                    let sign = if label == ClassLabel::Gang { 1.0 } else { -1.0 };
                    let z: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
                    total += (1.0 + (-sign * z).exp()).ln();
                }
                total + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
            };

            let (_, grad_w, grad_b) = logistic_loss_gradient(&x, &y, &weights, bias, l2);
            for j in 0..d {
                let mut wp = weights.clone();
                let mut wm = weights.clone();
                wp[j] += h;
                wm[j] -= h;
                let fd = (loss_at(&wp, bias) - loss_at(&wm, bias)) / (2.0 * h);
                let denom = grad_w[j].abs().max(fd.abs()).max(1e-8);
                assert!(
                    ((grad_w[j] - fd) / denom).abs() < 1e-5,
                    "w[{j}]: analytic {} vs fd {fd}",
                    grad_w[j]
                );
            }
            let fd = (loss_at(&weights, bias + h) - loss_at(&weights, bias - h)) / (2.0 * h);
            let denom = grad_b.abs().max(fd.abs()).max(1e-8);
            assert!(((grad_b - fd) / denom).abs() < 1e-5);
        }
    }

    #[test]
    fn logreg_reports_converged_gradient_norm() {
        let (x, y) = random_problem(3, 30, 4);
        let config = TrainConfig::default();
        let fit = train_logreg(&x, &y, &config);
        if fit.converged {
            let (_, grad_w, grad_b) =
                logistic_loss_gradient(&x, &y, &fit.weights, fit.bias, config.l2_strength);
            let norm = norm2(&grad_w, grad_b).sqrt();
            assert!(norm <= config.tolerance, "reported converged but norm {norm}");
        } else {
            assert_eq!(fit.iterations, config.max_iters);
        }
    }
}
