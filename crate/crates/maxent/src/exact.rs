//! Exact maximum-entropy machinery for small systems: partition function,
//! Gibbs probabilities, moment-matched fitting, order-k model entropies and
//! the multi-information criterion.
//!
//! Everything here enumerates all 2^N configurations, so N is bounded by
//! [`DEFAULT_EXACT_LIMIT`] (a capability bound, not a recommendation).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::core::{
    empirical_distribution, entropy, sample_moments, ConfigDistribution, Configuration,
    CouplingModel, MomentSet,
};
use crate::error::{MaxentError, Result};

/// Default cap on exact enumeration (2^20 configurations).
pub const DEFAULT_EXACT_LIMIT: usize = 20;

/// Moment mismatch accepted by the exact fit.
pub const MOMENT_TOLERANCE: f64 = 1e-6;

const MAX_FIT_ITERATIONS: usize = 10_000;

/// A coupling model together with its exact log partition function.
#[derive(Debug, Clone)]
pub struct GibbsEnsemble {
    pub model: CouplingModel,
    pub log_partition: f64,
}

fn check_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit || n >= usize::BITS as usize - 1 {
        return Err(MaxentError::SizeLimitExceeded { n, limit });
    }
    Ok(())
}

/// Signs of configuration `index` (bit i set means s_i = +1) as f64.
#[inline]
fn signs_of_index(index: usize, n: usize, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate().take(n) {
        *o = if (index >> i) & 1 == 1 { 1.0 } else { -1.0 };
    }
}

/// beta * U(s) for every configuration, indexed per [`Configuration::from_index`].
fn scaled_utilities(model: &CouplingModel) -> Vec<f64> {
    let n = model.n_units();
    let total = 1usize << n;
    let j = model.influences();
    let h = model.fields();
    let beta = model.beta();
    (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut s = [0.0f64; 64];
            signs_of_index(idx, n, &mut s);
            let mut u = 0.0;
            for i in 0..n {
                u += h[i] * s[i];
                for k in (i + 1)..n {
                    u += j[(i, k)] * s[i] * s[k];
                }
            }
            beta * u
        })
        .collect()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Exact log partition function ln Z = ln sum_s exp(beta U(s)).
pub fn log_partition(model: &CouplingModel) -> Result<f64> {
    check_limit(model.n_units(), DEFAULT_EXACT_LIMIT)?;
    Ok(log_sum_exp(&scaled_utilities(model)))
}

/// Exact ensemble (model + ln Z).
pub fn gibbs_ensemble(model: &CouplingModel) -> Result<GibbsEnsemble> {
    Ok(GibbsEnsemble {
        model: model.clone(),
        log_partition: log_partition(model)?,
    })
}

/// Full-support Gibbs distribution p(s) = exp(beta U(s)) / Z over all 2^N
/// configurations, with the configurable enumeration cap.
pub fn gibbs_distribution_with_limit(
    model: &CouplingModel,
    limit: usize,
) -> Result<ConfigDistribution> {
    let n = model.n_units();
    check_limit(n, limit)?;
    let us = scaled_utilities(model);
    let log_z = log_sum_exp(&us);
    let support = (0..us.len())
        .map(|idx| Configuration::from_index(idx, n))
        .collect();
    let probs = us.iter().map(|&u| (u - log_z).exp()).collect();
    ConfigDistribution::new(support, probs)
}

/// [`gibbs_distribution_with_limit`] with the default cap.
pub fn gibbs_distribution(model: &CouplingModel) -> Result<ConfigDistribution> {
    gibbs_distribution_with_limit(model, DEFAULT_EXACT_LIMIT)
}

// ---------------------------------------------------------------------------
// Exact fitting
// ---------------------------------------------------------------------------

/// Number of natural parameters for system size n: h (n) + J upper triangle.
fn param_count(n: usize) -> usize {
    n + n * (n - 1) / 2
}

/// Pack (fields, upper-triangular influences) into a parameter vector.
fn pack_params(model: &CouplingModel) -> DVector<f64> {
    let n = model.n_units();
    let mut theta = DVector::zeros(param_count(n));
    for i in 0..n {
        theta[i] = model.fields()[i];
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            theta[k] = model.influences()[(i, j)];
            k += 1;
        }
    }
    theta
}

fn unpack_params(theta: &DVector<f64>, n: usize) -> CouplingModel {
    let mut jm = DMatrix::zeros(n, n);
    let h = DVector::from_fn(n, |i, _| theta[i]);
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            jm[(i, j)] = theta[k];
            jm[(j, i)] = theta[k];
            k += 1;
        }
    }
    CouplingModel::new(jm, h).expect("packed parameters form a valid model")
}

/// Empirical sufficient-statistic targets (q_i then q_ij for i<j).
fn pack_targets(moments: &MomentSet) -> DVector<f64> {
    let n = moments.n_units();
    let mut target = DVector::zeros(param_count(n));
    for i in 0..n {
        target[i] = moments.means[i];
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            target[k] = moments.pair_corrs[(i, j)];
            k += 1;
        }
    }
    target
}

struct EnumerationStats {
    log_z: f64,
    mean: DVector<f64>,
    /// Second moment matrix E[phi phi^T]; covariance derived by the caller.
    second: DMatrix<f64>,
}

/// One pass over all configurations: ln Z, E[phi] and E[phi phi^T] under the
/// model, where phi(s) = (s_1..s_n, s_i s_j for i<j).
fn enumerate_stats(model: &CouplingModel, with_second: bool) -> EnumerationStats {
    let n = model.n_units();
    let d = param_count(n);
    let us = scaled_utilities(model);
    let log_z = log_sum_exp(&us);

    let identity = || (DVector::<f64>::zeros(d), DMatrix::<f64>::zeros(if with_second { d } else { 0 }, if with_second { d } else { 0 }));
    let (mean, second) = us
        .par_iter()
        .enumerate()
        .fold(identity, |(mut mean, mut second), (idx, &u)| {
            let p = (u - log_z).exp();
            let mut s = [0.0f64; 64];
            signs_of_index(idx, n, &mut s);
            let mut phi = vec![0.0f64; d];
            phi[..n].copy_from_slice(&s[..n]);
            let mut k = n;
            for i in 0..n {
                for j in (i + 1)..n {
                    phi[k] = s[i] * s[j];
                    k += 1;
                }
            }
            for a in 0..d {
                mean[a] += p * phi[a];
            }
            if with_second {
                for a in 0..d {
                    let pa = p * phi[a];
                    for b in a..d {
                        second[(a, b)] += pa * phi[b];
                    }
                }
            }
            (mean, second)
        })
        .reduce(identity, |(m1, s1), (m2, s2)| (m1 + m2, s1 + s2));

    let mut second = second;
    if with_second {
        for a in 0..d {
            for b in 0..a {
                second[(a, b)] = second[(b, a)];
            }
        }
    }
    EnumerationStats {
        log_z,
        mean,
        second,
    }
}

/// Exact moment-matched maximum-entropy fit: damped Newton ascent on the
/// concave average log-likelihood of the exponential family, with the
/// configurable enumeration cap.
///
/// The returned model's Gibbs moments match the inputs with max absolute
/// mismatch below [`MOMENT_TOLERANCE`].
pub fn fit_exact_maxent_with_limit(moments: &MomentSet, limit: usize) -> Result<CouplingModel> {
    let n = moments.n_units();
    check_limit(n, limit)?;
    for i in 0..n {
        if moments.means[i].abs() >= 1.0 {
            return Err(MaxentError::SaturatedMean { index: i });
        }
    }
    let target = pack_targets(moments);
    let d = param_count(n);
    let mut theta = DVector::zeros(d);
    // Warm start: independent fields matching q_i.
    for i in 0..n {
        theta[i] = moments.means[i].atanh();
    }

    let mut model = unpack_params(&theta, n);
    let mut stats = enumerate_stats(&model, true);
    let mut log_lik = theta.dot(&target) - stats.log_z;

    for iteration in 0..MAX_FIT_ITERATIONS {
        let grad = &target - &stats.mean;
        let residual = grad.amax();
        if residual < MOMENT_TOLERANCE {
            return Ok(model);
        }
        // Fisher information = covariance of sufficient statistics.
        let mut hess = &stats.second - &stats.mean * stats.mean.transpose();
        let ridge = 1e-10 * (hess.trace() / d as f64).max(1e-12);
        for a in 0..d {
            hess[(a, a)] += ridge;
        }
        let step = hess
            .cholesky()
            .map(|ch| ch.solve(&grad))
            .unwrap_or_else(|| grad.clone());
        // Backtracking line search on the concave log-likelihood.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = &theta + scale * &step;
            let cand_model = unpack_params(&candidate, n);
            let cand_stats = enumerate_stats(&cand_model, true);
            let cand_ll = candidate.dot(&target) - cand_stats.log_z;
            if cand_ll.is_finite() && cand_ll >= log_lik - 1e-15 {
                theta = candidate;
                model = cand_model;
                stats = cand_stats;
                log_lik = cand_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(MaxentError::NonConvergence {
                iterations: iteration + 1,
                residual,
            });
        }
    }
    Err(MaxentError::NonConvergence {
        iterations: MAX_FIT_ITERATIONS,
        residual: (&target - &stats.mean).amax(),
    })
}

/// [`fit_exact_maxent_with_limit`] with the default cap.
pub fn fit_exact_maxent(moments: &MomentSet) -> Result<CouplingModel> {
    fit_exact_maxent_with_limit(moments, DEFAULT_EXACT_LIMIT)
}

// ---------------------------------------------------------------------------
// Model entropies and the multi-information criterion
// ---------------------------------------------------------------------------

/// Order of the maximum-entropy model whose entropy is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelOrder {
    /// Independent model matching first moments only.
    One,
    /// Pairwise model matching first and second moments.
    Two,
    /// Plug-in empirical distribution (order N).
    Full,
}

fn binary_entropy(p: f64) -> f64 {
    let mut s = 0.0;
    if p > 0.0 {
        s -= p * p.ln();
    }
    if p < 1.0 {
        s -= (1.0 - p) * (1.0 - p).ln();
    }
    s
}

/// Entropy of a fitted exponential-family model: S = ln Z - beta <U>.
fn model_entropy(model: &CouplingModel) -> Result<f64> {
    let stats = enumerate_stats(model, false);
    // <U> under the model from its own moments.
    let theta = pack_params(model);
    Ok(stats.log_z - model.beta() * theta.dot(&stats.mean))
}

/// Entropy of the order-k maxent model of a panel: S_1 (independent fit),
/// S_2 (pairwise exact fit) or S_N (plug-in empirical entropy).
pub fn model_entropy_order_k(panel: &crate::core::SignPanel, order: ModelOrder) -> Result<f64> {
    match order {
        ModelOrder::One => {
            let moments = sample_moments(panel);
            Ok((0..panel.n_assets())
                .map(|i| binary_entropy((1.0 + moments.means[i]) / 2.0))
                .sum())
        }
        ModelOrder::Two => {
            let moments = sample_moments(panel);
            let model = fit_exact_maxent(&moments)?;
            model_entropy(&model)
        }
        ModelOrder::Full => Ok(entropy(&empirical_distribution(panel))),
    }
}

/// Multi-information criterion I_2 / I_N = (S_1 - S_2) / (S_1 - S_N).
///
/// Close to 1 means pairwise correlations explain most of the statistical
/// dependency.
pub fn multi_information_criterion(panel: &crate::core::SignPanel) -> Result<f64> {
    let s1 = model_entropy_order_k(panel, ModelOrder::One)?;
    let sn = model_entropy_order_k(panel, ModelOrder::Full)?;
    if s1 - sn < 1e-9 {
        return Err(MaxentError::DegenerateDenominator);
    }
    let s2 = model_entropy_order_k(panel, ModelOrder::Two)?;
    Ok((s1 - s2) / (s1 - sn))
}
