//! Trend-reversal prediction and evaluation: conditional flip probabilities
//! (memoryless and lagged), threshold sweeps with confusion statistics,
//! ROC/AUC/accuracy, k-fold cross-validation, and simultaneous-reversal model
//! comparison (pairwise-W, truncated Poisson, dichotomized Gaussian).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::approx::adaptive_simpson;
use crate::core::{Configuration, CouplingModel, SignPanel};
use crate::error::{MaxentError, Result};
use crate::infer::{maximize_logistic, RpmlConfig};

// ---------------------------------------------------------------------------
// Flip probabilities
// ---------------------------------------------------------------------------

/// Probability that unit `unit` reverses its previous sign, conditioned on
/// the other units' contemporaneous signs (and on lagged configurations when
/// the model has memory):
///
/// p = 1/2 [1 - s_{i,t-1} tanh(beta (sum_{j != i} J_ij s_{j,t} + h_i
///         + sum_tau sum_j K^tau_ij s_{j,t-tau}))]
///
/// `current_others` is the time-t state; the unit's own entry is ignored
/// (the coupling diagonal is zero).
pub fn flip_probability(
    model: &CouplingModel,
    prev: &Configuration,
    current_others: &Configuration,
    unit: usize,
    history: &[Configuration],
) -> Result<f64> {
    let n = model.n_units();
    if prev.len() != n || current_others.len() != n {
        return Err(MaxentError::DimensionMismatch(
            "configuration length does not match model size".into(),
        ));
    }
    if unit >= n {
        return Err(MaxentError::InvalidInput(format!(
            "unit {unit} out of range for {n} units"
        )));
    }
    if history.len() != model.lag_count() {
        return Err(MaxentError::LagMismatch {
            expected: model.lag_count(),
            got: history.len(),
        });
    }
    let j = model.influences();
    let mut field = model.fields()[unit];
    for k in 0..n {
        field += j[(unit, k)] * current_others.bits()[k] as f64;
    }
    for (tau, lagged) in history.iter().enumerate() {
        if lagged.len() != n {
            return Err(MaxentError::DimensionMismatch(
                "lagged configuration length does not match model size".into(),
            ));
        }
        let k_tau = &model.lags()[tau];
        for k in 0..n {
            field += k_tau[(unit, k)] * lagged.bits()[k] as f64;
        }
    }
    Ok(0.5 * (1.0 - prev.bits()[unit] as f64 * (model.beta() * field).tanh()))
}

// ---------------------------------------------------------------------------
// Classifier evaluation
// ---------------------------------------------------------------------------

/// Threshold sweep of a probabilistic flip detector.
#[derive(Debug, Clone)]
pub struct ClassifierReport {
    pub thresholds: Vec<f64>,
    pub tp_rate: Vec<f64>,
    pub fp_rate: Vec<f64>,
    pub accuracy: Vec<f64>,
    pub auc: f64,
}

impl ClassifierReport {
    /// (best accuracy, threshold where it is attained).
    pub fn best_accuracy(&self) -> (f64, f64) {
        let mut best = 0;
        for (k, &a) in self.accuracy.iter().enumerate() {
            if a > self.accuracy[best] {
                best = k;
            }
        }
        (self.accuracy[best], self.thresholds[best])
    }
}

/// Default detection-level grid: 0 to 1 in steps of 0.01.
pub fn default_threshold_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 100.0).collect()
}

/// Sweep detection thresholds: an event is predicted at level alpha iff
/// p > alpha. Rates are TP/P and FP/N; the AUC is the trapezoid area under
/// the ROC points augmented with the anchors (0,0) and (1,1).
pub fn evaluate_classifier(
    probabilities: &[f64],
    actual: &[bool],
    thresholds: &[f64],
) -> Result<ClassifierReport> {
    if probabilities.len() != actual.len() {
        return Err(MaxentError::DimensionMismatch(
            "probability and outcome vectors differ in length".into(),
        ));
    }
    if probabilities.is_empty() {
        return Err(MaxentError::EmptySample);
    }
    if thresholds.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
        return Err(MaxentError::InvalidInput(
            "thresholds must lie in [0, 1]".into(),
        ));
    }
    let positives = actual.iter().filter(|&&a| a).count();
    let negatives = actual.len() - positives;
    if positives == 0 {
        return Err(MaxentError::NoPositives);
    }
    if negatives == 0 {
        return Err(MaxentError::NoNegatives);
    }
    let mut tp_rate = Vec::with_capacity(thresholds.len());
    let mut fp_rate = Vec::with_capacity(thresholds.len());
    let mut accuracy = Vec::with_capacity(thresholds.len());
    for &alpha in thresholds {
        let mut tp = 0usize;
        let mut fp = 0usize;
        for (&p, &a) in probabilities.iter().zip(actual) {
            if p > alpha {
                if a {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        let tn = negatives - fp;
        tp_rate.push(tp as f64 / positives as f64);
        fp_rate.push(fp as f64 / negatives as f64);
        accuracy.push((tp + tn) as f64 / actual.len() as f64);
    }
    // ROC points sorted by fp rate (then tp), with (0,0) and (1,1) anchors.
    let mut roc: Vec<(f64, f64)> = fp_rate.iter().cloned().zip(tp_rate.iter().cloned()).collect();
    roc.push((0.0, 0.0));
    roc.push((1.0, 1.0));
    roc.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut auc = 0.0;
    for w in roc.windows(2) {
        auc += (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1);
    }
    Ok(ClassifierReport {
        thresholds: thresholds.to_vec(),
        tp_rate,
        fp_rate,
        accuracy,
        auc,
    })
}

// ---------------------------------------------------------------------------
// k-fold cross-validation
// ---------------------------------------------------------------------------

/// Cross-validated flip-prediction results.
#[derive(Debug, Clone)]
pub struct CvReport {
    /// One threshold sweep per asset, aggregated over all held-out blocks.
    pub per_asset: Vec<ClassifierReport>,
    /// Curves averaged over assets; AUC is the trapezoid area of the mean ROC.
    pub mean: ClassifierReport,
    /// Raw held-out predictions as (time index, asset, p_flip, actual flip).
    pub predictions: Vec<(usize, usize, f64, bool)>,
}

/// k-fold cross-validation of flip prediction with contiguous time blocks.
///
/// Each block is held out in turn; the model is fitted on the remaining
/// observations and flips inside the block are scored using the observed
/// contemporaneous signs of the other units (plus lagged history when the
/// configuration requests memory). Predictions therefore never depend on
/// parameters fitted from overlapping data.
pub fn kfold_cross_validation(
    panel: &SignPanel,
    config: &RpmlConfig,
    folds: usize,
) -> Result<CvReport> {
    let m = panel.n_times();
    let n = panel.n_assets();
    if folds < 2 {
        return Err(MaxentError::InvalidInput("need at least 2 folds".into()));
    }
    if m < folds * 20 {
        return Err(MaxentError::InsufficientSample(format!(
            "{m} observations cannot support {folds}-fold validation (need >= {})",
            folds * 20
        )));
    }
    let boundaries: Vec<usize> = (0..=folds).map(|b| b * m / folds).collect();
    let fold_outputs: Result<Vec<Vec<(usize, usize, f64, bool)>>> = (0..folds)
        .into_par_iter()
        .map(|b| {
            let (lo, hi) = (boundaries[b], boundaries[b + 1]);
            let drop: Vec<bool> = (0..m).map(|t| t >= lo && t < hi).collect();
            debug_assert!((lo..hi).all(|t| drop[t]), "evaluation block must be excluded");
            let train = panel.without_times(&drop)?;
            let model = crate::infer::fit_rpml(&train, config)?;
            let lags = config.lag_count;
            let mut predictions = Vec::new();
            for t in lo.max(lags.max(1))..hi {
                let prev = panel.column_config(t - 1);
                let current = panel.column_config(t);
                let history: Vec<Configuration> =
                    (1..=lags).map(|tau| panel.column_config(t - tau)).collect();
                for i in 0..n {
                    let p = flip_probability(&model, &prev, &current, i, &history)?;
                    let actual = panel.get(i, t) != panel.get(i, t - 1);
                    predictions.push((t, i, p, actual));
                }
            }
            Ok(predictions)
        })
        .collect();
    let predictions: Vec<(usize, usize, f64, bool)> =
        fold_outputs?.into_iter().flatten().collect();

    let thresholds = default_threshold_grid();
    let per_asset: Result<Vec<ClassifierReport>> = (0..n)
        .map(|i| {
            let probs: Vec<f64> = predictions
                .iter()
                .filter(|p| p.1 == i)
                .map(|p| p.2)
                .collect();
            let actual: Vec<bool> = predictions
                .iter()
                .filter(|p| p.1 == i)
                .map(|p| p.3)
                .collect();
            evaluate_classifier(&probs, &actual, &thresholds)
        })
        .collect();
    let per_asset = per_asset?;
    let k = thresholds.len();
    let mean_curve = |f: &dyn Fn(&ClassifierReport) -> &Vec<f64>| -> Vec<f64> {
        (0..k)
            .map(|t| per_asset.iter().map(|r| f(r)[t]).sum::<f64>() / n as f64)
            .collect()
    };
    let tp_rate = mean_curve(&|r| &r.tp_rate);
    let fp_rate = mean_curve(&|r| &r.fp_rate);
    let accuracy = mean_curve(&|r| &r.accuracy);
    let mut roc: Vec<(f64, f64)> = fp_rate.iter().cloned().zip(tp_rate.iter().cloned()).collect();
    roc.push((0.0, 0.0));
    roc.push((1.0, 1.0));
    roc.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut auc = 0.0;
    for w in roc.windows(2) {
        auc += (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1);
    }
    Ok(CvReport {
        per_asset,
        mean: ClassifierReport {
            thresholds,
            tp_rate,
            fp_rate,
            accuracy,
            auc,
        },
        predictions,
    })
}

// ---------------------------------------------------------------------------
// Simultaneous reversals
// ---------------------------------------------------------------------------

/// Distribution of the simultaneous-reversal count K = 0..N.
#[derive(Debug, Clone)]
pub struct ReversalCountDistribution {
    /// probabilities[k] = P(K = k), k = 0..=N.
    pub probabilities: Vec<f64>,
}

impl ReversalCountDistribution {
    pub fn n_units(&self) -> usize {
        self.probabilities.len() - 1
    }
}

/// 0/1 reversal indicators x_{i,t} = 1 iff s_{i,t+1} = -s_{i,t}, as an
/// N x (M-1) matrix.
fn reversal_indicators(panel: &SignPanel) -> Result<DMatrix<f64>> {
    let (n, m) = (panel.n_assets(), panel.n_times());
    if m < 2 {
        return Err(MaxentError::InsufficientSample(
            "reversal indicators need at least two observations".into(),
        ));
    }
    Ok(DMatrix::from_fn(n, m - 1, |i, t| {
        f64::from(panel.get(i, t + 1) != panel.get(i, t))
    }))
}

/// Empirical distribution of the number of units reversing simultaneously.
pub fn reversal_count_distribution(panel: &SignPanel) -> Result<ReversalCountDistribution> {
    let x = reversal_indicators(panel)?;
    let n = panel.n_assets();
    let mut probabilities = vec![0.0; n + 1];
    for t in 0..x.ncols() {
        let k: f64 = x.column(t).iter().sum();
        probabilities[k as usize] += 1.0;
    }
    let total = x.ncols() as f64;
    for p in &mut probabilities {
        *p /= total;
    }
    Ok(ReversalCountDistribution { probabilities })
}

/// Dichotomized Gaussian reversal model: x_i = 1 iff g_i <= gamma_i with
/// g ~ N(0, Lambda).
#[derive(Debug, Clone)]
pub struct DgModel {
    pub gamma: DVector<f64>,
    pub lambda: DMatrix<f64>,
    /// Pairs whose reversal covariance was outside the attainable range and
    /// had to be clipped before solving for Lambda.
    pub clipped_entries: Vec<(usize, usize)>,
}

/// Standard bivariate normal CDF P(X <= a, Y <= b) with correlation rho,
/// by adaptive quadrature of phi(x) Phi((b - rho x)/sqrt(1 - rho^2)); the
/// quadrature tolerance (1e-9) keeps the absolute error well below 1e-7.
pub fn bivariate_normal_cdf(a: f64, b: f64, rho: f64) -> f64 {
    assert!(rho.abs() < 1.0, "correlation must be strictly inside (-1, 1)");
    let normal = Normal::new(0.0, 1.0).unwrap();
    if a <= -12.0 || b <= -12.0 {
        return 0.0;
    }
    if a >= 12.0 {
        return normal.cdf(b);
    }
    let s = (1.0 - rho * rho).sqrt();
    let integrand = move |x: f64| {
        let phi = (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        phi * normal.cdf((b - rho * x) / s)
    };
    adaptive_simpson(&integrand, -12.0, a.min(12.0), 1e-9)
}

/// All three simultaneous-reversal models fitted to a panel.
#[derive(Debug, Clone)]
pub struct ReversalModels {
    /// Pairwise model on 0/1 indicators; the coupling matrix W is symmetric
    /// with the per-unit bias on the diagonal.
    pub w_matrix: DMatrix<f64>,
    /// Truncated-Poisson rate (mean reversal count).
    pub poisson_rate: f64,
    pub dg: DgModel,
}

/// Fit the pairwise-W, truncated-Poisson and dichotomized Gaussian models of
/// simultaneous reversals.
///
/// W comes from regularized pseudo-likelihood with logistic conditionals
/// P(x_i = 1 | rest) = sigma(W_ii + 2 sum_{j != i} W_ij x_j) and is
/// symmetrized; the Poisson rate is the mean count; the DG thresholds are
/// gamma_i = Phi^{-1}(mu_i) and each Lambda_ij solves
/// Phi_2(gamma_i, gamma_j, lambda) = Sigma_ij + Phi(gamma_i) Phi(gamma_j)
/// by bisection, with unattainable covariances clipped and flagged.
pub fn fit_reversal_models(panel: &SignPanel) -> Result<ReversalModels> {
    let x = reversal_indicators(panel)?;
    let n = x.nrows();
    let m = x.ncols();

    // --- pairwise W by pseudo-likelihood ----------------------------------
    let lambda_reg = 1.0 / m as f64;
    let rows: Result<Vec<DVector<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            // Features: the other units' indicators plus a constant bias.
            let fill = |t: usize, buf: &mut [f64]| -> f64 {
                let mut col = 0;
                for j in 0..n {
                    if j != i {
                        buf[col] = x[(j, t)];
                        col += 1;
                    }
                }
                buf[n - 1] = 1.0;
                2.0 * x[(i, t)] - 1.0
            };
            maximize_logistic(
                &fill,
                m,
                n,
                lambda_reg,
                crate::infer::Regularization::L2,
                200,
                1e-6,
            )
        })
        .collect();
    let rows = rows?;
    let mut w = DMatrix::zeros(n, n);
    for (i, theta) in rows.iter().enumerate() {
        let mut col = 0;
        for j in 0..n {
            if j != i {
                // Logistic coefficient is 2 W_ij.
                w[(i, j)] = theta[col] / 2.0;
                col += 1;
            }
        }
        w[(i, i)] = theta[n - 1];
    }
    let w_matrix = DMatrix::from_fn(n, n, |i, j| 0.5 * (w[(i, j)] + w[(j, i)]));

    // --- truncated Poisson -------------------------------------------------
    let mut rate = 0.0;
    for t in 0..m {
        rate += x.column(t).iter().sum::<f64>();
    }
    rate /= m as f64;

    // --- dichotomized Gaussian ---------------------------------------------
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mu: Vec<f64> = (0..n)
        .map(|i| (0..m).map(|t| x[(i, t)]).sum::<f64>() / m as f64)
        .collect();
    for (i, &mui) in mu.iter().enumerate() {
        if mui <= 0.0 || mui >= 1.0 {
            return Err(MaxentError::SaturatedMean { index: i });
        }
    }
    let gamma = DVector::from_fn(n, |i, _| normal.inverse_cdf(mu[i]));
    let mut lambda = DMatrix::identity(n, n);
    let mut clipped_entries = Vec::new();
    let pair_results: Vec<((usize, usize), f64, bool)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, j)| {
            let joint_emp =
                (0..m).map(|t| x[(i, t)] * x[(j, t)]).sum::<f64>() / m as f64;
            // Attainable joint probability given the margins.
            let lower = (mu[i] + mu[j] - 1.0).max(0.0);
            let upper = mu[i].min(mu[j]);
            let eps = 1e-9;
            let clipped = joint_emp < lower + eps || joint_emp > upper - eps;
            let target = joint_emp.clamp(lower + eps, upper - eps);
            // Phi_2 is increasing in the correlation, so bisection applies.
            let mut lo = -1.0 + 1e-9;
            let mut hi = 1.0 - 1e-9;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if bivariate_normal_cdf(gamma[i], gamma[j], mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            ((i, j), 0.5 * (lo + hi), clipped)
        })
        .collect();
    for ((i, j), lam, clipped) in pair_results {
        lambda[(i, j)] = lam;
        lambda[(j, i)] = lam;
        if clipped {
            clipped_entries.push((i, j));
        }
    }
    Ok(ReversalModels {
        w_matrix,
        poisson_rate: rate,
        dg: DgModel {
            gamma,
            lambda,
            clipped_entries,
        },
    })
}

/// Draw reversal-indicator vectors from the dichotomized Gaussian: latent
/// g ~ N(0, Lambda) via Cholesky (eigenvalue-clipped if Lambda is slightly
/// indefinite), x_i = 1 iff g_i <= gamma_i.
pub fn sample_dg_counts(dg: &DgModel, samples: usize, seed: u64) -> Vec<usize> {
    let n = dg.gamma.len();
    let chol = match dg.lambda.clone().cholesky() {
        Some(c) => c.l(),
        None => {
            // Clip negative eigenvalues and rescale to a unit diagonal.
            let eig = nalgebra::SymmetricEigen::new(dg.lambda.clone());
            let vals = eig.eigenvalues.map(|v| v.max(1e-10));
            let mut fixed = &eig.eigenvectors
                * DMatrix::from_diagonal(&vals)
                * eig.eigenvectors.transpose();
            for i in 0..n {
                let d = fixed[(i, i)].sqrt();
                for j in 0..n {
                    fixed[(i, j)] /= d;
                    fixed[(j, i)] /= d;
                }
            }
            fixed
                .cholesky()
                .expect("eigenvalue-clipped correlation matrix must be PSD")
                .l()
        }
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(samples);
    let mut z = DVector::zeros(n);
    for _ in 0..samples {
        for k in 0..n {
            // Box-Muller-free: inverse CDF of uniforms keeps the stream
            // reproducible across platforms.
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            z[k] = Normal::new(0.0, 1.0).unwrap().inverse_cdf(u);
        }
        let g = &chol * &z;
        let count = (0..n).filter(|&i| g[i] <= dg.gamma[i]).count();
        counts.push(count);
    }
    counts
}

/// Count distribution of the pairwise-W model by exact enumeration of the
/// 2^N indicator vectors (N <= 12).
pub fn w_model_count_distribution(w: &DMatrix<f64>) -> Result<ReversalCountDistribution> {
    let n = w.nrows();
    if n > 12 {
        return Err(MaxentError::SizeLimitExceeded { n, limit: 12 });
    }
    let mut weights = vec![0.0f64; n + 1];
    let mut max_log = f64::NEG_INFINITY;
    let mut logs = Vec::with_capacity(1 << n);
    for mask in 0usize..(1 << n) {
        let mut e = 0.0;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                e += w[(i, i)];
                for j in (i + 1)..n {
                    if mask >> j & 1 == 1 {
                        e += 2.0 * w[(i, j)];
                    }
                }
            }
        }
        max_log = max_log.max(e);
        logs.push(e);
    }
    let mut z = 0.0;
    for (mask, &e) in logs.iter().enumerate() {
        let wgt = (e - max_log).exp();
        z += wgt;
        weights[(mask as u32).count_ones() as usize] += wgt;
    }
    Ok(ReversalCountDistribution {
        probabilities: weights.into_iter().map(|v| v / z).collect(),
    })
}

/// Truncated Poisson count distribution: p(k) proportional to
/// rate^k e^{-rate} / k! for k = 0..=N, renormalized.
pub fn poisson_count_distribution(rate: f64, n: usize) -> ReversalCountDistribution {
    let mut probabilities = Vec::with_capacity(n + 1);
    let mut log_fact = 0.0;
    for k in 0..=n {
        if k > 0 {
            log_fact += (k as f64).ln();
        }
        probabilities.push((k as f64 * rate.max(1e-300).ln() - rate - log_fact).exp());
    }
    let total: f64 = probabilities.iter().sum();
    for p in &mut probabilities {
        *p /= total;
    }
    ReversalCountDistribution { probabilities }
}

/// KLD comparison of the empirical count distribution against the three
/// fitted models.
#[derive(Debug, Clone)]
pub struct ReversalComparison {
    pub empirical: ReversalCountDistribution,
    pub pairwise: ReversalCountDistribution,
    pub poisson: ReversalCountDistribution,
    pub dg: ReversalCountDistribution,
    pub kld_pairwise: f64,
    pub kld_poisson: f64,
    pub kld_dg: f64,
}

/// KLD(empirical || model) over count bins, with model bins floored at 1e-9
/// so simulated distributions with empty bins stay comparable.
fn count_kld(empirical: &[f64], model: &[f64]) -> f64 {
    empirical
        .iter()
        .zip(model)
        .filter(|(&e, _)| e > 0.0)
        .map(|(&e, &q)| e * (e / q.max(1e-9)).ln())
        .sum()
}

/// Compare the empirical reversal-count distribution against the pairwise-W
/// (exact enumeration), truncated-Poisson (analytic) and DG (`dg_samples`
/// simulated draws) models.
pub fn compare_reversal_models(
    panel: &SignPanel,
    models: &ReversalModels,
    dg_samples: usize,
    seed: u64,
) -> Result<ReversalComparison> {
    let empirical = reversal_count_distribution(panel)?;
    let n = panel.n_assets();
    let pairwise = w_model_count_distribution(&models.w_matrix)?;
    let poisson = poisson_count_distribution(models.poisson_rate, n);
    let counts = sample_dg_counts(&models.dg, dg_samples, seed);
    let mut dg_probs = vec![0.0; n + 1];
    for &k in &counts {
        dg_probs[k] += 1.0 / dg_samples as f64;
    }
    let dg = ReversalCountDistribution {
        probabilities: dg_probs,
    };
    Ok(ReversalComparison {
        kld_pairwise: count_kld(&empirical.probabilities, &pairwise.probabilities),
        kld_poisson: count_kld(&empirical.probabilities, &poisson.probabilities),
        kld_dg: count_kld(&empirical.probabilities, &dg.probabilities),
        empirical,
        pairwise,
        poisson,
        dg,
    })
}
