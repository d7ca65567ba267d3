//! Large-N parameter estimation: regularized pseudo-maximum likelihood (with
//! optional memory terms), first-order mean-field inversion, second-order TAP
//! inversion with the diagonal trick, and reconstruction-error diagnostics.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::core::{CouplingModel, MomentSet, SignPanel};
use crate::error::{MaxentError, Result};

/// Penalty applied to the pseudo-likelihood objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularization {
    L2,
    /// Smoothed |theta| (sqrt(theta^2 + 1e-10)) so the same Newton solver
    /// applies; intended for sparse networks.
    L1,
}

/// Settings for [`fit_rpml`].
#[derive(Debug, Clone)]
pub struct RpmlConfig {
    pub regularization: Regularization,
    /// Penalty strength; default 1/M (vanishing bias at large samples).
    pub lambda: f64,
    /// Number of memory lags T in the history-dependent conditional.
    pub lag_count: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl RpmlConfig {
    /// Defaults for a panel of M samples: l2 with lambda = 1/M, no memory.
    pub fn for_sample(m: usize) -> Self {
        RpmlConfig {
            regularization: Regularization::L2,
            lambda: 1.0 / m.max(1) as f64,
            lag_count: 0,
            max_iterations: 200,
            gradient_tolerance: 1e-6,
        }
    }

    pub fn with_lags(mut self, lags: usize) -> Self {
        self.lag_count = lags;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        assert!(lambda >= 0.0);
        self.lambda = lambda;
        self
    }
}

const L1_SMOOTHING: f64 = 1e-10;

/// Regularizer value, gradient and Hessian diagonal at `theta`.
fn penalty(theta: &DVector<f64>, lambda: f64, reg: Regularization) -> (f64, DVector<f64>, DVector<f64>) {
    match reg {
        Regularization::L2 => (
            lambda * theta.norm_squared(),
            2.0 * lambda * theta,
            DVector::from_element(theta.len(), 2.0 * lambda),
        ),
        Regularization::L1 => {
            let mut value = 0.0;
            let mut grad = DVector::zeros(theta.len());
            let mut hess = DVector::zeros(theta.len());
            for k in 0..theta.len() {
                let root = (theta[k] * theta[k] + L1_SMOOTHING).sqrt();
                value += lambda * root;
                grad[k] = lambda * theta[k] / root;
                hess[k] = lambda * L1_SMOOTHING / (root * root * root);
            }
            (value, grad, hess)
        }
    }
}

/// Maximize (1/M) sum_t ln sigma(c_t * x_t . theta) - penalty(theta) by damped
/// Newton ascent. `fill` writes x_t into the buffer and returns c_t.
///
/// Returns the maximizer; the objective is concave so ascent is monotone.
pub(crate) fn maximize_logistic<F>(
    fill: &F,
    n_samples: usize,
    dim: usize,
    lambda: f64,
    reg: Regularization,
    max_iterations: usize,
    tolerance: f64,
) -> Result<DVector<f64>>
where
    F: Fn(usize, &mut [f64]) -> f64,
{
    let m = n_samples as f64;
    let mut theta = DVector::zeros(dim);

    // Samples are processed in blocks of columns so the gradient and Hessian
    // accumulate through matrix products (cache-blocked gemm) rather than a
    // scalar rank-1 loop; the Hessian sum_t w_t x_t x_t^T with w_t >= 0 is
    // X_w X_w^T after scaling each column by sqrt(w_t).
    let block = 2048.min(n_samples.max(1));
    let fill_block = |xblk: &mut DMatrix<f64>, cs: &mut [f64], start: usize, len: usize| {
        let data = &mut xblk.as_mut_slice()[..len * dim];
        for (t, col) in data.chunks_exact_mut(dim).enumerate() {
            cs[t] = fill(start + t, col);
        }
    };

    let objective = |theta: &DVector<f64>| -> f64 {
        let mut xblk = DMatrix::<f64>::zeros(dim, block);
        let mut cs = vec![0.0f64; block];
        let mut total = 0.0;
        let mut start = 0;
        while start < n_samples {
            let len = block.min(n_samples - start);
            fill_block(&mut xblk, &mut cs, start, len);
            let act = xblk.columns(0, len).tr_mul(theta);
            for t in 0..len {
                // ln sigma(z) = -softplus(-z), numerically stable.
                let z = cs[t] * act[t];
                total += if z > 0.0 {
                    -(-z).exp().ln_1p()
                } else {
                    z - z.exp().ln_1p()
                };
            }
            start += len;
        }
        total / m - penalty(theta, lambda, reg).0
    };

    let mut xblk = DMatrix::<f64>::zeros(dim, block);
    let mut xt = DMatrix::<f64>::zeros(block, dim);
    let mut cs = vec![0.0f64; block];
    let mut obj = objective(&theta);
    for _ in 0..max_iterations {
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        let mut start = 0;
        while start < n_samples {
            let len = block.min(n_samples - start);
            fill_block(&mut xblk, &mut cs, start, len);
            let act = xblk.columns(0, len).tr_mul(&theta);
            let mut gvec = DVector::<f64>::zeros(len);
            for t in 0..len {
                let c = cs[t];
                let s = sigmoid(c * act[t]);
                gvec[t] = (1.0 - s) * c;
                // Reuse cs to hold sqrt(w_t) = sqrt(s(1-s)) |c|.
                cs[t] = (s * (1.0 - s)).sqrt() * c.abs();
            }
            grad.gemv(1.0, &xblk.columns(0, len), &gvec, 1.0);
            {
                let mut xw = xblk.columns_mut(0, len);
                for t in 0..len {
                    xw.column_mut(t).scale_mut(cs[t]);
                }
            }
            let xw = xblk.columns(0, len);
            let mut xwt = xt.rows_mut(0, len);
            xw.transpose_to(&mut xwt);
            hess.gemm(1.0, &xw, &xt.rows(0, len), 1.0);
            start += len;
        }
        grad /= m;
        hess /= m;
        let (_, pgrad, phess) = penalty(&theta, lambda, reg);
        grad -= pgrad;
        for i in 0..dim {
            hess[(i, i)] += phess[i] + 1e-12;
            // Symmetrize away gemm round-off so Cholesky sees an exactly
            // symmetric matrix.
            for j in 0..i {
                let avg = 0.5 * (hess[(i, j)] + hess[(j, i)]);
                hess[(i, j)] = avg;
                hess[(j, i)] = avg;
            }
        }
        if grad.amax() < tolerance {
            return Ok(theta);
        }
        let step = hess
            .clone()
            .cholesky()
            .map(|ch| ch.solve(&grad))
            .unwrap_or_else(|| grad.clone());
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..50 {
            let candidate = &theta + scale * &step;
            let cand_obj = objective(&candidate);
            if cand_obj.is_finite() && cand_obj >= obj - 1e-15 {
                theta = candidate;
                obj = cand_obj;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            return Err(MaxentError::NonConvergence {
                iterations: max_iterations,
                residual: grad.amax(),
            });
        }
    }
    // Re-check the gradient once more before giving up.
    Err(MaxentError::NonConvergence {
        iterations: max_iterations,
        residual: f64::NAN,
    })
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Regularized pseudo-maximum-likelihood fit of the pairwise model, with
/// optional lagged memory tensors K^tau.
///
/// Per-unit conditionals p(s_{i,t} | rest) = 1/2 [1 + s_{i,t} tanh(a_i)] are
/// maximized row by row (in parallel); J is symmetrized as (J + J^T)/2
/// afterwards since the maxent J is symmetric by construction.
pub fn fit_rpml(panel: &SignPanel, config: &RpmlConfig) -> Result<CouplingModel> {
    let n = panel.n_assets();
    let m = panel.n_times();
    let lags = config.lag_count;
    if m <= lags {
        return Err(MaxentError::InsufficientSample(format!(
            "panel length {m} must exceed lag count {lags}"
        )));
    }
    let n_samples = m - lags;
    // Row parameter layout: [J_i,j for j != i (n-1)] [h_i] [K^tau_i,j ...].
    let dim = (n - 1) + 1 + lags * n;

    let rows: Result<Vec<DVector<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let fill = |t: usize, x: &mut [f64]| -> f64 {
                let time = t + lags;
                let col = panel.column(time);
                let mut k = 0;
                for j in 0..n {
                    if j != i {
                        x[k] = col[j] as f64;
                        k += 1;
                    }
                }
                x[k] = 1.0; // field
                k += 1;
                for tau in 1..=lags {
                    let past = panel.column(time - tau);
                    for j in 0..n {
                        x[k] = past[j] as f64;
                        k += 1;
                    }
                }
                2.0 * col[i] as f64 // ln sigma(2 s a)
            };
            maximize_logistic(
                &fill,
                n_samples,
                dim,
                config.lambda,
                config.regularization,
                config.max_iterations,
                config.gradient_tolerance,
            )
        })
        .collect();
    let rows = rows?;

    let mut j_hat = DMatrix::zeros(n, n);
    let mut h = DVector::zeros(n);
    let mut k_hat = vec![DMatrix::zeros(n, n); lags];
    for (i, theta) in rows.iter().enumerate() {
        let mut k = 0;
        for j in 0..n {
            if j != i {
                j_hat[(i, j)] = theta[k];
                k += 1;
            }
        }
        h[i] = theta[k];
        k += 1;
        for tensor in k_hat.iter_mut() {
            for j in 0..n {
                tensor[(i, j)] = theta[k];
                k += 1;
            }
        }
    }
    let j_sym = (&j_hat + j_hat.transpose()) * 0.5;
    let model = CouplingModel::new(j_sym, h)?;
    if lags > 0 {
        model.with_lags(k_hat)
    } else {
        Ok(model)
    }
}

/// Average pseudo-log-likelihood of a panel under a model (no penalty);
/// exposed for diagnostics and tests.
pub fn pseudo_log_likelihood(panel: &SignPanel, model: &CouplingModel) -> f64 {
    let n = panel.n_assets();
    let m = panel.n_times();
    let lags = model.lag_count();
    let mut total = 0.0;
    for t in lags..m {
        let col = panel.column(t);
        for i in 0..n {
            let mut a = model.fields()[i];
            for j in 0..n {
                if j != i {
                    a += model.influences()[(i, j)] * col[j] as f64;
                }
            }
            for (tau, k) in model.lags().iter().enumerate() {
                let past = panel.column(t - tau - 1);
                for j in 0..n {
                    a += k[(i, j)] * past[j] as f64;
                }
            }
            let z = 2.0 * col[i] as f64 * a;
            total += if z > 0.0 {
                -(-z).exp().ln_1p()
            } else {
                z - z.exp().ln_1p()
            };
        }
    }
    total / (m - lags) as f64
}

// ---------------------------------------------------------------------------
// Mean-field and TAP inversion
// ---------------------------------------------------------------------------

fn checked_covariance_inverse(moments: &MomentSet) -> Result<DMatrix<f64>> {
    let c = &moments.covariances;
    let svd = c.clone().svd(false, false);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    let condition = if min_sv > 0.0 { max_sv / min_sv } else { f64::INFINITY };
    if !condition.is_finite() || condition >= 1e12 {
        return Err(MaxentError::SingularCovariance { condition });
    }
    c.clone()
        .try_inverse()
        .ok_or(MaxentError::SingularCovariance { condition })
}

fn check_means(moments: &MomentSet) -> Result<()> {
    for i in 0..moments.n_units() {
        if moments.means[i].abs() >= 1.0 - 1e-9 {
            return Err(MaxentError::SaturatedMean { index: i });
        }
    }
    Ok(())
}

/// First-order (naive mean-field) inversion: J = P^{-1} - C^{-1} with
/// P_ii = 1 - q_i^2, diagonal forced to zero; h_i = atanh(q_i) - sum_j J_ij q_j.
pub fn invert_mean_field(moments: &MomentSet) -> Result<CouplingModel> {
    check_means(moments)?;
    let cinv = checked_covariance_inverse(moments)?;
    let n = moments.n_units();
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            if i != k {
                let v = -0.5 * (cinv[(i, k)] + cinv[(k, i)]);
                j[(i, k)] = v;
                j[(k, i)] = v;
            }
        }
    }
    let h = fields_first_order(moments, &j);
    CouplingModel::new(j, h)
}

fn fields_first_order(moments: &MomentSet, j: &DMatrix<f64>) -> DVector<f64> {
    let n = moments.n_units();
    DVector::from_fn(n, |i, _| {
        let mut h = moments.means[i].atanh();
        for k in 0..n {
            h -= j[(i, k)] * moments.means[k];
        }
        h
    })
}

/// Result of the second-order (TAP) inversion.
#[derive(Debug, Clone)]
pub struct TapInversion {
    /// Couplings (diagonal zeroed) and TAP-corrected fields.
    pub model: CouplingModel,
    /// Diagonal-trick raw diagonal 1/(1-q_i^2) - (C^{-1})_ii, kept as a side
    /// output for trace/determinant analyses.
    pub raw_diagonal: DVector<f64>,
    /// Off-diagonal entries where the quadratic had a negative discriminant
    /// and the first-order value was used instead.
    pub fallback_entries: Vec<(usize, usize)>,
}

/// Second-order TAP inversion: for each pair solve
/// q_i q_j J^2 + J + (C^{-1})_ij = 0, taking the root continuous with the
/// first-order solution as q_i q_j -> 0; TAP-corrected fields
/// h_i = atanh(q_i) - sum_j J_ij q_j + q_i sum_j J_ij^2 (1 - q_j^2).
pub fn invert_tap(moments: &MomentSet) -> Result<TapInversion> {
    check_means(moments)?;
    let cinv = checked_covariance_inverse(moments)?;
    let n = moments.n_units();
    let q = &moments.means;
    let mut j = DMatrix::zeros(n, n);
    let mut fallback = Vec::new();
    for i in 0..n {
        for k in (i + 1)..n {
            let c = 0.5 * (cinv[(i, k)] + cinv[(k, i)]);
            let a = q[i] * q[k];
            let value = if a.abs() < 1e-12 {
                -c
            } else {
                let disc = 1.0 - 4.0 * a * c;
                if disc < 0.0 {
                    fallback.push((i, k));
                    -c
                } else {
                    // (-1 + sqrt(1 - 4ac)) / (2a) -> -c as a -> 0.
                    (-1.0 + disc.sqrt()) / (2.0 * a)
                }
            };
            j[(i, k)] = value;
            j[(k, i)] = value;
        }
    }
    let raw_diagonal = DVector::from_fn(n, |i, _| 1.0 / (1.0 - q[i] * q[i]) - cinv[(i, i)]);
    let h = DVector::from_fn(n, |i, _| {
        let mut hi = q[i].atanh();
        let mut onsager = 0.0;
        for k in 0..n {
            hi -= j[(i, k)] * q[k];
            onsager += j[(i, k)] * j[(i, k)] * (1.0 - q[k] * q[k]);
        }
        hi + q[i] * onsager
    });
    Ok(TapInversion {
        model: CouplingModel::new(j, h)?,
        raw_diagonal,
        fallback_entries: fallback,
    })
}

/// Reconstruction error Delta = sqrt(N) * sqrt(mean over i<j of (J* - J)^2).
pub fn reconstruction_error(estimated: &CouplingModel, truth: &CouplingModel) -> Result<f64> {
    let n = estimated.n_units();
    if truth.n_units() != n {
        return Err(MaxentError::DimensionMismatch(
            "models have different sizes".into(),
        ));
    }
    if n < 2 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = estimated.influences()[(i, j)] - truth.influences()[(i, j)];
            sum += d * d;
            count += 1;
        }
    }
    Ok((n as f64).sqrt() * (sum / count as f64).sqrt())
}
