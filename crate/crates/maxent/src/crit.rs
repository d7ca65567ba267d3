//! Criticality testing: distribution rescaling, response-function scans,
//! sampling-significance diagnostics, bounded discrete power-law (Zipf)
//! testing with parametric bootstrap, and entropy-utility linearity.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::core::{empirical_distribution, ConfigDistribution, SignPanel};
use crate::error::{MaxentError, Result};

// ---------------------------------------------------------------------------
// Rescaling and response-function scans
// ---------------------------------------------------------------------------

/// Rescaled distribution P_T = P^{1/T} / sum P^{1/T}; T = 1 is the identity
/// (operating point), support unchanged.
pub fn rescale_distribution(dist: &ConfigDistribution, t: f64) -> Result<ConfigDistribution> {
    if !(t > 0.0) {
        return Err(MaxentError::InvalidInput(format!(
            "rescaling temperature must be positive, got {t}"
        )));
    }
    let log_probs: Vec<f64> = dist.probs().iter().map(|&p| p.ln() / t).collect();
    let max = log_probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_probs.iter().map(|&lp| (lp - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let probs = weights.into_iter().map(|w| w / total).collect();
    let rescaled = ConfigDistribution::new(dist.support().to_vec(), probs)?;
    Ok(match dist.sample_size() {
        Some(m) => rescaled.with_sample_size(m),
        None => rescaled,
    })
}

/// Entropy of the rescaled distribution at temperature T, computed from the
/// log-probabilities of the original distribution: S(T) = lse - <u>_T / T
/// with u = ln p and lse = ln sum exp(u/T).
fn rescaled_entropy(log_probs: &[f64], t: f64) -> f64 {
    let max = log_probs.iter().map(|&u| u / t).fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut mean_u = 0.0;
    for &u in log_probs {
        let w = (u / t - max).exp();
        z += w;
        mean_u += w * u;
    }
    mean_u /= z;
    (max + z.ln()) - mean_u / t
}

/// Var_{P_T}[ln p] / T^2: the fluctuation form of the response function,
/// used as the independent cross-check of the finite-difference derivative.
pub fn variance_response(dist: &ConfigDistribution, t: f64) -> f64 {
    let log_probs: Vec<f64> = dist.probs().iter().map(|&p| p.ln()).collect();
    let max = log_probs.iter().map(|&u| u / t).fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut mean = 0.0;
    for &u in &log_probs {
        let w = (u / t - max).exp();
        z += w;
        mean += w * u;
    }
    mean /= z;
    let mut var = 0.0;
    for &u in &log_probs {
        let w = (u / t - max).exp() / z;
        var += w * (u - mean) * (u - mean);
    }
    var / (t * t)
}

/// Response function R_U(T) over a temperature grid with the located peak.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub t_grid: Vec<f64>,
    pub entropy_curve: Vec<f64>,
    pub response_curve: Vec<f64>,
    /// Peak location by quadratic interpolation through the discrete maximum
    /// and its neighbors.
    pub t_max: f64,
    pub r_max: f64,
    /// Asset subset behind this scan, when produced by [`subset_scan`].
    pub subset_id: Option<Vec<usize>>,
}

/// Default grid: 200 log-spaced points in [0.2, 3.0].
pub fn default_t_grid() -> Vec<f64> {
    log_spaced_grid(0.2, 3.0, 200)
}

pub fn log_spaced_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (lln, hln) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (lln + (hln - lln) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Scan S(T) and R_U = T dS/dT over the grid.
///
/// The derivative uses a 5-point central stencil on ln T with an independent
/// small step (1e-3), so it matches the fluctuation identity
/// Var[ln p] / T^2 to high relative accuracy at every grid point.
pub fn response_function_scan(dist: &ConfigDistribution, t_grid: &[f64]) -> Result<ScanResult> {
    if t_grid.len() < 5 {
        return Err(MaxentError::InvalidInput(
            "temperature grid needs at least 5 points".into(),
        ));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MaxentError::InvalidInput(
            "temperature grid must be positive and strictly increasing".into(),
        ));
    }
    if dist.len() < 2 {
        return Err(MaxentError::DegenerateDistribution(
            "single-atom distribution has R_U = 0 everywhere; no peak exists".into(),
        ));
    }
    let log_probs: Vec<f64> = dist.probs().iter().map(|&p| p.ln()).collect();
    let entropy_curve: Vec<f64> = t_grid.iter().map(|&t| rescaled_entropy(&log_probs, t)).collect();
    // R_U = T dS/dT = dS/d(ln T); 5-point stencil, step h on ln T.
    let h = 1e-3;
    let response_curve: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            let lt = t.ln();
            let s = |x: f64| rescaled_entropy(&log_probs, x.exp());
            (-s(lt + 2.0 * h) + 8.0 * s(lt + h) - 8.0 * s(lt - h) + s(lt - 2.0 * h)) / (12.0 * h)
        })
        .collect();

    let (t_max, r_max) = locate_peak(t_grid, &response_curve);
    Ok(ScanResult {
        t_grid: t_grid.to_vec(),
        entropy_curve,
        response_curve,
        t_max,
        r_max,
        subset_id: None,
    })
}

/// Quadratic interpolation of the discrete maximum (in ln T coordinates).
fn locate_peak(t_grid: &[f64], response: &[f64]) -> (f64, f64) {
    let mut arg = 0;
    for (k, &r) in response.iter().enumerate() {
        if r > response[arg] {
            arg = k;
        }
    }
    if arg == 0 || arg == response.len() - 1 {
        return (t_grid[arg], response[arg]);
    }
    let (x1, x2, x3) = (t_grid[arg - 1].ln(), t_grid[arg].ln(), t_grid[arg + 1].ln());
    let (y1, y2, y3) = (response[arg - 1], response[arg], response[arg + 1]);
    let denom = (x2 - x1) * (y2 - y3) - (x2 - x3) * (y2 - y1);
    if denom.abs() < 1e-300 {
        return (t_grid[arg], y2);
    }
    let x_star =
        x2 - 0.5 * ((x2 - x1) * (x2 - x1) * (y2 - y3) - (x2 - x3) * (x2 - x3) * (y2 - y1)) / denom;
    // Evaluate the interpolating parabola at its vertex (Lagrange form).
    let l = |x: f64| {
        y1 * (x - x2) * (x - x3) / ((x1 - x2) * (x1 - x3))
            + y2 * (x - x1) * (x - x3) / ((x2 - x1) * (x2 - x3))
            + y3 * (x - x1) * (x - x2) / ((x3 - x1) * (x3 - x2))
    };
    (x_star.exp(), l(x_star))
}

// ---------------------------------------------------------------------------
// Subset scans
// ---------------------------------------------------------------------------

/// Per-size summary of [`subset_scan`].
#[derive(Debug, Clone)]
pub struct SizeSummary {
    pub size: usize,
    pub t_maxes: Vec<f64>,
    pub mean_t_max: f64,
    pub sd_t_max: f64,
}

/// Three-parameter saturating fit y(N) = asymptote - amplitude * g(N, rate)
/// with g = N^{-rate} (power) or exp(-rate N) (exponential).
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticFit {
    pub asymptote: f64,
    pub amplitude: f64,
    pub rate: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone)]
pub struct SubsetScanSummary {
    pub per_size: Vec<SizeSummary>,
    pub power_fit: Option<AsymptoticFit>,
    pub exponential_fit: Option<AsymptoticFit>,
    pub warnings: Vec<String>,
}

/// Scan randomly chosen asset subsets of each size (exhaustive when the
/// number of combinations is small) and summarize T_max(N) with saturating
/// extrapolation fits.
pub fn subset_scan(
    panel: &SignPanel,
    sizes: &[usize],
    sets_per_size: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<SubsetScanSummary> {
    if sizes.is_empty() || sets_per_size == 0 {
        return Err(MaxentError::InvalidInput(
            "subset scan needs sizes and a positive sets_per_size".into(),
        ));
    }
    let n = panel.n_assets();
    let m = panel.n_times() as f64;
    let mut warnings = Vec::new();
    // Sampling-significance bound: N ln 2 <= ln M.
    let significance_bound = (m.ln() / 2.0f64.ln()).floor() as usize;
    let mut per_size = Vec::new();
    for &size in sizes {
        if size == 0 || size > n {
            return Err(MaxentError::InvalidInput(format!(
                "subset size {size} out of range for {n} assets"
            )));
        }
        if size > significance_bound {
            warnings.push(format!(
                "subset size {size} exceeds the sampling-significance bound {significance_bound} \
                 (M = {m}); T_max values are biased there"
            ));
        }
        let subsets = choose_subsets(n, size, sets_per_size, seed ^ (size as u64).wrapping_mul(0x9E37_79B9));
        let t_maxes: Result<Vec<f64>> = subsets
            .par_iter()
            .map(|subset| {
                let sub = panel.select_assets(subset)?;
                let dist = empirical_distribution(&sub);
                if dist.len() < 2 {
                    return Ok(f64::NAN);
                }
                Ok(response_function_scan(&dist, t_grid)?.t_max)
            })
            .collect();
        let t_maxes: Vec<f64> = t_maxes?.into_iter().filter(|v| v.is_finite()).collect();
        if t_maxes.is_empty() {
            return Err(MaxentError::DegenerateDistribution(format!(
                "all size-{size} subsets were single-configuration panels"
            )));
        }
        let mean = t_maxes.iter().sum::<f64>() / t_maxes.len() as f64;
        let sd = (t_maxes.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / t_maxes.len().max(1) as f64)
            .sqrt();
        per_size.push(SizeSummary {
            size,
            t_maxes,
            mean_t_max: mean,
            sd_t_max: sd,
        });
    }
    let xs: Vec<f64> = per_size.iter().map(|s| s.size as f64).collect();
    let ys: Vec<f64> = per_size.iter().map(|s| s.mean_t_max).collect();
    let (power_fit, exponential_fit) = if xs.len() >= 3 {
        (
            Some(fit_saturating(&xs, &ys, |n, b| n.powf(-b))),
            Some(fit_saturating(&xs, &ys, |n, b| (-b * n).exp())),
        )
    } else {
        (None, None)
    };
    Ok(SubsetScanSummary {
        per_size,
        power_fit,
        exponential_fit,
        warnings,
    })
}

/// All or `count` random distinct sorted index subsets of {0..n-1}.
fn choose_subsets(n: usize, size: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let total = binomial(n, size);
    if let Some(total) = total {
        if total <= count as u128 {
            let mut all = Vec::new();
            let mut current: Vec<usize> = (0..size).collect();
            loop {
                all.push(current.clone());
                // Next lexicographic combination.
                let mut i = size;
                loop {
                    if i == 0 {
                        return all;
                    }
                    i -= 1;
                    if current[i] != i + n - size {
                        break;
                    }
                }
                current[i] += 1;
                for j in i + 1..size {
                    current[j] = current[j - 1] + 1;
                }
            }
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut subsets = Vec::with_capacity(count);
    let mut seen = std::collections::HashSet::new();
    while subsets.len() < count {
        let mut pool: Vec<usize> = (0..n).collect();
        for k in 0..size {
            let pick = rng.gen_range(k..n);
            pool.swap(k, pick);
        }
        let mut subset: Vec<usize> = pool[..size].to_vec();
        subset.sort_unstable();
        if seen.insert(subset.clone()) {
            subsets.push(subset);
        }
    }
    subsets
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.checked_mul((n - i) as u128)?;
        result /= (i + 1) as u128;
        if result > 1 << 40 {
            return None; // effectively infinite for our purposes
        }
    }
    Some(result)
}

/// Least squares for y = c - a g(N, b): linear solve for (c, a) at fixed b,
/// golden-section search over b.
fn fit_saturating(xs: &[f64], ys: &[f64], basis: impl Fn(f64, f64) -> f64) -> AsymptoticFit {
    let solve = |b: f64| -> (f64, f64, f64) {
        let g: Vec<f64> = xs.iter().map(|&x| basis(x, b)).collect();
        let n = xs.len() as f64;
        let sg: f64 = g.iter().sum();
        let sgg: f64 = g.iter().map(|v| v * v).sum();
        let sy: f64 = ys.iter().sum();
        let sgy: f64 = g.iter().zip(ys).map(|(a, y)| a * y).sum();
        // [n, -sg; sg?]: minimize sum (c - a g - y)^2.
        let det = n * sgg - sg * sg;
        if det.abs() < 1e-300 {
            return (sy / n, 0.0, f64::INFINITY);
        }
        let c = (sy * sgg - sg * sgy) / det;
        let a = (sg * sy - n * sgy) / det * -1.0;
        let rmse = (xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let r = c - a * basis(x, b) - y;
                r * r
            })
            .sum::<f64>()
            / n)
            .sqrt();
        (c, a, rmse)
    };
    // Golden-section on b in [1e-3, 5].
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1e-3, 5.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = solve(x1).2;
    let mut f2 = solve(x2).2;
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = solve(x1).2;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = solve(x2).2;
        }
    }
    let b = 0.5 * (lo + hi);
    let (c, a, rmse) = solve(b);
    AsymptoticFit {
        asymptote: c,
        amplitude: a,
        rate: b,
        rmse,
    }
}

// ---------------------------------------------------------------------------
// Sampling significance
// ---------------------------------------------------------------------------

/// H[s] vs H[K] diagnostic separating properly sampled from undersampled
/// configuration distributions via the occupancy counts m_k.
#[derive(Debug, Clone)]
pub struct SignificanceDiagnostic {
    /// Plug-in entropy H[s] = -sum_k (k m_k / M) ln(k / M).
    pub h_s: f64,
    /// Occupancy-class entropy H[K] = H[s] - sum_k (k m_k / M) ln m_k.
    pub h_k: f64,
    /// k -> m_k: number of configurations sampled exactly k times.
    pub m_counts: BTreeMap<u64, u64>,
    pub sample_size: u64,
    pub n_units: usize,
    /// Analytic bound min(N ln 2, ln M) for H[s].
    pub h_s_bound: f64,
}

pub fn sampling_significance(panel: &SignPanel) -> SignificanceDiagnostic {
    let dist = empirical_distribution(panel);
    let m = panel.n_times() as u64;
    let mut occupancy: BTreeMap<u64, u64> = BTreeMap::new();
    for &p in dist.probs() {
        let k = (p * m as f64).round() as u64;
        *occupancy.entry(k).or_insert(0) += 1;
    }
    let mf = m as f64;
    let mut h_s = 0.0;
    let mut correction = 0.0;
    for (&k, &mk) in &occupancy {
        let kf = k as f64;
        let mkf = mk as f64;
        h_s -= kf * mkf / mf * (kf / mf).ln();
        correction += kf * mkf / mf * mkf.ln();
    }
    SignificanceDiagnostic {
        h_s,
        h_k: h_s - correction,
        m_counts: occupancy,
        sample_size: m,
        n_units: panel.n_assets(),
        h_s_bound: (panel.n_assets() as f64 * 2.0f64.ln()).min(mf.ln()),
    }
}

// ---------------------------------------------------------------------------
// Bounded discrete power law (Zipf) test
// ---------------------------------------------------------------------------

/// Maximum-likelihood fit and bootstrap goodness-of-fit of a bounded discrete
/// power law p(x) ~ x^{-alpha}, x = 1..x_max.
#[derive(Debug, Clone)]
pub struct ZipfFit {
    pub alpha_mle: f64,
    pub sigma_alpha: f64,
    pub x_max: usize,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub bootstrap_count: usize,
}

/// Generalized harmonic sums zeta = sum x^-b, and log-weighted variants.
fn zeta_sums(beta: f64, x_max: usize) -> (f64, f64, f64) {
    let mut z = 0.0;
    let mut zl = 0.0; // sum x^-b ln x
    let mut zll = 0.0; // sum x^-b ln^2 x
    for x in 1..=x_max {
        let xf = x as f64;
        let w = xf.powf(-beta);
        let l = xf.ln();
        z += w;
        zl += w * l;
        zll += w * l * l;
    }
    (z, zl, zll)
}

/// Solve (sum x^-b ln x) / (sum x^-b) = mean_ln by bisection; the left side
/// is decreasing in b (this is the stationarity condition of the bounded
/// power-law log-likelihood).
pub(crate) fn solve_power_mle(mean_ln: f64, x_max: usize) -> f64 {
    let mut lo = 0.0;
    let mut hi = 60.0;
    let value = |b: f64| {
        let (z, zl, _) = zeta_sums(b, x_max);
        zl / z - mean_ln
    };
    if value(lo) <= 0.0 {
        return lo;
    }
    if value(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if value(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Standard error of the bounded power-law exponent from the observed Fisher
/// information of n observations at exponent `beta`.
pub fn zipf_exponent_sigma(beta: f64, x_max: usize, n: usize) -> f64 {
    let (z, zl, zll) = zeta_sums(beta, x_max);
    let fisher = zll / z - (zl / z) * (zl / z);
    if fisher > 0.0 {
        1.0 / (n as f64 * fisher).sqrt()
    } else {
        f64::NAN
    }
}

fn power_cdf(alpha: f64, x_max: usize) -> Vec<f64> {
    let (z, _, _) = zeta_sums(alpha, x_max);
    let mut cum = 0.0;
    (1..=x_max)
        .map(|x| {
            cum += (x as f64).powf(-alpha) / z;
            cum
        })
        .collect()
}

fn ks_statistic(empirical_cdf: &[f64], fitted_cdf: &[f64]) -> f64 {
    empirical_cdf
        .iter()
        .zip(fitted_cdf)
        .map(|(e, f)| (e - f).abs())
        .fold(0.0, f64::max)
}

/// Rank-frequency power-law test of a configuration distribution.
///
/// Ranks are assigned by descending probability (ties broken by
/// configuration lexicographic order); x_max is the support size. The MLE
/// exponent solves the zeta-ratio stationarity condition, sigma comes from
/// the observed Fisher information, D is the sup-norm CDF distance and the
/// p-value is a parametric bootstrap with `bootstrap_count` synthetic sets.
pub fn zipf_test(dist: &ConfigDistribution, bootstrap_count: usize, seed: u64) -> Result<ZipfFit> {
    let x_max = dist.len();
    if x_max < 10 {
        return Err(MaxentError::InsufficientSupport {
            needed: 10,
            got: x_max,
        });
    }
    if bootstrap_count < 100 {
        return Err(MaxentError::InvalidInput(format!(
            "bootstrap_count must be >= 100, got {bootstrap_count}"
        )));
    }
    let m = dist.sample_size().ok_or_else(|| {
        MaxentError::InvalidInput(
            "zipf_test needs an empirical distribution carrying its sample size".into(),
        )
    })? as usize;

    // Rank by descending probability, lexicographic configurations as ties.
    let mut order: Vec<usize> = (0..x_max).collect();
    order.sort_by(|&a, &b| {
        dist.probs()[b]
            .partial_cmp(&dist.probs()[a])
            .unwrap()
            .then_with(|| dist.support()[a].cmp(&dist.support()[b]))
    });
    let ranked_probs: Vec<f64> = order.iter().map(|&i| dist.probs()[i]).collect();

    let mean_ln: f64 = ranked_probs
        .iter()
        .enumerate()
        .map(|(r, &p)| p * ((r + 1) as f64).ln())
        .sum();
    let alpha = solve_power_mle(mean_ln, x_max);
    let sigma = zipf_exponent_sigma(alpha, x_max, m);

    let fitted_cdf = power_cdf(alpha, x_max);
    let mut cum = 0.0;
    let empirical_cdf: Vec<f64> = ranked_probs
        .iter()
        .map(|&p| {
            cum += p;
            cum
        })
        .collect();
    let d = ks_statistic(&empirical_cdf, &fitted_cdf);

    // Parametric bootstrap: each replicate is sampled from the fitted law,
    // refitted, and its own KS distance compared to D.
    let exceed: usize = (0..bootstrap_count)
        .into_par_iter()
        .map(|b| {
            let sample = synth_power_law(alpha, x_max, m, seed.wrapping_add(b as u64 + 1));
            let mut counts = vec![0u64; x_max];
            let mut mean_ln_b = 0.0;
            for &x in &sample {
                counts[x - 1] += 1;
                mean_ln_b += (x as f64).ln();
            }
            mean_ln_b /= m as f64;
            let alpha_b = solve_power_mle(mean_ln_b, x_max);
            let fitted_b = power_cdf(alpha_b, x_max);
            let mut cum = 0.0;
            let emp_b: Vec<f64> = counts
                .iter()
                .map(|&c| {
                    cum += c as f64 / m as f64;
                    cum
                })
                .collect();
            (ks_statistic(&emp_b, &fitted_b) > d) as usize
        })
        .sum();
    Ok(ZipfFit {
        alpha_mle: alpha,
        sigma_alpha: sigma,
        x_max,
        ks_statistic: d,
        p_value: exceed as f64 / bootstrap_count as f64,
        bootstrap_count,
    })
}

/// Inverse-CDF sampler of the bounded discrete power law: the smallest x
/// with cumulative weight >= u * total.
pub fn synth_power_law(alpha: f64, x_max: usize, length: usize, seed: u64) -> Vec<usize> {
    assert!(alpha >= 0.0, "alpha must be non-negative");
    assert!(x_max >= 1, "x_max must be >= 1");
    let mut cumulative = Vec::with_capacity(x_max);
    let mut total = 0.0;
    for x in 1..=x_max {
        total += (x as f64).powf(-alpha);
        cumulative.push(total);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..length)
        .map(|_| {
            let u: f64 = rng.gen::<f64>() * total;
            // Smallest x with cumulative[x-1] >= u.
            match cumulative.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                Ok(idx) | Err(idx) => (idx + 1).min(x_max),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Entropy-utility relation
// ---------------------------------------------------------------------------

/// Density-of-states estimate of the entropy-utility relation from occupancy
/// classes.
#[derive(Debug, Clone)]
pub struct EntropyUtilityRelation {
    /// (x, y, weight) per occupancy level k: x = -ln(k/M), y = ln m_k,
    /// weight = k m_k / M.
    pub points: Vec<(f64, f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Weighted RMSE of linear-fit residuals divided by the y-range.
    pub relative_nonlinearity: f64,
}

/// Entropy-utility linearity diagnostic: for each occupancy level k,
/// x = -ln(k/M) (minus log-likelihood) and y = ln m_k (log density of
/// states); weighted least-squares line with weights k m_k / M.
pub fn entropy_utility_relation(dist: &ConfigDistribution) -> Result<EntropyUtilityRelation> {
    let mut levels: Vec<f64> = dist.probs().to_vec();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    if levels.len() < 3 {
        return Err(MaxentError::InsufficientLevels { got: levels.len() });
    }
    let m = dist.sample_size().ok_or_else(|| {
        MaxentError::InvalidInput(
            "entropy_utility_relation needs an empirical distribution carrying its sample size"
                .into(),
        )
    })?;
    let mf = m as f64;
    let mut occupancy: BTreeMap<u64, u64> = BTreeMap::new();
    for &p in dist.probs() {
        let k = (p * mf).round() as u64;
        if k > 0 {
            *occupancy.entry(k).or_insert(0) += 1;
        }
    }
    if occupancy.len() < 3 {
        return Err(MaxentError::InsufficientLevels {
            got: occupancy.len(),
        });
    }
    let points: Vec<(f64, f64, f64)> = occupancy
        .iter()
        .map(|(&k, &mk)| {
            let kf = k as f64;
            let mkf = mk as f64;
            (-(kf / mf).ln(), mkf.ln(), kf * mkf / mf)
        })
        .collect();
    let w_total: f64 = points.iter().map(|p| p.2).sum();
    let xb: f64 = points.iter().map(|p| p.0 * p.2).sum::<f64>() / w_total;
    let yb: f64 = points.iter().map(|p| p.1 * p.2).sum::<f64>() / w_total;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - xb) * (p.0 - xb)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - xb) * (p.1 - yb)).sum();
    let slope = sxy / sxx;
    let intercept = yb - slope * xb;
    let rmse = (points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            p.2 * r * r
        })
        .sum::<f64>()
        / w_total)
        .sqrt();
    let y_min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let range = y_max - y_min;
    Ok(EntropyUtilityRelation {
        points,
        slope,
        intercept,
        relative_nonlinearity: if range > 0.0 { rmse / range } else { 0.0 },
    })
}
