//! Domain types for binary panels and distributions plus the
//! information-theoretic primitives used by every other module.
//!
//! All entropies and divergences are in nats.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{MaxentError, Result};

/// Normalization slack accepted before rejecting a probability vector.
const RENORMALIZE_TOLERANCE: f64 = 1e-9;

// ---------------------------------------------------------------------------
// SignPanel
// ---------------------------------------------------------------------------

/// Synchronized N x M matrix of +-1 orientations with timestamps and asset
/// labels. Rows are assets, columns are time periods.
///
/// Stored column-major internally so that one time period's configuration is
/// contiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignPanelRepr", into = "SignPanelRepr")]
pub struct SignPanel {
    assets: Vec<String>,
    times: Vec<String>,
    /// Column-major data: entry (i, t) lives at `t * n + i`.
    data: Vec<i8>,
    n: usize,
    m: usize,
}

/// Row-major serialized form (one row per asset), easier to inspect.
#[derive(Serialize, Deserialize)]
struct SignPanelRepr {
    assets: Vec<String>,
    times: Vec<String>,
    values: Vec<Vec<i8>>,
}

impl TryFrom<SignPanelRepr> for SignPanel {
    type Error = MaxentError;
    fn try_from(r: SignPanelRepr) -> Result<Self> {
        SignPanel::from_rows(r.assets, r.times, &r.values)
    }
}

impl From<SignPanel> for SignPanelRepr {
    fn from(p: SignPanel) -> Self {
        let values = (0..p.n)
            .map(|i| (0..p.m).map(|t| p.get(i, t)).collect())
            .collect();
        SignPanelRepr {
            assets: p.assets,
            times: p.times,
            values,
        }
    }
}

impl SignPanel {
    /// Build from row-major values (one inner vector per asset).
    pub fn from_rows(assets: Vec<String>, times: Vec<String>, rows: &[Vec<i8>]) -> Result<Self> {
        let n = assets.len();
        let m = times.len();
        if n == 0 || m == 0 {
            return Err(MaxentError::InvalidInput(
                "panel must have at least one asset and one period".into(),
            ));
        }
        if rows.len() != n {
            return Err(MaxentError::DimensionMismatch(format!(
                "{} rows for {} assets",
                rows.len(),
                n
            )));
        }
        let mut data = vec![0i8; n * m];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(MaxentError::DimensionMismatch(format!(
                    "row {} has length {}, expected {}",
                    i,
                    row.len(),
                    m
                )));
            }
            for (t, &v) in row.iter().enumerate() {
                if v != 1 && v != -1 {
                    return Err(MaxentError::InvalidInput(format!(
                        "panel entry ({i},{t}) = {v}; entries must be exactly -1 or +1"
                    )));
                }
                data[t * n + i] = v;
            }
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(MaxentError::InvalidInput(
                "period labels must be strictly increasing".into(),
            ));
        }
        Ok(SignPanel {
            assets,
            times,
            data,
            n,
            m,
        })
    }

    /// Build from per-period configurations (columns). Times default to the
    /// zero-padded column index when not provided.
    pub fn from_columns(
        assets: Vec<String>,
        times: Option<Vec<String>>,
        columns: &[Configuration],
    ) -> Result<Self> {
        let n = assets.len();
        let m = columns.len();
        let times = times.unwrap_or_else(|| (0..m).map(|t| format!("{t:010}")).collect());
        if times.len() != m {
            return Err(MaxentError::DimensionMismatch(format!(
                "{} time labels for {} columns",
                times.len(),
                m
            )));
        }
        let mut rows = vec![vec![0i8; m]; n];
        for (t, c) in columns.iter().enumerate() {
            if c.len() != n {
                return Err(MaxentError::DimensionMismatch(format!(
                    "column {} has length {}, expected {}",
                    t,
                    c.len(),
                    n
                )));
            }
            for i in 0..n {
                rows[i][t] = c.bits()[i];
            }
        }
        SignPanel::from_rows(assets, times, &rows)
    }

    pub fn n_assets(&self) -> usize {
        self.n
    }

    pub fn n_times(&self) -> usize {
        self.m
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn times(&self) -> &[String] {
        &self.times
    }

    #[inline]
    pub fn get(&self, asset: usize, time: usize) -> i8 {
        self.data[time * self.n + asset]
    }

    /// Contiguous configuration of all assets at one period.
    #[inline]
    pub fn column(&self, time: usize) -> &[i8] {
        &self.data[time * self.n..(time + 1) * self.n]
    }

    pub fn column_config(&self, time: usize) -> Configuration {
        Configuration::new(self.column(time).to_vec()).expect("panel entries are +-1")
    }

    /// One asset's series as f64 (for correlation work).
    pub fn row_f64(&self, asset: usize) -> Vec<f64> {
        (0..self.m).map(|t| self.get(asset, t) as f64).collect()
    }

    /// Panel restricted to a subset of assets (order preserved as given).
    pub fn select_assets(&self, indices: &[usize]) -> Result<SignPanel> {
        for &i in indices {
            if i >= self.n {
                return Err(MaxentError::InvalidInput(format!(
                    "asset index {i} out of range for panel of size {}",
                    self.n
                )));
            }
        }
        let assets = indices.iter().map(|&i| self.assets[i].clone()).collect();
        let rows: Vec<Vec<i8>> = indices
            .iter()
            .map(|&i| (0..self.m).map(|t| self.get(i, t)).collect())
            .collect();
        SignPanel::from_rows(assets, self.times.clone(), &rows)
    }

    /// Panel restricted to a contiguous time window `[start, start+width)`.
    pub fn window(&self, start: usize, width: usize) -> Result<SignPanel> {
        if start + width > self.m {
            return Err(MaxentError::WindowTooLarge {
                width: start + width,
                m: self.m,
            });
        }
        let times = self.times[start..start + width].to_vec();
        let rows: Vec<Vec<i8>> = (0..self.n)
            .map(|i| (start..start + width).map(|t| self.get(i, t)).collect())
            .collect();
        SignPanel::from_rows(self.assets.clone(), times, &rows)
    }

    /// Panel with the listed time columns removed.
    pub fn without_times(&self, drop: &[bool]) -> Result<SignPanel> {
        let keep: Vec<usize> = (0..self.m).filter(|&t| !drop[t]).collect();
        if keep.is_empty() {
            return Err(MaxentError::InvalidInput(
                "all periods removed from panel".into(),
            ));
        }
        let times = keep.iter().map(|&t| self.times[t].clone()).collect();
        let rows: Vec<Vec<i8>> = (0..self.n)
            .map(|i| keep.iter().map(|&t| self.get(i, t)).collect())
            .collect();
        SignPanel::from_rows(self.assets.clone(), times, &rows)
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// A length-N vector over {-1, +1}: one system configuration s.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    bits: Vec<i8>,
}

impl Configuration {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(MaxentError::InvalidInput(
                "configuration cannot be empty".into(),
            ));
        }
        if bits.iter().any(|&b| b != 1 && b != -1) {
            return Err(MaxentError::InvalidInput(
                "configuration entries must be exactly -1 or +1".into(),
            ));
        }
        Ok(Configuration { bits })
    }

    /// Configuration from an enumeration index: bit i of `index` set means
    /// s_i = +1.
    pub fn from_index(index: usize, n: usize) -> Self {
        let bits = (0..n)
            .map(|i| if (index >> i) & 1 == 1 { 1 } else { -1 })
            .collect();
        Configuration { bits }
    }

    /// Inverse of [`Configuration::from_index`] (valid for N <= 63).
    pub fn to_index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | (((b == 1) as usize) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn flipped(&self, unit: usize) -> Configuration {
        let mut bits = self.bits.clone();
        bits[unit] = -bits[unit];
        Configuration { bits }
    }

    /// Global sign flip s -> -s.
    pub fn negated(&self) -> Configuration {
        Configuration {
            bits: self.bits.iter().map(|&b| -b).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// ConfigDistribution
// ---------------------------------------------------------------------------

/// Probability mass over distinct binary configurations (empirical or
/// model-derived).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigDistribution {
    support: Vec<Configuration>,
    probs: Vec<f64>,
    /// Number of raw observations behind an empirical distribution; absent
    /// for model-derived ones. Needed by count-based diagnostics.
    sample_size: Option<u64>,
}

impl ConfigDistribution {
    pub fn new(support: Vec<Configuration>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(MaxentError::InvalidInput(
                "distribution support cannot be empty".into(),
            ));
        }
        if support.len() != probs.len() {
            return Err(MaxentError::DimensionMismatch(format!(
                "{} support configurations for {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        let n = support[0].len();
        let mut seen = HashMap::with_capacity(support.len());
        for (idx, c) in support.iter().enumerate() {
            if c.len() != n {
                return Err(MaxentError::DimensionMismatch(
                    "support configurations have mixed lengths".into(),
                ));
            }
            if seen.insert(c.bits().to_vec(), idx).is_some() {
                return Err(MaxentError::InvalidInput(
                    "support configurations must be distinct".into(),
                ));
            }
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(MaxentError::InvalidInput(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(MaxentError::InvalidInput(format!(
                "probabilities sum to {sum}, outside the 1e-9 renormalization window"
            )));
        }
        let probs = if (sum - 1.0).abs() > 1e-12 {
            probs.iter().map(|p| p / sum).collect()
        } else {
            probs
        };
        Ok(ConfigDistribution {
            support,
            probs,
            sample_size: None,
        })
    }

    pub fn with_sample_size(mut self, m: u64) -> Self {
        self.sample_size = Some(m);
        self
    }

    pub fn support(&self) -> &[Configuration] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample_size(&self) -> Option<u64> {
        self.sample_size
    }

    /// Dimension N of the underlying configurations.
    pub fn n_units(&self) -> usize {
        self.support[0].len()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Lookup table from configuration bits to probability.
    pub fn prob_map(&self) -> HashMap<&[i8], f64> {
        self.support
            .iter()
            .map(|c| c.bits())
            .zip(self.probs.iter().copied())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// MomentSet
// ---------------------------------------------------------------------------

/// First and second moments of a binary system: means q_i, pair correlations
/// q_ij (unit diagonal) and covariances C_ij = q_ij - q_i q_j.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub means: DVector<f64>,
    pub pair_corrs: DMatrix<f64>,
    pub covariances: DMatrix<f64>,
}

impl MomentSet {
    pub fn new(means: DVector<f64>, pair_corrs: DMatrix<f64>) -> Result<Self> {
        let n = means.len();
        if pair_corrs.nrows() != n || pair_corrs.ncols() != n {
            return Err(MaxentError::DimensionMismatch(
                "pair correlation matrix does not match mean vector".into(),
            ));
        }
        for i in 0..n {
            if means[i].abs() > 1.0 + 1e-12 {
                return Err(MaxentError::InvalidInput(format!(
                    "|q_{i}| = {} exceeds 1",
                    means[i].abs()
                )));
            }
            if (pair_corrs[(i, i)] - 1.0).abs() > 1e-9 {
                return Err(MaxentError::InvalidInput(format!(
                    "pair correlation diagonal q_{i}{i} = {} must be 1",
                    pair_corrs[(i, i)]
                )));
            }
            for j in 0..n {
                if pair_corrs[(i, j)].abs() > 1.0 + 1e-12 {
                    return Err(MaxentError::InvalidInput(format!(
                        "|q_{i}{j}| = {} exceeds 1",
                        pair_corrs[(i, j)].abs()
                    )));
                }
                if (pair_corrs[(i, j)] - pair_corrs[(j, i)]).abs() > 1e-9 {
                    return Err(MaxentError::InvalidInput(
                        "pair correlation matrix must be symmetric".into(),
                    ));
                }
            }
        }
        let covariances = &pair_corrs - &means * means.transpose();
        Ok(MomentSet {
            means,
            pair_corrs,
            covariances,
        })
    }

    pub fn n_units(&self) -> usize {
        self.means.len()
    }
}

// ---------------------------------------------------------------------------
// CouplingModel
// ---------------------------------------------------------------------------

/// Pairwise maximum-entropy model: symmetric influence matrix J (zero
/// diagonal), field vector h, optional lagged tensors K^tau and an inverse
/// stochasticity beta = 1/T (default 1).
#[derive(Debug, Clone)]
pub struct CouplingModel {
    influences: DMatrix<f64>,
    fields: DVector<f64>,
    lags: Vec<DMatrix<f64>>,
    beta: f64,
}

impl CouplingModel {
    pub fn new(influences: DMatrix<f64>, fields: DVector<f64>) -> Result<Self> {
        let n = fields.len();
        if influences.nrows() != n || influences.ncols() != n {
            return Err(MaxentError::DimensionMismatch(
                "influence matrix does not match field vector".into(),
            ));
        }
        for i in 0..n {
            if influences[(i, i)].abs() > 1e-12 {
                return Err(MaxentError::InvalidInput(format!(
                    "influence diagonal J_{i}{i} = {} must be 0",
                    influences[(i, i)]
                )));
            }
            for j in 0..i {
                if (influences[(i, j)] - influences[(j, i)]).abs() > 1e-9 {
                    return Err(MaxentError::InvalidInput(
                        "influence matrix must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(CouplingModel {
            influences,
            fields,
            lags: Vec::new(),
            beta: 1.0,
        })
    }

    /// Independent model with the given fields.
    pub fn independent(fields: DVector<f64>) -> Self {
        let n = fields.len();
        CouplingModel::new(DMatrix::zeros(n, n), fields).expect("zero J is valid")
    }

    /// Ferromagnetic nearest-neighbor model on a periodic `side x side`
    /// square lattice with uniform coupling and zero field.
    pub fn square_lattice(side: usize, coupling: f64) -> Self {
        let n = side * side;
        let mut j = DMatrix::zeros(n, n);
        for r in 0..side {
            for c in 0..side {
                let i = r * side + c;
                let right = r * side + (c + 1) % side;
                let down = ((r + 1) % side) * side + c;
                // Periodic lattices with side 2 would duplicate bonds; the
                // set-once guard keeps J well formed for any side.
                for nb in [right, down] {
                    if nb != i {
                        j[(i, nb)] = coupling;
                        j[(nb, i)] = coupling;
                    }
                }
            }
        }
        CouplingModel::new(j, DVector::zeros(n)).expect("lattice J is valid")
    }

    pub fn with_lags(mut self, lags: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = self.n_units();
        for (t, k) in lags.iter().enumerate() {
            if k.nrows() != n || k.ncols() != n {
                return Err(MaxentError::DimensionMismatch(format!(
                    "lag tensor {} does not match system size {}",
                    t + 1,
                    n
                )));
            }
        }
        self.lags = lags;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(MaxentError::InvalidInput(format!(
                "beta must be positive, got {beta}"
            )));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn n_units(&self) -> usize {
        self.fields.len()
    }

    pub fn influences(&self) -> &DMatrix<f64> {
        &self.influences
    }

    pub fn fields(&self) -> &DVector<f64> {
        &self.fields
    }

    pub fn lags(&self) -> &[DMatrix<f64>] {
        &self.lags
    }

    pub fn lag_count(&self) -> usize {
        self.lags.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Utility U(s) = 1/2 sum_ij J_ij s_i s_j + sum_i h_i s_i (beta excluded).
    pub fn utility(&self, config: &Configuration) -> f64 {
        let s = config.bits();
        let n = self.n_units();
        debug_assert_eq!(s.len(), n);
        let mut u = 0.0;
        for i in 0..n {
            let si = s[i] as f64;
            u += self.fields[i] * si;
            for j in (i + 1)..n {
                u += self.influences[(i, j)] * si * s[j] as f64;
            }
        }
        u
    }

    /// Local field sum_j J_ij s_j + h_i at `unit` (beta excluded).
    pub fn local_field(&self, state: &[i8], unit: usize) -> f64 {
        let mut f = self.fields[unit];
        for j in 0..self.n_units() {
            if j != unit {
                f += self.influences[(unit, j)] * state[j] as f64;
            }
        }
        f
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Relative frequency of each distinct panel column, support sorted
/// lexicographically for deterministic output. Carries the sample size.
pub fn empirical_distribution(panel: &SignPanel) -> ConfigDistribution {
    let m = panel.n_times();
    let mut counts: HashMap<&[i8], u64> = HashMap::new();
    for t in 0..m {
        *counts.entry(panel.column(t)).or_insert(0) += 1;
    }
    let mut entries: Vec<(&[i8], u64)> = counts.into_iter().collect();
    entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
    let support = entries
        .iter()
        .map(|(bits, _)| Configuration::new(bits.to_vec()).expect("panel entries are +-1"))
        .collect();
    let probs = entries.iter().map(|&(_, c)| c as f64 / m as f64).collect();
    ConfigDistribution::new(support, probs)
        .expect("frequencies form a valid distribution")
        .with_sample_size(m as u64)
}

/// Sample means q_i, pair correlations q_ij and covariances of a panel.
pub fn sample_moments(panel: &SignPanel) -> MomentSet {
    let n = panel.n_assets();
    let m = panel.n_times();
    let mut means = DVector::zeros(n);
    let mut corrs = DMatrix::zeros(n, n);
    for t in 0..m {
        let col = panel.column(t);
        for i in 0..n {
            let si = col[i] as f64;
            means[i] += si;
            for j in i..n {
                corrs[(i, j)] += si * col[j] as f64;
            }
        }
    }
    means /= m as f64;
    for i in 0..n {
        for j in i..n {
            let q = corrs[(i, j)] / m as f64;
            corrs[(i, j)] = q;
            corrs[(j, i)] = q;
        }
        corrs[(i, i)] = 1.0;
    }
    MomentSet::new(means, corrs).expect("panel moments are valid")
}

/// Moments implied by a configuration distribution.
pub fn distribution_moments(dist: &ConfigDistribution) -> MomentSet {
    let n = dist.n_units();
    let mut means = DVector::zeros(n);
    let mut corrs = DMatrix::zeros(n, n);
    for (c, &p) in dist.support().iter().zip(dist.probs()) {
        let s = c.bits();
        for i in 0..n {
            let si = s[i] as f64;
            means[i] += p * si;
            for j in i..n {
                corrs[(i, j)] += p * si * s[j] as f64;
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            corrs[(j, i)] = corrs[(i, j)];
        }
        corrs[(i, i)] = 1.0;
    }
    MomentSet::new(means, corrs).expect("distribution moments are valid")
}

/// Shannon entropy S = -sum p ln p in nats (0 ln 0 = 0).
pub fn entropy(dist: &ConfigDistribution) -> f64 {
    entropy_of_probs(dist.probs())
}

/// Entropy of a bare probability slice (assumed normalized).
pub fn entropy_of_probs(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Kullback-Leibler divergence D(p || q) in nats.
///
/// Requires the support of `p` (where it has mass) to be contained in the
/// support of `q`.
pub fn kl_divergence(p: &ConfigDistribution, q: &ConfigDistribution) -> Result<f64> {
    if p.n_units() != q.n_units() {
        return Err(MaxentError::DimensionMismatch(
            "distributions live on different system sizes".into(),
        ));
    }
    let qmap = q.prob_map();
    let mut d = 0.0;
    let mut escaped = 0.0;
    for (c, &pp) in p.support().iter().zip(p.probs()) {
        if pp == 0.0 {
            continue;
        }
        match qmap.get(c.bits()) {
            Some(&qq) if qq > 0.0 => d += pp * (pp / qq).ln(),
            _ => escaped += pp,
        }
    }
    if escaped > 0.0 {
        return Err(MaxentError::AbsoluteContinuityViolation { mass: escaped });
    }
    Ok(d.max(0.0))
}

/// Mutual information and redundancy of two real samples after equal-width
/// binning (`bins` per variable).
///
/// Returns `(mi, redundancy)` with mi = S(X) + S(Y) - S(X,Y) and
/// redundancy = mi / (S(X) + S(Y)).
pub fn mutual_information_pair(x: &[f64], y: &[f64], bins: usize) -> Result<(f64, f64)> {
    if x.is_empty() || y.is_empty() {
        return Err(MaxentError::EmptySample);
    }
    if x.len() != y.len() {
        return Err(MaxentError::DimensionMismatch(
            "samples have different lengths".into(),
        ));
    }
    if bins == 0 {
        return Err(MaxentError::InvalidInput("bins must be >= 1".into()));
    }
    let bx = bin_indices(x, bins);
    let by = bin_indices(y, bins);
    let m = x.len() as f64;
    let mut cx: HashMap<usize, f64> = HashMap::new();
    let mut cy: HashMap<usize, f64> = HashMap::new();
    let mut cxy: HashMap<(usize, usize), f64> = HashMap::new();
    for (&i, &j) in bx.iter().zip(&by) {
        *cx.entry(i).or_insert(0.0) += 1.0 / m;
        *cy.entry(j).or_insert(0.0) += 1.0 / m;
        *cxy.entry((i, j)).or_insert(0.0) += 1.0 / m;
    }
    let sx = entropy_of_probs(&cx.into_values().collect::<Vec<_>>());
    let sy = entropy_of_probs(&cy.into_values().collect::<Vec<_>>());
    let sxy = entropy_of_probs(&cxy.into_values().collect::<Vec<_>>());
    let mi = (sx + sy - sxy).max(0.0);
    let denom = sx + sy;
    let redundancy = if denom > 0.0 { mi / denom } else { 0.0 };
    Ok((mi, redundancy))
}

fn bin_indices(x: &[f64], bins: usize) -> Vec<usize> {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    x.iter()
        .map(|&v| {
            if width == 0.0 {
                0
            } else {
                (((v - lo) / width) as usize).min(bins - 1)
            }
        })
        .collect()
}

/// Pearson correlation of two samples (helper shared by tests and topo).
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(MaxentError::DimensionMismatch(
            "correlation needs equal non-empty samples".into(),
        ));
    }
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MaxentError::ZeroVariance { index: 0 });
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn panel(rows: &[Vec<i8>]) -> SignPanel {
        let n = rows.len();
        let m = rows[0].len();
        SignPanel::from_rows(
            (0..n).map(|i| format!("A{i}")).collect(),
            (0..m).map(|t| format!("{t:04}")).collect(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn panel_rejects_non_sign_entries() {
        let err = SignPanel::from_rows(
            vec!["a".into()],
            vec!["t0".into(), "t1".into()],
            &[vec![1, 0]],
        );
        assert!(err.is_err());
    }

    #[test]
    fn empirical_distribution_degenerate_panel() {
        let p = panel(&[vec![1, 1, 1], vec![-1, -1, -1]]);
        let d = empirical_distribution(&p);
        assert_eq!(d.len(), 1);
        assert_abs_diff_eq!(d.probs()[0], 1.0);
        assert_eq!(d.sample_size(), Some(3));
    }

    #[test]
    fn empirical_distribution_single_unit_symmetric() {
        let p = panel(&[vec![1, -1, 1, -1]]);
        let d = empirical_distribution(&p);
        assert_eq!(d.len(), 2);
        assert_abs_diff_eq!(d.probs()[0], 0.5);
        assert_abs_diff_eq!(d.probs()[1], 0.5);
    }

    #[test]
    fn empirical_distribution_hand_count() {
        // columns (++),(++),(+-),(--): probs 0.5, 0.25, 0.25
        let p = panel(&[vec![1, 1, 1, -1], vec![1, 1, -1, -1]]);
        let d = empirical_distribution(&p);
        let map = d.prob_map();
        assert_abs_diff_eq!(map[&[1i8, 1][..]], 0.5);
        assert_abs_diff_eq!(map[&[1i8, -1][..]], 0.25);
        assert_abs_diff_eq!(map[&[-1i8, -1][..]], 0.25);
    }

    #[test]
    fn sample_moments_all_ones() {
        let p = panel(&[vec![1, 1], vec![1, 1]]);
        let m = sample_moments(&p);
        assert_abs_diff_eq!(m.means[0], 1.0);
        assert_abs_diff_eq!(m.pair_corrs[(0, 1)], 1.0);
        assert_abs_diff_eq!(m.covariances[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_uniform_and_atom() {
        let support: Vec<Configuration> = (0..4).map(|k| Configuration::from_index(k, 2)).collect();
        let uniform = ConfigDistribution::new(support.clone(), vec![0.25; 4]).unwrap();
        assert_abs_diff_eq!(entropy(&uniform), 4.0f64.ln(), epsilon = 1e-12);
        let atom = ConfigDistribution::new(vec![support[0].clone()], vec![1.0]).unwrap();
        assert_abs_diff_eq!(entropy(&atom), 0.0);
    }

    #[test]
    fn kl_divergence_identity_is_zero() {
        let support: Vec<Configuration> = (0..2).map(|k| Configuration::from_index(k, 1)).collect();
        let p = ConfigDistribution::new(support.clone(), vec![0.3, 0.7]).unwrap();
        assert_abs_diff_eq!(kl_divergence(&p, &p).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn kl_divergence_absolute_continuity() {
        let support: Vec<Configuration> = (0..2).map(|k| Configuration::from_index(k, 1)).collect();
        let p = ConfigDistribution::new(support.clone(), vec![0.3, 0.7]).unwrap();
        let q = ConfigDistribution::new(vec![support[0].clone()], vec![1.0]).unwrap();
        assert!(matches!(
            kl_divergence(&p, &q),
            Err(MaxentError::AbsoluteContinuityViolation { .. })
        ));
    }

    #[test]
    fn mutual_information_identity_sample() {
        let x: Vec<f64> = (0..200).map(|i| (i % 7) as f64).collect();
        let (mi, red) = mutual_information_pair(&x, &x, 7).unwrap();
        assert_abs_diff_eq!(red, 0.5, epsilon = 1e-12); // S(X,Y)=S(X) => mi = S(X)
        assert!(mi > 0.0);
    }

    #[test]
    fn moments_from_distribution_match_panel() {
        let p = panel(&[vec![1, 1, -1, 1, -1], vec![1, -1, -1, 1, 1]]);
        let from_panel = sample_moments(&p);
        let from_dist = distribution_moments(&empirical_distribution(&p));
        assert!((from_panel.means.clone() - from_dist.means.clone())
            .amax()
            .abs()
            < 1e-12);
        assert!((from_panel.pair_corrs.clone() - from_dist.pair_corrs.clone()).amax() < 1e-12);
    }

    #[test]
    fn lattice_model_has_four_neighbors() {
        let m = CouplingModel::square_lattice(3, 1.0);
        for i in 0..9 {
            let row_sum: f64 = (0..9).map(|j| m.influences()[(i, j)]).sum();
            assert_abs_diff_eq!(row_sum, 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn configuration_index_round_trip() {
        for idx in 0..32 {
            let c = Configuration::from_index(idx, 5);
            assert_eq!(c.to_index(), idx);
        }
    }

    #[test]
    fn distribution_renormalizes_small_slack() {
        let support: Vec<Configuration> = (0..2).map(|k| Configuration::from_index(k, 1)).collect();
        let d = ConfigDistribution::new(support, vec![0.5, 0.5 + 5e-10]).unwrap();
        assert_abs_diff_eq!(d.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }
}
