//! Network topology: correlation matrices and spectra, Mantegna-Sornette and
//! influence-based dissimilarities, minimum spanning trees, sliding-window
//! structural series, and hierarchical clustering.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::approx::entropy_zeroth;
use crate::core::{pearson_correlation, sample_moments, CouplingModel, SignPanel};
use crate::error::{MaxentError, Result};
use crate::infer::invert_tap;

// ---------------------------------------------------------------------------
// Dissimilarities
// ---------------------------------------------------------------------------

/// Symmetric non-negative dissimilarity matrix with zero diagonal.
#[derive(Debug, Clone)]
pub struct DissimilarityMatrix {
    pub labels: Vec<String>,
    pub values: DMatrix<f64>,
}

impl DissimilarityMatrix {
    pub fn new(labels: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(MaxentError::DimensionMismatch(
                "dissimilarity matrix does not match label count".into(),
            ));
        }
        for i in 0..n {
            if values[(i, i)].abs() > 1e-12 {
                return Err(MaxentError::InvalidInput(format!(
                    "dissimilarity diagonal entry {i} is {}, expected 0",
                    values[(i, i)]
                )));
            }
            for j in 0..n {
                if values[(i, j)] < 0.0 {
                    return Err(MaxentError::InvalidInput(format!(
                        "negative dissimilarity at ({i},{j})"
                    )));
                }
                if (values[(i, j)] - values[(j, i)]).abs() > 1e-9 {
                    return Err(MaxentError::InvalidInput(
                        "dissimilarity matrix must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(DissimilarityMatrix { labels, values })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

/// Pearson correlation matrix of the panel rows with its eigenvalues in
/// descending order.
pub fn correlation_matrix(panel: &SignPanel) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = panel.n_assets();
    if panel.n_times() < 2 {
        return Err(MaxentError::InsufficientSample(
            "correlation matrix needs at least two observations".into(),
        ));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| panel.row_f64(i)).collect();
    let mut c = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = pearson_correlation(&rows[i], &rows[j]).map_err(|e| match e {
                MaxentError::ZeroVariance { .. } => MaxentError::ZeroVariance { index: i },
                other => other,
            })?;
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    // Re-check the diagonal rows for zero variance explicitly so the error
    // names the right asset even when it never enters a pair first.
    for (i, row) in rows.iter().enumerate() {
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        if row.iter().all(|&v| (v - mean).abs() < 1e-15) {
            return Err(MaxentError::ZeroVariance { index: i });
        }
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(c.clone())
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((c, eigenvalues))
}

/// Mantegna-Sornette distance d = sqrt(2 (1 - C)), mapping correlation 1 to
/// distance 0 and correlation -1 to distance 2.
pub fn ms_distance(correlations: &DMatrix<f64>, labels: &[String]) -> Result<DissimilarityMatrix> {
    let n = correlations.nrows();
    for i in 0..n {
        for j in 0..n {
            let c = correlations[(i, j)];
            if c.abs() > 1.0 + 1e-9 {
                return Err(MaxentError::OutOfRangeCorrelation { i, j, value: c });
            }
        }
    }
    let values = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (2.0 * (1.0 - correlations[(i, j)]).max(0.0)).sqrt()
        }
    });
    DissimilarityMatrix::new(labels.to_vec(), values)
}

/// Influence dissimilarity: the Mantegna-Sornette transform applied to the
/// coupling matrix normalized by its largest off-diagonal magnitude,
/// d_ij = sqrt(2 (1 - J_ij / max |J|)).
pub fn influence_dissimilarity(model: &CouplingModel) -> Result<DissimilarityMatrix> {
    let n = model.n_units();
    let j = model.influences();
    let mut j_max = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                j_max = j_max.max(j[(a, b)].abs());
            }
        }
    }
    if j_max <= 0.0 {
        return Err(MaxentError::DegenerateInfluence);
    }
    let values = DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            0.0
        } else {
            (2.0 * (1.0 - j[(a, b)] / j_max).max(0.0)).sqrt()
        }
    });
    let labels = (0..n).map(|i| format!("u{i:03}")).collect();
    DissimilarityMatrix::new(labels, values)
}

// ---------------------------------------------------------------------------
// Minimum spanning tree
// ---------------------------------------------------------------------------

/// Spanning tree over the complete dissimilarity graph.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    /// Edges (i, j, weight) with i < j, in the order they were accepted.
    pub edges: Vec<(usize, usize, f64)>,
    pub total_length: f64,
    pub degree_sequence: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Exact minimum spanning tree by greedy edge growth; ties broken by
/// lexicographic edge index so the result is deterministic.
pub fn minimum_spanning_tree(d: &DissimilarityMatrix) -> Result<SpanningTree> {
    let n = d.n();
    if n < 2 {
        return Err(MaxentError::InvalidInput(
            "spanning tree needs at least two nodes".into(),
        ));
    }
    let mut all_edges: Vec<(usize, usize, f64)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            all_edges.push((i, j, d.values[(i, j)]));
        }
    }
    all_edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    let mut total = 0.0;
    let mut degree = vec![0usize; n];
    for (i, j, w) in all_edges {
        if uf.union(i, j) {
            edges.push((i, j, w));
            total += w;
            degree[i] += 1;
            degree[j] += 1;
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    Ok(SpanningTree {
        edges,
        total_length: total,
        degree_sequence: degree,
    })
}

/// Power-law fit of the tree's degree distribution: log-log least squares
/// (with R^2) plus the bounded discrete maximum-likelihood exponent as a
/// cross-check.
#[derive(Debug, Clone)]
pub struct DegreeDistributionFit {
    /// (degree, frequency) for occupied degrees.
    pub frequencies: Vec<(usize, usize)>,
    pub alpha_ls: f64,
    pub r_squared: f64,
    pub alpha_mle: f64,
    /// Set when the tree is too small for a meaningful fit (N < 10).
    pub small_sample_warning: bool,
}

pub fn degree_distribution_fit(tree: &SpanningTree) -> DegreeDistributionFit {
    let n = tree.degree_sequence.len();
    let max_degree = tree.degree_sequence.iter().cloned().max().unwrap_or(1);
    let mut counts = vec![0usize; max_degree + 1];
    for &d in &tree.degree_sequence {
        counts[d] += 1;
    }
    let frequencies: Vec<(usize, usize)> = (1..=max_degree)
        .filter(|&d| counts[d] > 0)
        .map(|d| (d, counts[d]))
        .collect();
    // Least squares of ln f against ln degree; slope reported as -alpha.
    let pts: Vec<(f64, f64)> = frequencies
        .iter()
        .map(|&(d, f)| ((d as f64).ln(), (f as f64).ln()))
        .collect();
    let (alpha_ls, r_squared) = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let xb = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let yb = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - xb) * (p.0 - xb)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - xb) * (p.1 - yb)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - yb) * (p.1 - yb)).sum();
        if sxx > 0.0 && syy > 0.0 {
            let slope = sxy / sxx;
            (-slope, sxy * sxy / (sxx * syy))
        } else {
            (f64::NAN, f64::NAN)
        }
    } else {
        (f64::NAN, f64::NAN)
    };
    let mean_ln = tree
        .degree_sequence
        .iter()
        .map(|&d| (d as f64).ln())
        .sum::<f64>()
        / n as f64;
    let alpha_mle = crate::crit::solve_power_mle(mean_ln, max_degree);
    DegreeDistributionFit {
        frequencies,
        alpha_ls,
        r_squared,
        alpha_mle,
        small_sample_warning: n < 10,
    }
}

// ---------------------------------------------------------------------------
// Sliding-window structural series
// ---------------------------------------------------------------------------

/// Statistic tracked over sliding windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowStatistic {
    /// Minimum spanning tree length of the Mantegna-Sornette distance.
    TreeLengthMs,
    /// Minimum spanning tree length of the influence dissimilarity of the
    /// second-order inverted couplings.
    TreeLengthJ,
    /// Trace of the second-order inversion with the raw diagonal retained.
    TraceJ,
    /// ln |det| of the second-order inversion with the raw diagonal retained
    /// (the sign is reported separately to avoid underflow).
    DetJ,
    /// Zeroth-order (independent-unit) entropy of the window means.
    EntropyS0,
    /// Aggregate field sum h_i from the second-order inversion.
    AggregateH,
}

#[derive(Debug, Clone)]
pub struct WindowSeries {
    pub statistic: WindowStatistic,
    /// Start index of each window.
    pub starts: Vec<usize>,
    /// Timestamp of each window's first observation.
    pub start_times: Vec<String>,
    pub values: Vec<f64>,
    /// Values minus their temporal mean.
    pub centered: Vec<f64>,
    /// Determinant signs, populated for [`WindowStatistic::DetJ`] only.
    pub det_signs: Option<Vec<f64>>,
}

/// One structural statistic per sliding window of `width` observations,
/// shifted by `shift`; windows are processed in parallel.
pub fn sliding_window_series(
    panel: &SignPanel,
    width: usize,
    shift: usize,
    statistic: WindowStatistic,
) -> Result<WindowSeries> {
    let m = panel.n_times();
    if width > m {
        return Err(MaxentError::WindowTooLarge { width, m });
    }
    if width < 2 || shift == 0 {
        return Err(MaxentError::InvalidInput(
            "window width must be >= 2 and shift >= 1".into(),
        ));
    }
    let starts: Vec<usize> = (0..=m - width).step_by(shift).collect();
    let per_window: Result<Vec<(f64, f64)>> = starts
        .par_iter()
        .map(|&start| {
            let window = panel.window(start, width)?;
            window_statistic(&window, statistic)
        })
        .collect();
    let per_window = per_window?;
    let values: Vec<f64> = per_window.iter().map(|p| p.0).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let centered = values.iter().map(|v| v - mean).collect();
    let det_signs = if statistic == WindowStatistic::DetJ {
        Some(per_window.iter().map(|p| p.1).collect())
    } else {
        None
    };
    let start_times = starts.iter().map(|&s| panel.times()[s].clone()).collect();
    Ok(WindowSeries {
        statistic,
        starts,
        start_times,
        values,
        centered,
        det_signs,
    })
}

/// (value, det sign) for one window; the sign slot is 0 except for DetJ.
fn window_statistic(window: &SignPanel, statistic: WindowStatistic) -> Result<(f64, f64)> {
    match statistic {
        WindowStatistic::TreeLengthMs => {
            let (c, _) = correlation_matrix(window)?;
            let d = ms_distance(&c, window.assets())?;
            Ok((minimum_spanning_tree(&d)?.total_length, 0.0))
        }
        WindowStatistic::EntropyS0 => {
            let moments = sample_moments(window);
            Ok((entropy_zeroth(moments.means.as_slice()), 0.0))
        }
        WindowStatistic::TreeLengthJ => {
            let tap = invert_tap(&sample_moments(window))?;
            let d = influence_dissimilarity(&tap.model)?;
            Ok((minimum_spanning_tree(&d)?.total_length, 0.0))
        }
        WindowStatistic::AggregateH => {
            let tap = invert_tap(&sample_moments(window))?;
            Ok((tap.model.fields().iter().sum(), 0.0))
        }
        WindowStatistic::TraceJ => {
            let tap = invert_tap(&sample_moments(window))?;
            Ok((tap.raw_diagonal.iter().sum(), 0.0))
        }
        WindowStatistic::DetJ => {
            let tap = invert_tap(&sample_moments(window))?;
            let n = tap.model.n_units();
            let mut j = tap.model.influences().clone();
            for i in 0..n {
                j[(i, i)] = tap.raw_diagonal[i];
            }
            let lu = j.lu();
            let det = lu.determinant();
            if det == 0.0 {
                return Ok((f64::NEG_INFINITY, 0.0));
            }
            Ok((det.abs().ln(), det.signum()))
        }
    }
}

// ---------------------------------------------------------------------------
// Hierarchical clustering
// ---------------------------------------------------------------------------

/// Agglomerative clustering result.
#[derive(Debug, Clone)]
pub struct HierarchicalClustering {
    /// Merge list: (node_a, node_b, height). Leaves are 0..N-1; merge k
    /// creates node N+k.
    pub merges: Vec<(usize, usize, f64)>,
    /// Flat assignment at the requested cluster count (0-based labels).
    pub labels: Vec<usize>,
    /// Leaf order placing clusters contiguously (for matrix maps).
    pub permutation: Vec<usize>,
}

/// Complete-linkage agglomerative clustering on the standardized columns of
/// the dissimilarity matrix: each element's feature vector is its z-scored
/// dissimilarity profile, the base metric is Euclidean, and the
/// between-cluster distance is the maximum over cross pairs. Ties are broken
/// by the smallest cluster index pair.
pub fn hierarchical_clusters(
    d: &DissimilarityMatrix,
    cluster_count: usize,
) -> Result<HierarchicalClustering> {
    let n = d.n();
    if n < 2 {
        return Err(MaxentError::InvalidInput(
            "clustering needs at least two elements".into(),
        ));
    }
    if cluster_count == 0 || cluster_count > n {
        return Err(MaxentError::InvalidInput(format!(
            "cluster_count {cluster_count} out of range for {n} elements"
        )));
    }
    // Z-score each column of the dissimilarity matrix.
    let mut z = d.values.clone();
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| z[(i, j)]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
        for i in 0..n {
            z[(i, j)] = if sd > 1e-15 { (z[(i, j)] - mean) / sd } else { 0.0 };
        }
    }
    // Pairwise Euclidean base distances between z-scored rows.
    let base = DMatrix::from_fn(n, n, |a, b| {
        let mut s = 0.0;
        for j in 0..n {
            let diff = z[(a, j)] - z[(b, j)];
            s += diff * diff;
        }
        s.sqrt()
    });

    // Active clusters keyed by node id; members listed per cluster.
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut labels = vec![0usize; n];
    let mut labels_set = cluster_count == n;
    if labels_set {
        for (i, l) in labels.iter_mut().enumerate() {
            *l = i;
        }
    }
    let linkage = |a: &[usize], b: &[usize]| -> f64 {
        let mut worst = 0.0f64;
        for &x in a {
            for &y in b {
                worst = worst.max(base[(x, y)]);
            }
        }
        worst
    };
    while active.len() > 1 {
        // Find the closest active pair; deterministic tie-break by node ids.
        let mut best: Option<(f64, usize, usize)> = None;
        for (p, &ca) in active.iter().enumerate() {
            for &cb in &active[p + 1..] {
                let h = linkage(
                    members[ca].as_ref().unwrap(),
                    members[cb].as_ref().unwrap(),
                );
                let candidate = (h, ca.min(cb), ca.max(cb));
                if best.is_none_or(|b| candidate.0.total_cmp(&b.0).then(candidate.1.cmp(&b.1)).then(candidate.2.cmp(&b.2)).is_lt()) {
                    best = Some(candidate);
                }
            }
        }
        let (height, a, b) = best.unwrap();
        let mut merged = members[a].take().unwrap();
        merged.extend(members[b].take().unwrap());
        let new_id = members.len();
        members.push(Some(merged));
        active.retain(|&c| c != a && c != b);
        active.push(new_id);
        merges.push((a, b, height));
        if !labels_set && active.len() == cluster_count {
            let mut sorted = active.clone();
            sorted.sort_unstable();
            for (label, &cluster) in sorted.iter().enumerate() {
                for &leaf in members[cluster].as_ref().unwrap() {
                    labels[leaf] = label;
                }
            }
            labels_set = true;
        }
    }
    // Leaf order by traversal of the final merge tree, smaller node first.
    let root = active[0];
    let mut permutation = Vec::with_capacity(n);
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node < n {
            permutation.push(node);
        } else {
            let (a, b, _) = merges[node - n];
            // Push the larger id first so the smaller is visited first.
            stack.push(a.max(b));
            stack.push(a.min(b));
        }
    }
    Ok(HierarchicalClustering {
        merges,
        labels,
        permutation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("a{i}")).collect()
    }

    #[test]
    fn correlation_duplicated_row() {
        let panel = SignPanel::from_rows(
            labels(2),
            (0..6).map(|t| format!("{t}")).collect(),
            &[vec![1, -1, 1, 1, -1, -1], vec![1, -1, 1, 1, -1, -1]],
        )
        .unwrap();
        let (c, eig) = correlation_matrix(&panel).unwrap();
        assert_abs_diff_eq!(c[(0, 1)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn correlation_zero_variance_row() {
        let panel = SignPanel::from_rows(
            labels(2),
            (0..4).map(|t| format!("{t}")).collect(),
            &[vec![1, 1, 1, 1], vec![1, -1, 1, -1]],
        )
        .unwrap();
        assert!(matches!(
            correlation_matrix(&panel),
            Err(MaxentError::ZeroVariance { index: 0 })
        ));
    }

    #[test]
    fn ms_distance_anchor_values() {
        let c = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, -1.0, 0.0, 1.0, 1.0, -1.0, 1.0, 1.0]);
        let d = ms_distance(&c, &labels(3)).unwrap();
        assert_abs_diff_eq!(d.values[(0, 1)], 2.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.values[(0, 2)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.values[(1, 2)], 0.0, epsilon = 1e-12);

        let mut bad = c.clone();
        bad[(0, 1)] = 1.5;
        bad[(1, 0)] = 1.5;
        assert!(matches!(
            ms_distance(&bad, &labels(3)),
            Err(MaxentError::OutOfRangeCorrelation { .. })
        ));
    }

    #[test]
    fn influence_dissimilarity_anchor_values() {
        let j = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.0, 0.5, 0.0, -0.5, 0.0, -0.5, 0.0]);
        let model = CouplingModel::new(j, dvector![0.0, 0.0, 0.0]).unwrap();
        let d = influence_dissimilarity(&model).unwrap();
        assert_abs_diff_eq!(d.values[(0, 1)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.values[(0, 2)], 2.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.values[(1, 2)], 2.0, epsilon = 1e-12);

        let flat = CouplingModel::independent(dvector![0.1, 0.2, 0.3]);
        assert!(matches!(
            influence_dissimilarity(&flat),
            Err(MaxentError::DegenerateInfluence)
        ));
    }

    #[test]
    fn mst_three_nodes_matches_brute_force() {
        // Weights d01=1, d02=2, d12=3: the three spanning trees cost 3, 4, 5.
        let values = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 2.0, 3.0, 0.0]);
        let d = DissimilarityMatrix::new(labels(3), values).unwrap();
        let tree = minimum_spanning_tree(&d).unwrap();
        assert_eq!(tree.edges.len(), 2);
        assert_abs_diff_eq!(tree.total_length, 3.0, epsilon = 1e-12);
        let edge_set: Vec<(usize, usize)> = tree.edges.iter().map(|e| (e.0, e.1)).collect();
        assert_eq!(edge_set, vec![(0, 1), (0, 2)]);
        assert_eq!(tree.degree_sequence, vec![2, 1, 1]);
    }

    #[test]
    fn mst_equal_weights() {
        let n = 5;
        let values = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 0.7 });
        let d = DissimilarityMatrix::new(labels(n), values).unwrap();
        let tree = minimum_spanning_tree(&d).unwrap();
        assert_abs_diff_eq!(tree.total_length, (n - 1) as f64 * 0.7, epsilon = 1e-12);
    }

    #[test]
    fn mst_invariant_under_squaring() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 6;
            let mut values = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let w: f64 = rng.gen_range(0.1..2.0);
                    values[(i, j)] = w;
                    values[(j, i)] = w;
                }
            }
            let d = DissimilarityMatrix::new(labels(n), values.clone()).unwrap();
            let squared =
                DissimilarityMatrix::new(labels(n), values.map(|v| v * v)).unwrap();
            let e1: Vec<(usize, usize)> = minimum_spanning_tree(&d)
                .unwrap()
                .edges
                .iter()
                .map(|e| (e.0, e.1))
                .collect();
            let e2: Vec<(usize, usize)> = minimum_spanning_tree(&squared)
                .unwrap()
                .edges
                .iter()
                .map(|e| (e.0, e.1))
                .collect();
            assert_eq!(e1, e2);
        }
    }

    #[test]
    fn degree_fit_star_and_path() {
        let star = SpanningTree {
            edges: (1..10).map(|j| (0, j, 1.0)).collect(),
            total_length: 9.0,
            degree_sequence: std::iter::once(9)
                .chain(std::iter::repeat(1).take(9))
                .collect(),
        };
        let fit = degree_distribution_fit(&star);
        assert_eq!(fit.frequencies, vec![(1, 9), (9, 1)]);
        assert!(fit.alpha_ls > 0.0);

        let path = SpanningTree {
            edges: (0..9).map(|j| (j, j + 1, 1.0)).collect(),
            total_length: 9.0,
            degree_sequence: {
                let mut d = vec![2; 10];
                d[0] = 1;
                d[9] = 1;
                d
            },
        };
        let fit = degree_distribution_fit(&path);
        assert_eq!(fit.frequencies, vec![(1, 2), (2, 8)]);
    }

    #[test]
    fn sliding_window_too_large() {
        let panel = SignPanel::from_rows(
            labels(2),
            (0..4).map(|t| format!("{t}")).collect(),
            &[vec![1, -1, 1, -1], vec![1, 1, -1, -1]],
        )
        .unwrap();
        assert!(matches!(
            sliding_window_series(&panel, 10, 1, WindowStatistic::EntropyS0),
            Err(MaxentError::WindowTooLarge { width: 10, m: 4 })
        ));
    }

    #[test]
    fn sliding_window_entropy_series() {
        // 2 assets, 12 times, windows of 6 shifted by 3 -> starts 0, 3, 6.
        let panel = SignPanel::from_rows(
            labels(2),
            (0..12).map(|t| format!("{t:02}")).collect(),
            &[
                vec![1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1],
                vec![1, 1, -1, -1, 1, 1, -1, -1, 1, 1, -1, -1],
            ],
        )
        .unwrap();
        let series = sliding_window_series(&panel, 6, 3, WindowStatistic::EntropyS0).unwrap();
        assert_eq!(series.starts, vec![0, 3, 6]);
        assert_eq!(series.start_times, vec!["00", "03", "06"]);
        let mean = series.values.iter().sum::<f64>() / 3.0;
        for (v, c) in series.values.iter().zip(&series.centered) {
            assert_abs_diff_eq!(v - mean, *c, epsilon = 1e-14);
        }
    }

    #[test]
    fn clusters_recover_two_blocks() {
        // Two blocks with small within-block and large between-block
        // dissimilarity.
        let n = 6;
        let values = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else if (i < 3) == (j < 3) {
                0.2
            } else {
                1.8
            }
        });
        let d = DissimilarityMatrix::new(labels(n), values).unwrap();
        let clustering = hierarchical_clusters(&d, 2).unwrap();
        assert_eq!(clustering.merges.len(), n - 1);
        let first = clustering.labels[0];
        assert!(clustering.labels[..3].iter().all(|&l| l == first));
        assert!(clustering.labels[3..].iter().all(|&l| l != first));
        // Permutation keeps the two blocks contiguous.
        let block_ids: Vec<usize> = clustering
            .permutation
            .iter()
            .map(|&leaf| usize::from(leaf >= 3))
            .collect();
        let switches = block_ids.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(switches, 1);
        // Heights are non-decreasing under complete linkage.
        for w in clustering.merges.windows(2) {
            assert!(w[1].2 >= w[0].2 - 1e-12);
        }
    }

    #[test]
    fn clusters_all_equal_deterministic() {
        let n = 4;
        let values = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
        let d = DissimilarityMatrix::new(labels(n), values).unwrap();
        let a = hierarchical_clusters(&d, 2).unwrap();
        let b = hierarchical_clusters(&d, 2).unwrap();
        assert_eq!(a.merges, b.merges);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.permutation, b.permutation);
        // Tie-break by smallest indices: first merge joins leaves 0 and 1.
        assert_eq!((a.merges[0].0, a.merges[0].1), (0, 1));
    }
}
