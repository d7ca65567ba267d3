//! Analytic approximations and references: zeroth-order entropy,
//! mean-field/TAP self-consistent equations, the Plefka functional,
//! cumulant-expansion equilibria, the Edgeworth expectation of tanh, the
//! exact Onsager magnetization, and homogeneous social-dynamics
//! (Brock-Durlauf) trajectories and consensus densities.

use nalgebra::DVector;

use crate::core::CouplingModel;
use crate::error::{MaxentError, Result};

/// Critical coupling ratio K_c = ln(1 + sqrt(2)) / 2 of the square lattice.
pub const ONSAGER_CRITICAL_K: f64 = 0.44068679350977147;

// ---------------------------------------------------------------------------
// Zeroth-order entropy
// ---------------------------------------------------------------------------

/// Independent-unit entropy
/// S_0 = -sum_i [(1+q)/2 ln((1+q)/2) + (1-q)/2 ln((1-q)/2)].
pub fn entropy_zeroth(means: &[f64]) -> f64 {
    means
        .iter()
        .map(|&q| {
            let up = (1.0 + q) / 2.0;
            let down = (1.0 - q) / 2.0;
            let mut s = 0.0;
            if up > 0.0 {
                s -= up * up.ln();
            }
            if down > 0.0 {
                s -= down * down.ln();
            }
            s
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Self-consistent equations
// ---------------------------------------------------------------------------

/// Which self-consistent closure to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfConsistentOrder {
    /// Naive mean field: m = tanh(J m + h).
    Mf1,
    /// TAP: adds the Onsager reaction term -m_i sum_j J^2 (1 - m_j^2).
    Tap2,
    /// Cumulant expansion truncated at the second cumulant with the diagonal
    /// fluctuation closure <s_j s_j>_c ~ 1 - q_j^2.
    CumulantK2,
    /// Adds the third-cumulant diagonal closure 2 (q_j^3 - q_j).
    CumulantK2K3,
}

/// Fixed point of a self-consistent closure (damped iteration, factor 0.5).
#[derive(Debug, Clone)]
pub struct SelfConsistentSolution {
    pub means: DVector<f64>,
    pub order: SelfConsistentOrder,
    pub iterations: usize,
    pub residual: f64,
    /// False when the iteration cap was reached; `means` then holds the last
    /// iterate.
    pub converged: bool,
}

/// Damped fixed-point iteration of the chosen closure. The model's beta
/// rescales couplings and fields (K = beta J).
pub fn solve_self_consistent(
    model: &CouplingModel,
    order: SelfConsistentOrder,
    init: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<SelfConsistentSolution> {
    let n = model.n_units();
    if init.len() != n {
        return Err(MaxentError::DimensionMismatch(
            "initial means do not match system size".into(),
        ));
    }
    if init.iter().any(|&m| m.abs() >= 1.0) {
        return Err(MaxentError::InvalidInput(
            "initial means must lie in (-1, 1)".into(),
        ));
    }
    let beta = model.beta();
    let j = model.influences();
    let h = model.fields();
    let mut m = DVector::from_column_slice(init);
    let damping = 0.5;
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iterations {
        let mut update = DVector::zeros(n);
        for i in 0..n {
            let mut mu = beta * h[i];
            for k in 0..n {
                mu += beta * j[(i, k)] * m[k];
            }
            let value = match order {
                SelfConsistentOrder::Mf1 => mu.tanh(),
                SelfConsistentOrder::Tap2 => {
                    let mut reaction = 0.0;
                    for k in 0..n {
                        let jb = beta * j[(i, k)];
                        reaction += jb * jb * (1.0 - m[k] * m[k]);
                    }
                    (mu - m[i] * reaction).tanh()
                }
                SelfConsistentOrder::CumulantK2 | SelfConsistentOrder::CumulantK2K3 => {
                    let mut kappa2 = 0.0;
                    let mut kappa3 = 0.0;
                    for k in 0..n {
                        let jb = beta * j[(i, k)];
                        kappa2 += jb * jb * (1.0 - m[k] * m[k]);
                        kappa3 += jb * jb * jb * 2.0 * (m[k] * m[k] * m[k] - m[k]);
                    }
                    let th = mu.tanh();
                    let th2 = -2.0 * th * (1.0 - th * th);
                    let mut v = th + 0.5 * th2 * kappa2;
                    if order == SelfConsistentOrder::CumulantK2K3 {
                        let th3 = -2.0 * (1.0 - th * th) * (1.0 - 3.0 * th * th);
                        v += th3 * kappa3 / 6.0;
                    }
                    v.clamp(-1.0, 1.0)
                }
            };
            update[i] = value;
        }
        residual = (&update - &m).amax();
        m = (1.0 - damping) * m + damping * update;
        if residual < tolerance {
            return Ok(SelfConsistentSolution {
                means: m,
                order,
                iterations: iteration,
                residual,
                converged: true,
            });
        }
    }
    Ok(SelfConsistentSolution {
        means: m,
        order,
        iterations: max_iterations,
        residual,
        converged: false,
    })
}

// ---------------------------------------------------------------------------
// Plefka functional
// ---------------------------------------------------------------------------

/// Plefka series functional G(q) at the given means, truncated at `order`
/// in {2, 3}: independent entropy term, first order -1/2 sum J q q, second
/// order -1/4 sum J^2 (1-q^2)(1-q^2), and for order 3 the cubic terms /3!.
/// The model's beta rescales J.
pub fn plefka_functional(means: &[f64], model: &CouplingModel, order: u8) -> Result<f64> {
    if order != 2 && order != 3 {
        return Err(MaxentError::InvalidInput(format!(
            "Plefka order must be 2 or 3, got {order}"
        )));
    }
    let n = model.n_units();
    if means.len() != n {
        return Err(MaxentError::DimensionMismatch(
            "means do not match system size".into(),
        ));
    }
    if means.iter().any(|&q| q.abs() >= 1.0) {
        return Err(MaxentError::InvalidInput(
            "means must lie strictly inside (-1, 1)".into(),
        ));
    }
    let beta = model.beta();
    let j = model.influences();
    let mut g = 0.0;
    for &q in means {
        let up = (1.0 + q) / 2.0;
        let down = (1.0 - q) / 2.0;
        g += up * up.ln() + down * down.ln();
    }
    let fluct: Vec<f64> = means.iter().map(|&q| 1.0 - q * q).collect();
    for i in 0..n {
        for k in 0..n {
            let jb = beta * j[(i, k)];
            g -= 0.5 * jb * means[i] * means[k];
            g -= 0.25 * jb * jb * fluct[i] * fluct[k];
        }
    }
    if order == 3 {
        let mut third = 0.0;
        for i in 0..n {
            for k in 0..n {
                let jb = beta * j[(i, k)];
                third -= 2.0 * jb * jb * jb * means[i] * means[k] * fluct[i] * fluct[k];
            }
        }
        for i in 0..n {
            for k in 0..n {
                if j[(i, k)] == 0.0 {
                    continue;
                }
                for l in 0..n {
                    let prod = beta * j[(i, k)] * beta * j[(k, l)] * beta * j[(l, i)];
                    if prod != 0.0 {
                        third -= prod * fluct[i] * fluct[k] * fluct[l];
                    }
                }
            }
        }
        g += third / 6.0;
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Edgeworth expectation of tanh
// ---------------------------------------------------------------------------

/// Result of [`edgeworth_expectation_tanh`].
#[derive(Debug, Clone, Copy)]
pub struct EdgeworthResult {
    pub value: f64,
    /// Fraction of |density| mass where the corrected density is negative.
    pub negative_mass_fraction: f64,
    /// Set when the corrections drive the density negative over more than 1%
    /// of the mass (expansion outside its validity).
    pub negative_density_warning: bool,
}

/// <tanh(x)> under the Edgeworth-corrected normal density with the given
/// mean and cumulants (kappa2, kappa3, kappa4); quadrature absolute error
/// below 1e-8.
pub fn edgeworth_expectation_tanh(mean: f64, cumulants: [f64; 3]) -> Result<EdgeworthResult> {
    let [k2, k3, k4] = cumulants;
    if !(k2 >= 0.0) {
        return Err(MaxentError::InvalidInput(format!(
            "kappa2 must be non-negative, got {k2}"
        )));
    }
    if k2 < 1e-12 {
        // Delta limit.
        return Ok(EdgeworthResult {
            value: mean.tanh(),
            negative_mass_fraction: 0.0,
            negative_density_warning: false,
        });
    }
    let sigma = k2.sqrt();
    let l3 = k3 / (sigma * sigma * sigma);
    let l4 = k4 / (k2 * k2);
    let density = move |x: f64| -> f64 {
        let z = (x - mean) / sigma;
        let gauss = (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let he3 = z * z * z - 3.0 * z;
        let he4 = z * z * z * z - 6.0 * z * z + 3.0;
        let he6 = z.powi(6) - 15.0 * z.powi(4) + 45.0 * z * z - 15.0;
        gauss * (1.0 + l3 / 6.0 * he3 + l4 / 24.0 * he4 + l3 * l3 / 72.0 * he6)
    };
    let lo = mean - 12.0 * sigma;
    let hi = mean + 12.0 * sigma;
    let value = adaptive_simpson(&|x| x.tanh() * density(x), lo, hi, 1e-9);
    // Negativity diagnostic on a fixed fine grid.
    let grid = 4096;
    let mut neg = 0.0;
    let mut total = 0.0;
    for g in 0..=grid {
        let x = lo + (hi - lo) * g as f64 / grid as f64;
        let p = density(x);
        total += p.abs();
        if p < 0.0 {
            neg += -p;
        }
    }
    let fraction = if total > 0.0 { neg / total } else { 0.0 };
    Ok(EdgeworthResult {
        value,
        negative_mass_fraction: fraction,
        negative_density_warning: fraction > 0.01,
    })
}

/// Recursive adaptive Simpson quadrature with absolute tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tolerance: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth >= 50 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth + 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth + 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tolerance, 0)
}

// ---------------------------------------------------------------------------
// Onsager magnetization
// ---------------------------------------------------------------------------

/// Exact square-lattice magnetization at coupling ratio K = J/T:
/// zero below K_c = ln(1+sqrt(2))/2, otherwise [1 - sinh(2K)^{-4}]^{1/8}.
pub fn onsager_magnetization(coupling_over_t: f64) -> Result<f64> {
    if coupling_over_t < 0.0 {
        return Err(MaxentError::InvalidInput(format!(
            "coupling ratio must be non-negative, got {coupling_over_t}"
        )));
    }
    if coupling_over_t <= ONSAGER_CRITICAL_K {
        return Ok(0.0);
    }
    let s = (2.0 * coupling_over_t).sinh();
    Ok((1.0 - s.powi(-4)).max(0.0).powf(0.125))
}

// ---------------------------------------------------------------------------
// Brock-Durlauf homogeneous dynamics
// ---------------------------------------------------------------------------

/// Homogeneous social-interaction model: scalar coupling J, idiosyncratic
/// preference h, stochasticity beta, population size N.
#[derive(Debug, Clone, Copy)]
pub struct BdModel {
    pub j: f64,
    pub h: f64,
    pub beta: f64,
    pub n: usize,
}

impl BdModel {
    pub fn new(j: f64, h: f64, beta: f64, n: usize) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(MaxentError::InvalidInput("beta must be positive".into()));
        }
        if n == 0 {
            return Err(MaxentError::InvalidInput("population must be >= 1".into()));
        }
        Ok(BdModel { j, h, beta, n })
    }
}

/// Discrete-time mean consensus dynamics m(t+1) = tanh(beta J m + beta h);
/// trajectory of length steps + 1 including m0.
pub fn bd_consensus_dynamics(model: &BdModel, m0: f64, steps: usize) -> Result<Vec<f64>> {
    if m0.abs() > 1.0 {
        return Err(MaxentError::InvalidInput(format!(
            "|m0| must be <= 1, got {m0}"
        )));
    }
    let mut trajectory = Vec::with_capacity(steps + 1);
    let mut m = m0;
    trajectory.push(m);
    for _ in 0..steps {
        m = (model.beta * model.j * m + model.beta * model.h).tanh();
        trajectory.push(m);
    }
    Ok(trajectory)
}

/// Large-deviation consensus density p(m) ~ exp(-beta J N phi(m)) with
/// phi(m) = m^2/2 - (beta J)^{-1} ln(2 cosh(beta (J m + h))), normalized on
/// the grid by the trapezoid rule.
pub fn consensus_density(model: &BdModel, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.len() < 2 {
        return Err(MaxentError::InvalidInput(
            "density grid needs at least two points".into(),
        ));
    }
    if grid.iter().any(|&m| m.abs() > 1.0) {
        return Err(MaxentError::InvalidInput(
            "density grid must lie within [-1, 1]".into(),
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MaxentError::InvalidInput(
            "density grid must be strictly increasing".into(),
        ));
    }
    let bj = model.beta * model.j;
    let phi = |m: f64| -> f64 {
        0.5 * m * m - (2.0 * (model.beta * (model.j * m + model.h)).cosh()).ln() / bj
    };
    let log_raw: Vec<f64> = grid.iter().map(|&m| -bj * model.n as f64 * phi(m)).collect();
    let max = log_raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = log_raw.iter().map(|&v| (v - max).exp()).collect();
    let mut integral = 0.0;
    for w in 0..grid.len() - 1 {
        integral += 0.5 * (raw[w] + raw[w + 1]) * (grid[w + 1] - grid[w]);
    }
    if integral <= 0.0 {
        return Err(MaxentError::NumericalFailure(
            "consensus density integrates to zero on the grid".into(),
        ));
    }
    Ok(raw.into_iter().map(|v| v / integral).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn homogeneous_complete(n: usize, total_coupling: f64) -> CouplingModel {
        let mut j = DMatrix::from_element(n, n, total_coupling / n as f64);
        for i in 0..n {
            j[(i, i)] = 0.0;
        }
        CouplingModel::new(j, DVector::zeros(n)).unwrap()
    }

    #[test]
    fn zeroth_entropy_limits() {
        assert_abs_diff_eq!(entropy_zeroth(&[0.0, 0.0]), 2.0 * 2.0f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(entropy_zeroth(&[1.0, -1.0]), 0.0);
        // q = 0.5 -> 0.562335144619 (frozen oracle: direct evaluation).
        assert_abs_diff_eq!(entropy_zeroth(&[0.5]), 0.562335144619, epsilon = 1e-10);
    }

    #[test]
    fn mf_free_units_single_iteration() {
        let model = CouplingModel::independent(DVector::from_vec(vec![0.4, -0.9]));
        let sol = solve_self_consistent(&model, SelfConsistentOrder::Mf1, &[0.0, 0.0], 1e-12, 200)
            .unwrap();
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.means[0], 0.4f64.tanh(), epsilon = 1e-10);
        assert_abs_diff_eq!(sol.means[1], (-0.9f64).tanh(), epsilon = 1e-10);
    }

    #[test]
    fn mf_subcritical_complete_graph_is_paramagnetic() {
        let model = homogeneous_complete(20, 0.5);
        let sol = solve_self_consistent(&model, SelfConsistentOrder::Mf1, &[0.3; 20], 1e-10, 2000)
            .unwrap();
        assert!(sol.converged);
        assert!(sol.means.amax() < 1e-6);
    }

    #[test]
    fn mf_supercritical_complete_graph_matches_scalar_fixed_point() {
        // m = tanh(2m) -> m = 0.957504024077 (frozen scalar root oracle).
        let n = 50;
        let model = homogeneous_complete(n, 2.0 * n as f64 / (n as f64 - 1.0));
        let sol = solve_self_consistent(&model, SelfConsistentOrder::Mf1, &[0.9; 50], 1e-12, 5000)
            .unwrap();
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.means[0], 0.957504024077, epsilon = 1e-6);
    }

    #[test]
    fn tap_equals_mf_when_squared_terms_vanish() {
        // With |J| -> 0 the reaction term is O(J^2): compare at tiny coupling.
        let model = homogeneous_complete(6, 1e-6);
        let mf = solve_self_consistent(&model, SelfConsistentOrder::Mf1, &[0.1; 6], 1e-13, 500)
            .unwrap();
        let tap = solve_self_consistent(&model, SelfConsistentOrder::Tap2, &[0.1; 6], 1e-13, 500)
            .unwrap();
        assert_abs_diff_eq!(mf.means[0], tap.means[0], epsilon = 1e-10);
    }

    #[test]
    fn plefka_reference_points() {
        let model = homogeneous_complete(4, 0.8);
        // J=0, q=0 -> G = -N ln 2.
        let free = CouplingModel::independent(DVector::zeros(4));
        assert_abs_diff_eq!(
            plefka_functional(&[0.0; 4], &free, 2).unwrap(),
            -4.0 * 2.0f64.ln(),
            epsilon = 1e-12
        );
        // q=0: second-order term equals -1/4 sum_ij J_ij^2.
        let j = model.influences();
        let sum_sq: f64 = (0..4)
            .flat_map(|i| (0..4).map(move |k| (i, k)))
            .map(|(i, k)| j[(i, k)] * j[(i, k)])
            .sum();
        assert_abs_diff_eq!(
            plefka_functional(&[0.0; 4], &model, 2).unwrap(),
            -4.0 * 2.0f64.ln() - 0.25 * sum_sq,
            epsilon = 1e-12
        );
    }

    #[test]
    fn plefka_gradient_is_field_at_tap_fixed_point() {
        // Solve TAP with a nonzero field, then check dG/dq_i = h_i by central
        // finite differences.
        let n = 4;
        let mut jm = DMatrix::zeros(n, n);
        let pairs = [(0usize, 1usize, 0.3), (1, 2, -0.2), (2, 3, 0.25), (0, 3, 0.15)];
        for &(a, b, v) in &pairs {
            jm[(a, b)] = v;
            jm[(b, a)] = v;
        }
        let h = DVector::from_vec(vec![0.1, -0.05, 0.2, 0.0]);
        let model = CouplingModel::new(jm, h.clone()).unwrap();
        let sol = solve_self_consistent(&model, SelfConsistentOrder::Tap2, &[0.0; 4], 1e-13, 5000)
            .unwrap();
        assert!(sol.converged);
        let q: Vec<f64> = sol.means.iter().cloned().collect();
        let eps = 1e-6;
        for i in 0..n {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[i] += eps;
            qm[i] -= eps;
            let gp = plefka_functional(&qp, &model, 2).unwrap();
            let gm = plefka_functional(&qm, &model, 2).unwrap();
            let grad = (gp - gm) / (2.0 * eps);
            assert_abs_diff_eq!(grad, h[i], epsilon = 1e-5);
        }
    }

    #[test]
    fn edgeworth_gaussian_odd_symmetry() {
        let r = edgeworth_expectation_tanh(0.0, [0.7, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-8);
        assert!(!r.negative_density_warning);
    }

    #[test]
    fn edgeworth_delta_limit() {
        let r = edgeworth_expectation_tanh(0.8, [0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(r.value, 0.8f64.tanh(), epsilon = 1e-12);
    }

    #[test]
    fn edgeworth_matches_quadrature_oracle() {
        // Gaussian-smoothed tanh, mean 1, var 0.5 -> 0.632120558829 and the
        // corrected pin kappa = (0.4, 0.1, 0.05), mean 0.3 -> 0.215098773653
        // (frozen quadrature oracles).
        let plain = edgeworth_expectation_tanh(1.0, [0.5, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(plain.value, 0.632120558829, epsilon = 1e-8);
        let pinned = edgeworth_expectation_tanh(0.3, [0.4, 0.1, 0.05]).unwrap();
        assert_abs_diff_eq!(pinned.value, 0.215098773653, epsilon = 1e-8);
    }

    #[test]
    fn edgeworth_flags_invalid_expansion() {
        let r = edgeworth_expectation_tanh(0.0, [0.2, 2.0, 0.0]).unwrap();
        assert!(r.negative_density_warning);
    }

    #[test]
    fn onsager_reference_points() {
        assert_abs_diff_eq!(onsager_magnetization(0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(onsager_magnetization(ONSAGER_CRITICAL_K).unwrap(), 0.0);
        // K = 0.5 -> 0.911319377877 (frozen closed-form oracle).
        assert_abs_diff_eq!(
            onsager_magnetization(0.5).unwrap(),
            0.911319377877,
            epsilon = 1e-10
        );
    }

    #[test]
    fn bd_trajectory_limits() {
        let sub = BdModel::new(0.5, 0.0, 1.0, 100).unwrap();
        let traj = bd_consensus_dynamics(&sub, 0.8, 200).unwrap();
        assert!(traj.last().unwrap().abs() < 1e-10);
        assert!(traj.windows(2).all(|w| w[1].abs() <= w[0].abs() + 1e-15));

        let sup = BdModel::new(2.0, 0.0, 1.0, 100).unwrap();
        let traj = bd_consensus_dynamics(&sup, 0.1, 500).unwrap();
        assert_abs_diff_eq!(*traj.last().unwrap(), 0.957504024077, epsilon = 1e-9);
    }

    #[test]
    fn consensus_density_normalization_and_symmetry() {
        let model = BdModel::new(1.5, 0.0, 1.0, 30).unwrap();
        let grid: Vec<f64> = (0..=400).map(|k| -1.0 + 2.0 * k as f64 / 400.0).collect();
        let p = consensus_density(&model, &grid).unwrap();
        let mut integral = 0.0;
        for w in 0..grid.len() - 1 {
            integral += 0.5 * (p[w] + p[w + 1]) * (grid[w + 1] - grid[w]);
        }
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-12);
        for k in 0..p.len() {
            assert_abs_diff_eq!(p[k], p[p.len() - 1 - k], epsilon = 1e-9);
        }
    }

    #[test]
    fn consensus_density_mode_follows_field_sign() {
        let model = BdModel::new(1.5, 0.1, 1.0, 30).unwrap();
        let grid: Vec<f64> = (0..=400).map(|k| -1.0 + 2.0 * k as f64 / 400.0).collect();
        let p = consensus_density(&model, &grid).unwrap();
        let positive_mass: f64 = grid
            .iter()
            .zip(&p)
            .filter(|(m, _)| **m > 0.0)
            .map(|(_, v)| v)
            .sum();
        let negative_mass: f64 = grid
            .iter()
            .zip(&p)
            .filter(|(m, _)| **m < 0.0)
            .map(|(_, v)| v)
            .sum();
        assert!(positive_mass > negative_mass);
    }
}
