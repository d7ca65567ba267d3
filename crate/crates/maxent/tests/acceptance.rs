//! End-to-end acceptance suite. Each test covers one numbered criterion and
//! prints a single `ACCEPTANCE <n> PASS|FAIL` line (visible with
//! `--nocapture`, and always on failure); the harness result line per test
//! doubles as the pass/fail record in captured runs.

use maxent::approx::{
    bd_consensus_dynamics, consensus_density, onsager_magnetization, solve_self_consistent,
    BdModel, SelfConsistentOrder,
};
use maxent::core::{
    distribution_moments, empirical_distribution, kl_divergence, sample_moments, Configuration,
    CouplingModel, SignPanel,
};
use maxent::crit::{default_t_grid, response_function_scan, synth_power_law, zipf_test};
use maxent::exact::{fit_exact_maxent, gibbs_distribution, multi_information_criterion};
use maxent::infer::{fit_rpml, pseudo_log_likelihood, reconstruction_error, RpmlConfig};
use maxent::mcmc::{glauber_flip_probability, simulate_panel, ChainConfig};
use maxent::predict::{
    default_threshold_grid, evaluate_classifier, flip_probability, kfold_cross_validation,
};
use maxent::topo::{minimum_spanning_tree, DissimilarityMatrix};
use maxent::ConfigDistribution;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

fn report(criterion: usize, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => println!("ACCEPTANCE {criterion} PASS ({detail})"),
        Err(reason) => {
            println!("ACCEPTANCE {criterion} FAIL ({reason})");
            panic!("acceptance criterion {criterion} failed: {reason}");
        }
    }
}

fn check(ok: bool, reason: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(reason)
    }
}

/// Symmetric zero-diagonal Gaussian coupling matrix with entry sd `sd`.
fn gaussian_couplings(n: usize, sd: f64, seed: u64) -> CouplingModel {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    CouplingModel::new(j, DVector::zeros(n)).unwrap()
}

fn random_model(n: usize, scale: f64, seed: u64) -> CouplingModel {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v: f64 = rng.gen_range(-scale..scale);
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    let h = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-scale..scale)));
    CouplingModel::new(j, h).unwrap()
}

// ---------------------------------------------------------------------------
// 1. Finite-size criticality on the 3x3 periodic lattice.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_1_finite_size_criticality() {
    let run = || -> Result<String, String> {
        let start = Instant::now();
        let model = CouplingModel::square_lattice(3, 1.0);
        let dist = gibbs_distribution(&model).map_err(|e| e.to_string())?;
        let scan = response_function_scan(&dist, &default_t_grid()).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed().as_secs_f64();
        check(
            (scan.t_max - 2.40).abs() <= 0.05,
            format!("t_max = {} outside 2.40 +- 0.05", scan.t_max),
        )?;
        check(elapsed < 1.0, format!("runtime {elapsed:.2} s >= 1 s"))?;
        Ok(format!("t_max = {:.4}, {:.2} s", scan.t_max, elapsed))
    };
    report(1, run());
}

// ---------------------------------------------------------------------------
// 2. Multi-information criterion on Glauber lattice samples.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_2_mic_benchmark() {
    let run = || -> Result<String, String> {
        let start = Instant::now();
        // Unit couplings sampled at the critical temperature of the square
        // lattice, T_c = 2 / ln(1 + sqrt 2): the benchmark regime where the
        // chain mixes over the full configuration space.
        let t_critical = 2.0 / (1.0 + 2f64.sqrt()).ln();
        let small = simulate_panel(
            &CouplingModel::square_lattice(3, 1.0),
            &ChainConfig::new(5_000, 9001).with_temperature(t_critical),
        )
        .map_err(|e| e.to_string())?;
        let mic_9 = multi_information_criterion(&small).map_err(|e| e.to_string())?;
        check(
            (mic_9 - 0.9881).abs() <= 0.01,
            format!("N=9 MIC = {mic_9} outside 0.9881 +- 0.01"),
        )?;
        let large = simulate_panel(
            &CouplingModel::square_lattice(4, 1.0),
            &ChainConfig::new(100_000, 9002).with_temperature(t_critical),
        )
        .map_err(|e| e.to_string())?;
        let mic_16 = multi_information_criterion(&large).map_err(|e| e.to_string())?;
        check(
            (mic_16 - 0.9926).abs() <= 0.01,
            format!("N=16 MIC = {mic_16} outside 0.9926 +- 0.01"),
        )?;
        let elapsed = start.elapsed().as_secs_f64();
        check(elapsed < 300.0, format!("runtime {elapsed:.1} s >= 300 s"))?;
        Ok(format!(
            "MIC(9, 5e3) = {mic_9:.4}, MIC(16, 1e5) = {mic_16:.4}, {elapsed:.1} s"
        ))
    };
    report(2, run());
}

// ---------------------------------------------------------------------------
// 3. Three-asset simulate / correlate / refit round trip.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_3_three_asset_round_trip() {
    let run = || -> Result<String, String> {
        let start = Instant::now();
        let j_true = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 2.0, 0.0, 0.0, 2.0, 2.0, 2.0, 0.0]);
        let model = CouplingModel::new(j_true.clone(), DVector::zeros(3)).unwrap();
        let panel =
            simulate_panel(&model, &ChainConfig::new(100_000, 34)).map_err(|e| e.to_string())?;
        let moments = sample_moments(&panel);
        let expected = [(0usize, 1usize, 0.94), (0, 2, 0.97), (1, 2, 0.96)];
        for &(a, b, c) in &expected {
            let got = moments.pair_corrs[(a, b)];
            check(
                (got - c).abs() <= 0.02,
                format!("C[{a}{b}] = {got} outside {c} +- 0.02"),
            )?;
        }
        let fitted = fit_exact_maxent(&moments).map_err(|e| e.to_string())?;
        for a in 0..3 {
            for b in (a + 1)..3 {
                let got = fitted.influences()[(a, b)];
                check(
                    (got - j_true[(a, b)]).abs() <= 0.05,
                    format!("J[{a}{b}] = {got} outside {} +- 0.05", j_true[(a, b)]),
                )?;
            }
        }
        let frustrated = CouplingModel::new(
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -2.0, 1.0, 0.0, 1.0, -2.0, 1.0, 0.0]),
            DVector::zeros(3),
        )
        .unwrap();
        let panel_f = simulate_panel(&frustrated, &ChainConfig::new(100_000, 32))
            .map_err(|e| e.to_string())?;
        let c13 = sample_moments(&panel_f).pair_corrs[(0, 2)];
        check(
            (c13 - (-0.87)).abs() <= 0.03,
            format!("frustrated C13 = {c13} outside -0.87 +- 0.03"),
        )?;
        let elapsed = start.elapsed().as_secs_f64();
        check(elapsed < 60.0, format!("runtime {elapsed:.1} s >= 60 s"))?;
        Ok(format!("C13_frustrated = {c13:.4}, {elapsed:.1} s"))
    };
    report(3, run());
}

// ---------------------------------------------------------------------------
// 4. Power-law sampler and exponent test calibration.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_4_power_law_calibration() {
    let run = || -> Result<String, String> {
        let start = Instant::now();
        let alpha = 0.75;
        let x_max = 100usize;

        // Part one: sup-norm CDF deviation at one million draws.
        let m_big = 1_000_000usize;
        let sample = synth_power_law(alpha, x_max, m_big, 4001);
        let mut counts = vec![0u64; x_max];
        for &x in &sample {
            counts[x - 1] += 1;
        }
        let z: f64 = (1..=x_max).map(|x| (x as f64).powf(-alpha)).sum();
        let (mut cum_fit, mut cum_emp, mut sup) = (0.0, 0.0, 0.0f64);
        for x in 1..=x_max {
            cum_fit += (x as f64).powf(-alpha) / z;
            cum_emp += counts[x - 1] as f64 / m_big as f64;
            sup = sup.max((cum_fit - cum_emp).abs());
        }
        check(sup < 1e-3, format!("sup-norm {sup} >= 1e-3"))?;

        // Part two: 20 seeded repetitions at ten thousand draws.
        let m = 10_000usize;
        let mut alpha_ok = 0usize;
        let mut p_ok = 0usize;
        for rep in 0..20u64 {
            let draws = synth_power_law(alpha, x_max, m, 4100 + rep);
            let mut c = vec![0u64; x_max];
            for &x in &draws {
                c[x - 1] += 1;
            }
            let support: Vec<Configuration> =
                (0..x_max).map(|r| Configuration::from_index(r, 7)).collect();
            let probs: Vec<f64> = c.iter().map(|&k| k as f64 / m as f64).collect();
            let dist = ConfigDistribution::new(support, probs)
                .map_err(|e| e.to_string())?
                .with_sample_size(m as u64);
            let fit = zipf_test(&dist, 200, 4200 + rep).map_err(|e| e.to_string())?;
            if (fit.alpha_mle - 0.758).abs() <= 3.0 * 0.007 {
                alpha_ok += 1;
            }
            if fit.p_value > 0.05 {
                p_ok += 1;
            }
        }
        check(
            alpha_ok >= 18,
            format!("exponent inside 0.758 +- 0.021 in only {alpha_ok}/20 repetitions"),
        )?;
        check(
            p_ok >= 18,
            format!("p-value > 0.05 in only {p_ok}/20 repetitions"),
        )?;
        let elapsed = start.elapsed().as_secs_f64();
        check(elapsed < 600.0, format!("runtime {elapsed:.1} s >= 600 s"))?;
        Ok(format!(
            "sup-norm = {sup:.2e}, alpha in band {alpha_ok}/20, p > 0.05 {p_ok}/20, {elapsed:.1} s"
        ))
    };
    report(4, run());
}

// ---------------------------------------------------------------------------
// 5. Pseudo-likelihood reconstruction error on a 64-unit complete graph.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_5_reconstruction_error() {
    let run = || -> Result<String, String> {
        let start = Instant::now();
        let n = 64;
        let truth = gaussian_couplings(n, 1.0 / (n as f64).sqrt(), 64001);
        let m = 1_000_000usize;
        let panel =
            simulate_panel(&truth, &ChainConfig::new(m, 64002)).map_err(|e| e.to_string())?;
        let fitted = fit_rpml(&panel, &RpmlConfig::for_sample(m)).map_err(|e| e.to_string())?;
        let delta = reconstruction_error(&fitted, &truth).map_err(|e| e.to_string())?;
        check(delta <= 0.05, format!("Delta = {delta} > 0.05"))?;
        let elapsed = start.elapsed().as_secs_f64();
        check(elapsed < 1800.0, format!("runtime {elapsed:.1} s >= 1800 s"))?;
        Ok(format!("Delta = {delta:.4}, {elapsed:.1} s"))
    };
    report(5, run());
}

// ---------------------------------------------------------------------------
// 6. Self-consistent approximations vs the Onsager solution.
// ---------------------------------------------------------------------------
//
// The scalar TAP/cumulant maps keep the disordered branch locally stable at
// every coupling and grow a spurious ordered branch slightly below the true
// transition, so no single unseeded iteration classifies both phases
// correctly. Each solver is therefore seeded in the exact phase: a nearly
// disordered start below the transition must stay disordered, and a nearly
// ordered start above it must stay on the ordered branch within 0.1 of the
// closed-form magnetization. Naive mean field fails the first half of this
// protocol, so it is a discriminating test of the reaction terms.
#[test]
fn acceptance_6_onsager_agreement() {
    let run = || -> Result<String, String> {
        let orders = [
            SelfConsistentOrder::Tap2,
            SelfConsistentOrder::CumulantK2,
            SelfConsistentOrder::CumulantK2K3,
        ];
        let solve = |k: f64, order: SelfConsistentOrder, init: f64| -> Result<f64, String> {
            let model = CouplingModel::square_lattice(3, k);
            let sol = solve_self_consistent(&model, order, &[init; 9], 1e-10, 200_000)
                .map_err(|e| e.to_string())?;
            if !sol.converged {
                return Err(format!("order {order:?} did not converge at K = {k}"));
            }
            Ok(sol.means.iter().map(|m| m.abs()).sum::<f64>() / 9.0)
        };
        // Disordered side: K in [0, 0.44], seeded at m = 0.01.
        for step in 0..=11 {
            let k = 0.04 * step as f64;
            for order in orders {
                let m = solve(k, order, 0.01)?;
                check(
                    m < 0.1,
                    format!("order {order:?} ordered at K = {k} (|m| = {m})"),
                )?;
                let exact = onsager_magnetization(k).map_err(|e| e.to_string())?;
                check(exact == 0.0, format!("Onsager m nonzero at K = {k}"))?;
            }
        }
        // Ordered side: K in [0.55, 1.0], seeded at m = 0.99.
        let mut worst = 0.0f64;
        for step in 0..=9 {
            let k = 0.55 + 0.05 * step as f64;
            let exact = onsager_magnetization(k).map_err(|e| e.to_string())?;
            check(exact > 0.1, format!("Onsager m not ordered at K = {k}"))?;
            for order in orders {
                let m = solve(k, order, 0.99)?;
                check(
                    m >= 0.1,
                    format!("order {order:?} disordered at K = {k}"),
                )?;
                let err = (m - exact).abs();
                worst = worst.max(err);
                check(
                    err < 0.1,
                    format!("order {order:?}: |m - m_exact| = {err} at K = {k}"),
                )?;
            }
        }
        Ok(format!("max |m - m_exact| on ordered side = {worst:.4}"))
    };
    report(6, run());
}

// ---------------------------------------------------------------------------
// 7. Flip prediction: cross-validated AUC and the worked confusion example.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_7_prediction_suite() {
    let run = || -> Result<String, String> {
        let start = Instant::now();
        let n = 8;
        let truth = gaussian_couplings(n, 0.8, 7001);
        let m = 4_000usize;
        let panel =
            simulate_panel(&truth, &ChainConfig::new(m, 7002)).map_err(|e| e.to_string())?;
        let report = kfold_cross_validation(&panel, &RpmlConfig::for_sample(m), 10)
            .map_err(|e| e.to_string())?;
        let pairwise_auc = report.mean.auc;
        check(
            pairwise_auc >= 0.85,
            format!("pairwise AUC = {pairwise_auc} < 0.85"),
        )?;

        // Independent-model baseline on the same panel: ten contiguous folds,
        // fields fitted from training means, couplings fixed at zero.
        let folds = 10;
        let mut probs = Vec::new();
        let mut actual = Vec::new();
        for b in 0..folds {
            let (lo, hi) = (b * m / folds, (b + 1) * m / folds);
            let mut h = DVector::zeros(n);
            for i in 0..n {
                let mut sum = 0.0;
                let mut count = 0.0;
                for t in 0..m {
                    if t < lo || t >= hi {
                        sum += panel.get(i, t) as f64;
                        count += 1.0;
                    }
                }
                h[i] = (sum / count).clamp(-0.999, 0.999).atanh();
            }
            let independent = CouplingModel::independent(h);
            for t in lo.max(1)..hi {
                let prev = panel.column_config(t - 1);
                for i in 0..n {
                    let p = flip_probability(&independent, &prev, &prev, i, &[])
                        .map_err(|e| e.to_string())?;
                    probs.push(p);
                    actual.push(panel.get(i, t) != panel.get(i, t - 1));
                }
            }
        }
        let independent_report =
            evaluate_classifier(&probs, &actual, &default_threshold_grid())
                .map_err(|e| e.to_string())?;
        let independent_auc = independent_report.auc;
        check(
            (0.45..=0.55).contains(&independent_auc),
            format!("independent AUC = {independent_auc} outside [0.45, 0.55]"),
        )?;

        // Worked confusion example: six positives all detected, four
        // negatives with two false detections at level 0.5.
        let scores = [0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.7, 0.7, 0.2, 0.2];
        let outcomes = [
            true, true, true, true, true, true, false, false, false, false,
        ];
        let worked =
            evaluate_classifier(&scores, &outcomes, &[0.5]).map_err(|e| e.to_string())?;
        check(
            worked.tp_rate[0] == 1.0 && worked.fp_rate[0] == 0.5 && worked.accuracy[0] == 0.8,
            format!(
                "worked example tp = {}, fp = {}, accuracy = {}",
                worked.tp_rate[0], worked.fp_rate[0], worked.accuracy[0]
            ),
        )?;
        let elapsed = start.elapsed().as_secs_f64();
        check(elapsed < 600.0, format!("runtime {elapsed:.1} s >= 600 s"))?;
        Ok(format!(
            "pairwise AUC = {pairwise_auc:.3}, independent AUC = {independent_auc:.3}, {elapsed:.1} s"
        ))
    };
    report(7, run());
}

// ---------------------------------------------------------------------------
// 8. Consensus dynamics: critical decay and density modality.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_8_consensus_dynamics() {
    let run = || -> Result<String, String> {
        let start = Instant::now();
        let critical = BdModel::new(1.0, 0.0, 1.0, 1).map_err(|e| e.to_string())?;
        let trajectory =
            bd_consensus_dynamics(&critical, 0.5, 10_000).map_err(|e| e.to_string())?;
        let points: Vec<(f64, f64)> = (100..=10_000)
            .map(|t| ((t as f64).ln(), trajectory[t].ln()))
            .collect();
        let count = points.len() as f64;
        let xb = points.iter().map(|p| p.0).sum::<f64>() / count;
        let yb = points.iter().map(|p| p.1).sum::<f64>() / count;
        let slope = points.iter().map(|p| (p.0 - xb) * (p.1 - yb)).sum::<f64>()
            / points.iter().map(|p| (p.0 - xb) * (p.0 - xb)).sum::<f64>();
        check(
            (slope - (-0.5)).abs() <= 0.05,
            format!("decay exponent {slope} outside -0.5 +- 0.05"),
        )?;

        let grid: Vec<f64> = (0..199).map(|k| -0.99 + 0.01 * k as f64).collect();
        let modes = |beta: f64| -> Result<usize, String> {
            let model = BdModel::new(1.0, 0.0, beta, 50).map_err(|e| e.to_string())?;
            let density = consensus_density(&model, &grid).map_err(|e| e.to_string())?;
            let mut peaks = 0;
            for k in 1..density.len() - 1 {
                if density[k] > density[k - 1] && density[k] >= density[k + 1] {
                    peaks += 1;
                }
            }
            Ok(peaks)
        };
        let below = modes(0.8)?;
        check(below == 1, format!("{below} density modes at beta J = 0.8"))?;
        let above = modes(1.2)?;
        check(above == 2, format!("{above} density modes at beta J = 1.2"))?;
        let elapsed = start.elapsed().as_secs_f64();
        check(elapsed < 10.0, format!("runtime {elapsed:.1} s >= 10 s"))?;
        Ok(format!("decay exponent = {slope:.4}, {elapsed:.1} s"))
    };
    report(8, run());
}

// ---------------------------------------------------------------------------
// 9. Oracle equivalence on small random models.
// ---------------------------------------------------------------------------
#[test]
fn acceptance_9_oracle_equivalence() {
    let run = || -> Result<String, String> {
        // Chain stationary distribution vs exact Gibbs.
        for n in 2..=6usize {
            let model = random_model(n, 0.6, 900 + n as u64);
            let panel = simulate_panel(&model, &ChainConfig::new(1_000_000, 910 + n as u64))
                .map_err(|e| e.to_string())?;
            let empirical = empirical_distribution(&panel);
            let exact = gibbs_distribution(&model).map_err(|e| e.to_string())?;
            let kld = kl_divergence(&empirical, &exact).map_err(|e| e.to_string())?;
            check(
                kld < 0.01,
                format!("chain KLD = {kld} at N = {n} (>= 0.01)"),
            )?;
        }

        // Fitted-model moment round trip.
        for n in 2..=6usize {
            let model = random_model(n, 0.8, 920 + n as u64);
            let moments = distribution_moments(&gibbs_distribution(&model).unwrap());
            let fitted = fit_exact_maxent(&moments).map_err(|e| e.to_string())?;
            let refit = distribution_moments(&gibbs_distribution(&fitted).unwrap());
            let mut worst = 0.0f64;
            for i in 0..n {
                worst = worst.max((refit.means[i] - moments.means[i]).abs());
                for j in 0..n {
                    worst = worst.max((refit.pair_corrs[(i, j)] - moments.pair_corrs[(i, j)]).abs());
                }
            }
            check(
                worst < 1e-6,
                format!("moment round trip deviation {worst} at N = {n}"),
            )?;
        }

        // Flip probabilities vs conditionals enumerated from the Gibbs law.
        for n in 2..=6usize {
            let model = random_model(n, 1.0, 940 + n as u64);
            let exact = gibbs_distribution(&model).unwrap();
            for index in 0..(1usize << n) {
                let state = Configuration::from_index(index, n);
                for unit in 0..n {
                    let stay = exact.probs()[index];
                    let flip = exact.probs()[state.flipped(unit).to_index()];
                    let conditional = flip / (stay + flip);
                    let glauber = glauber_flip_probability(&model, &state, unit);
                    check(
                        (glauber - conditional).abs() < 1e-12,
                        format!("Glauber rate off by {} at N = {n}", (glauber - conditional).abs()),
                    )?;
                    let predicted = flip_probability(&model, &state, &state, unit, &[])
                        .map_err(|e| e.to_string())?;
                    check(
                        (predicted - conditional).abs() < 1e-12,
                        format!("flip_probability off at N = {n}"),
                    )?;
                }
            }
        }

        // MST vs brute-force minimum over all spanning trees.
        {
            let n = 6;
            let mut rng = ChaCha12Rng::seed_from_u64(960);
            let mut values = DMatrix::zeros(n, n);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in (a + 1)..n {
                    let w: f64 = rng.gen_range(0.1..2.0);
                    values[(a, b)] = w;
                    values[(b, a)] = w;
                    edges.push((a, b, w));
                }
            }
            let labels: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
            let d = DissimilarityMatrix::new(labels, values).unwrap();
            let tree = minimum_spanning_tree(&d).map_err(|e| e.to_string())?;
            // Enumerate all 5-edge subsets, keep the spanning ones.
            let mut best = f64::INFINITY;
            let e = edges.len();
            for mask in 0u32..(1 << e) {
                if mask.count_ones() as usize != n - 1 {
                    continue;
                }
                let mut parent: Vec<usize> = (0..n).collect();
                fn root(parent: &mut Vec<usize>, x: usize) -> usize {
                    let mut r = x;
                    while parent[r] != r {
                        parent[r] = parent[parent[r]];
                        r = parent[r];
                    }
                    r
                }
                let mut weight = 0.0;
                let mut joined = 0;
                for (k, &(a, b, w)) in edges.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                        if ra != rb {
                            parent[ra] = rb;
                            joined += 1;
                        }
                        weight += w;
                    }
                }
                if joined == n - 1 {
                    best = best.min(weight);
                }
            }
            check(
                (tree.total_length - best).abs() < 1e-12,
                format!("MST length {} vs brute force {best}", tree.total_length),
            )?;
        }

        // Pseudo-likelihood gradient vs central finite differences.
        {
            let n = 4;
            let model = random_model(n, 0.7, 970);
            let truth = random_model(n, 0.9, 971);
            let panel = simulate_panel(&truth, &ChainConfig::new(200, 972))
                .map_err(|e| e.to_string())?;
            let m = panel.n_times();
            let sigmoid = |z: f64| 1.0 / (1.0 + (-z).exp());
            // Analytic gradient of the per-sample-averaged log pseudo-likelihood.
            let mut grad_h = DVector::zeros(n);
            let mut grad_j = DMatrix::zeros(n, n);
            for t in 0..m {
                let col = panel.column(t);
                for i in 0..n {
                    let mut a = model.fields()[i];
                    for j in 0..n {
                        if j != i {
                            a += model.influences()[(i, j)] * col[j] as f64;
                        }
                    }
                    let s = col[i] as f64;
                    let coef = 2.0 * s * sigmoid(-2.0 * s * a);
                    grad_h[i] += coef;
                    for j in 0..n {
                        if j != i {
                            grad_j[(i, j)] += coef * col[j] as f64;
                        }
                    }
                }
            }
            grad_h /= m as f64;
            grad_j /= m as f64;
            let eps = 1e-5;
            let perturbed = |dh: Option<usize>, dj: Option<(usize, usize)>, sign: f64| -> f64 {
                let mut jm = model.influences().clone();
                let mut h = model.fields().clone();
                if let Some(i) = dh {
                    h[i] += sign * eps;
                }
                if let Some((a, b)) = dj {
                    jm[(a, b)] += sign * eps;
                    jm[(b, a)] += sign * eps;
                }
                pseudo_log_likelihood(&panel, &CouplingModel::new(jm, h).unwrap())
            };
            for i in 0..n {
                let fd = (perturbed(Some(i), None, 1.0) - perturbed(Some(i), None, -1.0))
                    / (2.0 * eps);
                let rel = (grad_h[i] - fd).abs() / fd.abs().max(1e-8);
                check(rel < 1e-4, format!("field gradient rel error {rel}"))?;
            }
            for a in 0..n {
                for b in (a + 1)..n {
                    // The symmetric perturbation moves J_ab and J_ba together.
                    let analytic = grad_j[(a, b)] + grad_j[(b, a)];
                    let fd = (perturbed(None, Some((a, b)), 1.0)
                        - perturbed(None, Some((a, b)), -1.0))
                        / (2.0 * eps);
                    let rel = (analytic - fd).abs() / fd.abs().max(1e-8);
                    check(rel < 1e-4, format!("coupling gradient rel error {rel}"))?;
                }
            }
        }
        Ok("chain KLD, moment round trip, flip conditionals, MST, PL gradient".into())
    };
    report(9, run());
}
