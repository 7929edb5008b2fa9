use rayon::prelude::*;

use robust_alloc::equilibrium::solve_least;
use robust_alloc::estimation::{
    build_regressors, first_stage_ccp, fit_mle, fit_with_profile, gof_from_probabilities, gradient_and_hessian,
    quasi_loglik, FirstStageConfig, FirstStageMethod, ObservedPanel, OptimizerConfig,
};
use robust_alloc::rng::child_seed;
use robust_alloc::sim::{self, play_given_profile, DgpSpec, NetworkSpec, Selection, UniformRange};
use robust_alloc::{Allocation, CcpProfile, Covariates, Game, Network, ShockDistribution, SolverConfig, Theta};

fn theta(t5: f64, t6: f64) -> Theta {
    Theta {
        theta0: -0.5,
        theta1: 0.8,
        theta2: vec![0.6],
        theta3: vec![-0.3],
        theta4: 0.5,
        theta5: t5,
        theta6: t6,
    }
}

fn dgp(n: usize, theta: Theta, seed: u64) -> DgpSpec {
    DgpSpec {
        n,
        network: NetworkSpec::ErdosRenyi { p: 6.0 / n as f64 },
        covariates: vec![UniformRange { low: 0.0, high: 2.0 }],
        theta,
        shock: ShockDistribution::Logistic,
        selection: Selection::Least,
        treatment_prob: 0.4,
        seed,
        forbid_isolated: false,
    }
}

fn mean_abs(a: &CcpProfile, b: &CcpProfile) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Ring game with binary covariates; choice probabilities depend on `(D_i, X_i)` only.
fn binary_panel(n: usize, seed: u64) -> (ObservedPanel, CcpProfile) {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let net = Network::from_edges(n, &edges, false).unwrap();
    let cov = Covariates::new(n, 1, (0..n).map(|i| f64::from(i * 7 % 3 == 0)).collect()).unwrap();
    let mut t = theta(0.0, 0.0);
    t.theta4 = 0.0;
    let game = Game::new(net.clone(), cov.clone(), t, ShockDistribution::Logistic).unwrap();
    let alloc = Allocation::unconstrained((0..n).map(|i| i * 5 % 4 == 1).collect());
    let sigma = solve_least(&game, &alloc, &SolverConfig::default()).unwrap().profile;
    let y = play_given_profile(&game, &alloc, &sigma, seed);
    (ObservedPanel::new(y, alloc.as_slice().to_vec(), cov, net).unwrap(), sigma)
}

#[test]
fn frequency_first_stage_error_shrinks() {
    let cfg = FirstStageConfig::default();
    let errors: Vec<f64> = [500, 2000, 8000]
        .iter()
        .map(|&n| {
            (0..20)
                .map(|rep| {
                    let (panel, sigma) = binary_panel(n, 10 * n as u64 + rep);
                    mean_abs(&first_stage_ccp(&panel, FirstStageMethod::Frequency, &cfg).unwrap(), &sigma)
                })
                .sum::<f64>()
                / 20.0
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn flexible_logit_first_stage_error_shrinks() {
    // no treatment interactions or spillovers: σ is logit-linear in (1, D, X)
    let mut t = theta(0.0, 0.0);
    t.theta3 = vec![0.0];
    t.theta4 = 0.0;
    let cfg = FirstStageConfig::default();
    let errors: Vec<f64> = [500, 2000, 8000]
        .iter()
        .map(|&n| {
            let setup = sim::training_setup(&dgp(n, t.clone(), 21)).unwrap();
            (0..20)
                .map(|rep| {
                    let panel = setup.panel(rep).unwrap();
                    mean_abs(&first_stage_ccp(&panel, FirstStageMethod::FlexibleLogit, &cfg).unwrap(), &setup.sigma)
                })
                .sum::<f64>()
                / 20.0
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

fn mean_l1(n: usize, reps: u64) -> f64 {
    let truth = theta(0.0, 0.0);
    let d = dgp(n, truth.clone(), 31);
    let setup = sim::training_setup(&d).unwrap();
    let fs = FirstStageConfig {
        oracle: Some(setup.sigma.clone()),
        ..FirstStageConfig::default()
    };
    let errs: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let fit = fit_mle(&setup.panel(rep).unwrap(), FirstStageMethod::Oracle, &fs, d.shock, &OptimizerConfig::default())
                .unwrap();
            assert!(fit.converged);
            assert!(fit.gradient_norm <= 1e-8);
            assert!(fit.loglik_trace.windows(2).all(|w| w[1] >= w[0]));
            fit.theta_hat.to_vec().iter().zip(truth.to_vec()).map(|(a, b)| (a - b).abs()).sum()
        })
        .collect();
    errs.iter().sum::<f64>() / errs.len() as f64
}

#[test]
fn estimator_error_shrinks_with_sample_size() {
    let (small, large) = (mean_l1(500, 50), mean_l1(2000, 50));
    assert!(large < small, "{small} vs {large}");
}

#[test]
fn score_at_truth_averages_to_zero() {
    let truth = theta(0.8, 0.2);
    let d = dgp(1000, truth.clone(), 41);
    let setup = sim::training_setup(&d).unwrap();
    let z = build_regressors(&setup.panel(0).unwrap(), &setup.sigma).unwrap().z;
    let t = truth.to_vec();
    let draws: Vec<Vec<f64>> = (0..200)
        .map(|rep| {
            let y = setup.panel(child_seed(7, rep)).unwrap().y_indicator();
            gradient_and_hessian(&t, &z, &y, d.shock).0.as_slice().to_vec()
        })
        .collect();
    for c in 0..t.len() {
        let mean = draws.iter().map(|g| g[c]).sum::<f64>() / 200.0;
        let var = draws.iter().map(|g| (g[c] - mean).powi(2)).sum::<f64>() / 199.0;
        let se = (var / 200.0).sqrt();
        assert!(mean.abs() <= 4.0 * se, "component {c}: mean {mean:e}, se {se:e}");
    }
}

#[test]
fn loglik_matches_direct_logit_evaluation() {
    let setup = sim::training_setup(&dgp(200, theta(1.0, 0.5), 51)).unwrap();
    let panel = setup.panel(3).unwrap();
    let z = build_regressors(&panel, &setup.sigma).unwrap().z;
    let y = panel.y_indicator();
    for shift in [-0.7, 0.0, 0.4] {
        let t: Vec<f64> = theta(1.0, 0.5).to_vec().iter().map(|v| v + shift).collect();
        let direct = (0..z.nrows())
            .map(|i| {
                let a: f64 = (0..z.ncols()).map(|c| z[(i, c)] * t[c]).sum();
                let p = 1.0 / (1.0 + (-a).exp());
                if y[i] > 0.5 {
                    p.ln()
                } else {
                    (1.0 - p).ln()
                }
            })
            .sum::<f64>()
            / y.len() as f64;
        assert!((quasi_loglik(&t, &z, &y, ShockDistribution::Logistic) - direct).abs() < 1e-12);
    }
}

#[test]
fn relabelling_units_leaves_estimates_unchanged() {
    let setup = sim::training_setup(&dgp(600, theta(0.7, 0.1), 61)).unwrap();
    let panel = setup.panel(2).unwrap();
    let perm: Vec<usize> = (0..600).map(|k| (k * 7 + 3) % 600).collect();
    let moved = panel.permuted(&perm);
    let opt = OptimizerConfig::default();
    for method in [FirstStageMethod::Frequency, FirstStageMethod::FlexibleLogit] {
        let a = fit_mle(&panel, method, &FirstStageConfig::default(), ShockDistribution::Logistic, &opt).unwrap();
        let b = fit_mle(&moved, method, &FirstStageConfig::default(), ShockDistribution::Logistic, &opt).unwrap();
        for (x, y) in a.theta_hat.to_vec().iter().zip(b.theta_hat.to_vec()) {
            assert!((x - y).abs() <= 1e-10, "{method:?}: {x} vs {y}");
        }
    }
    let sigma_moved = CcpProfile::new(perm.iter().map(|&i| setup.sigma[i]).collect()).unwrap();
    let a = fit_with_profile(&panel, setup.sigma.clone(), FirstStageMethod::Oracle, ShockDistribution::Logistic, &opt).unwrap();
    let b = fit_with_profile(&moved, sigma_moved, FirstStageMethod::Oracle, ShockDistribution::Logistic, &opt).unwrap();
    assert!((a.loglik - b.loglik).abs() <= 1e-12);
}

#[test]
fn fit_table_flags_gross_misspecification() {
    let truth = theta(0.5, 0.0);
    let setup = sim::training_setup(&dgp(2000, truth.clone(), 71)).unwrap();
    let panel = setup.panel(5).unwrap();
    let z = build_regressors(&panel, &setup.sigma).unwrap().z;
    let bins: Vec<usize> = (0..2000).map(|i| (panel.covariates().row(i)[0] * 2.0).floor().min(3.0) as usize).collect();
    let probs = |t: &Theta| -> Vec<f64> {
        let v = t.to_vec();
        (0..2000)
            .map(|i| {
                let a: f64 = (0..v.len()).map(|c| z[(i, c)] * v[c]).sum();
                ShockDistribution::Logistic.cdf(a)
            })
            .collect()
    };
    let mut wrong = truth.clone();
    wrong.theta0 += 1.5;
    wrong.theta2[0] -= 1.0;
    let bad = gof_from_probabilities(panel.y(), &probs(&wrong), &bins).unwrap();
    assert!(bad.rows.iter().any(|r| r.flagged));
    let good = gof_from_probabilities(panel.y(), &probs(&truth), &bins).unwrap();
    assert!(good.rows.iter().map(|r| r.statistic).sum::<f64>() < bad.rows.iter().map(|r| r.statistic).sum::<f64>());
    assert_eq!(bad.critical_value, 7.815);
}
