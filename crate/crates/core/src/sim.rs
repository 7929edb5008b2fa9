//! Synthetic data generation, desk-scale regret evaluation and the
//! submodularity-ratio / curvature diagnostics behind the greedy guarantee.

use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{
    count_allocations, greedy_allocate, subsets_up_to, AllocConfig, SetFunction, WorstCaseWelfare,
};
use crate::equilibrium::{solve_from, solve_greatest, solve_least, CcpProfile, SolverConfig};
use crate::error::{Error, Result};
use crate::estimation::{fit_mle, FirstStageConfig, FirstStageMethod, ObservedPanel, OptimizerConfig};
use crate::game::{Allocation, Covariates, Game, Theta};
use crate::network::Network;
use crate::rng::{child_seed, task_rng};
use crate::shock::ShockDistribution;
use crate::welfare::Objective;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkSpec {
    ErdosRenyi { p: f64 },
    Ring { k: usize },
    Path,
    FromFile { path: PathBuf, #[serde(default)] directed: bool },
}

/// Uniform law on `[low, high]` for one covariate column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    #[default]
    Least,
    Greatest,
    IterateFromRandom,
}

fn default_treatment_prob() -> f64 {
    0.5
}

/// Synthetic data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub n: usize,
    pub network: NetworkSpec,
    pub covariates: Vec<UniformRange>,
    pub theta: Theta,
    #[serde(default)]
    pub shock: ShockDistribution,
    #[serde(default)]
    pub selection: Selection,
    /// Probability that a training unit is treated.
    #[serde(default = "default_treatment_prob")]
    pub treatment_prob: f64,
    pub seed: u64,
    /// Reject generated networks with isolated units.
    #[serde(default)]
    pub forbid_isolated: bool,
}

impl DgpSpec {
    pub fn with_n(&self, n: usize) -> Self {
        DgpSpec { n, ..self.clone() }
    }
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Network> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("edge probability {p} outside [0, 1]")));
    }
    let mut edges = Vec::new();
    if p >= 1.0 {
        for v in 0..n {
            for w in 0..v {
                edges.push((w, v));
            }
        }
    } else if p > 0.0 {
        // geometric skipping over the lower-triangular pairs
        let mut rng = task_rng(seed, 0);
        let log_q = (1.0 - p).ln();
        let (mut v, mut w): (usize, i64) = (1, -1);
        while v < n {
            let r: f64 = rng.random();
            w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
            while w >= v as i64 && v < n {
                w -= v as i64;
                v += 1;
            }
            if v < n {
                edges.push((w as usize, v));
            }
        }
    }
    Network::from_edges(n, &edges, false)
}

fn ring(n: usize, k: usize) -> Result<Network> {
    if k % 2 != 0 || (n > 0 && k >= n) {
        return Err(Error::InvalidInput(format!("ring needs an even k < N, got k = {k}, N = {n}")));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for s in 1..=k / 2 {
            edges.push((i, (i + s) % n));
        }
    }
    Network::from_edges(n, &edges, false)
}

pub fn generate_network(dgp: &DgpSpec) -> Result<Network> {
    let n = dgp.n;
    let net = match &dgp.network {
        NetworkSpec::ErdosRenyi { p } => erdos_renyi(n, *p, child_seed(dgp.seed, 0))?,
        NetworkSpec::Ring { k } => ring(n, *k)?,
        NetworkSpec::Path => {
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            Network::from_edges(n, &edges, false)?
        }
        NetworkSpec::FromFile { path, directed } => {
            let net = crate::io::read_network(path, Some(n), *directed)?;
            if net.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "network file size",
                    expected: n,
                    found: net.len(),
                });
            }
            net
        }
    };
    if dgp.forbid_isolated {
        let iso = net.isolated_units();
        if !iso.is_empty() {
            return Err(Error::DegenerateNetwork(format!(
                "{} isolated units (first: {})",
                iso.len(),
                iso[0]
            )));
        }
    }
    Ok(net)
}

fn generate_covariates(dgp: &DgpSpec) -> Result<Covariates> {
    let mut rng = task_rng(child_seed(dgp.seed, 1), 0);
    let k = dgp.covariates.len();
    let mut values = Vec::with_capacity(dgp.n * k);
    for _ in 0..dgp.n {
        for r in &dgp.covariates {
            let u: f64 = rng.random();
            values.push(r.low + (r.high - r.low) * u);
        }
    }
    Covariates::new(dgp.n, k, values)
}

/// Deterministic game for the spec's seed.
pub fn generate_game(dgp: &DgpSpec) -> Result<Game> {
    let net = generate_network(dgp)?;
    let cov = generate_covariates(dgp)?;
    Game::new(net, cov, dgp.theta.clone(), dgp.shock)
}

/// Training treatment vector, each unit treated with `treatment_prob`.
pub fn generate_treatment(dgp: &DgpSpec) -> Allocation {
    let mut rng = task_rng(child_seed(dgp.seed, 2), 0);
    let d = (0..dgp.n).map(|_| rng.random::<f64>() < dgp.treatment_prob).collect();
    Allocation::unconstrained(d)
}

/// The equilibrium profile picked by `selection`.
pub fn select_profile(
    game: &Game,
    alloc: &Allocation,
    selection: Selection,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<CcpProfile> {
    Ok(match selection {
        Selection::Least => solve_least(game, alloc, cfg)?.profile,
        Selection::Greatest => solve_greatest(game, alloc, cfg)?.profile,
        Selection::IterateFromRandom => {
            let mut rng = task_rng(seed, 0);
            let start = CcpProfile::new((0..game.n()).map(|_| rng.random::<f64>()).collect())?;
            solve_from(game, alloc, &start, cfg)?.profile
        }
    })
}

/// One draw of play given the equilibrium profile: `y_i = 1{α_i + Σ β_ij σ_j ≥ ε_i}`.
pub fn play_given_profile(game: &Game, alloc: &Allocation, sigma: &CcpProfile, seed: u64) -> Vec<bool> {
    let payoffs = game.payoffs(alloc);
    let mut rng = task_rng(seed, 1);
    (0..game.n())
        .map(|i| {
            let eps = game.shock().sample(&mut rng);
            payoffs.index(i, sigma.as_slice()) >= eps
        })
        .collect()
}

/// Solves the selected equilibrium and draws one realization of play.
pub fn simulate_play(game: &Game, alloc: &Allocation, selection: Selection, seed: u64) -> Result<Vec<bool>> {
    let cfg = SolverConfig::default();
    if selection != Selection::IterateFromRandom {
        game.require_supermodular(alloc)?;
    }
    let sigma = select_profile(game, alloc, selection, seed, &cfg)?;
    Ok(play_given_profile(game, alloc, &sigma, seed))
}

/// Training environment: game, treatment, and the data-generating equilibrium.
#[derive(Debug, Clone)]
pub struct TrainingSetup {
    pub game: Game,
    pub treatment: Allocation,
    pub sigma: CcpProfile,
}

pub fn training_setup(dgp: &DgpSpec) -> Result<TrainingSetup> {
    let game = generate_game(dgp)?;
    let treatment = generate_treatment(dgp);
    let sigma = select_profile(&game, &treatment, dgp.selection, child_seed(dgp.seed, 3), &SolverConfig::default())?;
    Ok(TrainingSetup { game, treatment, sigma })
}

impl TrainingSetup {
    /// Observed panel for one redraw of the training shocks.
    pub fn panel(&self, shock_seed: u64) -> Result<ObservedPanel> {
        let y = play_given_profile(&self.game, &self.treatment, &self.sigma, shock_seed);
        ObservedPanel::new(
            y,
            self.treatment.as_slice().to_vec(),
            self.game.covariates().clone(),
            self.game.network().clone(),
        )
    }
}

/// Largest ground set for the subset diagnostics.
pub const MAX_DIAGNOSTIC_UNITS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub gamma_hat: f64,
    pub xi_hat: f64,
    pub guarantee_factor: f64,
    pub n: usize,
    pub max_set_size: usize,
    pub skipped_pairs: u64,
}

/// `(1/ξ)(1 - e^{-ξγ})`, with its `ξ → 0` limit `γ`.
pub fn guarantee_factor(xi: f64, gamma: f64) -> f64 {
    if xi.abs() < 1e-12 {
        gamma
    } else {
        (1.0 - (-xi * gamma).exp()) / xi
    }
}

/// Differences at or below this magnitude count as zero denominators.
const ZERO_DENOMINATOR: f64 = 1e-12;

/// Submodularity ratio and curvature of `f` by full enumeration over subsets
/// of size at most `max_set_size`. Pairs with a zero denominator are skipped.
pub fn estimate_submodularity_curvature(f: &dyn SetFunction, max_set_size: Option<usize>) -> Result<DiagnosticReport> {
    let n = f.ground_size();
    if n > MAX_DIAGNOSTIC_UNITS {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << n,
            budget: 1u128 << MAX_DIAGNOSTIC_UNITS,
        });
    }
    let cap = max_set_size.unwrap_or(n).min(n);
    let masks: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() as usize <= cap).collect();
    let mut values = vec![f64::NAN; 1 << n];
    let computed: Vec<f64> = masks
        .par_iter()
        .map(|&m| {
            let set: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
            f.value(&set)
        })
        .collect::<Result<_>>()?;
    for (&m, v) in masks.iter().zip(computed) {
        values[m as usize] = v;
    }
    let full = (1u32 << n) - 1;
    let fits = |m: u32| m.count_ones() as usize <= cap;

    let mut gamma = f64::INFINITY;
    let mut xi: f64 = 0.0;
    let mut skipped = 0u64;
    for &s in &masks {
        let fs = values[s as usize];
        let outside = full & !s;
        // T = R \ S ranges over nonempty subsets of the complement
        let mut t = outside;
        while t != 0 {
            let union = s | t;
            if fits(union) {
                let den = values[union as usize] - fs;
                if den.abs() <= ZERO_DENOMINATOR {
                    skipped += 1;
                } else {
                    let num: f64 = (0..n)
                        .filter(|&k| t >> k & 1 == 1)
                        .map(|k| values[(s | 1 << k) as usize] - fs)
                        .sum();
                    gamma = gamma.min(num / den);
                }
            }
            t = (t - 1) & outside;
        }
    }
    for &r in &masks {
        let fr = values[r as usize];
        for k in (0..n).filter(|&k| r >> k & 1 == 0) {
            if !fits(r | 1 << k) {
                continue;
            }
            let gain_r = values[(r | 1 << k) as usize] - fr;
            // S ranges over all subsets of R, including R itself
            let mut s = r;
            loop {
                let den = values[(s | 1 << k) as usize] - values[s as usize];
                if den.abs() <= ZERO_DENOMINATOR {
                    skipped += 1;
                } else {
                    xi = xi.max(1.0 - gain_r / den);
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & r;
            }
        }
    }
    if !gamma.is_finite() {
        gamma = 1.0;
    }
    Ok(DiagnosticReport {
        gamma_hat: gamma,
        xi_hat: xi,
        guarantee_factor: guarantee_factor(xi, gamma),
        n,
        max_set_size: cap,
        skipped_pairs: skipped,
    })
}

/// Diagnostics for the worst-case welfare set function of `game`.
pub fn diagnose_game(
    game: &Game,
    objective: Objective,
    max_set_size: Option<usize>,
    cfg: &SolverConfig,
) -> Result<DiagnosticReport> {
    let w = WorstCaseWelfare::new(game, objective, *cfg);
    estimate_submodularity_curvature(&w, max_set_size)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretConfig {
    pub first_stage: FirstStageMethod,
    pub objective: Objective,
    pub alloc: AllocConfig,
    pub optimizer: OptimizerConfig,
    /// Skip estimation and allocate with the true parameters.
    pub use_true_theta: bool,
}

impl Default for RegretConfig {
    fn default() -> Self {
        RegretConfig {
            first_stage: FirstStageMethod::Oracle,
            objective: Objective::Engagement,
            alloc: AllocConfig::default(),
            optimizer: OptimizerConfig::default(),
            use_true_theta: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRow {
    pub n_train: usize,
    pub rep: usize,
    pub regret: f64,
    pub estimation_gap: f64,
    pub greedy_gap: f64,
    pub theta_l1_error: f64,
    /// Complementarity parameters were projected back to `θ5 ≥ 0, θ5 + θ6 ≥ 0`.
    pub projected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretStats {
    pub n_train: usize,
    pub mean: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretSummary {
    pub rows: Vec<RegretRow>,
    pub stats: Vec<RegretStats>,
    /// Worst-case welfare of the true optimum on the target.
    pub optimal_welfare: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn project_supermodular(mut t: Theta) -> (Theta, bool) {
    let mut changed = false;
    if t.theta5 < 0.0 {
        t.theta5 = 0.0;
        changed = true;
    }
    if t.theta5 + t.theta6 < 0.0 {
        t.theta6 = -t.theta5;
        changed = true;
    }
    (t, changed)
}

fn l1(a: &Theta, b: &Theta) -> f64 {
    a.to_vec().iter().zip(b.to_vec()).map(|(x, y)| (x - y).abs()).sum()
}

/// Regret of estimate-then-greedy on a fixed target game.
///
/// For each training size and replication, training shocks are redrawn on a
/// fixed training environment, `θ` is estimated, greedy allocates on the
/// target with `θ̂`, and the allocation is scored at the true `θ`. Alongside
/// the regret each row records `sup_D |Ŵ(D) - W(D)|` over feasible `D` and
/// the greedy shortfall under `θ̂`; `regret ≤ 2·estimation_gap + greedy_gap`.
pub fn evaluate_regret(
    dgp: &DgpSpec,
    n_grid: &[usize],
    target: &Game,
    kappa: usize,
    reps: usize,
    seed: u64,
    cfg: &RegretConfig,
) -> Result<RegretSummary> {
    let n_target = target.n();
    let budget = count_allocations(n_target, kappa);
    if budget > cfg.alloc.exhaustive_budget {
        return Err(Error::BudgetExceeded {
            needed: budget,
            budget: cfg.alloc.exhaustive_budget,
        });
    }
    let candidates: Vec<Allocation> = subsets_up_to(n_target, kappa)
        .into_iter()
        .map(|s| Allocation::from_treated(n_target, &s, kappa))
        .collect::<Result<_>>()?;
    let truth = WorstCaseWelfare::new(target, cfg.objective, cfg.alloc.solver);
    let true_values: Vec<f64> = candidates
        .par_iter()
        .map(|a| truth.evaluate(a).map(|e| e.value))
        .collect::<Result<_>>()?;
    let optimal = true_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let setups: Vec<TrainingSetup> = n_grid
        .iter()
        .map(|&n| training_setup(&dgp.with_n(n)))
        .collect::<Result<_>>()?;

    let tasks: Vec<(usize, usize)> = (0..n_grid.len())
        .flat_map(|g| (0..reps).map(move |r| (g, r)))
        .collect();
    let rows: Vec<RegretRow> = tasks
        .par_iter()
        .map(|&(g, rep)| {
            let n_train = n_grid[g];
            let (theta_hat, projected) = if cfg.use_true_theta {
                (dgp.theta.clone(), false)
            } else {
                let setup = &setups[g];
                let panel = setup.panel(child_seed(child_seed(seed, n_train as u64), rep as u64))?;
                let fs = FirstStageConfig {
                    oracle: Some(setup.sigma.clone()),
                    ..FirstStageConfig::default()
                };
                let fit = fit_mle(&panel, cfg.first_stage, &fs, dgp.shock, &cfg.optimizer)?;
                project_supermodular(fit.theta_hat)
            };
            let est_game = target.with_theta(theta_hat.clone())?;
            let est = WorstCaseWelfare::new(&est_game, cfg.objective, cfg.alloc.solver);
            let est_values: Vec<f64> = candidates
                .iter()
                .map(|a| est.evaluate(a).map(|e| e.value))
                .collect::<Result<_>>()?;
            let greedy = greedy_allocate(&est_game, kappa, cfg.objective, &cfg.alloc)?;
            let chosen = candidates
                .iter()
                .position(|a| a.as_slice() == greedy.allocation.as_slice())
                .ok_or_else(|| Error::InternalConsistency("greedy allocation not among candidates".into()))?;
            let est_best = est_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let estimation_gap = est_values
                .iter()
                .zip(&true_values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(RegretRow {
                n_train,
                rep,
                regret: optimal - true_values[chosen],
                estimation_gap,
                greedy_gap: est_best - greedy.welfare_lower,
                theta_l1_error: l1(&theta_hat, &dgp.theta),
                projected,
            })
        })
        .collect::<Result<_>>()?;

    let stats = n_grid
        .iter()
        .map(|&n| {
            let mut r: Vec<f64> = rows.iter().filter(|x| x.n_train == n).map(|x| x.regret).collect();
            r.sort_by(f64::total_cmp);
            RegretStats {
                n_train: n,
                mean: r.iter().sum::<f64>() / r.len().max(1) as f64,
                q10: quantile(&r, 0.1),
                median: quantile(&r, 0.5),
                q90: quantile(&r, 0.9),
            }
        })
        .collect();
    Ok(RegretSummary {
        rows,
        stats,
        optimal_welfare: optimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(network: NetworkSpec, n: usize) -> DgpSpec {
        DgpSpec {
            n,
            network,
            covariates: vec![UniformRange { low: 0.0, high: 1.0 }],
            theta: Theta::zeros(1),
            shock: ShockDistribution::Logistic,
            selection: Selection::Least,
            treatment_prob: 0.5,
            seed: 42,
            forbid_isolated: false,
        }
    }

    struct Additive(Vec<f64>);
    impl SetFunction for Additive {
        fn ground_size(&self) -> usize {
            self.0.len()
        }
        fn value(&self, set: &[bool]) -> Result<f64> {
            Ok(set.iter().zip(&self.0).filter(|(s, _)| **s).map(|(_, w)| w).sum())
        }
    }

    struct Capped(usize, f64);
    impl SetFunction for Capped {
        fn ground_size(&self) -> usize {
            self.0
        }
        fn value(&self, set: &[bool]) -> Result<f64> {
            Ok((set.iter().filter(|s| **s).count() as f64).min(self.1))
        }
    }

    #[test]
    fn empty_erdos_renyi() {
        let g = generate_network(&spec(NetworkSpec::ErdosRenyi { p: 0.0 }, 6)).unwrap();
        assert_eq!(g.isolated_units().len(), 6);
        let mut s = spec(NetworkSpec::ErdosRenyi { p: 0.0 }, 6);
        s.forbid_isolated = true;
        assert!(matches!(generate_network(&s), Err(Error::DegenerateNetwork(_))));
        let full = generate_network(&spec(NetworkSpec::ErdosRenyi { p: 1.0 }, 5)).unwrap();
        assert_eq!(full.min_degree(), 4);
    }

    #[test]
    fn erdos_renyi_density_and_determinism() {
        let s = spec(NetworkSpec::ErdosRenyi { p: 0.1 }, 400);
        let a = generate_network(&s).unwrap();
        let b = generate_network(&s).unwrap();
        assert_eq!(a, b);
        let m = a.edges().len() as f64;
        let expected = 0.1 * 400.0 * 399.0 / 2.0;
        assert!((m - expected).abs() < 4.0 * (expected * 0.9).sqrt());
    }

    #[test]
    fn ring_degrees() {
        let g = generate_network(&spec(NetworkSpec::Ring { k: 2 }, 5)).unwrap();
        assert!((0..5).all(|i| g.degree(i) == 2));
        assert!(generate_network(&spec(NetworkSpec::Ring { k: 3 }, 5)).is_err());
        let p = generate_network(&spec(NetworkSpec::Path, 4)).unwrap();
        assert_eq!(p.edges(), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn additive_function_diagnostics() {
        let r = estimate_submodularity_curvature(&Additive(vec![0.5, 1.0, 2.0, 0.25]), None).unwrap();
        assert!((r.gamma_hat - 1.0).abs() < 1e-12);
        assert!(r.xi_hat.abs() < 1e-12);
        assert!((r.guarantee_factor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn submodular_function_has_unit_ratio() {
        let r = estimate_submodularity_curvature(&Capped(5, 2.0), None).unwrap();
        assert!((r.gamma_hat - 1.0).abs() < 1e-12);
        // adding past the cap yields nothing, so curvature is 1
        assert!((r.xi_hat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn guarantee_factor_limits() {
        assert!((guarantee_factor(0.0, 0.7) - 0.7).abs() < 1e-15);
        assert!((guarantee_factor(1.0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn simulate_play_is_deterministic() {
        let mut s = spec(NetworkSpec::Ring { k: 2 }, 6);
        s.theta.theta0 = -0.5;
        s.theta.theta5 = 1.0;
        let g = generate_game(&s).unwrap();
        let a = Allocation::zeros(6, 0);
        assert_eq!(
            simulate_play(&g, &a, Selection::Least, 9).unwrap(),
            simulate_play(&g, &a, Selection::Least, 9).unwrap()
        );
        assert!(simulate_play(&g, &a, Selection::IterateFromRandom, 9).is_ok());
    }

    #[test]
    fn dgp_json_round_trip() {
        let mut s = spec(NetworkSpec::ErdosRenyi { p: 0.2 }, 10);
        s.selection = Selection::IterateFromRandom;
        let json = serde_json::to_string(&s).unwrap();
        let back: DgpSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let minimal: DgpSpec = serde_json::from_str(
            r#"{"n":3,"network":"path","covariates":[{"low":0,"high":1}],
                "theta":{"theta0":0,"theta1":0,"theta2":[0],"theta3":[0],"theta4":0,"theta5":0,"theta6":0},
                "seed":1}"#,
        )
        .unwrap();
        assert_eq!(minimal.treatment_prob, 0.5);
        assert_eq!(minimal.selection, Selection::Least);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert!((quantile(&v, 0.1) - 1.4).abs() < 1e-12);
    }
}
