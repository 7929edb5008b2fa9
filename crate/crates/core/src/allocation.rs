//! Treatment allocation: greedy maximin, exhaustive search and random baselines.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{iterate_with, solve_greatest, solve_least, SolverConfig, StartPoint};
use crate::error::{Error, Result};
use crate::game::{Allocation, Game};
use crate::rng::task_rng;
use crate::welfare::{welfare_bounds, worst_case_value, Objective};

/// A real-valued function of a subset of units, given as an indicator vector.
pub trait SetFunction: Sync {
    fn ground_size(&self) -> usize;
    fn value(&self, set: &[bool]) -> Result<f64>;
}

/// Worst-case equilibrium welfare as a function of the treated set.
#[derive(Debug, Clone)]
pub struct WorstCaseWelfare<'a> {
    pub game: &'a Game,
    pub objective: Objective,
    pub solver: SolverConfig,
}

/// Worst-case welfare of one allocation together with its least profile.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub least: Vec<f64>,
}

impl<'a> WorstCaseWelfare<'a> {
    pub fn new(game: &'a Game, objective: Objective, solver: SolverConfig) -> Self {
        WorstCaseWelfare {
            game,
            objective,
            solver,
        }
    }

    pub fn evaluate(&self, alloc: &Allocation) -> Result<Evaluation> {
        let least = solve_least(self.game, alloc, &self.solver)?.profile.into_inner();
        self.finish(alloc, least)
    }

    /// Least-profile solve started from `start` instead of zeros. Only valid
    /// when `start` lies below the least equilibrium of `alloc`.
    pub fn evaluate_warm(&self, alloc: &Allocation, start: &[f64]) -> Result<Evaluation> {
        self.game.require_supermodular(alloc)?;
        let payoffs = self.game.payoffs(alloc);
        let least = iterate_with(
            &payoffs,
            self.game.shock(),
            start.to_vec(),
            StartPoint::CustomStart,
            &self.solver,
            |_, _, _| {},
        )?
        .profile
        .into_inner();
        self.finish(alloc, least)
    }

    fn finish(&self, alloc: &Allocation, least: Vec<f64>) -> Result<Evaluation> {
        let payoffs = self.game.payoffs(alloc);
        let value = match self.objective {
            Objective::Engagement => worst_case_value(self.objective, &payoffs, &least, None),
            Objective::Utilitarian => {
                let hi = solve_greatest(self.game, alloc, &self.solver)?.profile;
                worst_case_value(self.objective, &payoffs, &least, Some(hi.as_slice()))
            }
        };
        Ok(Evaluation { value, least })
    }
}

impl SetFunction for WorstCaseWelfare<'_> {
    fn ground_size(&self) -> usize {
        self.game.n()
    }

    fn value(&self, set: &[bool]) -> Result<f64> {
        Ok(self
            .evaluate(&Allocation::unconstrained(set.to_vec()))?
            .value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Greedy,
    Exhaustive,
    Random,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Greedy => "greedy",
            Method::Exhaustive => "exhaustive",
            Method::Random => "random",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "greedy" => Ok(Method::Greedy),
            "exhaustive" => Ok(Method::Exhaustive),
            "random" => Ok(Method::Random),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocConfig {
    pub solver: SolverConfig,
    /// Halt the greedy loop once no candidate has a positive gain.
    pub stop_if_nonpositive: bool,
    /// Start candidate solves from the incumbent's least profile.
    pub warm_start: bool,
    /// Maximum number of candidate allocations the exhaustive search may visit.
    pub exhaustive_budget: u128,
}

impl Default for AllocConfig {
    fn default() -> Self {
        AllocConfig {
            solver: SolverConfig::default(),
            stop_if_nonpositive: false,
            warm_start: false,
            exhaustive_budget: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGain {
    pub unit: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub chosen: usize,
    pub gains: Vec<CandidateGain>,
    /// Worst-case welfare after treating `chosen`.
    pub welfare: f64,
    /// Gap between warm and cold solves of the chosen candidate, when warm starting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub allocation: Allocation,
    pub welfare_lower: f64,
    pub welfare_upper: f64,
    pub trace: Vec<RoundRecord>,
    pub method: Method,
    pub objective: Objective,
}

/// Worst-case welfare gain from additionally treating unit `i`.
pub fn marginal_gain(
    game: &Game,
    current: &Allocation,
    i: usize,
    objective: Objective,
    cfg: &SolverConfig,
) -> Result<f64> {
    let next = current.with_treated(i)?;
    let w = WorstCaseWelfare::new(game, objective, *cfg);
    Ok(w.evaluate(&next)?.value - w.evaluate(current)?.value)
}

fn upper_value(game: &Game, alloc: &Allocation, objective: Objective, cfg: &SolverConfig) -> Result<f64> {
    Ok(welfare_bounds(game, alloc, objective, cfg, false)?.upper)
}

/// Greedy maximin allocation: each round treats the untreated unit whose
/// treatment raises worst-case welfare the most (ties go to the lowest index).
///
/// A supermodularity violation or solver failure mid-run returns
/// [`Error::Aborted`] carrying the rounds completed so far.
pub fn greedy_allocate(
    game: &Game,
    kappa: usize,
    objective: Objective,
    cfg: &AllocConfig,
) -> Result<AllocationResult> {
    let n = game.n();
    if kappa > n {
        return Err(Error::InvalidInput(format!("capacity {kappa} exceeds N = {n}")));
    }
    let w = WorstCaseWelfare::new(game, objective, cfg.solver);
    let mut current = Allocation::zeros(n, kappa);
    let mut incumbent = w.evaluate(&current)?;
    let mut trace: Vec<RoundRecord> = Vec::with_capacity(kappa);

    let abort = |current: &Allocation, value: f64, trace: &[RoundRecord], cause: Error| {
        Error::Aborted {
            partial: Box::new(AllocationResult {
                allocation: current.clone(),
                welfare_lower: value,
                welfare_upper: f64::NAN,
                trace: trace.to_vec(),
                method: Method::Greedy,
                objective,
            }),
            cause: Box::new(cause),
        }
    };

    for _ in 0..kappa {
        let candidates: Vec<usize> = (0..n).filter(|&i| !current.is_treated(i)).collect();
        let evaluated: Vec<Result<Evaluation>> = candidates
            .par_iter()
            .map(|&i| {
                let next = current.with_treated(i)?;
                if cfg.warm_start {
                    w.evaluate_warm(&next, &incumbent.least)
                } else {
                    w.evaluate(&next)
                }
            })
            .collect();

        let mut gains = Vec::with_capacity(candidates.len());
        let mut evals = Vec::with_capacity(candidates.len());
        for (&i, res) in candidates.iter().zip(evaluated) {
            match res {
                Ok(ev) => {
                    gains.push(CandidateGain {
                        unit: i,
                        gain: ev.value - incumbent.value,
                    });
                    evals.push(ev);
                }
                Err(e) => return Err(abort(&current, incumbent.value, &trace, e)),
            }
        }

        let mut best = 0;
        for k in 1..gains.len() {
            if gains[k].gain > gains[best].gain {
                best = k;
            }
        }
        if cfg.stop_if_nonpositive && gains[best].gain <= 0.0 {
            break;
        }
        let chosen = gains[best].unit;
        current = current.with_treated(chosen)?;
        let mut chosen_eval = evals.swap_remove(best);
        let mut warm_start_gap = None;
        if cfg.warm_start {
            let cold = match w.evaluate(&current) {
                Ok(ev) => ev,
                Err(e) => return Err(abort(&current, chosen_eval.value, &trace, e)),
            };
            warm_start_gap = Some((cold.value - chosen_eval.value).abs());
            chosen_eval = cold;
        }
        trace.push(RoundRecord {
            chosen,
            gains,
            welfare: chosen_eval.value,
            warm_start_gap,
        });
        incumbent = chosen_eval;
    }

    let welfare_upper = upper_value(game, &current, objective, &cfg.solver)?;
    Ok(AllocationResult {
        allocation: current,
        welfare_lower: incumbent.value,
        welfare_upper,
        trace,
        method: Method::Greedy,
        objective,
    })
}

/// Number of allocations with at most `kappa` treated units.
pub fn count_allocations(n: usize, kappa: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for s in 0..=kappa.min(n) {
        total += binom;
        binom = binom * (n - s) as u128 / (s + 1) as u128;
    }
    total
}

/// Every subset of `0..n` with at most `kappa` members, as sorted index lists.
pub(crate) fn subsets_up_to(n: usize, kappa: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..kappa.min(n) {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.last().map_or(0, |&l| l + 1);
            for j in start..n {
                let mut s = set.clone();
                s.push(j);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Global maximizer of worst-case welfare over all allocations with at most
/// `kappa` treated units. Ties go to the lexicographically smallest vector.
pub fn exhaustive_allocate(
    game: &Game,
    kappa: usize,
    objective: Objective,
    cfg: &AllocConfig,
) -> Result<AllocationResult> {
    let n = game.n();
    if kappa > n {
        return Err(Error::InvalidInput(format!("capacity {kappa} exceeds N = {n}")));
    }
    let needed = count_allocations(n, kappa);
    if needed > cfg.exhaustive_budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: cfg.exhaustive_budget,
        });
    }
    let w = WorstCaseWelfare::new(game, objective, cfg.solver);
    let mut candidates: Vec<Allocation> = subsets_up_to(n, kappa)
        .into_iter()
        .map(|s| Allocation::from_treated(n, &s, kappa))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = candidates
        .par_iter()
        .map(|a| w.evaluate(a).map(|e| e.value))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for k in 1..candidates.len() {
        let better = values[k] > values[best]
            || (values[k] == values[best]
                && candidates[k].as_slice() < candidates[best].as_slice());
        if better {
            best = k;
        }
    }
    let allocation = candidates.swap_remove(best);
    let welfare_upper = upper_value(game, &allocation, objective, &cfg.solver)?;
    Ok(AllocationResult {
        allocation,
        welfare_lower: values[best],
        welfare_upper,
        trace: Vec::new(),
        method: Method::Exhaustive,
        objective,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSummary {
    pub draws: Vec<AllocationResult>,
    pub mean_lower: f64,
    pub mean_upper: f64,
}

/// `draws` allocations treating `min(kappa, N)` units chosen uniformly
/// without replacement. Draw `k` uses its own stream of `seed`.
pub fn random_allocate(
    game: &Game,
    kappa: usize,
    objective: Objective,
    seed: u64,
    draws: usize,
    cfg: &AllocConfig,
) -> Result<RandomSummary> {
    let n = game.n();
    if kappa > n {
        return Err(Error::InvalidInput(format!("capacity {kappa} exceeds N = {n}")));
    }
    let results: Vec<AllocationResult> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = task_rng(seed, k as u64);
            let mut treated = sample(&mut rng, n, kappa).into_vec();
            treated.sort_unstable();
            let alloc = Allocation::from_treated(n, &treated, kappa)?;
            let b = welfare_bounds(game, &alloc, objective, &cfg.solver, false)?;
            Ok(AllocationResult {
                allocation: alloc,
                welfare_lower: b.lower,
                welfare_upper: b.upper,
                trace: Vec::new(),
                method: Method::Random,
                objective,
            })
        })
        .collect::<Result<_>>()?;
    let m = results.len().max(1) as f64;
    let mean_lower = results.iter().map(|r| r.welfare_lower).sum::<f64>() / m;
    let mean_upper = results.iter().map(|r| r.welfare_upper).sum::<f64>() / m;
    Ok(RandomSummary {
        draws: results,
        mean_lower,
        mean_upper,
    })
}
