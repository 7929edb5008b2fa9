//! Complete-information game: shocks are common knowledge, so each shock
//! draw defines a finite binary game. Its pure Nash equilibria form a
//! lattice under complementarity, and the least and greatest members give
//! the per-unit choice probability bounds across selection mechanisms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Allocation, Game, Payoffs};
use crate::rng::task_rng;

/// Largest network that may be enumerated (`2^N` profiles).
pub const MAX_ENUMERATION_UNITS: usize = 16;

/// Pure Nash equilibria of one shock draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashSet {
    pub equilibria: Vec<Vec<u8>>,
    pub least: Vec<u8>,
    pub greatest: Vec<u8>,
    pub epsilon_draw: Vec<f64>,
}

/// Per-unit bounds on `Pr(Y_i = 1)` across selection mechanisms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub draws: usize,
}

fn check_budget(n: usize) -> Result<()> {
    if n > MAX_ENUMERATION_UNITS {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << n,
            budget: 1u128 << MAX_ENUMERATION_UNITS,
        });
    }
    Ok(())
}

/// Best response of unit `i` to profile `mask` (weak inequality picks 1).
fn best_response(payoffs: &Payoffs, eps: &[f64], i: usize, mask: u32) -> bool {
    let u = payoffs.beta[i]
        .iter()
        .filter(|(j, _)| mask >> j & 1 == 1)
        .fold(payoffs.alpha[i] - eps[i], |acc, &(_, b)| acc + b);
    u >= 0.0
}

fn is_equilibrium(payoffs: &Payoffs, eps: &[f64], mask: u32) -> bool {
    (0..payoffs.len()).all(|i| best_response(payoffs, eps, i, mask) == (mask >> i & 1 == 1))
}

fn to_vec(mask: u32, n: usize) -> Vec<u8> {
    (0..n).map(|i| (mask >> i & 1) as u8).collect()
}

fn enumerate_masks(payoffs: &Payoffs, eps: &[f64]) -> Vec<u32> {
    let n = payoffs.len();
    (0..1u32 << n).filter(|&m| is_equilibrium(payoffs, eps, m)).collect()
}

/// Scans all `2^N` profiles for pure Nash equilibria under shock draw `epsilon`.
pub fn enumerate_nash(game: &Game, alloc: &Allocation, epsilon: &[f64]) -> Result<NashSet> {
    let n = game.n();
    check_budget(n)?;
    if epsilon.len() != n {
        return Err(Error::DimensionMismatch {
            what: "shock draw",
            expected: n,
            found: epsilon.len(),
        });
    }
    let payoffs = game.payoffs(alloc);
    let masks = enumerate_masks(&payoffs, epsilon);
    let (least, greatest) = lattice_extremes(&masks, n, game.check_supermodular(alloc).passed())?;
    Ok(NashSet {
        equilibria: masks.iter().map(|&m| to_vec(m, n)).collect(),
        least: to_vec(least, n),
        greatest: to_vec(greatest, n),
        epsilon_draw: epsilon.to_vec(),
    })
}

fn lattice_extremes(masks: &[u32], n: usize, supermodular: bool) -> Result<(u32, u32)> {
    if masks.is_empty() {
        return Err(Error::InternalConsistency(format!(
            "no pure equilibrium among {} profiles{}",
            1u64 << n,
            if supermodular { " of a supermodular game" } else { "" }
        )));
    }
    let meet = masks.iter().fold(u32::MAX, |acc, &m| acc & m);
    let join = masks.iter().fold(0, |acc, &m| acc | m);
    if !masks.contains(&meet) || !masks.contains(&join) {
        return Err(Error::InternalConsistency(
            "equilibrium set has no least or greatest element".into(),
        ));
    }
    Ok((meet, join))
}

fn br_iterate(payoffs: &Payoffs, eps: &[f64], start: u32) -> u32 {
    let n = payoffs.len();
    let mut mask = start;
    // monotone iterations on {0,1}^N settle within N+1 rounds
    for _ in 0..=2 * n {
        let next = (0..n).fold(0u32, |acc, i| {
            if best_response(payoffs, eps, i, mask) {
                acc | 1 << i
            } else {
                acc
            }
        });
        if next == mask {
            return mask;
        }
        mask = next;
    }
    mask
}

/// Least and greatest Nash equilibria by synchronous best-response
/// iteration from all-zeros and all-ones.
pub fn extremal_nash_br(game: &Game, alloc: &Allocation, epsilon: &[f64]) -> Result<(Vec<u8>, Vec<u8>)> {
    let n = game.n();
    if n > 32 {
        return Err(Error::InvalidInput("best-response bitmask supports at most 32 units".into()));
    }
    game.require_supermodular(alloc)?;
    let payoffs = game.payoffs(alloc);
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let lo = br_iterate(&payoffs, epsilon, 0);
    let hi = br_iterate(&payoffs, epsilon, all);
    Ok((to_vec(lo, n), to_vec(hi, n)))
}

/// Per-unit events of one shock draw, as bitmasks over units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawEvents {
    pub least: u32,
    pub greatest: u32,
    /// Some equilibrium has `y_i = 1`.
    pub some_one: u32,
    /// Some equilibrium has `y_i = 0`.
    pub some_zero: u32,
    /// Some equilibrium has `y_i = 1` and none has `y_i = 0`.
    pub forced_one: u32,
    pub equilibria: usize,
    /// `min` and `max` of `Σ_i y_i` over the equilibrium set.
    pub min_total: u32,
    pub max_total: u32,
}

/// Enumerates the equilibria of shock draw `draw` of `seed` and summarizes them.
pub fn draw_events(game: &Game, alloc: &Allocation, seed: u64, draw: u64) -> Result<DrawEvents> {
    let n = game.n();
    check_budget(n)?;
    let payoffs = game.payoffs(alloc);
    let eps = draw_shocks(game, seed, draw);
    events_for(&payoffs, &eps, n, game.check_supermodular(alloc).passed())
}

/// Shock vector of draw `draw` under `seed`.
pub fn draw_shocks(game: &Game, seed: u64, draw: u64) -> Vec<f64> {
    let mut rng = task_rng(seed, draw);
    (0..game.n()).map(|_| game.shock().sample(&mut rng)).collect()
}

fn events_for(payoffs: &Payoffs, eps: &[f64], n: usize, supermodular: bool) -> Result<DrawEvents> {
    let masks = enumerate_masks(payoffs, eps);
    let (least, greatest) = lattice_extremes(&masks, n, supermodular)?;
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let some_one = masks.iter().fold(0, |acc, &m| acc | m);
    let some_zero = masks.iter().fold(0, |acc, &m| acc | (!m & full));
    let forced_one = some_one & !some_zero & full;
    let totals = masks.iter().map(|m| m.count_ones());
    Ok(DrawEvents {
        least,
        greatest,
        some_one,
        some_zero,
        forced_one,
        equilibria: masks.len(),
        min_total: totals.clone().min().unwrap_or(0),
        max_total: totals.max().unwrap_or(0),
    })
}

/// Monte Carlo per-unit bounds over `draws` shock draws:
/// `upper_i` is the frequency with which some equilibrium has `y_i = 1`,
/// `lower_i = 1 -` the frequency with which some equilibrium has `y_i = 0`.
pub fn bound_probabilities_mc(game: &Game, alloc: &Allocation, draws: usize, seed: u64) -> Result<UnitBounds> {
    let n = game.n();
    check_budget(n)?;
    let payoffs = game.payoffs(alloc);
    let supermodular = game.check_supermodular(alloc).passed();
    let events: Vec<DrawEvents> = (0..draws as u64)
        .into_par_iter()
        .map(|d| {
            let eps = draw_shocks(game, seed, d);
            events_for(&payoffs, &eps, n, supermodular)
        })
        .collect::<Result<_>>()?;
    let mut ones = vec![0usize; n];
    let mut zeros = vec![0usize; n];
    for e in &events {
        for i in 0..n {
            ones[i] += (e.some_one >> i & 1) as usize;
            zeros[i] += (e.some_zero >> i & 1) as usize;
        }
    }
    let r = draws.max(1) as f64;
    Ok(UnitBounds {
        lower: zeros.iter().map(|&c| 1.0 - c as f64 / r).collect(),
        upper: ones.iter().map(|&c| c as f64 / r).collect(),
        draws,
    })
}
