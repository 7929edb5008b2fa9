//! CCP best-response map and monotone fixed-point iteration.
//!
//! Under strategic complementarity the map `Ω_i(σ) = F(α_i + Σ_j β_ij σ_j)`
//! is monotone on `[0,1]^N`, so iterating it from the all-zeros profile
//! produces a nondecreasing sequence converging to the least equilibrium,
//! and from all-ones a nonincreasing sequence converging to the greatest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Allocation, Game, Payoffs};
use crate::shock::ShockDistribution;

/// Conditional choice probability profile, one entry in `[0,1]` per unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CcpProfile(Vec<f64>);

impl CcpProfile {
    pub fn new(sigma: Vec<f64>) -> Result<Self> {
        if let Some(i) = sigma.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidInput(format!(
                "ccp entry {i} = {} outside [0, 1]",
                sigma[i]
            )));
        }
        Ok(CcpProfile(sigma))
    }

    pub fn zeros(n: usize) -> Self {
        CcpProfile(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        CcpProfile(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &CcpProfile) -> f64 {
        sup_distance(&self.0, &other.0)
    }

    pub fn dominated_by(&self, other: &CcpProfile, slack: f64) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a <= *b + slack)
    }
}

impl std::ops::Index<usize> for CcpProfile {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPoint {
    FromZeros,
    FromOnes,
    CustomStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub profile: CcpProfile,
    /// Number of map evaluations performed.
    pub iterations: usize,
    /// `‖σ - Ω(σ)‖∞` at the returned profile.
    pub residual: f64,
    /// Last successive-iterate distance; convergence is declared on this.
    pub step: f64,
    pub converged: bool,
    pub direction: StartPoint,
}

/// One application of the best-response map on raw payoffs.
pub fn apply_map(payoffs: &Payoffs, shock: ShockDistribution, sigma: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = shock.cdf(payoffs.index(i, sigma));
    }
}

/// `Ω(σ)` for the game under `alloc`.
pub fn ccp_map(sigma: &CcpProfile, game: &Game, alloc: &Allocation) -> CcpProfile {
    let payoffs = game.payoffs(alloc);
    let mut out = vec![0.0; sigma.len()];
    apply_map(&payoffs, game.shock(), sigma.as_slice(), &mut out);
    CcpProfile(out)
}

/// `‖σ - Ω(σ)‖∞`.
pub fn residual(sigma: &CcpProfile, game: &Game, alloc: &Allocation) -> f64 {
    sigma.distance(&ccp_map(sigma, game, alloc))
}

/// Iterates `σ ← Ω(σ)` from `start` until successive iterates are within
/// `cfg.tol`. `observer` sees every `(t, σ^t, σ^{t+1})` pair.
pub fn iterate_with<F>(
    payoffs: &Payoffs,
    shock: ShockDistribution,
    start: Vec<f64>,
    direction: StartPoint,
    cfg: &SolverConfig,
    mut observer: F,
) -> Result<FixedPointReport>
where
    F: FnMut(usize, &[f64], &[f64]),
{
    let mut current = start;
    let mut next = vec![0.0; current.len()];
    let mut step = f64::INFINITY;
    for t in 0..cfg.max_iter {
        apply_map(payoffs, shock, &current, &mut next);
        observer(t, &current, &next);
        step = sup_distance(&current, &next);
        if step <= cfg.tol {
            return Ok(FixedPointReport {
                profile: CcpProfile(current),
                iterations: t + 1,
                residual: step,
                step,
                converged: true,
                direction,
            });
        }
        std::mem::swap(&mut current, &mut next);
    }
    apply_map(payoffs, shock, &current, &mut next);
    let residual = sup_distance(&current, &next);
    Err(Error::NonConvergence(Box::new(FixedPointReport {
        profile: CcpProfile(current),
        iterations: cfg.max_iter,
        residual,
        step,
        converged: false,
        direction,
    })))
}

fn solve_extremal(
    game: &Game,
    alloc: &Allocation,
    cfg: &SolverConfig,
    direction: StartPoint,
) -> Result<FixedPointReport> {
    game.require_supermodular(alloc)?;
    let payoffs = game.payoffs(alloc);
    let start = match direction {
        StartPoint::FromOnes => vec![1.0; game.n()],
        _ => vec![0.0; game.n()],
    };
    iterate_with(&payoffs, game.shock(), start, direction, cfg, |_, _, _| {})
}

/// Least equilibrium CCP profile, iterating from all zeros.
pub fn solve_least(game: &Game, alloc: &Allocation, cfg: &SolverConfig) -> Result<FixedPointReport> {
    solve_extremal(game, alloc, cfg, StartPoint::FromZeros)
}

/// Greatest equilibrium CCP profile, iterating from all ones.
pub fn solve_greatest(
    game: &Game,
    alloc: &Allocation,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    solve_extremal(game, alloc, cfg, StartPoint::FromOnes)
}

/// Iterates from an arbitrary start. Supermodularity is not required, but
/// without it the limit need not exist.
pub fn solve_from(
    game: &Game,
    alloc: &Allocation,
    start: &CcpProfile,
    cfg: &SolverConfig,
) -> Result<FixedPointReport> {
    let payoffs = game.payoffs(alloc);
    iterate_with(
        &payoffs,
        game.shock(),
        start.as_slice().to_vec(),
        StartPoint::CustomStart,
        cfg,
        |_, _, _| {},
    )
}
