//! Equilibrium welfare and its identified interval across selection mechanisms.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{residual, solve_greatest, solve_least, CcpProfile, SolverConfig};
use crate::error::Result;
use crate::game::{Allocation, Game, Payoffs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Engagement,
    Utilitarian,
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::Engagement => "engagement",
            Objective::Utilitarian => "utilitarian",
        })
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "engagement" => Ok(Objective::Engagement),
            "utilitarian" => Ok(Objective::Utilitarian),
            other => Err(format!("unknown objective `{other}`")),
        }
    }
}

/// Welfare interval over all equilibrium selection mechanisms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareBounds {
    pub lower: f64,
    pub upper: f64,
    pub least_profile: CcpProfile,
    pub greatest_profile: CcpProfile,
    pub objective: Objective,
    /// Upper bound with the lower bound's first term reused verbatim; only
    /// filled when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal_upper: Option<f64>,
}

/// Mean choice probability.
pub fn engagement_welfare(sigma: &CcpProfile) -> f64 {
    if sigma.is_empty() {
        return 0.0;
    }
    sigma.as_slice().iter().sum::<f64>() / sigma.len() as f64
}

fn quadratic_term(payoffs: &Payoffs, left: &[f64], right: &[f64]) -> f64 {
    payoffs
        .beta
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().map(|&(j, b)| b * left[i] * right[j]).sum::<f64>())
        .sum()
}

fn utilitarian_from_payoffs(payoffs: &Payoffs, sigma: &[f64]) -> f64 {
    let n = sigma.len() as f64;
    let linear: f64 = payoffs.alpha.iter().zip(sigma).map(|(a, s)| a * s).sum();
    (linear + quadratic_term(payoffs, sigma, sigma)) / n
}

/// Average expected deterministic utility at an equilibrium profile. Shocks
/// are independent, so joint choice probabilities factor into products.
pub fn utilitarian_welfare(sigma: &CcpProfile, game: &Game, alloc: &Allocation) -> f64 {
    let tol = SolverConfig::default().tol;
    let r = residual(sigma, game, alloc);
    if r > tol {
        log::warn!("utilitarian welfare evaluated off equilibrium (residual {r:e})");
    }
    utilitarian_from_payoffs(&game.payoffs(alloc), sigma.as_slice())
}

pub fn engagement_bounds(
    game: &Game,
    alloc: &Allocation,
    cfg: &SolverConfig,
) -> Result<WelfareBounds> {
    let least = solve_least(game, alloc, cfg)?.profile;
    let greatest = solve_greatest(game, alloc, cfg)?.profile;
    Ok(WelfareBounds {
        lower: engagement_welfare(&least),
        upper: engagement_welfare(&greatest),
        least_profile: least,
        greatest_profile: greatest,
        objective: Objective::Engagement,
        literal_upper: None,
    })
}

/// Utilitarian welfare interval from the two extremal profiles.
///
/// The lower bound weights `α_i` by the least profile when `α_i > 0` and by
/// the greatest profile otherwise; the upper bound flips that case split.
/// With `literal_upper` set, the variant that reuses the lower bound's first
/// term in the upper bound is reported alongside.
pub fn utilitarian_bounds(
    game: &Game,
    alloc: &Allocation,
    cfg: &SolverConfig,
    literal_upper: bool,
) -> Result<WelfareBounds> {
    let least = solve_least(game, alloc, cfg)?.profile;
    let greatest = solve_greatest(game, alloc, cfg)?.profile;
    let payoffs = game.payoffs(alloc);
    let n = game.n() as f64;
    let (lo, hi) = (least.as_slice(), greatest.as_slice());

    let mut first_lower = 0.0;
    let mut first_upper = 0.0;
    for (i, &a) in payoffs.alpha.iter().enumerate() {
        if a > 0.0 {
            first_lower += a * lo[i];
            first_upper += a * hi[i];
        } else {
            first_lower += a * hi[i];
            first_upper += a * lo[i];
        }
    }
    let second_lower = quadratic_term(&payoffs, lo, lo);
    let second_upper = quadratic_term(&payoffs, hi, hi);

    Ok(WelfareBounds {
        lower: (first_lower + second_lower) / n,
        upper: (first_upper + second_upper) / n,
        least_profile: least,
        greatest_profile: greatest,
        objective: Objective::Utilitarian,
        literal_upper: literal_upper.then(|| (first_lower + second_upper) / n),
    })
}

pub fn welfare_bounds(
    game: &Game,
    alloc: &Allocation,
    objective: Objective,
    cfg: &SolverConfig,
    literal_upper: bool,
) -> Result<WelfareBounds> {
    match objective {
        Objective::Engagement => engagement_bounds(game, alloc, cfg),
        Objective::Utilitarian => utilitarian_bounds(game, alloc, cfg, literal_upper),
    }
}

/// Worst-case welfare of a profile pair for an objective, using only the
/// least profile for engagement.
pub(crate) fn worst_case_value(
    objective: Objective,
    payoffs: &Payoffs,
    least: &[f64],
    greatest: Option<&[f64]>,
) -> f64 {
    match objective {
        Objective::Engagement => least.iter().sum::<f64>() / least.len().max(1) as f64,
        Objective::Utilitarian => {
            let hi = greatest.expect("utilitarian lower bound needs the greatest profile");
            let n = least.len() as f64;
            let first: f64 = payoffs
                .alpha
                .iter()
                .enumerate()
                .map(|(i, &a)| if a > 0.0 { a * least[i] } else { a * hi[i] })
                .sum();
            (first + quadratic_term(payoffs, least, least)) / n
        }
    }
}
