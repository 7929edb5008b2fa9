//! The game environment and its utility primitives.
//!
//! Unit `i`'s payoff from action 1 is `α_i + Σ_{j≠i} β_ij y_j - ε_i` with
//!
//! ```text
//! α_i  = θ0 + θ1 D_i + X_iᵀθ2 + X_iᵀθ3 D_i + (θ4/|N_i|) Σ_{j∈N_i} m_ij D_j
//! β_ij = (θ5 + θ6 D_i D_j) m_ij G_ij / |N_i|
//! ```
//!
//! where `m_ij = 1/(1 + ‖X_i - X_j‖₁)` weights spillovers by similarity and
//! every neighbor-averaged term is zero for isolated units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;
use crate::shock::ShockDistribution;

/// Similarity weight `1 / (1 + ‖x_i - x_j‖₁)`, in `(0, 1]`.
pub fn similarity(x_i: &[f64], x_j: &[f64]) -> Result<f64> {
    if x_i.len() != x_j.len() {
        return Err(Error::DimensionMismatch {
            what: "covariate vector",
            expected: x_i.len(),
            found: x_j.len(),
        });
    }
    let l1: f64 = x_i.iter().zip(x_j).map(|(a, b)| (a - b).abs()).sum();
    Ok(1.0 / (1.0 + l1))
}

/// `N × K` matrix of nonnegative, finite covariates stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariates {
    n: usize,
    k: usize,
    values: Vec<f64>,
}

impl Covariates {
    pub fn new(n: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * k {
            return Err(Error::DimensionMismatch {
                what: "covariate matrix entries",
                expected: n * k,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "covariate ({}, {}) = {} is not a finite nonnegative number",
                pos / k.max(1),
                pos % k.max(1),
                values[pos]
            )));
        }
        Ok(Covariates { n, k, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    what: "covariate row length",
                    expected: k,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Covariates::new(n, k, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let values = perm.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Covariates {
            n: self.n,
            k: self.k,
            values,
        }
    }
}

/// Structural utility parameters; `theta2` and `theta3` carry one entry per covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub theta0: f64,
    pub theta1: f64,
    pub theta2: Vec<f64>,
    pub theta3: Vec<f64>,
    pub theta4: f64,
    pub theta5: f64,
    pub theta6: f64,
}

impl Theta {
    /// All-zero parameters for `k` covariates.
    pub fn zeros(k: usize) -> Self {
        Theta {
            theta0: 0.0,
            theta1: 0.0,
            theta2: vec![0.0; k],
            theta3: vec![0.0; k],
            theta4: 0.0,
            theta5: 0.0,
            theta6: 0.0,
        }
    }

    pub fn k(&self) -> usize {
        self.theta2.len()
    }

    /// Number of scalar parameters, `2K + 5`.
    pub fn dim(&self) -> usize {
        2 * self.k() + 5
    }

    /// Flattens as `(θ0, θ1, θ2, θ3, θ4, θ5, θ6)`, the regressor column order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.theta0);
        v.push(self.theta1);
        v.extend_from_slice(&self.theta2);
        v.extend_from_slice(&self.theta3);
        v.push(self.theta4);
        v.push(self.theta5);
        v.push(self.theta6);
        v
    }

    pub fn from_slice(v: &[f64], k: usize) -> Result<Self> {
        if v.len() != 2 * k + 5 {
            return Err(Error::DimensionMismatch {
                what: "parameter vector",
                expected: 2 * k + 5,
                found: v.len(),
            });
        }
        Ok(Theta {
            theta0: v[0],
            theta1: v[1],
            theta2: v[2..2 + k].to_vec(),
            theta3: v[2 + k..2 + 2 * k].to_vec(),
            theta4: v[2 + 2 * k],
            theta5: v[3 + 2 * k],
            theta6: v[4 + 2 * k],
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta2.len() != self.theta3.len() {
            return Err(Error::DimensionMismatch {
                what: "theta3 length",
                expected: self.theta2.len(),
                found: self.theta3.len(),
            });
        }
        if self.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("theta has non-finite entries".into()));
        }
        Ok(())
    }
}

/// Binary treatment vector with its capacity bound.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Allocation {
    d: Vec<bool>,
    kappa: usize,
}

impl Allocation {
    pub fn new(d: Vec<bool>, kappa: usize) -> Result<Self> {
        let treated = d.iter().filter(|&&x| x).count();
        if treated > kappa {
            return Err(Error::InvalidInput(format!(
                "{treated} treated units exceed capacity {kappa}"
            )));
        }
        Ok(Allocation { d, kappa })
    }

    pub fn zeros(n: usize, kappa: usize) -> Self {
        Allocation {
            d: vec![false; n],
            kappa,
        }
    }

    pub fn from_treated(n: usize, treated: &[usize], kappa: usize) -> Result<Self> {
        let mut d = vec![false; n];
        for &i in treated {
            if i >= n {
                return Err(Error::InvalidInput(format!("unit {i} outside 0..{n}")));
            }
            d[i] = true;
        }
        Allocation::new(d, kappa)
    }

    /// Unconstrained allocation (`κ = N`).
    pub fn unconstrained(d: Vec<bool>) -> Self {
        let kappa = d.len();
        Allocation { d, kappa }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn is_treated(&self, i: usize) -> bool {
        self.d[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.d
    }

    pub fn treated_count(&self) -> usize {
        self.d.iter().filter(|&&x| x).count()
    }

    pub fn treated(&self) -> Vec<usize> {
        (0..self.d.len()).filter(|&i| self.d[i]).collect()
    }

    /// Copy with unit `i` treated.
    pub fn with_treated(&self, i: usize) -> Result<Self> {
        if self.d[i] {
            return Err(Error::AlreadyTreated(i));
        }
        let mut d = self.d.clone();
        d[i] = true;
        Allocation::new(d, self.kappa)
    }

    pub fn to_indicator(&self) -> Vec<f64> {
        self.d.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect()
    }
}

/// Negative interaction terms found by [`Game::check_supermodular`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SupermodularityReport {
    pub violations: Vec<(usize, usize, f64)>,
}

impl SupermodularityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Payoff primitives `α` and sparse `β` under one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Payoffs {
    pub alpha: Vec<f64>,
    /// Row `i` holds `(j, β_ij)` for each out-neighbor `j`.
    pub beta: Vec<Vec<(usize, f64)>>,
}

impl Payoffs {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `α_i + Σ_j β_ij s_j`.
    pub fn index(&self, i: usize, s: &[f64]) -> f64 {
        self.beta[i]
            .iter()
            .fold(self.alpha[i], |acc, &(j, b)| acc + b * s[j])
    }

    pub fn is_supermodular(&self) -> bool {
        self.beta.iter().flatten().all(|&(_, b)| b >= 0.0)
    }
}

/// The immutable environment `(X, G, θ, F_ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    network: Network,
    covariates: Covariates,
    theta: Theta,
    shock: ShockDistribution,
    /// `m_ij` aligned with `network.neighbors(i)`.
    weights: Vec<Vec<f64>>,
    always_supermodular: bool,
}

pub(crate) fn similarity_weights(network: &Network, covariates: &Covariates) -> Vec<Vec<f64>> {
    (0..network.len())
        .map(|i| {
            network
                .neighbors(i)
                .iter()
                .map(|&j| similarity(covariates.row(i), covariates.row(j)).expect("same K"))
                .collect()
        })
        .collect()
}

impl Game {
    pub fn new(
        network: Network,
        covariates: Covariates,
        theta: Theta,
        shock: ShockDistribution,
    ) -> Result<Self> {
        if covariates.n() != network.len() {
            return Err(Error::DimensionMismatch {
                what: "covariate rows vs network size",
                expected: network.len(),
                found: covariates.n(),
            });
        }
        theta.validate()?;
        if theta.k() != covariates.k() {
            return Err(Error::DimensionMismatch {
                what: "theta2 length vs covariate columns",
                expected: covariates.k(),
                found: theta.k(),
            });
        }
        let weights = similarity_weights(&network, &covariates);
        let has_links = network.max_degree() > 0;
        let always_supermodular =
            !has_links || (theta.theta5 >= 0.0 && theta.theta5 + theta.theta6 >= 0.0);
        Ok(Game {
            network,
            covariates,
            theta,
            shock,
            weights,
            always_supermodular,
        })
    }

    pub fn n(&self) -> usize {
        self.network.len()
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn covariates(&self) -> &Covariates {
        &self.covariates
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn shock(&self) -> ShockDistribution {
        self.shock
    }

    /// Same environment with different parameters.
    pub fn with_theta(&self, theta: Theta) -> Result<Self> {
        Game::new(
            self.network.clone(),
            self.covariates.clone(),
            theta,
            self.shock,
        )
    }

    /// True when `β_ij ≥ 0` holds under every possible allocation.
    pub fn supermodular_for_all_allocations(&self) -> bool {
        self.always_supermodular
    }

    pub fn similarity_weight(&self, i: usize, j: usize) -> Option<f64> {
        self.network
            .neighbors(i)
            .binary_search(&j)
            .ok()
            .map(|pos| self.weights[i][pos])
    }

    fn check_alloc(&self, alloc: &Allocation) {
        assert_eq!(alloc.len(), self.n(), "allocation length must equal N");
    }

    pub fn alpha(&self, i: usize, alloc: &Allocation) -> f64 {
        self.check_alloc(alloc);
        let t = &self.theta;
        let x = self.covariates.row(i);
        let d_i = if alloc.is_treated(i) { 1.0 } else { 0.0 };
        let x2: f64 = x.iter().zip(&t.theta2).map(|(a, b)| a * b).sum();
        let x3: f64 = x.iter().zip(&t.theta3).map(|(a, b)| a * b).sum();
        let nbrs = self.network.neighbors(i);
        let spill = if nbrs.is_empty() {
            0.0
        } else {
            let s: f64 = nbrs
                .iter()
                .zip(&self.weights[i])
                .filter(|(&j, _)| alloc.is_treated(j))
                .map(|(_, &m)| m)
                .sum();
            t.theta4 * s / nbrs.len() as f64
        };
        t.theta0 + t.theta1 * d_i + x2 + x3 * d_i + spill
    }

    /// `β_ij`; panics when `i == j`.
    pub fn beta(&self, i: usize, j: usize, alloc: &Allocation) -> f64 {
        assert_ne!(i, j, "beta is undefined on the diagonal");
        self.check_alloc(alloc);
        match self.similarity_weight(i, j) {
            None => 0.0,
            Some(m) => {
                let both = alloc.is_treated(i) && alloc.is_treated(j);
                let t = &self.theta;
                let coef = if both { t.theta5 + t.theta6 } else { t.theta5 };
                coef * m / self.network.degree(i) as f64
            }
        }
    }

    pub fn payoffs(&self, alloc: &Allocation) -> Payoffs {
        self.check_alloc(alloc);
        let alpha = (0..self.n()).map(|i| self.alpha(i, alloc)).collect();
        let t = &self.theta;
        let beta = (0..self.n())
            .map(|i| {
                let nbrs = self.network.neighbors(i);
                let deg = nbrs.len() as f64;
                nbrs.iter()
                    .zip(&self.weights[i])
                    .map(|(&j, &m)| {
                        let both = alloc.is_treated(i) && alloc.is_treated(j);
                        let coef = if both { t.theta5 + t.theta6 } else { t.theta5 };
                        (j, coef * m / deg)
                    })
                    .collect()
            })
            .collect();
        Payoffs { alpha, beta }
    }

    /// Lists every linked ordered pair with `β_ij < 0` under `alloc`.
    pub fn check_supermodular(&self, alloc: &Allocation) -> SupermodularityReport {
        let payoffs = self.payoffs(alloc);
        let violations = payoffs
            .beta
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .filter(|(_, b)| *b < 0.0)
                    .map(move |&(j, b)| (i, j, b))
            })
            .collect();
        SupermodularityReport { violations }
    }

    pub(crate) fn require_supermodular(&self, alloc: &Allocation) -> Result<()> {
        if self.always_supermodular {
            return Ok(());
        }
        let report = self.check_supermodular(alloc);
        if report.passed() {
            Ok(())
        } else {
            Err(Error::SupermodularityViolation(report))
        }
    }

    /// Same game with units relabelled so that old unit `perm[k]` becomes unit `k`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Game::new(
            self.network.permuted(perm),
            self.covariates.permuted(perm),
            self.theta.clone(),
            self.shock,
        )
        .expect("permutation preserves validity")
    }
}
