//! Two-step quasi-maximum-likelihood estimation of the utility parameters.
//!
//! Step one estimates each unit's equilibrium choice probability from the
//! single observed network. Step two plugs those estimates into the
//! equilibrium index, which turns the likelihood into a single-index binary
//! choice model `Pr(Y_i = 1) = F(Ẑ_iᵀθ)` and maximizes it by Newton ascent
//! with the analytic gradient and Hessian.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::equilibrium::CcpProfile;
use crate::error::{Error, Result};
use crate::game::{similarity_weights, Covariates, Theta};
use crate::network::Network;
use crate::shock::ShockDistribution;

/// Clamp applied to first-stage probabilities.
pub const FIRST_STAGE_CLAMP: f64 = 1e-6;
/// Clamp applied to model probabilities before taking logs.
pub const LIKELIHOOD_CLAMP: f64 = 1e-12;
/// 0.05 critical value of the chi-square distribution with 3 degrees of freedom.
pub const CHI_SQUARE_CRITICAL_005: f64 = 7.815;

/// One-shot training data from a single network.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPanel {
    y: Vec<bool>,
    d: Vec<bool>,
    covariates: Covariates,
    network: Network,
    weights: Vec<Vec<f64>>,
}

impl ObservedPanel {
    pub fn new(y: Vec<bool>, d: Vec<bool>, covariates: Covariates, network: Network) -> Result<Self> {
        let n = network.len();
        for (what, len) in [("choices", y.len()), ("treatments", d.len()), ("covariate rows", covariates.n())] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        let weights = similarity_weights(&network, &covariates);
        Ok(ObservedPanel {
            y,
            d,
            covariates,
            network,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.network.len()
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn d(&self) -> &[bool] {
        &self.d
    }

    pub fn covariates(&self) -> &Covariates {
        &self.covariates
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn y_indicator(&self) -> Vec<f64> {
        self.y.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        ObservedPanel::new(
            perm.iter().map(|&i| self.y[i]).collect(),
            perm.iter().map(|&i| self.d[i]).collect(),
            self.covariates.permuted(perm),
            self.network.permuted(perm),
        )
        .expect("permutation preserves dimensions")
    }

    /// Unweighted neighbor means of the covariates and of the treatment.
    fn neighbor_means(&self, i: usize) -> (Vec<f64>, f64) {
        let nbrs = self.network.neighbors(i);
        let k = self.covariates.k();
        if nbrs.is_empty() {
            return (vec![0.0; k], 0.0);
        }
        let mut xs = vec![0.0; k];
        let mut ds = 0.0;
        for &j in nbrs {
            for (acc, v) in xs.iter_mut().zip(self.covariates.row(j)) {
                *acc += v;
            }
            if self.d[j] {
                ds += 1.0;
            }
        }
        let deg = nbrs.len() as f64;
        xs.iter_mut().for_each(|v| *v /= deg);
        (xs, ds / deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstStageMethod {
    Frequency,
    FlexibleLogit,
    Oracle,
}

impl std::str::FromStr for FirstStageMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "frequency" => Ok(FirstStageMethod::Frequency),
            "flexible_logit" | "flexible-logit" => Ok(FirstStageMethod::FlexibleLogit),
            "oracle" => Ok(FirstStageMethod::Oracle),
            other => Err(format!("unknown first-stage method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStageConfig {
    /// Decimal places used to bin continuous type signatures.
    pub frequency_decimals: u32,
    /// Groups smaller than this fall back to the global mean.
    pub min_group_size: usize,
    /// True profile for the oracle method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<CcpProfile>,
    pub logit: OptimizerConfig,
}

impl Default for FirstStageConfig {
    fn default() -> Self {
        FirstStageConfig {
            frequency_decimals: 1,
            min_group_size: 1,
            oracle: None,
            logit: OptimizerConfig::default(),
        }
    }
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(FIRST_STAGE_CLAMP, 1.0 - FIRST_STAGE_CLAMP)
}

/// Design matrix of the flexible logit first stage:
/// `[1, X_i, X_i², D_i, mean_{N_i} X, mean_{N_i} D, X_i ⊗ mean_{N_i} X]`.
pub fn flexible_logit_design(panel: &ObservedPanel) -> DMatrix<f64> {
    let n = panel.n();
    let k = panel.covariates.k();
    let cols = 1 + 2 * k + 1 + k + 1 + k * k;
    let mut w = DMatrix::zeros(n, cols);
    for i in 0..n {
        let x = panel.covariates.row(i);
        let (mx, md) = panel.neighbor_means(i);
        let mut row = Vec::with_capacity(cols);
        row.push(1.0);
        row.extend_from_slice(x);
        row.extend(x.iter().map(|v| v * v));
        row.push(if panel.d[i] { 1.0 } else { 0.0 });
        row.extend_from_slice(&mx);
        row.push(md);
        for a in x {
            for b in &mx {
                row.push(a * b);
            }
        }
        for (c, v) in row.into_iter().enumerate() {
            w[(i, c)] = v;
        }
    }
    w
}

/// First-stage estimate of the equilibrium choice probabilities.
pub fn first_stage_ccp(
    panel: &ObservedPanel,
    method: FirstStageMethod,
    config: &FirstStageConfig,
) -> Result<CcpProfile> {
    let sigma = match method {
        FirstStageMethod::Oracle => {
            let truth = config
                .oracle
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("oracle first stage needs a true profile".into()))?;
            if truth.len() != panel.n() {
                return Err(Error::DimensionMismatch {
                    what: "oracle profile",
                    expected: panel.n(),
                    found: truth.len(),
                });
            }
            truth.as_slice().iter().map(|&p| clamp_probability(p)).collect()
        }
        FirstStageMethod::FlexibleLogit => {
            let w = flexible_logit_design(panel);
            let y = panel.y_indicator();
            let shock = ShockDistribution::Logistic;
            let start = vec![0.0; w.ncols()];
            let fit = maximize(&w, &y, shock, &config.logit, start)?;
            let beta = DVector::from_vec(fit.theta);
            (&w * beta)
                .iter()
                .map(|&a| clamp_probability(shock.cdf(a)))
                .collect()
        }
        FirstStageMethod::Frequency => frequency_estimate(panel, config),
    };
    CcpProfile::new(sigma)
}

fn frequency_estimate(panel: &ObservedPanel, config: &FirstStageConfig) -> Vec<f64> {
    let scale = 10f64.powi(config.frequency_decimals as i32);
    let bin = |v: f64| (v * scale).round() as i64;
    let signatures: Vec<Vec<i64>> = (0..panel.n())
        .map(|i| {
            let (mx, md) = panel.neighbor_means(i);
            let mut sig = vec![i64::from(panel.d[i])];
            sig.extend(panel.covariates.row(i).iter().map(|&v| bin(v)));
            sig.extend(mx.iter().map(|&v| bin(v)));
            sig.push(bin(md));
            sig
        })
        .collect();
    let mut groups: BTreeMap<&[i64], (usize, usize)> = BTreeMap::new();
    for (i, sig) in signatures.iter().enumerate() {
        let e = groups.entry(sig.as_slice()).or_default();
        e.0 += 1;
        e.1 += usize::from(panel.y[i]);
    }
    let global = panel.y.iter().filter(|&&v| v).count() as f64 / panel.n().max(1) as f64;
    let mut sparse_groups = 0;
    let out = signatures
        .iter()
        .map(|sig| {
            let (count, ones) = groups[sig.as_slice()];
            if count < config.min_group_size {
                sparse_groups += 1;
                clamp_probability(global)
            } else {
                clamp_probability(ones as f64 / count as f64)
            }
        })
        .collect();
    if sparse_groups > 0 {
        log::warn!("{sparse_groups} units fell back to the global mean (group size below {})", config.min_group_size);
    }
    out
}

/// Second-stage design: row `i` is
/// `(1, D_i, X_i, X_i D_i, avg m D_j, avg m σ̂_j, avg m σ̂_j D_i D_j)`
/// with neighbor averages over `N_i` weighted by similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressors {
    pub z: DMatrix<f64>,
}

impl Regressors {
    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.z.row(i).iter().copied().collect()
    }
}

pub fn build_regressors(panel: &ObservedPanel, sigma_hat: &CcpProfile) -> Result<Regressors> {
    let n = panel.n();
    if sigma_hat.len() != n {
        return Err(Error::DimensionMismatch {
            what: "first-stage profile",
            expected: n,
            found: sigma_hat.len(),
        });
    }
    let k = panel.covariates.k();
    let cols = 2 * k + 5;
    let mut z = DMatrix::zeros(n, cols);
    for i in 0..n {
        let d_i = if panel.d[i] { 1.0 } else { 0.0 };
        let x = panel.covariates.row(i);
        z[(i, 0)] = 1.0;
        z[(i, 1)] = d_i;
        for c in 0..k {
            z[(i, 2 + c)] = x[c];
            z[(i, 2 + k + c)] = x[c] * d_i;
        }
        let nbrs = panel.network.neighbors(i);
        if !nbrs.is_empty() {
            let deg = nbrs.len() as f64;
            let (mut treat, mut play, mut joint) = (0.0, 0.0, 0.0);
            for (&j, &m) in nbrs.iter().zip(&panel.weights[i]) {
                let d_j = if panel.d[j] { 1.0 } else { 0.0 };
                treat += m * d_j;
                play += m * sigma_hat[j];
                joint += m * sigma_hat[j] * d_i * d_j;
            }
            z[(i, 2 + 2 * k)] = treat / deg;
            z[(i, 3 + 2 * k)] = play / deg;
            z[(i, 4 + 2 * k)] = joint / deg;
        }
    }
    Ok(Regressors { z })
}

/// Per-unit log-likelihood value, score and curvature in the index `a`.
/// Contributions whose probability is clamped are constant in `a`.
fn unit_terms(y: f64, a: f64, shock: ShockDistribution) -> (f64, f64, f64, bool) {
    let (w0, w1) = shock.hessian_weights(a);
    let density = shock.pdf(a);
    let (p1, p0) = (shock.cdf(a), shock.sf(a));
    let mut value = 0.0;
    let mut score = 0.0;
    let mut curvature = 0.0;
    let mut clamped = false;
    if y > 0.0 {
        if (LIKELIHOOD_CLAMP..=1.0 - LIKELIHOOD_CLAMP).contains(&p1) {
            value += y * p1.ln();
            score += y * density / p1;
            curvature += y * w0;
        } else {
            clamped = true;
            value += y * p1.clamp(LIKELIHOOD_CLAMP, 1.0 - LIKELIHOOD_CLAMP).ln();
        }
    }
    if y < 1.0 {
        let q = 1.0 - y;
        if (LIKELIHOOD_CLAMP..=1.0 - LIKELIHOOD_CLAMP).contains(&p0) {
            value += q * p0.ln();
            score -= q * density / p0;
            curvature -= q * w1;
        } else {
            clamped = true;
            value += q * p0.clamp(LIKELIHOOD_CLAMP, 1.0 - LIKELIHOOD_CLAMP).ln();
        }
    }
    (value, score, curvature, clamped)
}

fn indices(theta: &[f64], z: &DMatrix<f64>) -> DVector<f64> {
    z * DVector::from_column_slice(theta)
}

/// `(1/n) Σ y_i log F(Ẑ_iᵀθ) + (1 - y_i) log(1 - F(Ẑ_iᵀθ))`.
pub fn quasi_loglik(theta: &[f64], z: &DMatrix<f64>, y: &[f64], shock: ShockDistribution) -> f64 {
    let a = indices(theta, z);
    let n = y.len() as f64;
    a.iter()
        .zip(y)
        .map(|(&a, &y)| unit_terms(y, a, shock).0)
        .sum::<f64>()
        / n
}

/// Analytic gradient and Hessian of [`quasi_loglik`].
pub fn gradient_and_hessian(
    theta: &[f64],
    z: &DMatrix<f64>,
    y: &[f64],
    shock: ShockDistribution,
) -> (DVector<f64>, DMatrix<f64>) {
    let (_, g, h, _) = evaluate(theta, z, y, shock);
    (g, h)
}

fn evaluate(
    theta: &[f64],
    z: &DMatrix<f64>,
    y: &[f64],
    shock: ShockDistribution,
) -> (f64, DVector<f64>, DMatrix<f64>, usize) {
    let a = indices(theta, z);
    let n = y.len() as f64;
    let mut value = 0.0;
    let mut scores = DVector::zeros(y.len());
    let mut weighted = z.clone();
    let mut clamps = 0;
    for i in 0..y.len() {
        let (v, s, c, clamped) = unit_terms(y[i], a[i], shock);
        value += v;
        scores[i] = s;
        weighted.row_mut(i).scale_mut(c);
        clamps += usize::from(clamped);
    }
    let grad = z.tr_mul(&scores) / n;
    let hess = z.tr_mul(&weighted) / n;
    (value / n, grad, hess, clamps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Converged once the gradient sup-norm falls to this level.
    pub gradient_tol: f64,
    pub max_iter: usize,
    /// Each coordinate is projected onto `[-bound, bound]`.
    pub bound: f64,
    pub max_halvings: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            gradient_tol: 1e-8,
            max_iter: 200,
            bound: 50.0,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub theta: Vec<f64>,
    pub loglik: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub loglik_trace: Vec<f64>,
    pub clamp_events: usize,
}

/// Numerical rank from the singular values, relative to the largest.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let cutoff = max * 1e-10 * (m.nrows().max(m.ncols()) as f64);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Newton ascent with step halving and box projection.
pub fn maximize(
    z: &DMatrix<f64>,
    y: &[f64],
    shock: ShockDistribution,
    cfg: &OptimizerConfig,
    start: Vec<f64>,
) -> Result<NewtonOutcome> {
    let rank = numerical_rank(z);
    if rank < z.ncols() {
        return Err(Error::RankDeficient {
            rank,
            columns: z.ncols(),
        });
    }
    let project = |v: f64| v.clamp(-cfg.bound, cfg.bound);
    let mut theta: Vec<f64> = start.into_iter().map(project).collect();
    let (mut value, mut grad, mut hess, mut clamps) = evaluate(&theta, z, y, shock);
    let mut trace = vec![value];
    let mut iterations = 0;
    let mut converged = grad.amax() <= cfg.gradient_tol;

    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        let neg_hess = -&hess;
        let direction = match neg_hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => grad.clone(),
        };
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(direction.iter())
                .map(|(t, d)| project(t + step * d))
                .collect();
            let v = quasi_loglik(&candidate, z, y, shock);
            if v >= value {
                accepted = Some(candidate);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else { break };
        let stalled = next == theta;
        theta = next;
        (value, grad, hess, clamps) = evaluate(&theta, z, y, shock);
        trace.push(value);
        converged = grad.amax() <= cfg.gradient_tol;
        if stalled {
            break;
        }
    }
    if !converged {
        log::warn!(
            "Newton ascent stopped after {iterations} iterations with gradient norm {:e}",
            grad.amax()
        );
    }
    Ok(NewtonOutcome {
        theta,
        loglik: value,
        gradient_norm: grad.amax(),
        iterations,
        converged,
        loglik_trace: trace,
        clamp_events: clamps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub theta_hat: Theta,
    pub loglik: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub first_stage: FirstStageMethod,
    pub sigma_hat: CcpProfile,
    pub loglik_trace: Vec<f64>,
    /// Units whose likelihood probability hit the clamp at `theta_hat`.
    pub clamp_events: usize,
    pub shock: ShockDistribution,
}

/// Two-step estimator: first-stage CCPs, then Newton ascent on the quasi-likelihood.
/// A run that hits the iteration cap returns its best iterate with
/// `converged = false`.
pub fn fit_mle(
    panel: &ObservedPanel,
    first_stage: FirstStageMethod,
    first_stage_config: &FirstStageConfig,
    shock: ShockDistribution,
    optimizer: &OptimizerConfig,
) -> Result<FitReport> {
    let sigma_hat = first_stage_ccp(panel, first_stage, first_stage_config)?;
    fit_with_profile(panel, sigma_hat, first_stage, shock, optimizer)
}

/// Second stage only, given a first-stage profile.
pub fn fit_with_profile(
    panel: &ObservedPanel,
    sigma_hat: CcpProfile,
    first_stage: FirstStageMethod,
    shock: ShockDistribution,
    optimizer: &OptimizerConfig,
) -> Result<FitReport> {
    let reg = build_regressors(panel, &sigma_hat)?;
    let y = panel.y_indicator();
    let out = maximize(&reg.z, &y, shock, optimizer, vec![0.0; reg.dim()])?;
    Ok(FitReport {
        theta_hat: Theta::from_slice(&out.theta, panel.covariates.k())?,
        loglik: out.loglik,
        gradient_norm: out.gradient_norm,
        iterations: out.iterations,
        converged: out.converged,
        first_stage,
        sigma_hat,
        loglik_trace: out.loglik_trace,
        clamp_events: out.clamp_events,
        shock,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofRow {
    pub bin: usize,
    pub units: usize,
    pub observed: f64,
    pub expected: f64,
    pub statistic: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofTable {
    pub rows: Vec<GofRow>,
    pub critical_value: f64,
    pub skipped_bins: Vec<usize>,
    /// Describes the statistic; the binning and df are a convention.
    pub convention: String,
}

/// Pearson goodness-of-fit per bin of units: compares observed adopters
/// with the model's expected count `Σ F(Ẑ_iᵀθ̂)` over both outcome cells.
/// `bins[i]` is unit `i`'s bin label; empty bins are skipped.
pub fn gof_chisq(panel: &ObservedPanel, fit: &FitReport, bins: &[usize]) -> Result<GofTable> {
    if bins.len() != panel.n() {
        return Err(Error::DimensionMismatch {
            what: "bin labels",
            expected: panel.n(),
            found: bins.len(),
        });
    }
    let reg = build_regressors(panel, &fit.sigma_hat)?;
    let a = indices(&fit.theta_hat.to_vec(), &reg.z);
    let p: Vec<f64> = a.iter().map(|&v| fit.shock.cdf(v)).collect();
    gof_from_probabilities(panel.y(), &p, bins)
}

/// Same statistic from explicit model probabilities.
pub fn gof_from_probabilities(y: &[bool], p: &[f64], bins: &[usize]) -> Result<GofTable> {
    let nbins = bins.iter().copied().max().map_or(0, |m| m + 1);
    let mut units = vec![0usize; nbins];
    let mut observed = vec![0.0; nbins];
    let mut expected = vec![0.0; nbins];
    for i in 0..y.len() {
        units[bins[i]] += 1;
        observed[bins[i]] += if y[i] { 1.0 } else { 0.0 };
        expected[bins[i]] += p[i];
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for b in 0..nbins {
        if units[b] == 0 {
            log::warn!("goodness-of-fit bin {b} is empty; skipped");
            skipped.push(b);
            continue;
        }
        let total = units[b] as f64;
        let (o1, e1) = (observed[b], expected[b]);
        let (o0, e0) = (total - o1, total - e1);
        let mut stat = 0.0;
        if e1 > 0.0 {
            stat += (o1 - e1).powi(2) / e1;
        }
        if e0 > 0.0 {
            stat += (o0 - e0).powi(2) / e0;
        }
        rows.push(GofRow {
            bin: b,
            units: units[b],
            observed: o1,
            expected: e1,
            statistic: stat,
            flagged: stat > CHI_SQUARE_CRITICAL_005,
        });
    }
    Ok(GofTable {
        rows,
        critical_value: CHI_SQUARE_CRITICAL_005,
        skipped_bins: skipped,
        convention: "Pearson statistic over adopter/non-adopter cells per bin; 0.05 critical value with df = 3 (screening diagnostic)".into(),
    })
}

/// Bins units by one covariate column with ascending cut points:
/// bin `b` holds values in `[cuts[b-1], cuts[b])`.
pub fn bins_by_covariate(panel: &ObservedPanel, column: usize, cuts: &[f64]) -> Vec<usize> {
    panel
        .covariates
        .rows()
        .map(|x| cuts.iter().take_while(|&&c| x[column] >= c).count())
        .collect()
}
