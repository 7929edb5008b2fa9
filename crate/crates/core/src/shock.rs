//! Private payoff shock distributions.
//!
//! Each unit draws an i.i.d. shock `ε_i` and takes action 1 when its expected
//! payoff index exceeds the shock, so the cdf `F` maps payoff indices into
//! choice probabilities. Besides `F` the solvers need the density `F'`, its
//! derivative `F''`, the quantile function and the density bound `τ`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShockDistribution {
    #[default]
    Logistic,
    Gaussian,
}

impl std::str::FromStr for ShockDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(ShockDistribution::Logistic),
            "gaussian" | "normal" => Ok(ShockDistribution::Gaussian),
            other => Err(format!("unknown shock distribution `{other}`")),
        }
    }
}

impl ShockDistribution {
    pub fn name(self) -> &'static str {
        match self {
            ShockDistribution::Logistic => "logistic",
            ShockDistribution::Gaussian => "gaussian",
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        match self {
            ShockDistribution::Logistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            ShockDistribution::Gaussian => 0.5 * erf::erfc(-x / SQRT_2),
        }
    }

    /// Survival function `1 - F(x)`, evaluated without cancellation in the
    /// right tail.
    pub fn sf(self, x: f64) -> f64 {
        self.cdf(-x)
    }

    pub fn pdf(self, x: f64) -> f64 {
        match self {
            ShockDistribution::Logistic => {
                let e = (-x.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            ShockDistribution::Gaussian => INV_SQRT_2PI * (-0.5 * x * x).exp(),
        }
    }

    /// Derivative of the density, `F''(x)`.
    pub fn pdf_derivative(self, x: f64) -> f64 {
        match self {
            ShockDistribution::Logistic => self.pdf(x) * (self.sf(x) - self.cdf(x)),
            ShockDistribution::Gaussian => -x * self.pdf(x),
        }
    }

    pub fn quantile(self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        match self {
            ShockDistribution::Logistic => (p / (1.0 - p)).ln(),
            ShockDistribution::Gaussian => {
                let x = -SQRT_2 * erf::erfc_inv(2.0 * p);
                // one Newton polish step on F(x) = p
                let density = self.pdf(x);
                if density > 0.0 {
                    x - (self.cdf(x) - p) / density
                } else {
                    x
                }
            }
        }
    }

    /// Supremum of the density.
    pub fn density_bound(self) -> f64 {
        match self {
            ShockDistribution::Logistic => 0.25,
            ShockDistribution::Gaussian => INV_SQRT_2PI,
        }
    }

    /// `F'²/(F-1) < F'' < F'²/F` at `x`; the lower side uses `F-1 = -sf(x)`.
    pub fn shape_condition(self, x: f64) -> bool {
        let d = self.pdf(x);
        let dd = self.pdf_derivative(x);
        let lower = -(d * d) / self.sf(x);
        let upper = d * d / self.cdf(x);
        lower < dd && dd < upper
    }

    /// Second-derivative weights of the log-likelihood contributions:
    /// `ω0 = d²/da² log F(a)` and `ω1 = -d²/da² log(1 - F(a))`.
    pub fn hessian_weights(self, a: f64) -> (f64, f64) {
        match self {
            // (F''F - F'^2)/F^2 collapses to -F' for the logistic
            ShockDistribution::Logistic => {
                let d = self.pdf(a);
                (-d, d)
            }
            ShockDistribution::Gaussian => {
                let d = self.pdf(a);
                let lower_mills = d / self.cdf(a);
                let upper_mills = d / self.sf(a);
                (-lower_mills * (a + lower_mills), upper_mills * (upper_mills - a))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        // open interval so the quantile stays finite
        let u: f64 = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        };
        self.quantile(u)
    }
}
