//! Offspring and innovation laws.
//!
//! A [`Law`] is a nonnegative-integer distribution with closed-form central
//! moments up to order 4. The moments feed the model matrices (means,
//! variances, third and fourth central moments); sampling is used by the
//! simulator, with fast paths for sums of i.i.d. draws:
//!
//! - a sum of `n` Bernoulli(p) draws is Binomial(n, p),
//! - a sum of `n` Poisson(lambda) draws is Poisson(n * lambda),
//! - a sum of `n` Degenerate(v) draws is `n * v`.
//!
//! Finite PMFs on `0..=K` are supported so that arbitrary moment conditions
//! hold automatically (all moments of a bounded law are finite).

use rand::Rng as _;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// The distribution family and its parameters, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LawKind {
    Bernoulli { p: f64 },
    Poisson { lambda: f64 },
    Degenerate { value: u64 },
    Pmf { probs: Vec<f64> },
}

/// A validated law with cached mean and central moments of order 2, 3, 4.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "LawKind", into = "LawKind")]
pub struct Law {
    kind: LawKind,
    mean: f64,
    /// Central moments of order 2, 3, 4.
    central: [f64; 3],
    /// Cumulative probabilities, only present for `Pmf`.
    cdf: Option<Vec<f64>>,
}

impl PartialEq for Law {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl TryFrom<LawKind> for Law {
    type Error = Error;
    fn try_from(kind: LawKind) -> Result<Law> {
        Law::new(kind)
    }
}

impl From<Law> for LawKind {
    fn from(law: Law) -> LawKind {
        law.kind
    }
}

impl Law {
    /// Validate parameters and compute the moment cache.
    pub fn new(kind: LawKind) -> Result<Law> {
        let (mean, central, cdf) = match &kind {
            LawKind::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidParameter(format!(
                        "bernoulli probability {p} outside [0, 1]"
                    )));
                }
                let q = 1.0 - p;
                // E(X - p)^k = q (-p)^k + p q^k
                let m2 = p * q;
                let m3 = p * q * (1.0 - 2.0 * p);
                let m4 = p * q * (1.0 - 3.0 * p + 3.0 * p * p);
                (*p, [m2, m3, m4], None)
            }
            LawKind::Poisson { lambda } => {
                if !lambda.is_finite() || *lambda < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "poisson rate {lambda} must be finite and nonnegative"
                    )));
                }
                (*lambda, [*lambda, *lambda, 3.0 * lambda * lambda + lambda], None)
            }
            LawKind::Degenerate { value } => (*value as f64, [0.0, 0.0, 0.0], None),
            LawKind::Pmf { probs } => {
                if probs.is_empty() {
                    return Err(Error::InvalidParameter("empty pmf".into()));
                }
                if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::InvalidParameter(
                        "pmf entries must be finite and nonnegative".into(),
                    ));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "pmf sums to {total}, not 1 (tolerance 1e-12)"
                    )));
                }
                let mean: f64 = probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
                let central_moment = |order: i32| -> f64 {
                    probs
                        .iter()
                        .enumerate()
                        .map(|(k, p)| (k as f64 - mean).powi(order) * p)
                        .sum()
                };
                let mut cdf = Vec::with_capacity(probs.len());
                let mut acc = 0.0;
                for p in probs {
                    acc += p;
                    cdf.push(acc);
                }
                (mean, [central_moment(2), central_moment(3), central_moment(4)], Some(cdf))
            }
        };
        debug_assert!(central[0] >= -1e-15, "variance must be nonnegative");
        debug_assert!(
            central[2] + 1e-12 >= central[0] * central[0],
            "fourth central moment below variance squared"
        );
        Ok(Law { kind, mean, central, cdf })
    }

    pub fn bernoulli(p: f64) -> Result<Law> {
        Law::new(LawKind::Bernoulli { p })
    }

    pub fn poisson(lambda: f64) -> Result<Law> {
        Law::new(LawKind::Poisson { lambda })
    }

    pub fn degenerate(value: u64) -> Law {
        Law::new(LawKind::Degenerate { value }).expect("degenerate law is always valid")
    }

    pub fn finite_pmf(probs: Vec<f64>) -> Result<Law> {
        Law::new(LawKind::Pmf { probs })
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Variance (second central moment).
    pub fn variance(&self) -> f64 {
        self.central[0]
    }

    /// Third central moment.
    pub fn central3(&self) -> f64 {
        self.central[1]
    }

    /// Fourth central moment.
    pub fn central4(&self) -> f64 {
        self.central[2]
    }

    /// Exactly zero variance, i.e. a deterministic contribution.
    pub fn is_degenerate(&self) -> bool {
        self.variance() == 0.0
    }

    /// One draw.
    pub fn sample(&self, rng: &mut Rng) -> u64 {
        match &self.kind {
            LawKind::Bernoulli { p } => u64::from(rng.random_bool(*p)),
            LawKind::Poisson { lambda } => sample_poisson(*lambda, rng),
            LawKind::Degenerate { value } => *value,
            LawKind::Pmf { .. } => {
                let cdf = self.cdf.as_ref().expect("pmf law carries its cdf");
                let u: f64 = rng.random();
                // Linear scan; supports are short.
                cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1) as u64
            }
        }
    }

    /// Sum of `count` i.i.d. draws, using the closed-form aggregate
    /// distribution where one exists.
    pub fn sample_sum(&self, count: u64, rng: &mut Rng) -> u64 {
        if count == 0 {
            return 0;
        }
        match &self.kind {
            LawKind::Bernoulli { p } => {
                if *p <= 0.0 {
                    0
                } else if *p >= 1.0 {
                    count
                } else {
                    Binomial::new(count, *p).expect("validated parameters").sample(rng)
                }
            }
            LawKind::Poisson { lambda } => sample_poisson(lambda * count as f64, rng),
            LawKind::Degenerate { value } => value * count,
            LawKind::Pmf { .. } => (0..count).map(|_| self.sample(rng)).sum(),
        }
    }

    /// Sum of `count` single draws, never taking a fast path. Used to verify
    /// that the aggregate distributions above are the right ones.
    pub fn sample_sum_naive(&self, count: u64, rng: &mut Rng) -> u64 {
        (0..count).map(|_| self.sample(rng)).sum()
    }
}

fn sample_poisson(lambda: f64, rng: &mut Rng) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(lambda).expect("validated parameters").sample(rng);
    draw as u64
}
