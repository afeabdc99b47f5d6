//! Monte Carlo critical values for weighted Wiener suprema.
//!
//! The monitoring statistics converge to functionals of
//!
//! ```text
//! sup_{0 < t <= 1} psi(W(t)) / t^gamma
//! ```
//!
//! with `W` a d-dimensional standard Wiener process and `psi` either the
//! componentwise absolute maximum (the limit shared by the sup-norm test in
//! dimension 1, the projection test, and the componentwise-max test) or the
//! Euclidean norm. Closed-end procedures with horizon `T` shrink the
//! critical value by `(T/(1+T))^(1/2-gamma)`.
//!
//! Quantiles are estimated on a uniform time grid (`t_j = j/grid`, Gaussian
//! increments of variance `1/grid`). Paths are simulated in fixed-size
//! blocks with per-block derived seeds, so results are bit-identical no
//! matter how many threads run, and the batch spread of the blockwise
//! quantiles yields a Monte Carlo standard error.

use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{Horizon, MonitorConfig, Statistic};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{derive_seed, rng_from_seed};

/// Bumped when the cache file layout changes.
pub const TABLE_FORMAT_VERSION: u32 = 1;

const PATHS_PER_BLOCK: usize = 512;
const SE_BATCHES: usize = 32;

/// Functional applied across the d Wiener components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupMode {
    /// max_i |W_i(t)| / t^gamma; the product-form limit whose quantiles obey
    /// the componentwise-level identity.
    MaxAbs,
    /// ||W(t)|| / t^gamma; no closed-form tabulation exists for d >= 2, but
    /// it can still be simulated.
    Norm,
}

/// Cached Monte Carlo quantiles for one (gamma, dimension, mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueTable {
    pub version: u32,
    pub gamma: f64,
    pub dim: usize,
    pub mode: SupMode,
    /// `None` for the open-end limit; `Some(t)` when the sup was simulated
    /// over the closed-end fraction `t/(1+t)` of the unit interval.
    pub horizon: Option<f64>,
    pub alphas: Vec<f64>,
    pub quantiles: Vec<f64>,
    /// Batched Monte Carlo standard error per quantile.
    pub standard_errors: Vec<f64>,
    pub paths: usize,
    pub grid: usize,
    pub seed: u64,
}

impl CriticalValueTable {
    /// Quantile for a significance level present in the table.
    pub fn quantile_at(&self, alpha: f64) -> Result<f64> {
        self.lookup(alpha).map(|i| self.quantiles[i])
    }

    pub fn standard_error_at(&self, alpha: f64) -> Result<f64> {
        self.lookup(alpha).map(|i| self.standard_errors[i])
    }

    fn lookup(&self, alpha: f64) -> Result<usize> {
        self.alphas
            .iter()
            .position(|a| (a - alpha).abs() < 1e-9)
            .ok_or_else(|| Error::TableMiss(format!("alpha {alpha} not tabulated")))
    }
}

/// Per-path sup statistics over the first `theta` fraction of the grid.
///
/// `theta = 1` is the open-end limit; `theta = T/(1+T)` gives the closed-end
/// one by the time-scaling identity. Runs in parallel blocks with seeds
/// derived from `seed`; the output ordering is deterministic.
pub fn simulate_sup_statistics(
    gamma: f64,
    dim: usize,
    mode: SupMode,
    paths: usize,
    grid: usize,
    theta: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(0.0..0.5).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma {gamma} outside [0, 0.5)")));
    }
    if dim < 1 || paths < 1 || grid < 1 {
        return Err(Error::InvalidParameter("dim, paths and grid must be >= 1".into()));
    }
    if !(0.0 < theta && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta {theta} outside (0, 1]")));
    }
    let last_j = (((theta * grid as f64) + 1e-9).floor() as usize).clamp(1, grid);
    // Reciprocal weights t_j^{-gamma}; t_1 = 1/grid > 0, so every entry is
    // finite for gamma < 1/2.
    let inv_tpow: Vec<f64> = (0..=last_j)
        .map(|j| if j == 0 { 0.0 } else { (j as f64 / grid as f64).powf(-gamma) })
        .collect();
    let sigma = (1.0 / grid as f64).sqrt();

    let blocks = paths.div_ceil(PATHS_PER_BLOCK);
    let mut sups: Vec<f64> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|block| {
            let n_in_block = PATHS_PER_BLOCK.min(paths - block * PATHS_PER_BLOCK);
            let mut rng = rng_from_seed(derive_seed(seed, block as u64));
            let mut out = Vec::with_capacity(n_in_block);
            let mut walk = vec![0.0f64; dim];
            for _ in 0..n_in_block {
                walk.iter_mut().for_each(|w| *w = 0.0);
                let mut best = 0.0f64;
                for &inv_t in &inv_tpow[1..] {
                    let value = match mode {
                        SupMode::MaxAbs => {
                            let mut v = 0.0f64;
                            for w in walk.iter_mut() {
                                *w += sigma * rng.sample::<f64, _>(StandardNormal);
                                v = v.max(w.abs());
                            }
                            v
                        }
                        SupMode::Norm => {
                            let mut v = 0.0f64;
                            for w in walk.iter_mut() {
                                *w += sigma * rng.sample::<f64, _>(StandardNormal);
                                v += *w * *w;
                            }
                            v.sqrt()
                        }
                    };
                    best = best.max(value * inv_t);
                }
                out.push(best);
            }
            out
        })
        .collect();
    sups.truncate(paths);
    Ok(sups)
}

/// Order statistic at `ceil((1 - alpha) * n)`, 1-based, no interpolation.
pub fn quantile_of_sorted(sorted: &[f64], alpha: f64) -> f64 {
    let n = sorted.len();
    let idx = ((1.0 - alpha) * n as f64).ceil() as usize;
    sorted[idx.clamp(1, n) - 1]
}

/// Build an open-end quantile table for several significance levels from a
/// single simulation run.
pub fn build_table(
    gamma: f64,
    dim: usize,
    mode: SupMode,
    alphas: &[f64],
    paths: usize,
    grid: usize,
    seed: u64,
) -> Result<CriticalValueTable> {
    if paths < 10_000 || grid < 1_000 {
        return Err(Error::InvalidParameter(format!(
            "need paths >= 1e4 and grid >= 1e3 for a quantile table, got {paths} / {grid}"
        )));
    }
    if alphas.is_empty() || alphas.iter().any(|&a| !(0.0 < a && a < 1.0)) {
        return Err(Error::InvalidParameter("alphas must lie strictly in (0, 1)".into()));
    }
    let sups = simulate_sup_statistics(gamma, dim, mode, paths, grid, 1.0, seed)?;

    let mut sorted = sups.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles: Vec<f64> = alphas.iter().map(|&a| quantile_of_sorted(&sorted, a)).collect();

    // Batch the paths in generation order; the spread of the per-batch
    // quantiles estimates the sampling error of the pooled one.
    let batch_len = (paths / SE_BATCHES).max(1);
    let standard_errors: Vec<f64> = alphas
        .iter()
        .map(|&a| {
            let batch_quantiles: Vec<f64> = sups
                .chunks(batch_len)
                .filter(|c| c.len() == batch_len)
                .map(|chunk| {
                    let mut b = chunk.to_vec();
                    b.sort_by(f64::total_cmp);
                    quantile_of_sorted(&b, a)
                })
                .collect();
            let nb = batch_quantiles.len() as f64;
            let mean = batch_quantiles.iter().sum::<f64>() / nb;
            let var =
                batch_quantiles.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (nb - 1.0);
            (var / nb).sqrt()
        })
        .collect();

    Ok(CriticalValueTable {
        version: TABLE_FORMAT_VERSION,
        gamma,
        dim,
        mode,
        horizon: None,
        alphas: alphas.to_vec(),
        quantiles,
        standard_errors,
        paths,
        grid,
        seed,
    })
}

/// Open-end `(1 - alpha)`-quantile of `max_i sup_t |W_i(t)| / t^gamma`.
pub fn simulate_sup_quantile(
    gamma: f64,
    dim: usize,
    alpha: f64,
    paths: usize,
    grid: usize,
    seed: u64,
) -> Result<f64> {
    build_table(gamma, dim, SupMode::MaxAbs, &[alpha], paths, grid, seed)
        .map(|t| t.quantiles[0])
}

/// `(T/(1+T))^(1/2-gamma)`; 1 for the open end.
pub fn closed_end_scale(horizon: Horizon, gamma: f64) -> f64 {
    match horizon {
        Horizon::Open => 1.0,
        Horizon::Closed(t) => {
            debug_assert!(t > 0.0);
            (t / (1.0 + t)).powf(0.5 - gamma)
        }
    }
}

/// Significance level per component so that the max over `d` independent
/// components rejects at overall level `alpha`.
pub fn componentwise_alpha(alpha: f64, d: usize) -> f64 {
    1.0 - (1.0 - alpha).powf(1.0 / d as f64)
}

/// Resolve the critical value for a monitor configuration from a table.
///
/// The table must be open-end (scaled here by the closed-end factor) or
/// simulated at exactly the configured horizon. A 1-dimensional table serves
/// any componentwise-max statistic through the componentwise level
/// `1 - (1-alpha)^(1/d)`; the projection statistic additionally scales by
/// the norm of its direction vector.
pub fn critical_value(config: &MonitorConfig, table: &CriticalValueTable) -> Result<f64> {
    if config.alpha >= 1.0 {
        // Degenerate level: reject always.
        return Ok(f64::NEG_INFINITY);
    }
    if (table.gamma - config.gamma).abs() > 1e-12 {
        return Err(Error::TableMiss(format!(
            "table gamma {} does not match monitor gamma {}",
            table.gamma, config.gamma
        )));
    }
    let scale = match (table.horizon, config.horizon) {
        (None, horizon) => closed_end_scale(horizon, config.gamma),
        (Some(t), Horizon::Closed(want)) if (t - want).abs() < 1e-12 => 1.0,
        (Some(t), _) => {
            return Err(Error::TableMiss(format!(
                "table simulated for closed horizon T = {t}, monitor wants another horizon"
            )));
        }
    };
    let d = config.whitened_dim();
    let base = match &config.statistic {
        Statistic::Psi2(c) => {
            if table.dim != 1 {
                return Err(Error::TableMiss(
                    "projection statistic needs a 1-dimensional table".into(),
                ));
            }
            linalg::norm2(c) * table.quantile_at(config.alpha)?
        }
        Statistic::Psi1 => {
            if d == 1 || (table.mode == SupMode::Norm && table.dim == d) {
                table.quantile_at(config.alpha)?
            } else {
                return Err(Error::TableMiss(format!(
                    "norm statistic in dimension {d} needs a norm-mode table of that dimension"
                )));
            }
        }
        Statistic::Psi3 => {
            if table.mode == SupMode::MaxAbs && table.dim == d {
                table.quantile_at(config.alpha)?
            } else if table.dim == 1 {
                table.quantile_at(componentwise_alpha(config.alpha, d))?
            } else {
                return Err(Error::TableMiss(format!(
                    "componentwise statistic in dimension {d} not covered by table"
                )));
            }
        }
    };
    Ok(scale * base)
}

pub fn save_table(table: &CriticalValueTable, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(table)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<CriticalValueTable> {
    let raw = std::fs::read_to_string(path)?;
    let table: CriticalValueTable = serde_json::from_str(&raw)?;
    if table.version != TABLE_FORMAT_VERSION {
        return Err(Error::FormatVersionMismatch {
            found: table.version,
            expected: TABLE_FORMAT_VERSION,
        });
    }
    Ok(table)
}

/// Two-sample Kolmogorov-Smirnov statistic (max CDF distance).
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Asymptotic two-sample KS rejection threshold at level `alpha`.
pub fn ks_threshold(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}
