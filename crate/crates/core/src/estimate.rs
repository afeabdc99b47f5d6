//! Conditional least squares estimation.
//!
//! The conditional moments of the process are linear in `Y_{n-1} = [X_{n-1}; 1]`,
//! so every moment matrix row is estimated by a normal-equation solve against
//! the Gram matrix of the regressors. The CLS estimators, in dependency order:
//!
//! ```text
//! mu_hat = [sum X_n Y'] G^{-1}               G = sum Y Y'
//! M_n    = X_n - mu_hat Y                    (mean residual)
//! V_hat  = [sum M_n^2 Y'] G^{-1}             (componentwise squares)
//! A_hat  = [sum M_n^3 Y'] G^{-1}
//! K_n    = M_n^4 - 3 (V_hat Y)^2 + 3 V_hat^(2) Y
//! B_hat  = [sum K_n Y'] G^{-1}               V_hat^(2) = entrywise square
//! N_n    = M_n^2 - V_hat Y                   (variance residual)
//! ```
//!
//! The WCLS variant damps large states by dividing the process by
//! `sqrt(w_n)`, `w_n = 1'Y_{n-1}`; each moment order gets its own weighted
//! Gram (`w`, `w^2`, `w^3`, `w^4` in the denominators) and the residuals

//! become `M_n / sqrt(w)` and `N_n / w`.
//!
//! The covariance estimators for whitening are assembled from the weighted
//! empirical sums `ybar^(k) = (1/m) sum Y / w^(k/2)`:
//! the mean-residual covariance is diagonal with entries `v_i' ybar`, and
//! the stacked (mean, variance) residual covariance is block diagonal with
//! 2x2 blocks built from `v_i`, `a_i` and `b_i - 3 v_i^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::simulate::Trajectory;

/// Gram matrices with condition numbers above this are treated as singular.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Positivity tolerance for whitening: diagonal entries, block determinants
/// and traces at or below this are not positive definite.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Which least-squares objective produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Cls,
    Wcls,
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flavor::Cls => write!(f, "CLS"),
            Flavor::Wcls => write!(f, "WCLS"),
        }
    }
}

/// Weighted empirical sums of the regressors over the training range,
/// indexed by the weight exponent kappa in {0, 2, 3, 4}:
/// `y_bar^(kappa) = (1/m) sum Y_{n-1} / w_n^(kappa/2)` and the matching
/// outer-product averages.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalSums {
    kappas: [f64; 4],
    y_bar: [Vec<f64>; 4],
    yy_bar: [Matrix; 4],
}

impl EmpiricalSums {
    pub fn compute(traj: &Trajectory, m: usize) -> EmpiricalSums {
        let p = traj.p();
        let kappas = [0.0, 2.0, 3.0, 4.0];
        let mut y_bar: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; p + 1]);
        let mut yy_bar: [Matrix; 4] = std::array::from_fn(|_| Matrix::zeros(p + 1, p + 1));
        for n in 1..=m {
            let y = traj.y_prev(n);
            let w: f64 = y.iter().sum();
            for (slot, kappa) in kappas.iter().enumerate() {
                let weight = w.powf(-kappa / 2.0);
                for i in 0..=p {
                    y_bar[slot][i] += weight * y[i];
                    for j in i..=p {
                        yy_bar[slot][(i, j)] += weight * y[i] * y[j];
                    }
                }
            }
        }
        let mf = m as f64;
        for slot in 0..4 {
            for v in y_bar[slot].iter_mut() {
                *v /= mf;
            }
            for i in 0..=p {
                for j in i..=p {
                    yy_bar[slot][(i, j)] /= mf;
                    yy_bar[slot][(j, i)] = yy_bar[slot][(i, j)];
                }
            }
        }
        EmpiricalSums { kappas, y_bar, yy_bar }
    }

    fn slot(kappa: u32) -> usize {
        match kappa {
            0 => 0,
            2 => 1,
            3 => 2,
            4 => 3,
            _ => panic!("unsupported weight exponent {kappa}"),
        }
    }

    /// `y_bar^(kappa)`, kappa in {0, 2, 3, 4}.
    pub fn y_bar(&self, kappa: u32) -> &[f64] {
        &self.y_bar[Self::slot(kappa)]
    }

    /// `yy_bar^(kappa)`, kappa in {0, 2, 3, 4}.
    pub fn yy_bar(&self, kappa: u32) -> &Matrix {
        &self.yy_bar[Self::slot(kappa)]
    }
}

/// A symmetric 2x2 covariance block for one component's stacked
/// (mean residual, variance residual) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JBlock {
    pub mm: f64,
    pub mn: f64,
    pub nn: f64,
}

impl JBlock {
    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_rows(&[vec![self.mm, self.mn], vec![self.mn, self.nn]])
    }
}

/// CLS or WCLS estimates of the moment matrices plus the residual covariance
/// estimators used for whitening.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateSet {
    pub flavor: Flavor,
    pub p: usize,
    pub m: usize,
    /// p x (p+1) conditional-mean coefficients.
    pub mu_hat: Matrix,
    /// p x (p+1) conditional variances.
    pub v_hat: Matrix,
    /// p x (p+1) third central moments.
    pub a_hat: Matrix,
    /// p x (p+1) fourth central moments.
    pub b_hat: Matrix,
    /// Diagonal of the mean-residual covariance estimator, one entry per
    /// kept type.
    pub i_diag: Vec<f64>,
    /// 2x2 blocks of the stacked-residual covariance estimator, one per
    /// kept type.
    pub j_blocks: Vec<JBlock>,
    /// Original type indices the rows of `i_diag` / `j_blocks` refer to.
    /// Starts as `0..p`; shrinks under [`EstimateSet::reduce`].
    pub kept: Vec<usize>,
    /// Condition numbers of the Gram matrices used, in moment order.
    pub gram_condition: Vec<f64>,
    pub sums: EmpiricalSums,
}

impl EstimateSet {
    /// The mean-residual covariance estimator as a diagonal matrix.
    pub fn i_matrix(&self) -> Matrix {
        let d = self.i_diag.len();
        let mut m = Matrix::zeros(d, d);
        for (i, &v) in self.i_diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// The stacked-residual covariance estimator as a block-diagonal matrix.
    pub fn j_matrix(&self) -> Matrix {
        let d = 2 * self.j_blocks.len();
        let mut m = Matrix::zeros(d, d);
        for (i, b) in self.j_blocks.iter().enumerate() {
            m[(2 * i, 2 * i)] = b.mm;
            m[(2 * i, 2 * i + 1)] = b.mn;
            m[(2 * i + 1, 2 * i)] = b.mn;
            m[(2 * i + 1, 2 * i + 1)] = b.nn;
        }
        m
    }

    /// Keep only the covariance rows/blocks of the types in `r` (original
    /// indices). Idempotent for a repeated `r`.
    pub fn reduce(&self, r: &[usize]) -> Result<EstimateSet> {
        let positions = reduction_positions(&self.kept, r)?;
        let mut out = self.clone();
        out.i_diag = positions.iter().map(|&pos| self.i_diag[pos]).collect();
        out.j_blocks = positions.iter().map(|&pos| self.j_blocks[pos]).collect();
        out.kept = r.to_vec();
        Ok(out)
    }
}

fn reduction_positions(kept: &[usize], r: &[usize]) -> Result<Vec<usize>> {
    if r.is_empty() {
        return Err(Error::EmptyReduction);
    }
    r.iter()
        .map(|&want| {
            kept.iter().position(|&have| have == want).ok_or_else(|| {
                Error::RangeError(format!("type {want} not present in {kept:?}"))
            })
        })
        .collect()
}

/// Residual series over a range of observation indices.
#[derive(Debug, Clone)]
pub struct ResidualSet {
    pub flavor: Flavor,
    /// First observation index the residuals refer to.
    pub start: usize,
    /// Original type indices of the stored components.
    pub kept: Vec<usize>,
    /// Mean residuals, one row per index n.
    m_hat: Vec<Vec<f64>>,
    /// Variance residuals, one row per index n.
    n_hat: Vec<Vec<f64>>,
}

impl ResidualSet {
    pub fn len(&self) -> usize {
        self.m_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_hat.is_empty()
    }

    /// Mean residual vector at observation index n.
    pub fn m_at(&self, n: usize) -> &[f64] {
        &self.m_hat[n - self.start]
    }

    /// Variance residual vector at observation index n.
    pub fn n_at(&self, n: usize) -> &[f64] {
        &self.n_hat[n - self.start]
    }

    /// The interleaved stacked residual [M_1, N_1, M_2, N_2, ...] at index n.
    pub fn stacked_at(&self, n: usize) -> Vec<f64> {
        let m = self.m_at(n);
        let nn = self.n_at(n);
        let mut out = Vec::with_capacity(2 * m.len());
        for i in 0..m.len() {
            out.push(m[i]);
            out.push(nn[i]);
        }
        out
    }

    /// Keep only the components of the types in `r` (original indices).
    pub fn reduce(&self, r: &[usize]) -> Result<ResidualSet> {
        let positions = reduction_positions(&self.kept, r)?;
        let select = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|row| positions.iter().map(|&pos| row[pos]).collect())
                .collect()
        };
        Ok(ResidualSet {
            flavor: self.flavor,
            start: self.start,
            kept: r.to_vec(),
            m_hat: select(&self.m_hat),
            n_hat: select(&self.n_hat),
        })
    }
}

/// CLS estimation on the first `m` transitions of the trajectory.
pub fn cls_estimate(traj: &Trajectory, m: usize) -> Result<EstimateSet> {
    estimate(traj, m, Flavor::Cls)
}

/// WCLS estimation on the first `m` transitions of the trajectory.
pub fn wcls_estimate(traj: &Trajectory, m: usize) -> Result<EstimateSet> {
    estimate(traj, m, Flavor::Wcls)
}

pub fn estimate(traj: &Trajectory, m: usize, flavor: Flavor) -> Result<EstimateSet> {
    let p = traj.p();
    // p + 1 regressor vectors are the algebraic minimum for an invertible
    // Gram; shorter samples cannot be solved at all.
    if m < p + 1 {
        return Err(Error::InsufficientData { needed: p + 1, got: m });
    }
    if m > traj.last_index() {
        return Err(Error::RangeError(format!(
            "training length {m} exceeds last observation index {}",
            traj.last_index()
        )));
    }

    // Regressors and weights for the training transitions n = 1..=m.
    let ys: Vec<Vec<f64>> = (1..=m).map(|n| traj.y_prev(n)).collect();
    let ws: Vec<f64> = ys.iter().map(|y| y.iter().sum()).collect();
    let xs: Vec<Vec<f64>> =
        (1..=m).map(|n| traj.x(n).iter().map(|&v| v as f64).collect()).collect();

    let gram = |weight_pow: i32| -> Matrix {
        let mut g = Matrix::zeros(p + 1, p + 1);
        for (y, &w) in ys.iter().zip(&ws) {
            let weight = w.powi(-weight_pow);
            for i in 0..=p {
                let wi = weight * y[i];
                for j in i..=p {
                    g[(i, j)] += wi * y[j];
                }
            }
        }
        for i in 0..=p {
            for j in 0..i {
                g[(i, j)] = g[(j, i)];
            }
        }
        g
    };

    // Numerator rows: sum of values[n][row] * Y_{n-1}' / w^weight, where the
    // per-row weight exponent can be fractional (WCLS third moments).
    let numerator = |values: &dyn Fn(usize, usize) -> f64, weight_exp: f64| -> Matrix {
        let mut c = Matrix::zeros(p, p + 1);
        for (idx, y) in ys.iter().enumerate() {
            let weight = ws[idx].powf(-weight_exp);
            for row in 0..p {
                let v = weight * values(idx, row);
                for col in 0..=p {
                    c[(row, col)] += v * y[col];
                }
            }
        }
        c
    };

    let mut gram_condition = Vec::new();
    let mut solve = |rhs: &Matrix, g: &Matrix| -> Result<Matrix> {
        let inv = g.inverse().ok_or(Error::SingularGram { condition: f64::INFINITY })?;
        let condition = g.norm_inf() * inv.norm_inf();
        if !condition.is_finite() || condition > GRAM_CONDITION_LIMIT {
            return Err(Error::SingularGram { condition });
        }
        gram_condition.push(condition);
        Ok(linalg::solve_refined(rhs, g, &inv))
    };

    let (mu_hat, v_hat, a_hat, b_hat);
    match flavor {
        Flavor::Cls => {
            let g = gram(0);
            let ginv = g.inverse().ok_or(Error::SingularGram { condition: f64::INFINITY })?;
            let condition = g.norm_inf() * ginv.norm_inf();
            if !condition.is_finite() || condition > GRAM_CONDITION_LIMIT {
                return Err(Error::SingularGram { condition });
            }
            gram_condition.push(condition);

            mu_hat = linalg::solve_refined(&numerator(&|n, i| xs[n][i], 0.0), &g, &ginv);
            let m_res: Vec<Vec<f64>> = (0..m)
                .map(|n| {
                    (0..p).map(|i| xs[n][i] - linalg::dot(mu_hat.row(i), &ys[n])).collect()
                })
                .collect();
            v_hat = linalg::solve_refined(
                &numerator(&|n, i| m_res[n][i] * m_res[n][i], 0.0),
                &g,
                &ginv,
            );
            a_hat =
                linalg::solve_refined(&numerator(&|n, i| m_res[n][i].powi(3), 0.0), &g, &ginv);
            let v_sq = entrywise_square(&v_hat);
            b_hat = linalg::solve_refined(
                &numerator(
                    &|n, i| {
                        let vy = linalg::dot(v_hat.row(i), &ys[n]);
                        let v2y = linalg::dot(v_sq.row(i), &ys[n]);
                        m_res[n][i].powi(4) - 3.0 * vy * vy + 3.0 * v2y
                    },
                    0.0,
                ),
                &g,
                &ginv,
            );
        }
        Flavor::Wcls => {
            mu_hat = solve(&numerator(&|n, i| xs[n][i], 1.0), &gram(1))?;
            // Weighted mean residuals (X_n - mu_hat Y) / sqrt(w).
            let m_res: Vec<Vec<f64>> = (0..m)
                .map(|n| {
                    let root_w = ws[n].sqrt();
                    (0..p)
                        .map(|i| (xs[n][i] - linalg::dot(mu_hat.row(i), &ys[n])) / root_w)
                        .collect()
                })
                .collect();
            v_hat = solve(&numerator(&|n, i| m_res[n][i] * m_res[n][i], 1.0), &gram(2))?;
            a_hat = solve(&numerator(&|n, i| m_res[n][i].powi(3), 1.5), &gram(3))?;
            let v_sq = entrywise_square(&v_hat);
            b_hat = solve(
                &numerator(
                    &|n, i| {
                        let w2 = ws[n] * ws[n];
                        let vy = linalg::dot(v_hat.row(i), &ys[n]);
                        let v2y = linalg::dot(v_sq.row(i), &ys[n]);
                        m_res[n][i].powi(4) - 3.0 * vy * vy / w2 + 3.0 * v2y / w2
                    },
                    2.0,
                ),
                &gram(4),
            )?;
        }
    }

    let sums = EmpiricalSums::compute(traj, m);
    // Weight exponents of the covariance estimators: the diagonal and the
    // block entries use kappa = 0 throughout for CLS and kappa = 2 / 3 / 4
    // for WCLS, exactly as the estimators are defined.
    let (k_var, k_third, k_fourth) = match flavor {
        Flavor::Cls => (0, 0, 0),
        Flavor::Wcls => (2, 3, 4),
    };
    let mut i_diag = Vec::with_capacity(p);
    let mut j_blocks = Vec::with_capacity(p);
    for i in 0..p {
        let v_row = v_hat.row(i);
        let a_row = a_hat.row(i);
        let b_row = b_hat.row(i);
        let mm = linalg::dot(v_row, sums.y_bar(k_var));
        let mn = linalg::dot(a_row, sums.y_bar(k_third));
        let centered: Vec<f64> =
            (0..=p).map(|c| b_row[c] - 3.0 * v_row[c] * v_row[c]).collect();
        let quad = {
            let yyv = sums.yy_bar(k_fourth).mul_vec(v_row);
            linalg::dot(v_row, &yyv)
        };
        let nn = linalg::dot(&centered, sums.y_bar(k_fourth)) + 2.0 * quad;
        i_diag.push(mm);
        j_blocks.push(JBlock { mm, mn, nn });
    }

    Ok(EstimateSet {
        flavor,
        p,
        m,
        mu_hat,
        v_hat,
        a_hat,
        b_hat,
        i_diag,
        j_blocks,
        kept: (0..p).collect(),
        gram_condition,
        sums,
    })
}

fn entrywise_square(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = m[(i, j)] * m[(i, j)];
        }
    }
    out
}

/// Residual series over observation indices `a..=b` against frozen
/// estimates. Monitoring calls this with `a = m + 1`.
pub fn residuals(traj: &Trajectory, a: usize, b: usize, est: &EstimateSet) -> Result<ResidualSet> {
    if a < 1 || b > traj.last_index() || a > b {
        return Err(Error::RangeError(format!(
            "residual range {a}..={b} outside 1..={}",
            traj.last_index()
        )));
    }
    let p = traj.p();
    let mut m_hat = Vec::with_capacity(b - a + 1);
    let mut n_hat = Vec::with_capacity(b - a + 1);
    for n in a..=b {
        let y = traj.y_prev(n);
        let (m_row, n_row) = residual_rows(traj.x(n), &y, est);
        m_hat.push(m_row);
        n_hat.push(n_row);
    }
    let _ = p;
    Ok(ResidualSet { flavor: est.flavor, start: a, kept: (0..traj.p()).collect(), m_hat, n_hat })
}

/// Mean and variance residual vectors for one observation given its
/// regressor; the workhorse shared with the online monitor.
pub(crate) fn residual_rows(x: &[u64], y: &[f64], est: &EstimateSet) -> (Vec<f64>, Vec<f64>) {
    let p = x.len();
    match est.flavor {
        Flavor::Cls => {
            let m_row: Vec<f64> = (0..p)
                .map(|i| x[i] as f64 - linalg::dot(est.mu_hat.row(i), y))
                .collect();
            let n_row: Vec<f64> = (0..p)
                .map(|i| m_row[i] * m_row[i] - linalg::dot(est.v_hat.row(i), y))
                .collect();
            (m_row, n_row)
        }
        Flavor::Wcls => {
            let w: f64 = y.iter().sum();
            let root_w = w.sqrt();
            let m_row: Vec<f64> = (0..p)
                .map(|i| (x[i] as f64 - linalg::dot(est.mu_hat.row(i), y)) / root_w)
                .collect();
            let n_row: Vec<f64> = (0..p)
                .map(|i| m_row[i] * m_row[i] - linalg::dot(est.v_hat.row(i), y) / w)
                .collect();
            (m_row, n_row)
        }
    }
}

/// Structure selector for [`inv_sqrt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtKind {
    /// Diagonal matrix; inverse square root is entrywise.
    Diagonal,
    /// Block-diagonal with symmetric 2x2 blocks.
    Block2x2,
}

/// Symmetric inverse square root `M` of a positive definite diagonal or
/// 2x2-block-diagonal matrix: `M * mat * M = I`.
pub fn inv_sqrt(mat: &Matrix, kind: SqrtKind) -> Result<Matrix> {
    let n = mat.rows();
    if n != mat.cols() {
        return Err(Error::InvalidParameter("inv_sqrt of non-square matrix".into()));
    }
    match kind {
        SqrtKind::Diagonal => {
            let diag: Vec<f64> = (0..n).map(|i| mat[(i, i)]).collect();
            let inv = inv_sqrt_diag(&diag)?;
            let mut out = Matrix::zeros(n, n);
            for i in 0..n {
                out[(i, i)] = inv[i];
            }
            Ok(out)
        }
        SqrtKind::Block2x2 => {
            if !n.is_multiple_of(2) {
                return Err(Error::InvalidParameter("odd dimension for 2x2 blocks".into()));
            }
            let mut out = Matrix::zeros(n, n);
            for b in 0..n / 2 {
                let (i, j) = (2 * b, 2 * b + 1);
                let block =
                    JBlock { mm: mat[(i, i)], mn: 0.5 * (mat[(i, j)] + mat[(j, i)]), nn: mat[(j, j)] };
                let w = inv_sqrt_block(&block)?;
                out[(i, i)] = w[0][0];
                out[(i, j)] = w[0][1];
                out[(j, i)] = w[1][0];
                out[(j, j)] = w[1][1];
            }
            Ok(out)
        }
    }
}

/// Entrywise inverse square root of a positive diagonal.
pub(crate) fn inv_sqrt_diag(diag: &[f64]) -> Result<Vec<f64>> {
    diag.iter()
        .map(|&d| {
            if d > POSITIVITY_TOL {
                Ok(1.0 / d.sqrt())
            } else {
                Err(Error::NotPositiveDefinite(format!(
                    "diagonal entry {d:.3e} not positive; reduce to the nondegenerate types"
                )))
            }
        })
        .collect()
}

/// Closed-form symmetric inverse square root of a symmetric positive
/// definite 2x2 block: with d = det(B) and s = tr(B),
/// `sqrt(B) = (B + sqrt(d) I) / sqrt(s + 2 sqrt(d))`, inverted explicitly.
pub(crate) fn inv_sqrt_block(block: &JBlock) -> Result<[[f64; 2]; 2]> {
    let det = block.mm * block.nn - block.mn * block.mn;
    let trace = block.mm + block.nn;
    if det <= POSITIVITY_TOL || trace <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "2x2 block det {det:.3e}, trace {trace:.3e}"
        )));
    }
    let root_det = det.sqrt();
    let scale = (trace + 2.0 * root_det).sqrt();
    // sqrt(B), then its explicit 2x2 inverse.
    let s = [
        [(block.mm + root_det) / scale, block.mn / scale],
        [block.mn / scale, (block.nn + root_det) / scale],
    ];
    let det_s = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    Ok([
        [s[1][1] / det_s, -s[0][1] / det_s],
        [-s[1][0] / det_s, s[0][0] / det_s],
    ])
}
