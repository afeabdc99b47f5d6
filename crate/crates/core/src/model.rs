//! Model specification and derived moment structure.
//!
//! A p-type branching model is given by a p x p grid of offspring laws --
//! entry `(j, i)` is the distribution of the number of j-type offspring of a
//! single i-type individual -- plus one innovation law per type. From the
//! law moments we derive:
//!
//! - `m`: the p x p offspring mean matrix (stability is `rho(m) < 1`),
//! - `mu = [m, E(innovations)]`: the conditional-mean coefficients,
//! - `V`, `A`, `B`: p x (p+1) matrices of central moments of order 2, 3, 4,
//!   each row ending in the innovation moment of that type.
//!
//! Conditional moments of the process are linear in `Y = [X; 1]`:
//! `E(X_n | X_{n-1}) = mu Y_{n-1}` and `Var(X_{n,i} | X_{n-1}) = v_i' Y_{n-1}`.
//!
//! GINAR(p) processes embed as a p-type model whose state stacks the last p
//! values; only the first type is stochastic given the past.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::Law;
use crate::linalg::Matrix;

/// Default margin below 1 required of the spectral radius.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// A p-type model: offspring grid plus innovation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSpec", into = "RawModelSpec")]
pub struct ModelSpec {
    /// `offspring[j][i]` is the law of the number of j-type offspring of an
    /// i-type individual.
    offspring: Vec<Vec<Law>>,
    innovation: Vec<Law>,
}

#[derive(Serialize, Deserialize)]
struct RawModelSpec {
    p: usize,
    offspring: Vec<Vec<Law>>,
    innovation: Vec<Law>,
}

impl TryFrom<RawModelSpec> for ModelSpec {
    type Error = Error;
    fn try_from(raw: RawModelSpec) -> Result<Self> {
        if raw.offspring.len() != raw.p || raw.innovation.len() != raw.p {
            return Err(Error::InvalidParameter(format!(
                "model dimensions disagree with p = {}",
                raw.p
            )));
        }
        ModelSpec::new(raw.offspring, raw.innovation)
    }
}

impl From<ModelSpec> for RawModelSpec {
    fn from(spec: ModelSpec) -> RawModelSpec {
        RawModelSpec { p: spec.p(), offspring: spec.offspring, innovation: spec.innovation }
    }
}

impl ModelSpec {
    pub fn new(offspring: Vec<Vec<Law>>, innovation: Vec<Law>) -> Result<Self> {
        let p = innovation.len();
        if p == 0 {
            return Err(Error::InvalidParameter("model needs at least one type".into()));
        }
        if offspring.len() != p || offspring.iter().any(|row| row.len() != p) {
            return Err(Error::InvalidParameter(format!(
                "offspring grid must be {p} x {p}"
            )));
        }
        Ok(ModelSpec { offspring, innovation })
    }

    pub fn p(&self) -> usize {
        self.innovation.len()
    }

    /// Law of the number of `child`-type offspring of a `parent`-type
    /// individual.
    pub fn offspring(&self, child: usize, parent: usize) -> &Law {
        &self.offspring[child][parent]
    }

    pub fn innovation(&self, child: usize) -> &Law {
        &self.innovation[child]
    }

    /// Derived moment matrices. Exact, from the law moment caches.
    pub fn moments(&self) -> MomentSet {
        let p = self.p();
        let mut m = Matrix::zeros(p, p);
        let mut mu = Matrix::zeros(p, p + 1);
        let mut v = Matrix::zeros(p, p + 1);
        let mut a = Matrix::zeros(p, p + 1);
        let mut b = Matrix::zeros(p, p + 1);
        for i in 0..p {
            for j in 0..p {
                let law = self.offspring(i, j);
                m[(i, j)] = law.mean();
                mu[(i, j)] = law.mean();
                v[(i, j)] = law.variance();
                a[(i, j)] = law.central3();
                b[(i, j)] = law.central4();
            }
            let innov = self.innovation(i);
            mu[(i, p)] = innov.mean();
            v[(i, p)] = innov.variance();
            a[(i, p)] = innov.central3();
            b[(i, p)] = innov.central4();
        }
        MomentSet { m, mu, v, a, b }
    }

    /// Types whose conditional variance row is not identically zero; only
    /// these components carry a monitorable signal.
    pub fn reduction_set(&self) -> Result<Vec<usize>> {
        let moments = self.moments();
        let r: Vec<usize> = (0..self.p())
            .filter(|&i| moments.v.row(i).iter().any(|&x| x != 0.0))
            .collect();
        if r.is_empty() {
            return Err(Error::EmptyReduction);
        }
        Ok(r)
    }

    /// Fail unless `rho(m) < 1 - margin` with the default margin.
    pub fn assert_stable(&self) -> Result<()> {
        self.assert_stable_with_margin(STABILITY_MARGIN)
    }

    pub fn assert_stable_with_margin(&self, margin: f64) -> Result<()> {
        let rho = spectral_radius(&self.moments().m)?;
        if rho < 1.0 - margin {
            Ok(())
        } else {
            Err(Error::Unstable { rho, margin })
        }
    }
}

/// The derived moment matrices of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// p x p offspring mean matrix.
    pub m: Matrix,
    /// p x (p+1) conditional-mean coefficients `[m, E(innovations)]`.
    pub mu: Matrix,
    /// p x (p+1) variances.
    pub v: Matrix,
    /// p x (p+1) third central moments.
    pub a: Matrix,
    /// p x (p+1) fourth central moments.
    pub b: Matrix,
}

/// Spectral radius of a nonnegative square matrix.
///
/// Power iteration on the shifted matrix `M + I` (whose dominant eigenvalue
/// is `rho(M) + 1` and strictly dominant in modulus, so periodic mean
/// matrices such as GINAR companions converge too), certified by the
/// eigen-residual. Falls back to a Gelfand repeated-squaring estimate of
/// `lim ||M^k||^(1/k)` when the iteration stalls.
pub fn spectral_radius(matrix: &Matrix) -> Result<f64> {
    if matrix.rows() != matrix.cols() {
        return Err(Error::InvalidParameter("spectral radius of non-square matrix".into()));
    }
    if matrix.data().iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "spectral radius requires finite nonnegative entries".into(),
        ));
    }
    let n = matrix.rows();
    if n == 1 {
        return Ok(matrix[(0, 0)]);
    }
    if matrix.max_abs() == 0.0 {
        return Ok(0.0);
    }

    let mut shifted = matrix.clone();
    for i in 0..n {
        shifted[(i, i)] += 1.0;
    }

    const MAX_ITERS: usize = 100_000;
    const TOL: f64 = 1e-12;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..MAX_ITERS {
        let y = shifted.mul_vec(&x);
        let norm = crate::linalg::norm2(&y);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let x_next: Vec<f64> = y.iter().map(|v| v / norm).collect();
        // Residual of the candidate eigenpair (norm, x_next).
        let z = shifted.mul_vec(&x_next);
        let residual = z
            .iter()
            .zip(&x_next)
            .map(|(zi, xi)| (zi - norm * xi).abs())
            .fold(0.0, f64::max);
        if residual <= TOL * norm.max(1.0) {
            return Ok(norm - 1.0);
        }
        x = x_next;
    }
    gelfand_radius(matrix).ok_or(Error::NonConvergence(MAX_ITERS))
}

/// Gelfand formula via repeated squaring with norm scaling:
/// `log rho = sum 2^{-j} log s_j` where `s_j` are the norms of the
/// successively squared, normalized powers. 64 squarings reach `M^(2^64)`,
/// which pins even defective dominant eigenvalues to near machine precision.
fn gelfand_radius(matrix: &Matrix) -> Option<f64> {
    let mut c = matrix.clone();
    let mut log_rho = 0.0;
    let mut weight = 1.0;
    for _ in 0..64 {
        let s = c.norm_inf();
        if s == 0.0 {
            return Some(0.0); // nilpotent
        }
        log_rho += weight * s.ln();
        weight *= 0.5;
        for value in 0..c.rows() {
            for col in 0..c.cols() {
                c[(value, col)] /= s;
            }
        }
        c = c.mul_mat(&c);
    }
    let rho = log_rho.exp();
    rho.is_finite().then_some(rho)
}

/// A GINAR(p) specification: one offspring law per lag plus an innovation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGinarSpec", into = "RawGinarSpec")]
pub struct GinarSpec {
    zeta: Vec<Law>,
    eta: Law,
    /// Initial values, most recent first: `[Z_0, Z_{-1}, ..., Z_{-p+1}]`.
    init: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawGinarSpec {
    order: usize,
    zeta: Vec<Law>,
    eta: Law,
    init: Vec<u64>,
}

impl TryFrom<RawGinarSpec> for GinarSpec {
    type Error = Error;
    fn try_from(raw: RawGinarSpec) -> Result<Self> {
        if raw.zeta.len() != raw.order {
            return Err(Error::InvalidParameter(format!(
                "ginar order {} but {} offspring laws",
                raw.order,
                raw.zeta.len()
            )));
        }
        GinarSpec::new(raw.zeta, raw.eta, raw.init)
    }
}

impl From<GinarSpec> for RawGinarSpec {
    fn from(g: GinarSpec) -> RawGinarSpec {
        RawGinarSpec { order: g.order(), zeta: g.zeta, eta: g.eta, init: g.init }
    }
}

impl GinarSpec {
    pub fn new(zeta: Vec<Law>, eta: Law, init: Vec<u64>) -> Result<Self> {
        let p = zeta.len();
        if p == 0 {
            return Err(Error::InvalidParameter("ginar needs order >= 1".into()));
        }
        if init.len() != p {
            return Err(Error::InvalidParameter(format!(
                "ginar order {p} needs exactly {p} initial values"
            )));
        }
        if zeta[p - 1].mean() <= 0.0 {
            return Err(Error::InvalidParameter(
                "the highest-lag offspring law must have positive mean".into(),
            ));
        }
        Ok(GinarSpec { zeta, eta, init })
    }

    pub fn order(&self) -> usize {
        self.zeta.len()
    }

    /// Subcritical exactly when the offspring means sum below 1; equivalent
    /// to stability of the embedded mean matrix.
    pub fn is_subcritical(&self) -> bool {
        self.zeta.iter().map(Law::mean).sum::<f64>() < 1.0
    }

    /// Embed into a p-type branching model on the stacked state
    /// `X_n = [Z_n, Z_{n-1}, ..., Z_{n-p+1}]`.
    ///
    /// Each i-type individual produces `zeta_i` first-type offspring and, for
    /// i < p, exactly one (i+1)-type copy of itself; innovations enter the
    /// first component only.
    pub fn embed(&self) -> (ModelSpec, Vec<u64>) {
        let p = self.order();
        let mut offspring = vec![vec![Law::degenerate(0); p]; p];
        for parent in 0..p {
            offspring[0][parent] = self.zeta[parent].clone();
            if parent + 1 < p {
                offspring[parent + 1][parent] = Law::degenerate(1);
            }
        }
        let mut innovation = vec![Law::degenerate(0); p];
        innovation[0] = self.eta.clone();
        let spec = ModelSpec::new(offspring, innovation).expect("embedding dims are valid");
        (spec, self.init.clone())
    }
}
