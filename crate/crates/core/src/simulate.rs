//! Trajectory generation.
//!
//! One generation step draws, for every child type j, the sum of offspring
//! counts over all parents alive in the previous state plus one innovation:
//!
//! ```text
//! X_{n,j} = sum_i sample_sum(offspring[j][i], X_{n-1,i}) + innovation_j
//! ```
//!
//! Trajectories record the training length `m` and, for change-point
//! alternatives, the true change index `k*`: generation `n` is produced by
//! the pre-change model for `n < m + k*` and by the post-change model from
//! `n = m + k*` on.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::rng::Rng;

/// Provenance carried next to the observations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub seed: Option<u64>,
    pub spec: Option<ModelSpec>,
    pub spec_star: Option<ModelSpec>,
}

/// An observed or simulated path of nonnegative integer p-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    p: usize,
    /// Row-major observations; row n is X_n.
    data: Vec<u64>,
    /// Training length: X_0..X_m are assumed change-free.
    m: usize,
    /// True change index k* (change occurs at generation m + k*), if known.
    change: Option<usize>,
    pub meta: TrajectoryMeta,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    p: usize,
    m: usize,
    change_index: Option<usize>,
    #[serde(flatten)]
    meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn from_observations(p: usize, rows: &[Vec<u64>], m: usize) -> Result<Trajectory> {
        if p == 0 || rows.is_empty() {
            return Err(Error::InvalidParameter("empty trajectory".into()));
        }
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidParameter("observation dimension mismatch".into()));
        }
        if m + 1 > rows.len() || m < 1 {
            return Err(Error::RangeError(format!(
                "training length {m} incompatible with {} observations",
                rows.len()
            )));
        }
        let mut data = Vec::with_capacity(rows.len() * p);
        for r in rows {
            data.extend_from_slice(r);
        }
        Ok(Trajectory { p, data, m, change: None, meta: TrajectoryMeta::default() })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of observations (N + 1 for a path X_0..X_N).
    pub fn len(&self) -> usize {
        self.data.len() / self.p
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Index of the last observation.
    pub fn last_index(&self) -> usize {
        self.len() - 1
    }

    /// Observation X_n.
    pub fn x(&self, n: usize) -> &[u64] {
        &self.data[n * self.p..(n + 1) * self.p]
    }

    /// Training length m.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn set_training_len(&mut self, m: usize) -> Result<()> {
        if m < 1 || m > self.last_index() {
            return Err(Error::RangeError(format!(
                "training length {m} outside 1..={}",
                self.last_index()
            )));
        }
        self.m = m;
        Ok(())
    }

    /// True change index k*, when the trajectory was generated under the
    /// single-change alternative.
    pub fn change_index(&self) -> Option<usize> {
        self.change
    }

    /// The regressor vector Y_{n-1} = [X_{n-1}; 1] driving generation n.
    pub fn y_prev(&self, n: usize) -> Vec<f64> {
        let x = self.x(n - 1);
        let mut y = Vec::with_capacity(self.p + 1);
        y.extend(x.iter().map(|&v| v as f64));
        y.push(1.0);
        y
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.p).map(|i| format!("x{i}")).collect();
        writeln!(w, "n,{}", header.join(","))?;
        for n in 0..self.len() {
            let row: Vec<String> = self.x(n).iter().map(u64::to_string).collect();
            writeln!(w, "{n},{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, m: Option<usize>) -> Result<Trajectory> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty trajectory file".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 2 || cols[0] != "n" {
            return Err(Error::Parse(format!("bad trajectory header: {header}")));
        }
        let p = cols.len() - 1;
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != p + 1 {
                return Err(Error::Parse(format!("row {} has {} fields", lineno + 2, fields.len())));
            }
            let row: Vec<u64> = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<u64>()
                        .map_err(|_| Error::Parse(format!("bad count '{f}' on row {}", lineno + 2)))
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let fallback_m = rows.len().saturating_sub(1).max(1);
        Trajectory::from_observations(p, &rows, m.unwrap_or(fallback_m))
    }

    /// Write the CSV at `csv_path` and a JSON sidecar with the metadata at
    /// the same path with extension `json`.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        let file = std::fs::File::create(csv_path)?;
        self.write_csv(std::io::BufWriter::new(file))?;
        let sidecar = Sidecar {
            p: self.p,
            m: self.m,
            change_index: self.change,
            meta: self.meta.clone(),
        };
        let json = serde_json::to_string_pretty(&sidecar)?;
        std::fs::write(csv_path.with_extension("json"), json)?;
        Ok(())
    }

    /// Load a CSV, picking up the training length and metadata from the
    /// sidecar when present.
    pub fn load(csv_path: &Path) -> Result<Trajectory> {
        let file = std::fs::File::open(csv_path)?;
        let sidecar_path = csv_path.with_extension("json");
        let sidecar: Option<Sidecar> = if sidecar_path.exists() {
            Some(serde_json::from_str(&std::fs::read_to_string(&sidecar_path)?)?)
        } else {
            None
        };
        let mut traj =
            Trajectory::read_csv(std::io::BufReader::new(file), sidecar.as_ref().map(|s| s.m))?;
        if let Some(s) = sidecar {
            if s.p != traj.p() {
                return Err(Error::Parse(format!(
                    "sidecar says p = {}, csv has p = {}",
                    s.p,
                    traj.p()
                )));
            }
            traj.change = s.change_index;
            traj.meta = s.meta;
        }
        Ok(traj)
    }
}

/// One generation step.
pub fn step(spec: &ModelSpec, x_prev: &[u64], rng: &mut Rng) -> Vec<u64> {
    let mut out = vec![0u64; spec.p()];
    step_into(spec, x_prev, &mut out, rng);
    out
}

fn step_into(spec: &ModelSpec, x_prev: &[u64], out: &mut [u64], rng: &mut Rng) {
    let p = spec.p();
    debug_assert_eq!(x_prev.len(), p);
    for child in 0..p {
        let mut total = 0u64;
        for (parent, &count) in x_prev.iter().enumerate() {
            total += spec.offspring(child, parent).sample_sum(count, rng);
        }
        out[child] = total + spec.innovation(child).sample(rng);
    }
}

/// Simulate `n_steps` generations from `x0` under a fixed model.
///
/// The trajectory's training length defaults to the full path; shorten it
/// with [`Trajectory::set_training_len`] before monitoring.
pub fn simulate(spec: &ModelSpec, x0: &[u64], n_steps: usize, rng: &mut Rng) -> Trajectory {
    simulate_with_burnin(spec, x0, n_steps, 0, rng)
}

/// As [`simulate`], discarding `burnin` initial generations first so that
/// X_0 is approximately stationary.
pub fn simulate_with_burnin(
    spec: &ModelSpec,
    x0: &[u64],
    n_steps: usize,
    burnin: usize,
    rng: &mut Rng,
) -> Trajectory {
    let p = spec.p();
    assert_eq!(x0.len(), p, "initial state dimension mismatch");
    let mut state = x0.to_vec();
    let mut next = vec![0u64; p];
    for _ in 0..burnin {
        step_into(spec, &state, &mut next, rng);
        std::mem::swap(&mut state, &mut next);
    }
    let mut data = Vec::with_capacity((n_steps + 1) * p);
    data.extend_from_slice(&state);
    for _ in 0..n_steps {
        step_into(spec, &state, &mut next, rng);
        std::mem::swap(&mut state, &mut next);
        data.extend_from_slice(&state);
    }
    Trajectory {
        p,
        data,
        m: n_steps.max(1),
        change: None,
        meta: TrajectoryMeta { seed: None, spec: Some(spec.clone()), spec_star: None },
    }
}

/// Simulate under the single-change alternative: generations `1..m+k_star-1`
/// follow `spec0`, generations `m+k_star..=horizon` follow `spec_star`.
pub fn simulate_with_change(
    spec0: &ModelSpec,
    spec_star: &ModelSpec,
    m: usize,
    k_star: usize,
    horizon: usize,
    x0: &[u64],
    rng: &mut Rng,
) -> Result<Trajectory> {
    if spec0.p() != spec_star.p() {
        return Err(Error::InvalidParameter("pre/post change models differ in p".into()));
    }
    if k_star < 1 {
        return Err(Error::InvalidParameter("change index k* must be >= 1".into()));
    }
    if horizon < m + k_star {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} shorter than m + k* = {}",
            m + k_star
        )));
    }
    let p = spec0.p();
    let change_at = m + k_star;
    let mut state = x0.to_vec();
    let mut next = vec![0u64; p];
    let mut data = Vec::with_capacity((horizon + 1) * p);
    data.extend_from_slice(&state);
    for n in 1..=horizon {
        let spec = if n < change_at { spec0 } else { spec_star };
        step_into(spec, &state, &mut next, rng);
        std::mem::swap(&mut state, &mut next);
        data.extend_from_slice(&state);
    }
    Ok(Trajectory {
        p,
        data,
        m,
        change: Some(k_star),
        meta: TrajectoryMeta {
            seed: None,
            spec: Some(spec0.clone()),
            spec_star: Some(spec_star.clone()),
        },
    })
}
