//! The three algebraic forms of the walk.
//!
//! * incremental: `dX(s) = K_H dt^(H-1/2) dB(s) + sum_{r<s} w(s-r) dB(r)`,
//!   accumulated from `X(0) = 0`;
//! * coefficient: the double sum with its order swapped,
//!   `X(t) = sum_r C(r, t) dB(r)`;
//! * kernel: the discretized moving-frame integral
//!   `sum_r ((t-r)^(H-1/2) - (-r)_+^(H-1/2)) dB(r)` with no error terms.
//!
//! Each form has a slice-level entry point taking arbitrary real driving
//! values in place of `±1` tosses, which is how linearity is exercised.

use serde::{Deserialize, Serialize};

use super::weights::WeightTable;
use crate::error::{FbmError, Result};
use crate::grid::{BernoulliStream, GridSpec};

/// Walk values on `0, dt, ..., horizon`, constant between grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub grid: GridSpec,
    /// `values[i] = X(i dt)`, `values[0] = 0`.
    pub values: Vec<f64>,
    /// Whether `c_H` has been applied.
    pub scaled: bool,
}

impl PathSample {
    pub fn new(grid: GridSpec, values: Vec<f64>, scaled: bool) -> Result<Self> {
        if values.len() != grid.horizon_steps() as usize + 1 {
            return Err(FbmError::InvalidArgument(format!(
                "path needs {} values, got {}",
                grid.horizon_steps() + 1,
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            scaled,
        })
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.grid.time(i as i64))
    }

    /// Value at step `i`.
    pub fn at_step(&self, step: i64) -> Result<f64> {
        usize::try_from(step)
            .ok()
            .and_then(|i| self.values.get(i).copied())
            .ok_or(FbmError::OutsideStream {
                index: step,
                first: 0,
                end: self.values.len() as i64,
            })
    }

    /// Càdlàg evaluation at any `t >= 0`: the value at the last grid point `<= t`.
    pub fn at_time(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(FbmError::Domain {
                function: "PathSample::at_time",
                value: t,
                constraint: "t >= 0",
            });
        }
        let step = ((t * self.grid.n_per_unit() as f64) + 1e-9).floor() as usize;
        Ok(self.values[step.min(self.values.len() - 1)])
    }

    /// Multiply by `c`, marking the path as scaled.
    pub fn scaled_by(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|x| c * x).collect(),
            scaled: true,
        }
    }

    /// Sup-norm distance to another path on the same grid.
    pub fn sup_distance(&self, other: &PathSample) -> Result<f64> {
        if self.grid.horizon_steps() != other.grid.horizon_steps()
            || self.grid.n_per_unit() != other.grid.n_per_unit()
        {
            return Err(FbmError::MismatchedGrids);
        }
        Ok(sup_distance(&self.values, &other.values))
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn check_stream(table: &WeightTable, stream: &BernoulliStream) -> Result<()> {
    if table.grid() != stream.grid() {
        return Err(FbmError::MismatchedGrids);
    }
    Ok(())
}

fn check_signs(table: &WeightTable, signs: &[f64]) -> Result<()> {
    if signs.len() != table.grid().stream_len() {
        return Err(FbmError::InvalidArgument(format!(
            "expected {} driving values, got {}",
            table.grid().stream_len(),
            signs.len()
        )));
    }
    Ok(())
}

pub(crate) fn cumulate(increments: &[f64]) -> Vec<f64> {
    let mut values = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    values.push(acc);
    for &d in increments {
        acc += d;
        values.push(acc);
    }
    values
}

/// Unscaled history sum `K dt^(H-1/2) omega(s) + sum_{r=-M}^{s-dt} w(s-r) omega(r)`
/// at storage index `idx` (step `idx - M`).
#[inline]
fn raw_increment(table: &WeightTable, signs: &[f64], idx: usize) -> f64 {
    let w = table.weights();
    let history: f64 = signs[..idx]
        .iter()
        .zip(w[1..=idx].iter().rev())
        .map(|(x, wj)| x * wj)
        .sum();
    table.current_weight() * signs[idx] + history
}

/// `dX(s)` for a grid step `0 <= s < horizon`, with the past truncated at `-M`.
pub fn increment(table: &WeightTable, stream: &BernoulliStream, s: i64) -> Result<f64> {
    check_stream(table, stream)?;
    let grid = table.grid();
    if s < 0 || s >= grid.end_step() {
        return Err(FbmError::OutsideStream {
            index: s,
            first: 0,
            end: grid.end_step(),
        });
    }
    let signs = stream.signs();
    let idx = (s - grid.first_step()) as usize;
    Ok(grid.dt().sqrt() * raw_increment(table, &signs, idx))
}

/// Incremental form on arbitrary driving values (index 0 is step `-M`).
pub fn incremental_values(table: &WeightTable, signs: &[f64]) -> Result<Vec<f64>> {
    check_signs(table, signs)?;
    let grid = table.grid();
    let scale = grid.dt().sqrt();
    let past = grid.past_steps() as usize;
    let increments: Vec<f64> = (0..grid.horizon_steps() as usize)
        .map(|s| scale * raw_increment(table, signs, past + s))
        .collect();
    Ok(cumulate(&increments))
}

/// `X(t) = sum_{s=0}^{t} dX(s)`, unscaled.
pub fn path_incremental(table: &WeightTable, stream: &BernoulliStream) -> Result<PathSample> {
    check_stream(table, stream)?;
    let values = incremental_values(table, &stream.signs())?;
    PathSample::new(*table.grid(), values, false)
}

/// Coefficient `C(r, t)` of `dB(r)` in `X(t)` (steps, `-M <= r < t`).
///
/// Sub-diffusive indices use the exact tail `-(H-1/2) dt^(H-1/2) zeta_tail(3/2-H, t-r)`
/// for `r >= 0`, which is where the divergent `K_H` term cancels; every other
/// coefficient is a finite sum of weights.
#[inline]
pub fn coefficient(table: &WeightTable, r: i64, t: i64) -> f64 {
    debug_assert!(r < t);
    if r >= 0 {
        let lag = (t - r) as usize;
        match table.tail(lag) {
            Some(tail) => -table.hurst().offset() * table.dt_pow() * tail,
            None => table.current_weight() + table.prefix(lag - 1),
        }
    } else {
        let k = (-r) as usize;
        let t = t as usize;
        table.prefix(t - 1 + k) - table.prefix(k - 1)
    }
}

/// `C(r, t)` for every `r` in `[-M, t)` at one fixed `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub t_step: i64,
    pub first_step: i64,
    /// `coeffs[i] = C(first_step + i, t)`.
    pub coeffs: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(table: &WeightTable, t_step: i64) -> Result<Self> {
        let grid = table.grid();
        if t_step < 1 || t_step > grid.end_step() {
            return Err(FbmError::OutsideStream {
                index: t_step,
                first: 1,
                end: grid.end_step() + 1,
            });
        }
        let first = grid.first_step();
        let coeffs = (first..t_step).map(|r| coefficient(table, r, t_step)).collect();
        Ok(Self {
            t_step,
            first_step: first,
            coeffs,
        })
    }

    pub fn get(&self, r: i64) -> Option<f64> {
        usize::try_from(r - self.first_step)
            .ok()
            .and_then(|i| self.coeffs.get(i).copied())
    }

    /// `sum_r C(r, t) x(r)` over driving values starting at step `-M`.
    pub fn apply(&self, signs: &[f64]) -> f64 {
        self.coeffs.iter().zip(signs).map(|(c, x)| c * x).sum()
    }
}

/// Coefficient form on arbitrary driving values.
pub fn coefficient_values(table: &WeightTable, signs: &[f64]) -> Result<Vec<f64>> {
    check_signs(table, signs)?;
    let grid = table.grid();
    let scale = grid.dt().sqrt();
    let mut values = Vec::with_capacity(grid.horizon_steps() as usize + 1);
    values.push(0.0);
    for t in 1..=grid.end_step() {
        let sum: f64 = (grid.first_step()..t)
            .zip(signs)
            .map(|(r, x)| coefficient(table, r, t) * x)
            .sum();
        values.push(scale * sum);
    }
    Ok(values)
}

/// `X(t) = sum_{r=-M}^{t} C(r, t) dB(r)`, unscaled.
pub fn path_coefficient(table: &WeightTable, stream: &BernoulliStream) -> Result<PathSample> {
    check_stream(table, stream)?;
    let values = coefficient_values(table, &stream.signs())?;
    PathSample::new(*table.grid(), values, false)
}

/// Moving-frame kernel `(t-r)^(H-1/2) - (-r)_+^(H-1/2)` on the grid.
#[inline]
pub fn kernel(table: &WeightTable, r: i64, t: i64) -> f64 {
    debug_assert!(r < t);
    let future = table.power((t - r) as usize);
    if r < 0 {
        future - table.power((-r) as usize)
    } else {
        future
    }
}

/// Kernel form on arbitrary driving values.
pub fn kernel_values(table: &WeightTable, signs: &[f64]) -> Result<Vec<f64>> {
    check_signs(table, signs)?;
    let grid = table.grid();
    let scale = grid.dt().sqrt();
    let mut values = Vec::with_capacity(grid.horizon_steps() as usize + 1);
    values.push(0.0);
    for t in 1..=grid.end_step() {
        let sum: f64 = (grid.first_step()..t)
            .zip(signs)
            .map(|(r, x)| kernel(table, r, t) * x)
            .sum();
        values.push(scale * sum);
    }
    Ok(values)
}

/// `sum_{r=-M}^{t} ((t-r)^(H-1/2) - (-r)_+^(H-1/2)) dB(r)`, unscaled.
pub fn path_kernel(table: &WeightTable, stream: &BernoulliStream) -> Result<PathSample> {
    check_stream(table, stream)?;
    let values = kernel_values(table, &stream.signs())?;
    PathSample::new(*table.grid(), values, false)
}

/// `Cov(X(s), X(t)) = dt sum_r C(r, s) C(r, t)` of the truncated walk,
/// exact because the tosses are independent with unit variance.
pub fn walk_covariance(table: &WeightTable, s: i64, t: i64) -> Result<f64> {
    let grid = table.grid();
    for step in [s, t] {
        if step < 0 || step > grid.end_step() {
            return Err(FbmError::OutsideStream {
                index: step,
                first: 0,
                end: grid.end_step() + 1,
            });
        }
    }
    let upper = s.min(t);
    if upper == 0 {
        return Ok(0.0);
    }
    let sum: f64 = (grid.first_step()..upper)
        .map(|r| coefficient(table, r, s) * coefficient(table, r, t))
        .sum();
    Ok(grid.dt() * sum)
}
