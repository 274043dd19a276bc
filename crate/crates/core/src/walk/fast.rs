//! Accelerated incremental form for long past horizons.
//!
//! Every increment on `[0, horizon)` sees the whole past, so the naive form
//! costs `T (T + M)` per path and is dominated by `M` when the past horizon is
//! long (`H` near one needs `M` in the hundreds of thousands). Split the past
//! at `k0 = 2T` steps:
//!
//! * the near past `k <= k0` and the in-window history are summed exactly;
//! * the far past `k > k0` is cut into dyadic blocks. Inside a block the
//!   weight `w(s + k)`, seen as a function of the increment position
//!   `s in [0, T-1]`, is analytic with its only singularity at `s = -k`, far
//!   from the interval, so it is interpolated at a handful of Chebyshev nodes.
//!   Each block then costs one dot product per node instead of one per
//!   increment.
//!
//! The node count of each block is chosen from the Bernstein-ellipse bound
//! for Chebyshev interpolation so that the relative interpolation error stays
//! below `1e-15`.

use std::f64::consts::PI;

use super::paths::{check_stream, cumulate, PathSample};
use super::weights::WeightTable;
use crate::error::{FbmError, Result};
use crate::grid::BernoulliStream;

const RELATIVE_TARGET: f64 = 1e-15;
const MAX_NODES: usize = 48;
/// Below this many increments the interpolation buys nothing.
const MIN_WINDOW: u64 = 8;

#[derive(Debug, Clone)]
struct FarBlock {
    /// Past lags `lo..hi` (steps before 0).
    lo: usize,
    hi: usize,
    nodes: usize,
    /// Row-major `nodes x (hi - lo)`: weight at fractional lag `s_i + k`.
    samples: Vec<f64>,
    /// Row-major `T x nodes`: Lagrange basis at integer positions.
    basis: Vec<f64>,
}

/// Precomputed far-field interpolation for one `(H, grid)`.
#[derive(Debug, Clone)]
pub struct FastIncremental {
    near: usize,
    blocks: Vec<FarBlock>,
}

impl FastIncremental {
    pub fn new(table: &WeightTable) -> Self {
        let grid = table.grid();
        let window = grid.horizon_steps() as usize;
        let past = grid.past_steps() as usize;
        if grid.horizon_steps() < MIN_WINDOW || table.hurst().offset() == 0.0 {
            return Self {
                near: past,
                blocks: Vec::new(),
            };
        }
        let near = (2 * window).min(past);
        let a = table.hurst().offset();
        let amplitude = a * table.dt_pow();
        let exponent = a - 1.0;

        let center = 0.5 * (window - 1) as f64;
        let half = center;
        let mut blocks = Vec::new();
        let mut lo = near + 1;
        while lo <= past {
            let hi = (2 * lo).min(past + 1);
            let nodes = node_count(lo as f64, center, half, exponent, window);
            let positions: Vec<f64> = (0..nodes)
                .map(|i| center + half * chebyshev_node(i, nodes))
                .collect();
            let mut samples = Vec::with_capacity(nodes * (hi - lo));
            for &s in &positions {
                samples.extend((lo..hi).map(|k| amplitude * (s + k as f64).powf(exponent)));
            }
            let basis = lagrange_basis(&positions, nodes, window);
            blocks.push(FarBlock {
                lo,
                hi,
                nodes,
                samples,
                basis,
            });
            lo = hi;
        }
        Self { near, blocks }
    }

    /// Number of Chebyshev nodes used per far block, nearest block first.
    pub fn block_nodes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nodes).collect()
    }

    /// Path values for arbitrary driving values (index 0 is step `-M`).
    pub fn values(&self, table: &WeightTable, signs: &[f64]) -> Result<Vec<f64>> {
        let grid = table.grid();
        if signs.len() != grid.stream_len() {
            return Err(FbmError::InvalidArgument(format!(
                "expected {} driving values, got {}",
                grid.stream_len(),
                signs.len()
            )));
        }
        let window = grid.horizon_steps() as usize;
        let past = grid.past_steps() as usize;
        let w = table.weights();
        let (history, future) = signs.split_at(past);

        let mut raw = vec![0.0; window];
        for (s, slot) in raw.iter_mut().enumerate() {
            // in-window history r = 0..s and the current toss
            let inside: f64 = future[..s]
                .iter()
                .zip(w[1..=s].iter().rev())
                .map(|(x, wj)| x * wj)
                .sum();
            // near past k = 1..=near sits at history[past - k], lag s + k
            let near: f64 = history[past - self.near..]
                .iter()
                .zip(w[s + 1..=s + self.near].iter().rev())
                .map(|(x, wj)| x * wj)
                .sum();
            *slot = table.current_weight() * future[s] + inside + near;
        }

        if !self.blocks.is_empty() {
            let reversed: Vec<f64> = history.iter().rev().copied().collect(); // reversed[k-1] = x(-k)
            let mut projections = Vec::new();
            for block in &self.blocks {
                let past_slice = &reversed[block.lo - 1..block.hi - 1];
                let len = block.hi - block.lo;
                projections.clear();
                projections.extend(
                    block
                        .samples
                        .chunks_exact(len)
                        .map(|row| dot(row, past_slice)),
                );
                for (s, slot) in raw.iter_mut().enumerate() {
                    let basis = &block.basis[s * block.nodes..(s + 1) * block.nodes];
                    *slot += dot(basis, &projections);
                }
            }
        }

        let scale = grid.dt().sqrt();
        for x in raw.iter_mut() {
            *x *= scale;
        }
        Ok(cumulate(&raw))
    }

    pub fn path(&self, table: &WeightTable, stream: &BernoulliStream) -> Result<PathSample> {
        check_stream(table, stream)?;
        let values = self.values(table, &stream.signs())?;
        PathSample::new(*table.grid(), values, false)
    }
}

#[inline]
fn chebyshev_node(i: usize, n: usize) -> f64 {
    (PI * (2 * i + 1) as f64 / (2 * n) as f64).cos()
}

/// Nodes needed so that interpolating `(s + k)^p` on `s in [c - h, c + h]`
/// for all `k >= lo` stays under the relative target.
fn node_count(lo: f64, center: f64, half: f64, exponent: f64, window: usize) -> usize {
    // singularity at s = -lo, i.e. x* = -(lo + c)/h on the reference interval
    let x_star = (lo + center) / half;
    let rho_max = x_star + (x_star * x_star - 1.0).sqrt();
    let smallest = (lo + (window - 1) as f64).powf(exponent);
    let mut best = MAX_NODES;
    for step in 1..64 {
        let rho = 1.0 + (rho_max - 1.0) * step as f64 / 64.0;
        // closest approach of the ellipse E_rho to the singularity
        let reach = center - half * 0.5 * (rho + 1.0 / rho);
        let distance = lo + reach;
        if distance <= 0.0 {
            continue;
        }
        let bound_max = distance.powf(exponent);
        // |f - p_n| <= 4 M rho^-n / (rho - 1)
        let needed = (4.0 * bound_max / ((rho - 1.0) * RELATIVE_TARGET * smallest)).ln() / rho.ln();
        let n = needed.ceil().max(2.0) as usize;
        best = best.min(n);
    }
    best.min(MAX_NODES)
}

/// Barycentric Lagrange basis of first-kind Chebyshev points at `s = 0..window`.
fn lagrange_basis(positions: &[f64], nodes: usize, window: usize) -> Vec<f64> {
    let weights: Vec<f64> = (0..nodes)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (PI * (2 * i + 1) as f64 / (2 * nodes) as f64).sin()
        })
        .collect();
    let mut basis = vec![0.0; window * nodes];
    for s in 0..window {
        let row = &mut basis[s * nodes..(s + 1) * nodes];
        let x = s as f64;
        if let Some(hit) = positions.iter().position(|&p| p == x) {
            row[hit] = 1.0;
            continue;
        }
        let mut total = 0.0;
        for i in 0..nodes {
            let v = weights[i] / (x - positions[i]);
            row[i] = v;
            total += v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    basis
}

/// Dot product with four independent accumulators.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let rest: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + rest
}
