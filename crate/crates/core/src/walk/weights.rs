use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::grid::GridSpec;
use crate::hurst::HurstIndex;
use crate::special::{coefficient_k, tail_unchecked, uses_zeta_branch};

/// Weight of the toss `k` steps in the past: `(H - 1/2) (k dt)^(H - 3/2) dt`.
///
/// The current toss is not covered here; it enters through `K_H dt^(H-1/2)`.
pub fn weight(h: HurstIndex, lag_steps: u64, dt: f64) -> Result<f64> {
    if lag_steps == 0 {
        return Err(FbmError::InvalidArgument(
            "weight lag must be at least one step".into(),
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(FbmError::Domain {
            function: "weight",
            value: dt,
            constraint: "dt > 0",
        });
    }
    let a = h.offset();
    Ok(a * ((a - 1.0) * (lag_steps as f64 * dt).ln()).exp() * dt)
}

/// Per-`(H, grid)` tables shared by every path on that grid.
///
/// All entries depend on a lag only, so they are built once and read from
/// any number of threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightTable {
    hurst: HurstIndex,
    grid: GridSpec,
    k: f64,
    /// `dt^(H - 1/2)`.
    dt_pow: f64,
    /// `w[j]` for lags `j = 0..=M + T` (`w[0] = 0`).
    w: Vec<f64>,
    /// `prefix[j] = w[1] + ... + w[j]`.
    prefix: Vec<f64>,
    /// `(j dt)^(H - 1/2)` for `j = 0..=M + T`, with the `j = 0` entry set to 0.
    power: Vec<f64>,
    /// `zeta_tail(3/2 - H, j)` for `j = 0..=T` (entry 0 unused), sub-diffusive only.
    tails: Option<Vec<f64>>,
}

impl WeightTable {
    pub fn new(hurst: HurstIndex, grid: GridSpec) -> Self {
        let a = hurst.offset();
        let dt = grid.dt();
        let max_lag = grid.stream_len();
        let ln_dt = dt.ln();

        let mut w = Vec::with_capacity(max_lag + 1);
        let mut power = Vec::with_capacity(max_lag + 1);
        w.push(0.0);
        power.push(0.0);
        for j in 1..=max_lag {
            // log space: ln(j dt) = ln j + ln dt
            let ln_lag = (j as f64).ln() + ln_dt;
            w.push(a * ((a - 1.0) * ln_lag).exp() * dt);
            power.push((a * ln_lag).exp());
        }
        let mut prefix = Vec::with_capacity(max_lag + 1);
        let mut acc = 0.0;
        for &x in &w {
            acc += x;
            prefix.push(acc);
        }

        let tails = uses_zeta_branch(hurst).then(|| {
            let s = 1.5 - hurst.value();
            (0..=grid.horizon_steps())
                .map(|j| if j == 0 { 0.0 } else { tail_unchecked(s, j) })
                .collect()
        });

        Self {
            hurst,
            grid,
            k: coefficient_k(hurst),
            dt_pow: ((a) * ln_dt).exp(),
            w,
            prefix,
            power,
            tails,
        }
    }

    pub fn hurst(&self) -> HurstIndex {
        self.hurst
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `K_H`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `dt^(H - 1/2)`.
    pub fn dt_pow(&self) -> f64 {
        self.dt_pow
    }

    /// Coefficient of the current toss, `K_H dt^(H - 1/2)`.
    pub fn current_weight(&self) -> f64 {
        self.k * self.dt_pow
    }

    /// Weights indexed by lag; entry 0 is zero.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// `w[1] + ... + w[j]`.
    #[inline]
    pub fn prefix(&self, j: usize) -> f64 {
        self.prefix[j]
    }

    /// `(j dt)^(H - 1/2)`, zero at `j = 0`.
    #[inline]
    pub fn power(&self, j: usize) -> f64 {
        self.power[j]
    }

    /// `zeta_tail(3/2 - H, j)` for `1 <= j <= T` when the zeta form of `K_H` applies.
    #[inline]
    pub fn tail(&self, j: usize) -> Option<f64> {
        self.tails.as_ref().map(|t| t[j])
    }

    pub fn uses_zeta_tails(&self) -> bool {
        self.tails.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn h(v: f64) -> HurstIndex {
        HurstIndex::new(v).unwrap()
    }

    #[test]
    fn weight_examples() {
        for k in 1..10 {
            assert_eq!(weight(h(0.5), k, 0.1).unwrap(), 0.0);
        }
        assert!((weight(h(0.75), 1, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((weight(h(0.25), 2, 0.5).unwrap() + 0.125).abs() < 1e-15);
        assert!(weight(h(0.25), 0, 0.5).is_err());
    }

    #[test]
    fn table_matches_pointwise_weight() {
        let g = make_grid(8, 1.0, 20).unwrap();
        for hv in [0.2, 0.5, 0.8] {
            let t = WeightTable::new(h(hv), g);
            for j in 1..=g.stream_len() {
                let direct = weight(h(hv), j as u64, g.dt()).unwrap();
                assert!((t.weights()[j] - direct).abs() <= 1e-15 * direct.abs().max(1e-300));
            }
            assert!((t.dt_pow() - g.dt().powf(hv - 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn sub_diffusive_tables_carry_zeta_tails() {
        let g = make_grid(4, 1.0, 2).unwrap();
        assert!(WeightTable::new(h(0.3), g).uses_zeta_tails());
        assert!(!WeightTable::new(h(0.5), g).uses_zeta_tails());
        assert!(!WeightTable::new(h(0.7), g).uses_zeta_tails());
    }
}
