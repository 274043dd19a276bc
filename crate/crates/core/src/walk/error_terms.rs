//! Riemann-sum error terms of the rearranged walk and their per-term bounds.
//!
//! With `a = H - 1/2` and `f(s) = a (s - r)^(a-1)`:
//!
//! | term  | regime  | definition                                        | bound                  |
//! |-------|---------|---------------------------------------------------|------------------------|
//! | eps   | `H>1/2` | `sum_{s=r+dt}^{t} f dt - int_{r+dt}^{t} f ds`     | `a dt^a`               |
//! | delta | `H>1/2` | `sum_{s=0}^{t} f dt - int_0^t f ds`, `r<0`        | `a (-r)^(a-1) dt`      |
//! | eps~  | `H<1/2` | `sum_{s=t}^{inf} -f dt - int_t^inf -f ds`         | `-a (t-r)^(a-1) dt`    |
//! | delta~| `H<1/2` | `sum_{s=0}^{t} -f dt - int_0^t -f ds`, `r<0`      | `-a (-r)^(a-1) dt`     |
//!
//! All four are nonnegative. Arguments are grid steps; every value is computed
//! in units of `dt^a` so that the closed-form integrals stay exact at `t = r + dt`.

use serde::{Deserialize, Serialize};

use super::weights::WeightTable;
use crate::error::{FbmError, Result};
use crate::grid::GridSpec;
use crate::hurst::{HurstIndex, Regime};
use crate::special::{tail_unchecked, uses_zeta_branch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Epsilon,
    Delta,
    EpsilonTilde,
    DeltaTilde,
}

impl ErrorKind {
    /// The two terms that apply to a Hurst index, `None` at exactly one half.
    pub fn for_hurst(h: HurstIndex) -> Option<[ErrorKind; 2]> {
        match h.regime() {
            Regime::SuperDiffusive => Some([ErrorKind::Epsilon, ErrorKind::Delta]),
            Regime::SubDiffusive if uses_zeta_branch(h) => {
                Some([ErrorKind::EpsilonTilde, ErrorKind::DeltaTilde])
            }
            _ => None,
        }
    }

    fn check(self, h: HurstIndex) -> Result<()> {
        let ok = match self {
            ErrorKind::Epsilon | ErrorKind::Delta => h.regime() == Regime::SuperDiffusive,
            ErrorKind::EpsilonTilde | ErrorKind::DeltaTilde => {
                h.regime() == Regime::SubDiffusive && uses_zeta_branch(h)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(FbmError::Domain {
                function: self.name(),
                value: h.value(),
                constraint: match self {
                    ErrorKind::Epsilon | ErrorKind::Delta => "H > 1/2",
                    _ => "H < 1/2 - 1e-6",
                },
            })
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Epsilon => "epsilon",
            ErrorKind::Delta => "delta",
            ErrorKind::EpsilonTilde => "epsilon_tilde",
            ErrorKind::DeltaTilde => "delta_tilde",
        }
    }

    fn future_side(self) -> bool {
        matches!(self, ErrorKind::Epsilon | ErrorKind::EpsilonTilde)
    }
}

fn check_steps(kind: ErrorKind, r: i64, t: i64) -> Result<()> {
    let ok = if kind.future_side() {
        r >= 0 && t > r
    } else {
        r < 0 && t >= 0
    };
    if ok {
        Ok(())
    } else {
        Err(FbmError::InvalidArgument(format!(
            "{}: steps r={r}, t={t} outside {}",
            kind.name(),
            if kind.future_side() {
                "0 <= r < t"
            } else {
                "r < 0 <= t"
            }
        )))
    }
}

/// `((k + n)^a - k^a)` without cancellation.
#[inline]
fn power_gap(a: f64, k: f64, n: f64) -> f64 {
    k.powf(a) * (a * (n / k).ln_1p()).exp_m1()
}

/// `sum_{j=lo}^{hi-1} a j^(a-1)`, smallest terms first.
fn unit_weight_sum(a: f64, lo: u64, hi: u64) -> f64 {
    (lo..hi).rev().map(|j| a * (j as f64).powf(a - 1.0)).sum()
}

/// `(value, upper_bound)` of one error term in units of `dt^a`, by direct summation.
fn direct_unit(kind: ErrorKind, a: f64, r: i64, t: i64) -> (f64, f64) {
    match kind {
        ErrorKind::Epsilon => {
            let j = (t - r) as u64;
            let value = unit_weight_sum(a, 1, j) - (a * (j as f64).ln()).exp_m1();
            (value, a)
        }
        ErrorKind::Delta => {
            let k = (-r) as f64;
            let value = unit_weight_sum(a, (-r) as u64, (t - r) as u64) - power_gap(a, k, t as f64);
            (value, a * k.powf(a - 1.0))
        }
        ErrorKind::EpsilonTilde => {
            let j = (t - r) as u64;
            let value = -a * tail_unchecked(1.0 - a, j) - (j as f64).powf(a);
            (value, -a * (j as f64).powf(a - 1.0))
        }
        ErrorKind::DeltaTilde => {
            let k = (-r) as f64;
            let value =
                -unit_weight_sum(a, (-r) as u64, (t - r) as u64) + power_gap(a, k, t as f64);
            (value, -a * k.powf(a - 1.0))
        }
    }
}

fn evaluate(kind: ErrorKind, h: HurstIndex, r: i64, t: i64, grid: &GridSpec) -> Result<f64> {
    kind.check(h)?;
    check_steps(kind, r, t)?;
    let a = h.offset();
    Ok(grid.dt().powf(a) * direct_unit(kind, a, r, t).0)
}

/// `eps_N(r, t)` for `H > 1/2`, `0 <= r < t`.
pub fn error_epsilon(h: HurstIndex, r: i64, t: i64, grid: &GridSpec) -> Result<f64> {
    evaluate(ErrorKind::Epsilon, h, r, t, grid)
}

/// `delta_N(r, t)` for `H > 1/2`, `r < 0 <= t`.
pub fn error_delta(h: HurstIndex, r: i64, t: i64, grid: &GridSpec) -> Result<f64> {
    evaluate(ErrorKind::Delta, h, r, t, grid)
}

/// `eps~_N(r, t)` for `H < 1/2`, `0 <= r < t`; the infinite sum is an exact zeta tail.
pub fn error_epsilon_tilde(h: HurstIndex, r: i64, t: i64, grid: &GridSpec) -> Result<f64> {
    evaluate(ErrorKind::EpsilonTilde, h, r, t, grid)
}

/// `delta~_N(r, t)` for `H < 1/2`, `r < 0 <= t`.
pub fn error_delta_tilde(h: HurstIndex, r: i64, t: i64, grid: &GridSpec) -> Result<f64> {
    evaluate(ErrorKind::DeltaTilde, h, r, t, grid)
}

/// Per-term upper bound of an error term.
pub fn error_upper_bound(kind: ErrorKind, h: HurstIndex, r: i64, t: i64, grid: &GridSpec) -> Result<f64> {
    kind.check(h)?;
    check_steps(kind, r, t)?;
    let a = h.offset();
    Ok(grid.dt().powf(a) * direct_unit(kind, a, r, t).1)
}

/// Error term from the shared tables, O(1) per call; matches the direct
/// summation up to rounding.
pub(crate) fn tabulated(kind: ErrorKind, table: &WeightTable, r: i64, t: i64) -> (f64, f64) {
    let a = table.hurst().offset();
    let scale = table.dt_pow();
    match kind {
        ErrorKind::Epsilon => {
            let j = (t - r) as usize;
            let closed = scale * (a * (j as f64).ln()).exp_m1();
            (table.prefix(j - 1) - closed, a * scale)
        }
        ErrorKind::Delta => {
            let k = (-r) as usize;
            let sum = table.prefix(k + t as usize - 1) - table.prefix(k - 1);
            let closed = scale * power_gap(a, k as f64, t as f64);
            (sum - closed, a * scale * (k as f64).powf(a - 1.0))
        }
        ErrorKind::EpsilonTilde => {
            let j = (t - r) as usize;
            let tail = table.tail(j).expect("sub-diffusive table carries zeta tails");
            let value = scale * (-a * tail - (j as f64).powf(a));
            (value, -a * scale * (j as f64).powf(a - 1.0))
        }
        ErrorKind::DeltaTilde => {
            let k = (-r) as usize;
            let sum = table.prefix(k + t as usize - 1) - table.prefix(k - 1);
            let closed = scale * power_gap(a, k as f64, t as f64);
            (-sum + closed, -a * scale * (k as f64).powf(a - 1.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTermEntry {
    pub r: f64,
    pub t: f64,
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub within_bounds: bool,
}

/// Every error term of one kind at the requested times, against its bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTermReport {
    pub hurst: HurstIndex,
    pub grid: GridSpec,
    pub which: ErrorKind,
    pub entries: Vec<ErrorTermEntry>,
}

impl ErrorTermReport {
    /// Covers `0 <= r < t` for the eps kinds and `-M <= r < 0` for the delta kinds.
    pub fn build(kind: ErrorKind, table: &WeightTable, t_steps: &[i64]) -> Result<Self> {
        let h = table.hurst();
        kind.check(h)?;
        let grid = *table.grid();
        let mut entries = Vec::new();
        for &t in t_steps {
            if t < 0 || t > grid.end_step() {
                return Err(FbmError::OutsideStream {
                    index: t,
                    first: 0,
                    end: grid.end_step() + 1,
                });
            }
            let rs = if kind.future_side() {
                0..t
            } else {
                grid.first_step()..0
            };
            for r in rs {
                let (value, upper) = tabulated(kind, table, r, t);
                entries.push(ErrorTermEntry {
                    r: grid.time(r),
                    t: grid.time(t),
                    value,
                    lower_bound: 0.0,
                    upper_bound: upper,
                    within_bounds: value >= 0.0 && value <= upper,
                });
            }
        }
        Ok(Self {
            hurst: h,
            grid,
            which: kind,
            entries,
        })
    }

    pub fn all_within(&self) -> bool {
        self.entries.iter().all(|e| e.within_bounds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &ErrorTermEntry> {
        self.entries.iter().filter(|e| !e.within_bounds)
    }

    /// Largest `value / upper_bound` over the entries.
    pub fn max_ratio(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.upper_bound > 0.0)
            .map(|e| e.value / e.upper_bound)
            .fold(0.0, f64::max)
    }
}

/// Counts and extremes of one error kind over many `(r, t)` pairs, without
/// keeping the entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTermSummary {
    pub which: ErrorKind,
    pub count: usize,
    pub violations: usize,
    pub min_value: f64,
    /// Largest `value / upper_bound`.
    pub max_ratio: f64,
}

impl ErrorTermSummary {
    pub fn sweep(kind: ErrorKind, table: &WeightTable, t_steps: &[i64]) -> Result<Self> {
        kind.check(table.hurst())?;
        let grid = table.grid();
        let mut summary = Self {
            which: kind,
            count: 0,
            violations: 0,
            min_value: f64::INFINITY,
            max_ratio: 0.0,
        };
        for &t in t_steps {
            if t < 0 || t > grid.end_step() {
                return Err(FbmError::OutsideStream {
                    index: t,
                    first: 0,
                    end: grid.end_step() + 1,
                });
            }
            let rs = if kind.future_side() {
                0..t
            } else {
                grid.first_step()..0
            };
            for r in rs {
                let (value, upper) = tabulated(kind, table, r, t);
                summary.count += 1;
                if !(value >= 0.0 && value <= upper) {
                    summary.violations += 1;
                }
                summary.min_value = summary.min_value.min(value);
                if upper > 0.0 {
                    summary.max_ratio = summary.max_ratio.max(value / upper);
                }
            }
        }
        Ok(summary)
    }

    pub fn all_within(&self) -> bool {
        self.violations == 0
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
    fn epsilon_vanishes_on_one_cell() {
        let g = make_grid(4, 1.0, 4).unwrap();
        for r in 0..4 {
            assert_eq!(error_epsilon(h(0.75), r, r + 1, &g).unwrap(), 0.0);
        }
    }

    #[test]
    fn epsilon_four_terms_by_hand() {
        // H = 0.75, N = 4, r = 0, t = 1: three weights minus the integral
        let g = make_grid(4, 1.0, 4).unwrap();
        let dt: f64 = 0.25;
        let sum: f64 = (1..4).map(|j| 0.25 * (j as f64 * dt).powf(-0.75) * dt).sum();
        let integral = 1.0 - dt.powf(0.25);
        let value = error_epsilon(h(0.75), 0, 4, &g).unwrap();
        assert!((value - (sum - integral)).abs() < 1e-15);
        assert!(value > 0.0 && value <= 0.25 * dt.powf(0.25));
    }

    #[test]
    fn delta_vanishes_at_time_zero_and_respects_bounds() {
        let g = make_grid(4, 1.0, 4).unwrap();
        assert_eq!(error_delta(h(0.75), -1, 0, &g).unwrap(), 0.0);
        let dt: f64 = 0.25;
        let sum: f64 = (0..4)
            .map(|s| 0.25 * ((s as f64 + 1.0) * dt).powf(-0.75) * dt)
            .sum();
        let integral = 1.25f64.powf(0.25) - dt.powf(0.25);
        let value = error_delta(h(0.75), -1, 4, &g).unwrap();
        assert!((value - (sum - integral)).abs() < 1e-15);
        let bound = error_upper_bound(ErrorKind::Delta, h(0.75), -1, 4, &g).unwrap();
        assert!(value > 0.0 && value <= bound);
    }

    #[test]
    fn epsilon_tilde_against_long_direct_tail() {
        // H = 0.25, N = 4, r = 0, t = 1
        let g = make_grid(4, 1.0, 4).unwrap();
        let dt: f64 = 0.25;
        let a = -0.25;
        // 10^6 tail terms plus the integral of the remainder
        let mut direct = 0.0;
        for j in (4..4_000_004u64).rev() {
            direct += -a * (j as f64 * dt).powf(a - 1.0) * dt;
        }
        let cut = 4_000_004.0 * dt - 0.5 * dt;
        direct += cut.powf(a);
        let value = error_epsilon_tilde(h(0.25), 0, 4, &g).unwrap();
        assert!((value - (direct - 1.0)).abs() < 1e-9, "{value} {}", direct - 1.0);
        let bound = error_upper_bound(ErrorKind::EpsilonTilde, h(0.25), 0, 4, &g).unwrap();
        assert!(value > 0.0 && value <= bound);
    }

    #[test]
    fn delta_tilde_four_terms_by_hand() {
        let g = make_grid(4, 1.0, 4).unwrap();
        let dt: f64 = 0.25;
        let sum: f64 = (0..4)
            .map(|s| 0.25 * ((s as f64 + 1.0) * dt).powf(-1.25) * dt)
            .sum();
        let integral = dt.powf(-0.25) - 1.25f64.powf(-0.25);
        let value = error_delta_tilde(h(0.25), -1, 4, &g).unwrap();
        assert!((value - (sum - integral)).abs() < 1e-14);
        assert_eq!(error_delta_tilde(h(0.25), -1, 0, &g).unwrap(), 0.0);
    }

    #[test]
    fn regime_and_step_guards() {
        let g = make_grid(4, 1.0, 4).unwrap();
        assert!(error_epsilon(h(0.5), 0, 1, &g).is_err());
        assert!(error_epsilon(h(0.25), 0, 1, &g).is_err());
        assert!(error_delta(h(0.75), 0, 1, &g).is_err());
        assert!(error_epsilon_tilde(h(0.75), 0, 1, &g).is_err());
        assert!(error_delta_tilde(h(0.25), 1, 2, &g).is_err());
        assert!(error_epsilon(h(0.75), 2, 2, &g).is_err());
    }

    #[test]
    fn tabulated_matches_direct() {
        let g = make_grid(8, 2.0, 40).unwrap();
        for (hv, kinds) in [
            (0.7, [ErrorKind::Epsilon, ErrorKind::Delta]),
            (0.3, [ErrorKind::EpsilonTilde, ErrorKind::DeltaTilde]),
        ] {
            let table = WeightTable::new(h(hv), g);
            for kind in kinds {
                for t in [0i64, 1, 5, 16] {
                    let rs: Vec<i64> = if kind.future_side() {
                        (0..t).collect()
                    } else {
                        (-40..0).collect()
                    };
                    for r in rs {
                        let direct = evaluate(kind, h(hv), r, t, &g).unwrap();
                        let (tab, _) = tabulated(kind, &table, r, t);
                        assert!((direct - tab).abs() < 1e-13, "{kind:?} r={r} t={t}");
                    }
                }
            }
        }
    }

    #[test]
    fn epsilon_shrinks_under_refinement() {
        // same (r, t) = (0, 1) at finer grids: eps scales like dt^(H-1/2)
        let mut last = f64::INFINITY;
        for n in [4u64, 16, 64] {
            let g = make_grid(n, 1.0, 1).unwrap();
            let e = error_epsilon(h(0.75), 0, n as i64, &g).unwrap();
            assert!(e < last);
            last = e;
        }
    }

    #[test]
    fn report_flags_every_entry() {
        let table = WeightTable::new(h(0.25), make_grid(8, 1.0, 64).unwrap());
        let report = ErrorTermReport::build(ErrorKind::DeltaTilde, &table, &[1, 4, 8]).unwrap();
        assert_eq!(report.entries.len(), 3 * 64);
        assert!(report.all_within());
        assert!(report.max_ratio() <= 1.0);
        let summary = ErrorTermSummary::sweep(ErrorKind::DeltaTilde, &table, &[1, 4, 8]).unwrap();
        assert_eq!(summary.count, report.entries.len());
        assert_eq!(summary.max_ratio, report.max_ratio());
        assert!(summary.all_within() && summary.min_value >= 0.0);
    }
}
