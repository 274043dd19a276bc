//! Time discretization and the coin tosses that drive the walk.
//!
//! Grid points are addressed by signed step indices: step `i` sits at time
//! `i * dt` with `dt = 1/N`. Real times only appear at the API boundary.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};

/// Relative slack accepted when checking that a real time lies on the grid.
const ON_GRID_TOLERANCE: f64 = 1e-9;

/// Uniform timeline `{k / N}` restricted to `[-M dt, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    n_per_unit: u64,
    horizon_steps: u64,
    past_steps: u64,
}

/// Build a validated grid from `N`, a horizon that must be a multiple of
/// `1/N`, and the number of past steps kept in place of the infinite past.
pub fn make_grid(n_per_unit: u64, horizon: f64, past_horizon_steps: u64) -> Result<GridSpec> {
    if n_per_unit == 0 {
        return Err(FbmError::InvalidGrid("n_per_unit must be at least 1".into()));
    }
    if past_horizon_steps == 0 {
        return Err(FbmError::InvalidGrid(
            "past_horizon_steps must be at least 1".into(),
        ));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(FbmError::InvalidGrid(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let steps = horizon * n_per_unit as f64;
    let rounded = steps.round();
    if (steps - rounded).abs() > ON_GRID_TOLERANCE * rounded.max(1.0) || rounded < 1.0 {
        return Err(FbmError::InvalidGrid(format!(
            "horizon {horizon} is not a positive multiple of 1/{n_per_unit}"
        )));
    }
    GridSpec::from_steps(n_per_unit, rounded as u64, past_horizon_steps)
}

impl GridSpec {
    /// Grid from integer step counts.
    pub fn from_steps(n_per_unit: u64, horizon_steps: u64, past_steps: u64) -> Result<Self> {
        if n_per_unit == 0 || horizon_steps == 0 || past_steps == 0 {
            return Err(FbmError::InvalidGrid(format!(
                "all step counts must be positive (N={n_per_unit}, horizon steps={horizon_steps}, past steps={past_steps})"
            )));
        }
        Ok(Self {
            n_per_unit,
            horizon_steps,
            past_steps,
        })
    }

    #[inline]
    pub fn n_per_unit(&self) -> u64 {
        self.n_per_unit
    }

    /// `dt = 1/N`; always derived, never stored.
    #[inline]
    pub fn dt(&self) -> f64 {
        1.0 / self.n_per_unit as f64
    }

    #[inline]
    pub fn horizon_steps(&self) -> u64 {
        self.horizon_steps
    }

    #[inline]
    pub fn past_steps(&self) -> u64 {
        self.past_steps
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.horizon_steps as i64)
    }

    /// Same grid with a different past horizon.
    pub fn with_past_steps(&self, past_steps: u64) -> Result<Self> {
        Self::from_steps(self.n_per_unit, self.horizon_steps, past_steps)
    }

    /// Time of step `i`.
    #[inline]
    pub fn time(&self, step: i64) -> f64 {
        step as f64 / self.n_per_unit as f64
    }

    /// Step index of a real time, which must lie on the grid.
    pub fn step_of(&self, t: f64) -> Result<i64> {
        let steps = t * self.n_per_unit as f64;
        let rounded = steps.round();
        if !steps.is_finite() || (steps - rounded).abs() > ON_GRID_TOLERANCE * rounded.abs().max(1.0)
        {
            return Err(FbmError::OffGrid(t));
        }
        Ok(rounded as i64)
    }

    /// First step covered by a stream, `-M`.
    #[inline]
    pub fn first_step(&self) -> i64 {
        -(self.past_steps as i64)
    }

    /// One past the last step with a coin toss; the horizon itself carries none.
    #[inline]
    pub fn end_step(&self) -> i64 {
        self.horizon_steps as i64
    }

    /// Number of coin tosses, `M + horizon/dt`.
    #[inline]
    pub fn stream_len(&self) -> usize {
        (self.past_steps + self.horizon_steps) as usize
    }

    /// `f(s) + f(s + dt) + ... + f(t - dt)`: lower limit included, upper
    /// limit excluded, empty when `s == t`. Limits are step indices and `f`
    /// receives the time of each term.
    pub fn sum(&self, s: i64, t: i64, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        if s > t {
            return Err(FbmError::ReverseSum { lower: s, upper: t });
        }
        Ok((s..t).map(|i| f(self.time(i))).sum())
    }
}

/// Stream word offset that maps signed steps onto ChaCha word positions.
const STEP_ORIGIN: i128 = 1 << 62;

/// Coin toss `omega(step)` for a seed: a pure function of `(seed, step)`.
///
/// Bits are read from the ChaCha8 keystream of `seed` at a position set by
/// `step`, so any window of tosses can be produced without generating the
/// ones before it, and streams with a longer past agree on the common steps.
pub fn coin(seed: u64, step: i64) -> i8 {
    let position = (step as i128 + STEP_ORIGIN) as u128;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(position / 32);
    bit_to_sign(rng.next_u32() >> (position % 32))
}

#[inline]
fn bit_to_sign(word: u32) -> i8 {
    if word & 1 == 1 {
        1
    } else {
        -1
    }
}

fn fill_coins(seed: u64, first_step: i64, out: &mut [i8]) {
    if out.is_empty() {
        return;
    }
    let start = (first_step as i128 + STEP_ORIGIN) as u128;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(start / 32);
    let mut bit = (start % 32) as u32;
    let mut word = rng.next_u32() >> bit;
    for slot in out.iter_mut() {
        if bit == 32 {
            word = rng.next_u32();
            bit = 0;
        }
        *slot = bit_to_sign(word);
        word >>= 1;
        bit += 1;
    }
}

/// The `±1` tosses of one seed over every step of a grid, past included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BernoulliStream {
    seed: u64,
    grid: GridSpec,
    /// Index 0 is step `-M`.
    draws: Vec<i8>,
}

/// Draw the stream of `seed` over `grid`.
pub fn bernoulli_stream(seed: u64, grid: GridSpec) -> BernoulliStream {
    let mut draws = vec![0i8; grid.stream_len()];
    fill_coins(seed, grid.first_step(), &mut draws);
    BernoulliStream { seed, grid, draws }
}

impl BernoulliStream {
    /// Stream from explicit tosses (index 0 is step `-M`); `seed` is kept as a label.
    pub fn from_draws(seed: u64, grid: GridSpec, draws: Vec<i8>) -> Result<Self> {
        if draws.len() != grid.stream_len() {
            return Err(FbmError::InvalidArgument(format!(
                "expected {} draws, got {}",
                grid.stream_len(),
                draws.len()
            )));
        }
        if let Some(bad) = draws.iter().find(|&&d| d != 1 && d != -1) {
            return Err(FbmError::InvalidArgument(format!(
                "draws must be +1 or -1, found {bad}"
            )));
        }
        Ok(Self { seed, grid, draws })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Tosses in step order, starting at step `-M`.
    pub fn draws(&self) -> &[i8] {
        &self.draws
    }

    /// `omega(step)`.
    pub fn omega(&self, step: i64) -> Result<i8> {
        self.index(step).map(|i| self.draws[i])
    }

    /// `dB(step) = sqrt(dt) * omega(step)`.
    pub fn delta_b(&self, step: i64) -> Result<f64> {
        Ok(self.grid.dt().sqrt() * f64::from(self.omega(step)?))
    }

    /// Tosses as `f64`, the form the path kernels consume.
    pub fn signs(&self) -> Vec<f64> {
        self.draws.iter().map(|&d| f64::from(d)).collect()
    }

    /// Plain Bernoulli walk `B(t) = sum_{r=0}^{t} dB(r)` on `0..=horizon`.
    pub fn walk(&self) -> Vec<f64> {
        let scale = self.grid.dt().sqrt();
        let future = &self.draws[self.grid.past_steps as usize..];
        let mut values = Vec::with_capacity(future.len() + 1);
        let mut acc = 0.0;
        values.push(acc);
        for &d in future {
            acc += scale * f64::from(d);
            values.push(acc);
        }
        values
    }

    fn index(&self, step: i64) -> Result<usize> {
        if step < self.grid.first_step() || step >= self.grid.end_step() {
            return Err(FbmError::OutsideStream {
                index: step,
                first: self.grid.first_step(),
                end: self.grid.end_step(),
            });
        }
        Ok((step - self.grid.first_step()) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_grid() {
        let g = make_grid(4, 1.0, 8).unwrap();
        assert_eq!(g.dt(), 0.25);
        assert_eq!(g.horizon_steps(), 4);
        assert_eq!(g.past_steps(), 8);
        assert_eq!(g.stream_len(), 12);
        assert_eq!(g.first_step(), -8);
        assert_eq!(g.dt() * g.n_per_unit() as f64, 1.0);
    }

    #[test]
    fn unit_grid_steps() {
        let g = make_grid(1, 3.0, 1).unwrap();
        assert_eq!(g.dt(), 1.0);
        let times: Vec<f64> = (0..g.end_step()).map(|i| g.time(i)).collect();
        assert_eq!(times, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_grid(4, 1.1, 8).is_err());
        assert!(make_grid(0, 1.0, 8).is_err());
        assert!(make_grid(4, 0.0, 8).is_err());
        assert!(make_grid(4, -1.0, 8).is_err());
        assert!(make_grid(4, 1.0, 0).is_err());
        assert!(make_grid(4, f64::NAN, 8).is_err());
        // 0.1 is not exactly representable but 10 * 0.1 rounds cleanly
        assert_eq!(make_grid(10, 0.1, 1).unwrap().horizon_steps(), 1);
    }

    #[test]
    fn step_of_rejects_off_grid_times() {
        let g = make_grid(4, 1.0, 1).unwrap();
        assert_eq!(g.step_of(0.75).unwrap(), 3);
        assert_eq!(g.step_of(-0.5).unwrap(), -2);
        assert!(g.step_of(0.3).is_err());
    }

    #[test]
    fn sum_convention_examples() {
        let g = make_grid(4, 1.0, 1).unwrap();
        assert_eq!(g.sum(0, 4, |_| 1.0).unwrap(), 4.0);
        assert_eq!(g.sum(3, 3, |_| 1.0).unwrap(), 0.0);
        assert!(g.sum(3, 2, |_| 1.0).is_err());
        let half = make_grid(2, 1.0, 1).unwrap();
        assert_eq!(half.sum(0, 2, |r| r).unwrap(), 0.5);
    }

    #[test]
    fn stream_is_deterministic_and_signed() {
        let g = make_grid(16, 2.0, 40).unwrap();
        let a = bernoulli_stream(9, g);
        let b = bernoulli_stream(9, g);
        assert_eq!(a, b);
        assert!(a.draws().iter().all(|&d| d == 1 || d == -1));
        assert_ne!(a.draws(), bernoulli_stream(10, g).draws());
        for step in g.first_step()..g.end_step() {
            assert_eq!(a.delta_b(step).unwrap().abs(), g.dt().sqrt());
            assert_eq!(a.omega(step).unwrap(), coin(9, step));
        }
        assert!(a.omega(g.end_step()).is_err());
        assert!(a.omega(g.first_step() - 1).is_err());
    }

    #[test]
    fn longer_past_extends_the_same_stream() {
        let short = bernoulli_stream(3, make_grid(8, 1.0, 5).unwrap());
        let long = bernoulli_stream(3, make_grid(8, 1.0, 77).unwrap());
        assert_eq!(short.draws(), &long.draws()[72..]);
    }

    #[test]
    fn empirical_mean_of_a_million_draws() {
        let g = GridSpec::from_steps(1, 500_000, 500_000).unwrap();
        let s = bernoulli_stream(2024, g);
        let n = s.draws().len() as f64;
        let mean: f64 = s.draws().iter().map(|&d| f64::from(d)).sum::<f64>() / n;
        assert!(mean.abs() <= 4.0 / n.sqrt(), "{mean}");
    }

    #[test]
    fn walk_starts_at_zero() {
        let s = bernoulli_stream(1, make_grid(4, 1.0, 3).unwrap());
        let w = s.walk();
        assert_eq!(w.len(), 5);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 0.5 * f64::from(s.omega(0).unwrap()));
    }
}
