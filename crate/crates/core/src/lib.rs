//! Weighted Bernoulli random walks converging to fractional Brownian motion.
//!
//! A walk with Hurst index `H` on the grid `dt = 1/N` is built from fair coin
//! tosses: each increment is the current toss scaled by `K_H dt^(H-1/2)` plus
//! a power-law weighted sum of all earlier tosses. Scaled by `c_H` it
//! converges to fBm with `Var X(t) = t^(2H)` as `N` grows.
//!
//! ```
//! use fbmwalk::{make_grid, HurstIndex, PathForm, WalkGenerator};
//!
//! let grid = make_grid(64, 1.0, 1024).unwrap();
//! let walk = WalkGenerator::new(HurstIndex::new(0.3).unwrap(), grid);
//! let path = walk.path(PathForm::Incremental, 7, true).unwrap();
//! assert_eq!(path.values.len(), 65);
//! assert_eq!(path.values[0], 0.0);
//! ```

pub mod error;
pub mod grid;
pub mod hurst;
pub mod oracle;
pub mod parallel;
pub mod special;
pub mod stats;
pub mod walk;

pub use error::{FbmError, Result};

/// Library version recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use grid::{bernoulli_stream, coin, make_grid, BernoulliStream, GridSpec};
pub use hurst::{HurstIndex, Regime};
pub use special::{
    coefficient_k, gamma_fn, scaling_constant_c, scaling_constant_c_by_quadrature, zeta,
    zeta_tail, FbmConstants,
};
pub use walk::{PathForm, PathSample, WalkGenerator, WeightTable};
