use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};

/// Diffusive regime of a Hurst index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `H < 1/2`: negatively correlated increments.
    SubDiffusive,
    /// `H = 1/2`: Brownian motion.
    Classical,
    /// `H > 1/2`: positively correlated increments.
    SuperDiffusive,
}

/// A Hurst index validated to lie in the open interval `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstIndex(f64);

impl HurstIndex {
    pub fn new(h: f64) -> Result<Self> {
        if h.is_finite() && h > 0.0 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(FbmError::HurstOutOfRange(h))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `H - 1/2`, the exponent shift shared by every kernel in the crate.
    #[inline]
    pub fn offset(self) -> f64 {
        self.0 - 0.5
    }

    pub fn regime(self) -> Regime {
        if self.0 < 0.5 {
            Regime::SubDiffusive
        } else if self.0 > 0.5 {
            Regime::SuperDiffusive
        } else {
            Regime::Classical
        }
    }
}

impl TryFrom<f64> for HurstIndex {
    type Error = FbmError;

    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

impl From<HurstIndex> for f64 {
    fn from(h: HurstIndex) -> f64 {
        h.0
    }
}

impl std::fmt::Display for HurstIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_closed_endpoints_and_nan() {
        for h in [0.0, 1.0, -0.1, 1.5, f64::NAN, f64::INFINITY] {
            assert!(HurstIndex::new(h).is_err(), "{h}");
        }
    }

    #[test]
    fn regime_tags() {
        assert_eq!(HurstIndex::new(0.3).unwrap().regime(), Regime::SubDiffusive);
        assert_eq!(HurstIndex::new(0.5).unwrap().regime(), Regime::Classical);
        assert_eq!(HurstIndex::new(0.7).unwrap().regime(), Regime::SuperDiffusive);
    }

    #[test]
    fn deserialization_validates() {
        let ok: HurstIndex = serde_json::from_str("0.25").unwrap();
        assert_eq!(ok.value(), 0.25);
        assert!(serde_json::from_str::<HurstIndex>("1.25").is_err());
    }
}
