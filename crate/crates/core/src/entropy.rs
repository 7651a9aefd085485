//! Differential entropy of Gaussian (sub)systems and log-base conversion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::scalar::{from_usize, Scalar};

/// `(1 + log 2π) / 2`, the per-variable entropy constant in nats.
pub fn entropy_constant<T: Scalar>() -> T {
    (T::one() + (T::TAU()).ln()) / (T::one() + T::one())
}

/// `h = log det / 2 + (dim / 2)(1 + log 2π)` for a `dim`-variate Gaussian.
#[inline]
pub fn entropy_from_log_det<T: Scalar>(log_det: T, dim: usize) -> T {
    log_det / (T::one() + T::one()) + from_usize::<T>(dim) * entropy_constant::<T>()
}

/// Differential entropy (nats) of `N(0, m)`.
pub fn gaussian_entropy<T: Scalar>(m: &SpdMatrix<T>) -> Result<T> {
    Ok(entropy_from_log_det(m.log_det()?, m.dim()))
}

/// Logarithm base for reported values. Computation is always in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogBase(f64);

impl LogBase {
    pub const NATURAL: LogBase = LogBase(std::f64::consts::E);

    pub fn new(base: f64) -> Result<Self> {
        if !(base > 0.0) || base == 1.0 || !base.is_finite() {
            return Err(Error::BadArguments(format!(
                "log base must be positive, finite and != 1, got {base}"
            )));
        }
        Ok(Self(base))
    }

    pub fn base(self) -> f64 {
        self.0
    }

    /// Converts a quantity measured in nats (log-minor, entropy, standard error).
    pub fn scale<T: Scalar>(self, nats: T) -> T {
        if self == Self::NATURAL {
            return nats;
        }
        nats / T::from_f64(self.0.ln()).unwrap()
    }

    /// Converts a variance measured in nats².
    pub fn scale_variance<T: Scalar>(self, nats2: T) -> T {
        self.scale(self.scale(nats2))
    }
}

impl Default for LogBase {
    fn default() -> Self {
        Self::NATURAL
    }
}
