//! Run configuration shared by the library pipeline and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::mpc::{pow2, Real};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunConfig {
    /// Working precision in bits (>= 64).
    pub precision_bits: usize,
    /// Residual tolerance as a power of two exponent; `None` means the
    /// default 2^(-precision/2).
    pub tol_exp: Option<i64>,
    /// Height bound for integer relation search.
    pub height_bound: u64,
    /// PRNG seed for sampling.
    pub rng_seed: u64,
    /// Iteration cap for solvers.
    pub max_iter: usize,
    /// Samples per hypothesis vote.
    pub samples: usize,
    /// Retry budget for point sampling.
    pub sample_retries: usize,
    /// Gate solves on pi_2 dominance as well as pi_1.
    pub require_both_dominant: bool,
    /// Intermediate term-count guard for elimination.
    pub term_bound: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_bits: 256,
            tol_exp: None,
            height_bound: 100,
            rng_seed: 0,
            max_iter: 500,
            samples: 5,
            sample_retries: 8,
            require_both_dominant: false,
            term_bound: 100_000,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 64 {
            return Err(Error::InvalidConfig(format!(
                "precision_bits must be >= 64, got {}",
                self.precision_bits
            )));
        }
        if self.height_bound < 1 {
            return Err(Error::InvalidConfig("height_bound must be >= 1".into()));
        }
        if let Some(t) = self.tol_exp {
            if t >= 0 {
                return Err(Error::InvalidConfig(
                    "tol must lie strictly inside (0, 1)".into(),
                ));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be positive".into()));
        }
        Ok(())
    }

    /// Tolerance as a power-of-two exponent (default -precision/2).
    pub fn tol_exponent(&self) -> i64 {
        self.tol_exp
            .unwrap_or(-(self.precision_bits as i64) / 2)
    }

    /// Tolerance 2^tol_exponent as a real at working precision.
    pub fn tol(&self) -> Real {
        pow2(self.tol_exponent(), self.precision_bits)
    }

    /// Numerical rank threshold 2^(-precision/4).
    pub fn rank_threshold(&self) -> Real {
        pow2(-(self.precision_bits as i64) / 4, self.precision_bits)
    }

    /// Log-singularity guard radius 2^(-precision/4).
    pub fn singularity_radius(&self) -> Real {
        pow2(-(self.precision_bits as i64) / 4, self.precision_bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.tol_exponent(), -128);
    }

    #[test]
    fn low_precision_rejected() {
        let c = RunConfig {
            precision_bits: 32,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
