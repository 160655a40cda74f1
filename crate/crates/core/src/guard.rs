use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::grassmann::gaussian_binomial;

/// Name of the environment variable that overrides [`SizeGuard::max_points`].
pub const MAX_POINTS_ENV: &str = "FFPROJ_MAX_POINTS";

/// Caps on exhaustive scans: `p^n` points and the number of subspaces
/// in a single Grassmannian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeGuard {
    pub max_points: u64,
    pub max_subspaces: u64,
}

impl Default for SizeGuard {
    fn default() -> Self {
        Self {
            max_points: 1 << 24,
            max_subspaces: 1 << 22,
        }
    }
}

impl SizeGuard {
    pub fn unlimited() -> Self {
        Self {
            max_points: u64::MAX,
            max_subspaces: u64::MAX,
        }
    }

    /// Default limits, with `max_points` taken from `FFPROJ_MAX_POINTS`
    /// when it is set.
    pub fn from_env() -> Result<Self> {
        let mut g = Self::default();
        if let Ok(v) = std::env::var(MAX_POINTS_ENV) {
            g.max_points = v.trim().parse().map_err(|_| {
                Error::param(format!(
                    "{MAX_POINTS_ENV}={v:?} is not a nonnegative integer"
                ))
            })?;
        }
        Ok(g)
    }

    pub fn check_points(&self, p: PrimeModulus, n: usize) -> Result<usize> {
        let size = (p.get() as u64).checked_pow(n as u32);
        match size {
            Some(s) if s <= self.max_points && usize::try_from(s).is_ok() => Ok(s as usize),
            _ => Err(Error::InstanceTooLarge(format!(
                "{p}^{n} points exceeds the limit of {}",
                self.max_points
            ))),
        }
    }

    pub fn check_subspaces(&self, p: PrimeModulus, n: usize, k: usize) -> Result<u64> {
        let count = gaussian_binomial(n, k, p)?;
        match u64::try_from(&count) {
            Ok(c) if c <= self.max_subspaces => Ok(c),
            _ => Err(Error::InstanceTooLarge(format!(
                "#G({k}, F_{p}^{n}) = {count} exceeds the limit of {}",
                self.max_subspaces
            ))),
        }
    }
}
