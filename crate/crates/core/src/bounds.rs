//! Exponent formulas for the size of exceptional sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_kn(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::param(format!(
            "need 0 < k < n, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

/// `t(a, s) = max{k(n-k) + 2(s-a), (k-1)(n-k)}`.
pub fn main_exponent(n: usize, k: usize, a: f64, s: f64) -> Result<f64> {
    check_kn(n, k)?;
    let (n, k) = (n as f64, k as f64);
    Ok((k * (n - k) + 2.0 * (s - a)).max((k - 1.0) * (n - k)))
}

/// The `s` at which the two branches of [`main_exponent`] meet.
pub fn main_crossover(n: usize, k: usize, a: f64) -> Result<f64> {
    check_kn(n, k)?;
    Ok(a - (n - k) as f64 / 2.0)
}

/// `s < (a + 2k - n) / 2`, the range where the main bound is stated.
pub fn below_main_threshold(n: usize, k: usize, a: f64, s: f64) -> bool {
    s < (a + 2.0 * k as f64 - n as f64) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeThreshold {
    /// `s* = (k/n) a`.
    pub s_star: f64,
    /// `k(n-k) - 1`.
    pub exponent: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundExponents {
    /// `k(n-k) + s - k`.
    pub kaufman: f64,
    /// `max{k(n-k) + s - a, 0}`.
    pub falconer: f64,
    pub he_threshold: HeThreshold,
    pub main_t: f64,
    /// Only for n = 3 and `(a, s)` inside the domain of the target.
    pub conjectured_lines: Option<f64>,
    pub conjectured_planes: Option<f64>,
}

pub fn classical_exponents(n: usize, k: usize, a: f64, s: f64) -> Result<BoundExponents> {
    check_kn(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    let dim = kf * (nf - kf);
    let conj = |t| {
        (n == 3)
            .then(|| conjectured_exponent(t, a, s).ok())
            .flatten()
    };
    Ok(BoundExponents {
        kaufman: dim + s - kf,
        falconer: (dim + s - a).max(0.0),
        he_threshold: HeThreshold {
            s_star: kf / nf * a,
            exponent: dim - 1.0,
        },
        main_t: main_exponent(n, k, a, s)?,
        conjectured_lines: conj(Target::Lines),
        conjectured_planes: conj(Target::Planes),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Lines,
    Planes,
}

impl Target {
    /// Projections to lines are k = 1, to planes k = 2, in F_p^3.
    pub fn k(self) -> usize {
        match self {
            Target::Lines => 1,
            Target::Planes => 2,
        }
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lines" => Ok(Target::Lines),
            "planes" => Ok(Target::Planes),
            _ => Err(Error::param(format!("expected lines or planes, got {s:?}"))),
        }
    }
}

/// Lower bounds for the exceptional-set exponent in three dimensions from
/// the line and plane constructions, as piecewise functions of `(a, s)`.
/// Breakpoints written `<=` belong to the left piece.
pub fn conjectured_exponent(target: Target, a: f64, s: f64) -> Result<f64> {
    let k = target.k() as f64;
    if !(a > 0.0 && a <= 3.0) || !(s > 0.0 && s < k.min(a)) {
        return Err(Error::param(format!(
            "(a, s) = ({a}, {s}) outside 0 < a <= 3, 0 < s < min{{{k}, a}}"
        )));
    }
    Ok(match target {
        Target::Lines => {
            if a <= 1.0 {
                1.0
            } else if s <= (a - 1.0) / 2.0 {
                0.0
            } else if a <= 2.0 && s > a - 1.0 {
                1.0
            } else {
                1.0 + 2.0 * s - a
            }
        }
        Target::Planes => {
            if a <= 1.0 {
                (2.0 * s - a).max(0.0)
            } else if a <= 2.0 {
                if s <= a / 2.0 {
                    0.0
                } else if s <= 1.0 {
                    2.0 * s - a
                } else if s <= (a + 1.0) / 2.0 {
                    1.0
                } else {
                    2.0 * s - a
                }
            } else if s <= a - 1.0 {
                0.0
            } else if s <= (a + 1.0) / 2.0 {
                1.0
            } else {
                2.0 * s - a
            }
        }
    })
}
