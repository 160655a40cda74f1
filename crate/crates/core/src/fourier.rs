//! Discrete Fourier transform on F_p^n.
//!
//! Convention: `f^(xi) = sum_x f(x) e_p(-x.xi)` and
//! `g^v(x) = p^-n sum_xi g(xi) e_p(x.xi)` with `e_p(t) = exp(2 pi i t / p)`.
//! Both are evaluated as `n` passes of direct length-`p` sums, one per axis.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::SplitMix64;
use crate::error::{Error, Result};
use crate::field::{decode_into, num_points, PointIndex, PrimeModulus};
use crate::grassmann::{dual, enumerate_subspaces, AffinePlane, Subspace};
use crate::guard::SizeGuard;
use crate::pointset::PointSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Physical,
    Frequency,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    p: PrimeModulus,
    n: usize,
    side: Side,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(p: PrimeModulus, n: usize, side: Side) -> Result<Self> {
        let len =
            num_points(p, n).ok_or_else(|| Error::InstanceTooLarge(format!("{p}^{n} points")))?;
        Ok(Self {
            p,
            n,
            side,
            values: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_values(
        p: PrimeModulus,
        n: usize,
        side: Side,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let len =
            num_points(p, n).ok_or_else(|| Error::InstanceTooLarge(format!("{p}^{n} points")))?;
        if values.len() != len {
            return Err(Error::param(format!(
                "expected {len} values for {p}^{n}, got {}",
                values.len()
            )));
        }
        Ok(Self { p, n, side, values })
    }

    pub fn constant(p: PrimeModulus, n: usize, c: f64) -> Result<Self> {
        let mut f = Self::zeros(p, n, Side::Physical)?;
        f.values
            .iter_mut()
            .for_each(|v| *v = Complex64::new(c, 0.0));
        Ok(f)
    }

    pub fn delta(p: PrimeModulus, n: usize, x: PointIndex) -> Result<Self> {
        let mut f = Self::zeros(p, n, Side::Physical)?;
        let slot = f
            .values
            .get_mut(x.0)
            .ok_or_else(|| Error::OutOfRange(format!("point {x}")))?;
        *slot = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    /// `1_A` on the physical side.
    pub fn indicator(a: &PointSet) -> Result<Self> {
        let mut f = Self::zeros(a.prime(), a.ambient_dim(), Side::Physical)?;
        for x in a.iter() {
            f.values[x.0] = Complex64::new(1.0, 0.0);
        }
        Ok(f)
    }

    pub fn subspace_indicator(v: &Subspace) -> Result<Self> {
        let mut f = Self::zeros(v.prime(), v.ambient_dim(), Side::Physical)?;
        for x in v.points() {
            f.values[x.0] = Complex64::new(1.0, 0.0);
        }
        Ok(f)
    }

    pub fn coset_indicator(w: &AffinePlane) -> Result<Self> {
        let v = &w.direction;
        let (p, n) = (v.prime(), v.ambient_dim());
        let base = w.rep_coords();
        let mut f = Self::zeros(p, n, Side::Physical)?;
        let mut c = vec![0; n];
        for x in v.points() {
            decode_into(x.0, p, &mut c);
            for (ci, &b) in c.iter_mut().zip(&base) {
                *ci = p.add(*ci, b);
            }
            f.values[crate::field::encode_unchecked(&c, p)] = Complex64::new(1.0, 0.0);
        }
        Ok(f)
    }

    /// Seeded function with real and imaginary parts uniform in [-1, 1).
    pub fn random(p: PrimeModulus, n: usize, seed: u64) -> Result<Self> {
        let mut rng = SplitMix64::new(seed);
        let mut f = Self::zeros(p, n, Side::Physical)?;
        for v in f.values.iter_mut() {
            let re = 2.0 * rng.next_f64() - 1.0;
            let im = 2.0 * rng.next_f64() - 1.0;
            *v = Complex64::new(re, im);
        }
        Ok(f)
    }

    #[inline]
    pub fn prime(&self) -> PrimeModulus {
        self.p
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn side(&self) -> Side {
        self.side
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, x: PointIndex) -> Complex64 {
        self.values[x.0]
    }

    /// `sum |f|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |f - g|`; both must live on the same grid.
    pub fn max_diff(&self, other: &GridFunction) -> f64 {
        assert_eq!((self.p, self.n), (other.p, other.n));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn require(&self, side: Side) -> Result<()> {
        if self.side != side {
            return Err(Error::param(format!(
                "expected a {side:?} function, got {:?}",
                self.side
            )));
        }
        Ok(())
    }
}

/// `e_p(t) = exp(2 pi i t / p)`.
pub fn character(p: PrimeModulus, t: u32) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (t % p.get()) as f64 / p.as_f64())
}

fn axis_passes(values: &mut Vec<Complex64>, p: PrimeModulus, n: usize, sign: f64) {
    let q = p.as_usize();
    let twiddle: Vec<Complex64> = (0..q)
        .map(|t| Complex64::from_polar(1.0, sign * TAU * t as f64 / q as f64))
        .collect();
    let len = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let mut stride = 1;
    for _ in 0..n {
        let block = stride * q;
        out.par_chunks_mut(block)
            .zip(values.par_chunks(block))
            .for_each(|(dst, src)| {
                for lo in 0..stride {
                    for xi in 0..q {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for x in 0..q {
                            acc += src[lo + x * stride] * twiddle[(x * xi) % q];
                        }
                        dst[lo + xi * stride] = acc;
                    }
                }
            });
        std::mem::swap(values, &mut out);
        stride = block;
    }
}

pub fn dft(f: &GridFunction) -> Result<GridFunction> {
    f.require(Side::Physical)?;
    let mut values = f.values.clone();
    axis_passes(&mut values, f.p, f.n, -1.0);
    Ok(GridFunction {
        side: Side::Frequency,
        values,
        ..*f
    })
}

pub fn idft(g: &GridFunction) -> Result<GridFunction> {
    g.require(Side::Frequency)?;
    let mut values = g.values.clone();
    axis_passes(&mut values, g.p, g.n, 1.0);
    let scale = 1.0 / values.len() as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(GridFunction {
        side: Side::Physical,
        values,
        ..*g
    })
}

impl GridFunction {
    fn shallow(&self) -> Self {
        Self {
            p: self.p,
            n: self.n,
            side: self.side,
            values: Vec::new(),
        }
    }
}

/// `|sum |f|^2 - p^-n sum |f^|^2|`.
pub fn plancherel_residual(f: &GridFunction) -> Result<f64> {
    let g = dft(f)?;
    Ok((f.norm_sq() - g.norm_sq() / f.values.len() as f64).abs())
}

/// `(f_low, f_high)` with `f_low` the constant mean.
pub fn high_low_split(f: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    f.require(Side::Physical)?;
    let mean = f.values.iter().sum::<Complex64>() / f.values.len() as f64;
    let mut low = f.shallow();
    low.values = vec![mean; f.values.len()];
    let mut high = f.shallow();
    high.values = f.values.iter().map(|v| v - mean).collect();
    Ok((low, high))
}

/// The dual of `V` read off the support of the transform of `1_V`.
pub fn dual_oracle(v: &Subspace, guard: &SizeGuard) -> Result<Subspace> {
    let (p, n) = (v.prime(), v.ambient_dim());
    guard.check_points(p, n)?;
    let g = dft(&GridFunction::subspace_indicator(v)?)?;
    let height = p.as_f64().powi(v.dim() as i32);
    let mut support = Vec::new();
    let mut c = vec![0; n];
    for (i, val) in g.values.iter().enumerate() {
        if val.norm() > height / 2.0 {
            if (val.norm() - height).abs() > 1e-6 * height.max(1.0) {
                return Err(Error::NumericFault(format!(
                    "support value {val} at {i}, expected modulus {height}"
                )));
            }
            decode_into(i, p, &mut c);
            support.push(c.clone());
        }
    }
    let w = Subspace::span(p, n, &support)?;
    let size = p.as_usize().pow(w.dim() as u32);
    if size != support.len() {
        return Err(Error::NumericFault(format!(
            "support of size {} spans a subspace of size {size}",
            support.len()
        )));
    }
    Ok(w)
}

/// Worst-case deviations measured by [`fourier_suite`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FourierSuiteReport {
    pub subspaces: usize,
    /// `max |1_V^ - p^dim V 1_{V*}|` over all subspaces.
    pub indicator_error: f64,
    pub dual_mismatches: usize,
    /// `max |f^(xi)| - p^dim V` over cosets, for `xi` in `V*`, plus `max |f^|` off `V*`.
    pub translation_error: f64,
    pub random_functions: usize,
    /// `max residual / ||f||^2`.
    pub plancherel_relative: f64,
    /// `max ||idft(dft f) - f||_inf / (p^n ||f||_inf)`.
    pub roundtrip_relative: f64,
    /// `max |(f_high)^(0)|`.
    pub high_at_zero: f64,
}

impl FourierSuiteReport {
    /// Whether every measurement is within the documented tolerances.
    pub fn passes(&self) -> bool {
        self.indicator_error < 1e-6
            && self.dual_mismatches == 0
            && self.translation_error < 1e-6
            && self.plancherel_relative < 1e-8
            && self.roundtrip_relative < 1e-9
            && self.high_at_zero < 1e-6
    }
}

/// Exhaustive indicator and translation laws for every subspace of F_p^n
/// with `p` in `primes` and `n <= max_n`, plus `samples` random functions
/// for Plancherel, round-trip and the high part.
pub fn fourier_suite(
    primes: &[PrimeModulus],
    max_n: usize,
    samples: usize,
    seed: u64,
    guard: &SizeGuard,
) -> Result<FourierSuiteReport> {
    let mut r = FourierSuiteReport::default();
    for &p in primes {
        for n in 1..=max_n {
            guard.check_points(p, n)?;
            for k in 0..=n {
                for v in enumerate_subspaces(p, n, k, guard)? {
                    r.subspaces += 1;
                    let height = p.as_f64().powi(k as i32);
                    let vd = dual(&v);
                    let g = dft(&GridFunction::subspace_indicator(&v)?)?;
                    for (i, val) in g.values.iter().enumerate() {
                        let want = if vd.contains_point(PointIndex(i)) {
                            height
                        } else {
                            0.0
                        };
                        r.indicator_error = r.indicator_error.max((val - want).norm());
                    }
                    if dual_oracle(&v, guard)? != vd {
                        r.dual_mismatches += 1;
                    }
                    // one translate per subspace, through the last point of F_p^n
                    let last = PointIndex(g.values.len() - 1);
                    let w = crate::grassmann::coset_of(&v, last)?;
                    r.translation_error = r.translation_error.max(translation_error(&w)?);
                }
            }
        }
    }
    let mut rng = SplitMix64::new(seed);
    let mut grids = Vec::new();
    for &p in primes {
        for n in 1..=max_n {
            grids.push((p, n));
        }
    }
    if !grids.is_empty() {
        for i in 0..samples {
            let (p, n) = grids[i % grids.len()];
            let f = GridFunction::random(p, n, rng.next_u64())?;
            r.random_functions += 1;
            let norm = f.norm_sq();
            r.plancherel_relative = r.plancherel_relative.max(plancherel_residual(&f)? / norm);
            let back = idft(&dft(&f)?)?;
            let scale = f.values.len() as f64 * f.max_abs();
            r.roundtrip_relative = r.roundtrip_relative.max(back.max_diff(&f) / scale);
            let (_, high) = high_low_split(&f)?;
            r.high_at_zero = r.high_at_zero.max(dft(&high)?.values[0].norm());
        }
    }
    Ok(r)
}

/// Deviation of `1_W^` from `p^dim V e_p(-x_W.xi) 1_{V*}(xi)`.
pub fn translation_error(w: &AffinePlane) -> Result<f64> {
    let v = &w.direction;
    let (p, n) = (v.prime(), v.ambient_dim());
    let height = p.as_f64().powi(v.dim() as i32);
    let g = dft(&GridFunction::coset_indicator(w)?)?;
    let vd = dual(v);
    let x_w = w.rep_coords();
    let mut xi = vec![0; n];
    let mut worst: f64 = 0.0;
    for (i, val) in g.values.iter().enumerate() {
        let want = if vd.contains_point(PointIndex(i)) {
            decode_into(i, p, &mut xi);
            let dot = x_w
                .iter()
                .zip(&xi)
                .fold(0u32, |acc, (&a, &b)| p.add(acc, p.mul(a, b)));
            character(p, p.neg(dot)) * height
        } else {
            Complex64::new(0.0, 0.0)
        };
        worst = worst.max((val - want).norm());
    }
    Ok(worst)
}
