//! Arithmetic in F_p, base-p point encoding, and dense matrices over F_p.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported modulus. Products of two residues stay below 2^40.
pub const MAX_PRIME: u64 = 1 << 20;

/// A validated prime modulus `p` with `2 <= p <= 2^20`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeModulus(u32);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p > MAX_PRIME || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    /// Reduce an arbitrary signed integer to its residue in `[0, p)`.
    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.0 as i64) as u32
    }

    pub fn inv(self, a: u32) -> Result<u32> {
        fp_inv(a, self)
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for PrimeModulus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. Bases {2, 3, 5, 7} are exact below 3.2e9,
/// which covers every modulus this crate accepts.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Multiplicative inverse via the extended Euclidean algorithm.
pub fn fp_inv(a: u32, p: PrimeModulus) -> Result<u32> {
    if a == 0 || a >= p.get() {
        return Err(Error::NonInvertible);
    }
    let (mut r0, mut r1) = (p.get() as i64, a as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    Ok(p.reduce(t0))
}

/// Index of a point of F_p^n: the base-p digits, least significant first,
/// are the coordinates `(x_1, ..., x_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct PointIndex(pub usize);

impl PointIndex {
    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `p^n`, or `None` if it does not fit in a `usize`.
pub fn num_points(p: PrimeModulus, n: usize) -> Option<usize> {
    p.as_usize().checked_pow(n as u32)
}

pub fn encode_point(coords: &[u32], p: PrimeModulus, n: usize) -> Result<PointIndex> {
    if coords.len() != n {
        return Err(Error::OutOfRange(format!(
            "expected {n} coordinates, got {}",
            coords.len()
        )));
    }
    if num_points(p, n).is_none() {
        return Err(Error::OutOfRange(format!(
            "{p}^{n} overflows the index type"
        )));
    }
    let mut idx = 0usize;
    for &c in coords.iter().rev() {
        if c >= p.get() {
            return Err(Error::OutOfRange(format!(
                "coordinate {c} not below p = {p}"
            )));
        }
        idx = idx * p.as_usize() + c as usize;
    }
    Ok(PointIndex(idx))
}

pub fn decode_point(idx: PointIndex, p: PrimeModulus, n: usize) -> Result<Vec<u32>> {
    let size = num_points(p, n)
        .ok_or_else(|| Error::OutOfRange(format!("{p}^{n} overflows the index type")))?;
    if idx.0 >= size {
        return Err(Error::OutOfRange(format!("index {idx} not below {p}^{n}")));
    }
    let mut out = vec![0; n];
    decode_into(idx.0, p, &mut out);
    Ok(out)
}

/// Unchecked decode into a caller-provided buffer of length `n`.
#[inline]
pub(crate) fn decode_into(mut idx: usize, p: PrimeModulus, out: &mut [u32]) {
    let q = p.as_usize();
    for c in out.iter_mut() {
        *c = (idx % q) as u32;
        idx /= q;
    }
}

/// Unchecked encode of residues already known to lie in `[0, p)`.
#[inline]
pub(crate) fn encode_unchecked(coords: &[u32], p: PrimeModulus) -> usize {
    coords
        .iter()
        .rev()
        .fold(0usize, |acc, &c| acc * p.as_usize() + c as usize)
}

/// Dense row-major matrix with entries in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

/// Output of [`FpMatrix::rref`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FpMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl FpMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<u32>, p: PrimeModulus) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::param(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(e) = entries.iter().find(|&&e| e >= p.get()) {
            return Err(Error::OutOfRange(format!("entry {e} not below p = {p}")));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<u32>], cols: usize, p: PrimeModulus) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::param(format!(
                "row of length {} in a matrix with {cols} columns",
                r.len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat(), p)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        // chunks_exact panics on a zero chunk size
        (0..self.rows).map(move |r| self.row(r))
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[u32], p: PrimeModulus) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        self.row_iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(0u32, |acc, (&a, &b)| p.add(acc, p.mul(a, b)))
            })
            .collect()
    }

    /// Keep only the first `rows` rows.
    pub(crate) fn truncate_rows(mut self, rows: usize) -> Self {
        self.entries.truncate(rows * self.cols);
        self.rows = rows.min(self.rows);
        self
    }

    /// Reduced row echelon form. The returned matrix has the same shape,
    /// with zero rows collected at the bottom.
    pub fn rref(&self, p: PrimeModulus) -> Rref {
        let mut m = self.clone();
        let cols = m.cols;
        let mut pivots = Vec::new();
        let mut lead = 0;
        for col in 0..cols {
            if lead == m.rows {
                break;
            }
            let Some(pr) = (lead..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if pr != lead {
                for c in 0..cols {
                    m.entries.swap(pr * cols + c, lead * cols + c);
                }
            }
            let inv = fp_inv(m.get(lead, col), p).expect("pivot is nonzero");
            for c in col..cols {
                let e = &mut m.entries[lead * cols + c];
                *e = p.mul(*e, inv);
            }
            for r in 0..m.rows {
                if r == lead {
                    continue;
                }
                let f = m.get(r, col);
                if f == 0 {
                    continue;
                }
                for c in col..cols {
                    let sub = p.mul(f, m.entries[lead * cols + c]);
                    let e = &mut m.entries[r * cols + c];
                    *e = p.sub(*e, sub);
                }
            }
            pivots.push(col);
            lead += 1;
        }
        Rref {
            matrix: m,
            rank: pivots.len(),
            pivots,
        }
    }

    pub fn rank(&self, p: PrimeModulus) -> usize {
        self.rref(p).rank
    }

    /// Basis of the right kernel `{x : self * x = 0}`, in RREF with
    /// `cols - rank` rows.
    pub fn null_space(&self, p: PrimeModulus) -> FpMatrix {
        let Rref { matrix, pivots, .. } = self.rref(p);
        let n = self.cols;
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut basis = FpMatrix::zeros(free.len(), n);
        for (b, &f) in free.iter().enumerate() {
            basis.entries[b * n + f] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                basis.entries[b * n + c] = p.neg(matrix.get(i, f));
            }
        }
        let rank = free.len();
        basis.rref(p).matrix.truncate_rows(rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> PrimeModulus {
        PrimeModulus::new(v).unwrap()
    }

    /// Every linear combination of the rows, as a sorted list of point indices.
    fn span_points(m: &FpMatrix, q: PrimeModulus) -> Vec<usize> {
        let n = m.cols();
        let mut pts = std::collections::BTreeSet::new();
        let combos = q.as_usize().pow(m.rows() as u32);
        let mut coeff = vec![0u32; m.rows()];
        for c in 0..combos {
            decode_into(c, q, &mut coeff);
            let mut v = vec![0u32; n];
            for (r, &a) in coeff.iter().enumerate() {
                for (j, x) in v.iter_mut().enumerate() {
                    *x = q.add(*x, q.mul(a, m.get(r, j)));
                }
            }
            pts.insert(encode_unchecked(&v, q));
        }
        pts.into_iter().collect()
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(1_048_573));
        assert!(!is_prime(1_048_575));
        assert!(PrimeModulus::new(1).is_err());
        assert!(PrimeModulus::new(9).is_err());
        assert!(PrimeModulus::new(1_048_583).is_err()); // prime, above the cap
    }

    #[test]
    fn inverses() {
        let q = p(7);
        assert_eq!(fp_inv(1, q).unwrap(), 1);
        assert_eq!(fp_inv(2, q).unwrap(), 4);
        assert_eq!(fp_inv(6, q).unwrap(), 6);
        assert_eq!(fp_inv(0, q), Err(Error::NonInvertible));
        for v in [2u64, 3, 5, 7, 11, 13, 97, 101] {
            let q = p(v);
            for a in 1..q.get() {
                let b = fp_inv(a, q).unwrap();
                assert_eq!(q.mul(a, b), 1);
                assert_eq!(fp_inv(b, q).unwrap(), a);
            }
        }
    }

    #[test]
    fn encoding() {
        let q = p(3);
        assert_eq!(encode_point(&[0, 0, 0], q, 3).unwrap(), PointIndex(0));
        assert_eq!(encode_point(&[1, 2], q, 2).unwrap(), PointIndex(7));
        for i in 0..27 {
            let c = decode_point(PointIndex(i), q, 3).unwrap();
            assert_eq!(encode_point(&c, q, 3).unwrap(), PointIndex(i));
        }
        assert!(encode_point(&[3, 0], q, 2).is_err());
        assert!(encode_point(&[1], q, 2).is_err());
        assert!(decode_point(PointIndex(9), q, 2).is_err());
    }

    #[test]
    fn rref_examples() {
        let q3 = p(3);
        let z = FpMatrix::zeros(2, 3).rref(q3);
        assert_eq!(
            (z.matrix, z.rank, z.pivots),
            (FpMatrix::zeros(2, 3), 0, vec![])
        );

        let id = FpMatrix::identity(2).rref(q3);
        assert_eq!(
            (id.matrix, id.rank, id.pivots),
            (FpMatrix::identity(2), 2, vec![0, 1])
        );

        let q5 = p(5);
        let m = FpMatrix::from_rows(&[vec![2, 4], vec![1, 2]], 2, q5).unwrap();
        let r = m.rref(q5);
        let want = FpMatrix::from_rows(&[vec![1, 2], vec![0, 0]], 2, q5).unwrap();
        assert_eq!((r.matrix.clone(), r.rank, r.pivots), (want, 1, vec![0]));
        assert_eq!(span_points(&m, q5), span_points(&r.matrix, q5));
    }

    #[test]
    fn null_space_examples() {
        let q = p(3);
        assert_eq!(FpMatrix::identity(3).null_space(q).rows(), 0);

        let m = FpMatrix::from_rows(&[vec![1, 0]], 2, q).unwrap();
        let ns = m.null_space(q);
        // brute force: the vectors annihilated by (1, 0)
        let killed: Vec<usize> = (0..9)
            .filter(|&i| {
                let v = decode_point(PointIndex(i), q, 2).unwrap();
                m.mul_vec(&v, q) == [0]
            })
            .collect();
        assert_eq!(killed, span_points(&ns, q));
        assert_eq!(ns, FpMatrix::from_rows(&[vec![0, 1]], 2, q).unwrap());

        let ns = FpMatrix::zeros(1, 2).null_space(q);
        assert_eq!(ns, FpMatrix::identity(2));
    }

    #[test]
    fn rejects_bad_matrices() {
        let q = p(5);
        assert!(FpMatrix::new(1, 2, vec![1], q).is_err());
        assert!(FpMatrix::new(1, 2, vec![1, 5], q).is_err());
        assert!(FpMatrix::from_rows(&[vec![1, 2], vec![3]], 2, q).is_err());
    }
}
