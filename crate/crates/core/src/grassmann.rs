//! Subspaces of F_p^n in canonical RREF form, their enumeration, duals,
//! containment, and cosets.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{decode_into, encode_unchecked, num_points, FpMatrix, PointIndex, PrimeModulus};
use crate::guard::SizeGuard;

/// A linear subspace of F_p^n. The basis is the reduced row echelon form,
/// so two values are equal iff they describe the same subspace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    p: PrimeModulus,
    n: usize,
    basis: FpMatrix,
    pivots: Vec<usize>,
}

impl Subspace {
    /// The span of `vectors` (any number, possibly dependent).
    pub fn span(p: PrimeModulus, n: usize, vectors: &[Vec<u32>]) -> Result<Self> {
        let m = FpMatrix::from_rows(vectors, n, p)?;
        Ok(Self::from_matrix(p, m))
    }

    /// Row space of `m`.
    pub fn from_matrix(p: PrimeModulus, m: FpMatrix) -> Self {
        let n = m.cols();
        let r = m.rref(p);
        Self {
            p,
            n,
            basis: r.matrix.truncate_rows(r.rank),
            pivots: r.pivots,
        }
    }

    pub fn zero(p: PrimeModulus, n: usize) -> Self {
        Self {
            p,
            n,
            basis: FpMatrix::zeros(0, n),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: PrimeModulus, n: usize) -> Self {
        Self {
            p,
            n,
            basis: FpMatrix::identity(n),
            pivots: (0..n).collect(),
        }
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
    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    #[inline]
    pub fn basis(&self) -> &FpMatrix {
        &self.basis
    }

    #[inline]
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.p != other.p || self.n != other.n {
            return Err(Error::AmbientMismatch(
                self.p.get() as u64,
                self.n,
                other.p.get() as u64,
                other.n,
            ));
        }
        Ok(())
    }

    /// Subtract multiples of the basis rows so that every pivot coordinate
    /// of `x` becomes zero. The result is the canonical representative of
    /// the coset `x + self`.
    pub fn reduce(&self, x: &mut [u32]) {
        debug_assert_eq!(x.len(), self.n);
        let p = self.p;
        for (i, &c) in self.pivots.iter().enumerate() {
            let f = x[c];
            if f == 0 {
                continue;
            }
            for (xj, &rj) in x.iter_mut().zip(self.basis.row(i)).skip(c) {
                *xj = p.sub(*xj, p.mul(f, rj));
            }
        }
    }

    pub fn contains_vector(&self, x: &[u32]) -> bool {
        let mut v = x.to_vec();
        self.reduce(&mut v);
        v.iter().all(|&c| c == 0)
    }

    pub fn contains_point(&self, x: PointIndex) -> bool {
        let mut v = vec![0; self.n];
        decode_into(x.0, self.p, &mut v);
        self.reduce(&mut v);
        v.iter().all(|&c| c == 0)
    }

    /// All `p^dim` members, in base-p order of their coefficient vectors.
    pub fn points(&self) -> impl Iterator<Item = PointIndex> + '_ {
        let k = self.dim();
        let total = self.p.as_usize().pow(k as u32);
        let mut coeff = vec![0u32; k];
        let mut v = vec![0u32; self.n];
        (0..total).map(move |c| {
            decode_into(c, self.p, &mut coeff);
            v.iter_mut().for_each(|e| *e = 0);
            for (r, &a) in coeff.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (vj, &bj) in v.iter_mut().zip(self.basis.row(r)) {
                    *vj = self.p.add(*vj, self.p.mul(a, bj));
                }
            }
            PointIndex(encode_unchecked(&v, self.p))
        })
    }

    /// The same subspace inside F_p^m (m >= n), padded with zero coordinates.
    pub fn embed(&self, m: usize) -> Result<Self> {
        if m < self.n {
            return Err(Error::param(format!(
                "cannot embed F_p^{} into F_p^{m}",
                self.n
            )));
        }
        let rows: Vec<Vec<u32>> = self
            .basis
            .row_iter()
            .map(|r| {
                let mut v = r.to_vec();
                v.resize(m, 0);
                v
            })
            .collect();
        Subspace::span(self.p, m, &rows)
    }

    /// Rows as `1,0,2;0,1,1`. The zero subspace is the empty string.
    pub fn notation(&self) -> String {
        self.basis
            .row_iter()
            .map(|r| {
                r.iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Parse the row notation of [`Subspace::notation`]. Rows need not be
    /// reduced or independent; the result is their span.
    pub fn parse(p: PrimeModulus, n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::zero(p, n));
        }
        let rows = s
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|e| {
                        let v: i64 = e
                            .trim()
                            .parse()
                            .map_err(|_| Error::param(format!("bad entry {e:?} in {s:?}")))?;
                        Ok(p.reduce(v))
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::span(p, n, &rows)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.notation())
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.notation())
    }
}

/// Exact number of k-dimensional subspaces of F_p^n.
pub fn gaussian_binomial(n: usize, k: usize, p: PrimeModulus) -> Result<BigUint> {
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds n = {n}")));
    }
    let q = BigUint::from(p.get());
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow((n - i) as u32) - 1u32;
        den *= q.pow((k - i) as u32) - 1u32;
    }
    Ok(num / den)
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn pivot_sets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Every subspace whose RREF has exactly the given pivot columns, with the
/// free entries counted lexicographically (first free slot most significant).
#[derive(Clone, Debug)]
pub struct PivotBlock {
    p: PrimeModulus,
    n: usize,
    pivots: Vec<usize>,
    slots: Vec<(usize, usize)>,
    digits: Option<Vec<u32>>,
}

impl PivotBlock {
    pub fn new(p: PrimeModulus, n: usize, pivots: Vec<usize>) -> Self {
        let slots = pivots
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| {
                let pv = &pivots;
                (c + 1..n)
                    .filter(move |j| !pv.contains(j))
                    .map(move |j| (i, j))
            })
            .collect::<Vec<_>>();
        let digits = Some(vec![0; slots.len()]);
        Self {
            p,
            n,
            pivots,
            slots,
            digits,
        }
    }

    /// Total number of subspaces in this block, `p^(#free entries)`.
    pub fn total(&self) -> usize {
        self.p.as_usize().pow(self.slots.len() as u32)
    }
}

impl Iterator for PivotBlock {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        let digits = self.digits.as_mut()?;
        let k = self.pivots.len();
        let mut basis = FpMatrix::zeros(k, self.n);
        let mut entries = basis.entries().to_vec();
        for (i, &c) in self.pivots.iter().enumerate() {
            entries[i * self.n + c] = 1;
        }
        for (&(i, j), &d) in self.slots.iter().zip(digits.iter()) {
            entries[i * self.n + j] = d;
        }
        basis = FpMatrix::new(k, self.n, entries, self.p).expect("entries below p");
        let out = Subspace {
            p: self.p,
            n: self.n,
            basis,
            pivots: self.pivots.clone(),
        };

        // advance: last slot is least significant
        let mut carry = true;
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d == self.p.get() {
                *d = 0;
            } else {
                carry = false;
                break;
            }
        }
        if carry {
            self.digits = None;
        }
        Some(out)
    }
}

/// Stream of G(k, F_p^n): pivot sets in lexicographic order, then free
/// entries lexicographically within each pivot set.
#[derive(Clone, Debug)]
pub struct SubspaceIter {
    p: PrimeModulus,
    n: usize,
    blocks: std::vec::IntoIter<Vec<usize>>,
    current: Option<PivotBlock>,
}

impl Iterator for SubspaceIter {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        loop {
            if let Some(s) = self.current.as_mut().and_then(Iterator::next) {
                return Some(s);
            }
            let pivots = self.blocks.next()?;
            self.current = Some(PivotBlock::new(self.p, self.n, pivots));
        }
    }
}

/// Enumerate G(k, F_p^n) after checking the size guard.
pub fn enumerate_subspaces(
    p: PrimeModulus,
    n: usize,
    k: usize,
    guard: &SizeGuard,
) -> Result<SubspaceIter> {
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds n = {n}")));
    }
    guard.check_points(p, n)?;
    guard.check_subspaces(p, n, k)?;
    Ok(SubspaceIter {
        p,
        n,
        blocks: pivot_sets(n, k).into_iter(),
        current: None,
    })
}

/// The annihilator `{xi : x . xi = 0 for all x in V}`, which is the support
/// of the Fourier transform of the indicator of `V`.
pub fn dual(v: &Subspace) -> Subspace {
    let ns = v.basis.null_space(v.p);
    let r = ns.rref(v.p);
    Subspace {
        p: v.p,
        n: v.n,
        basis: r.matrix.truncate_rows(r.rank),
        pivots: r.pivots,
    }
}

/// Whether `v` is a subspace of `w`.
pub fn contains(w: &Subspace, v: &Subspace) -> Result<bool> {
    w.same_ambient(v)?;
    if v.dim() > w.dim() {
        return Ok(false);
    }
    Ok(v.basis.row_iter().all(|r| w.contains_vector(r)))
}

/// An affine subspace `rep + direction`. `rep` is the unique point of the
/// coset whose coordinates at the direction's pivot columns are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AffinePlane {
    pub direction: Subspace,
    pub rep: PointIndex,
}

impl AffinePlane {
    pub fn contains(&self, x: PointIndex) -> bool {
        let mut v = vec![0; self.direction.n];
        decode_into(x.0, self.direction.p, &mut v);
        self.direction.reduce(&mut v);
        encode_unchecked(&v, self.direction.p) == self.rep.0
    }

    pub fn rep_coords(&self) -> Vec<u32> {
        let mut v = vec![0; self.direction.n];
        decode_into(self.rep.0, self.direction.p, &mut v);
        v
    }
}

impl fmt::Display for AffinePlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rep: Vec<String> = self.rep_coords().iter().map(|c| c.to_string()).collect();
        write!(f, "({}) + {}", rep.join(","), self.direction)
    }
}

/// The coset of `v` through `x`.
pub fn coset_of(v: &Subspace, x: PointIndex) -> Result<AffinePlane> {
    let size = num_points(v.p, v.n).unwrap_or(usize::MAX);
    if x.0 >= size {
        return Err(Error::OutOfRange(format!(
            "point {x} not below {}^{}",
            v.p, v.n
        )));
    }
    let mut c = vec![0; v.n];
    decode_into(x.0, v.p, &mut c);
    v.reduce(&mut c);
    Ok(AffinePlane {
        direction: v.clone(),
        rep: PointIndex(encode_unchecked(&c, v.p)),
    })
}

/// Dense coset labelling for a fixed direction: maps a point to an integer
/// in `[0, p^(n - dim))` read off the non-pivot coordinates of its canonical
/// representative. Used by the hot projection loops.
#[derive(Clone, Debug)]
pub struct CosetKey {
    p: PrimeModulus,
    pivots: Vec<usize>,
    // for each non-pivot column j: (j, [p - row_i[j] for each basis row i])
    columns: Vec<(usize, Vec<u64>)>,
    count: usize,
}

impl CosetKey {
    pub fn new(v: &Subspace) -> Self {
        let p = v.p;
        let columns: Vec<(usize, Vec<u64>)> = (0..v.n)
            .filter(|j| !v.pivots.contains(j))
            .map(|j| {
                let negs = (0..v.dim())
                    .map(|i| p.neg(v.basis.get(i, j)) as u64)
                    .collect();
                (j, negs)
            })
            .collect();
        let count = p.as_usize().pow(columns.len() as u32);
        Self {
            p,
            pivots: v.pivots.clone(),
            columns,
            count,
        }
    }

    /// Number of cosets, `p^(n - dim)`.
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn key(&self, x: &[u32]) -> usize {
        let q = self.p.get() as u64;
        let mut key = 0usize;
        for (j, negs) in self.columns.iter().rev() {
            let mut acc = x[*j] as u64;
            for (&c, &neg) in self.pivots.iter().zip(negs) {
                acc += x[c] as u64 * neg;
            }
            key = key * q as usize + (acc % q) as usize;
        }
        key
    }
}
