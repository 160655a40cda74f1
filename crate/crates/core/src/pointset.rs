//! Subsets of F_p^n as membership bitmaps, plus the text file format.
//!
//! File format: the first non-comment line is `p n`; every following
//! non-comment line is one point as comma-separated residues. Blank lines
//! and anything after `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{decode_into, encode_point, num_points, PointIndex, PrimeModulus};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointSet {
    p: PrimeModulus,
    n: usize,
    size: usize,
    words: Vec<u64>,
    cardinality: usize,
}

impl PointSet {
    pub fn empty(p: PrimeModulus, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("ambient dimension must be at least 1"));
        }
        let size = num_points(p, n)
            .filter(|&s| s <= isize::MAX as usize / 64)
            .ok_or_else(|| Error::InstanceTooLarge(format!("{p}^{n} points")))?;
        Ok(Self {
            p,
            n,
            size,
            words: vec![0; size.div_ceil(64)],
            cardinality: 0,
        })
    }

    pub fn full(p: PrimeModulus, n: usize) -> Result<Self> {
        let mut s = Self::empty(p, n)?;
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        let tail = s.size % 64;
        if tail != 0 {
            *s.words.last_mut().unwrap() = (1u64 << tail) - 1;
        }
        s.cardinality = s.size;
        Ok(s)
    }

    pub fn from_indices(
        p: PrimeModulus,
        n: usize,
        points: impl IntoIterator<Item = PointIndex>,
    ) -> Result<Self> {
        let mut s = Self::empty(p, n)?;
        for x in points {
            s.insert(x)?;
        }
        Ok(s)
    }

    pub fn from_coords(p: PrimeModulus, n: usize, points: &[Vec<u32>]) -> Result<Self> {
        let mut s = Self::empty(p, n)?;
        for c in points {
            s.insert(encode_point(c, p, n)?)?;
        }
        Ok(s)
    }

    #[inline]
    pub fn prime(&self) -> PrimeModulus {
        self.p
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// `p^n`.
    #[inline]
    pub fn universe(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cardinality == 0
    }

    /// `log_p #A`; `None` for the empty set.
    pub fn exponent(&self) -> Option<f64> {
        (self.cardinality > 0).then(|| (self.cardinality as f64).ln() / self.p.as_f64().ln())
    }

    /// Returns whether the point was newly inserted.
    pub fn insert(&mut self, x: PointIndex) -> Result<bool> {
        if x.0 >= self.size {
            return Err(Error::OutOfRange(format!(
                "point {x} not below {}^{}",
                self.p, self.n
            )));
        }
        let (w, b) = (x.0 / 64, x.0 % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        if fresh {
            self.words[w] |= 1 << b;
            self.cardinality += 1;
        }
        Ok(fresh)
    }

    #[inline]
    pub fn contains(&self, x: PointIndex) -> bool {
        x.0 < self.size && self.words[x.0 / 64] & (1 << (x.0 % 64)) != 0
    }

    /// Members in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = PointIndex> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(PointIndex(wi * 64 + b))
            })
        })
    }

    /// Coordinates of all members, flattened `n` per point.
    pub fn coords(&self) -> Vec<u32> {
        let mut out = vec![0; self.cardinality * self.n];
        for (x, chunk) in self.iter().zip(out.chunks_exact_mut(self.n)) {
            decode_into(x.0, self.p, chunk);
        }
        out
    }

    pub fn same_ambient(&self, other: &PointSet) -> bool {
        self.p == other.p && self.n == other.n
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.same_ambient(other)
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.p, self.n);
        let mut c = vec![0; self.n];
        for x in self.iter() {
            decode_into(x.0, self.p, &mut c);
            let row: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `p n` header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [ps, ns] = fields[..] else {
            return Err(Error::parse(hl, format!("expected `p n`, got {header:?}")));
        };
        let p: u64 = ps
            .parse()
            .map_err(|_| Error::parse(hl, format!("bad prime {ps:?}")))?;
        let n: usize = ns
            .parse()
            .map_err(|_| Error::parse(hl, format!("bad dimension {ns:?}")))?;
        let p = PrimeModulus::new(p).map_err(|e| Error::parse(hl, e.to_string()))?;
        let mut set = Self::empty(p, n).map_err(|e| Error::parse(hl, e.to_string()))?;
        for (ln, line) in lines {
            let coords = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::parse(ln, format!("bad coordinate {t:?}")))
                })
                .collect::<Result<Vec<u32>>>()?;
            let idx = encode_point(&coords, p, n).map_err(|e| Error::parse(ln, e.to_string()))?;
            set.insert(idx)?;
        }
        Ok(set)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> PrimeModulus {
        PrimeModulus::new(v).unwrap()
    }

    #[test]
    fn full_and_empty() {
        let f = PointSet::full(p(5), 3).unwrap();
        assert_eq!(f.cardinality(), 125);
        assert_eq!(f.iter().count(), 125);
        assert_eq!(f.iter().last(), Some(PointIndex(124)));
        let e = PointSet::empty(p(5), 3).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.exponent(), None);
        assert!(e.is_subset(&f));
        assert!(!f.is_subset(&e));
        assert!((f.exponent().unwrap() - 3.0).abs() < 1e-12);
        assert!(PointSet::empty(p(5), 0).is_err());
    }

    #[test]
    fn insert_counts_once() {
        let mut s = PointSet::empty(p(3), 2).unwrap();
        assert!(s.insert(PointIndex(4)).unwrap());
        assert!(!s.insert(PointIndex(4)).unwrap());
        assert_eq!(s.cardinality(), 1);
        assert!(s.insert(PointIndex(9)).is_err());
        assert!(s.contains(PointIndex(4)));
        assert!(!s.contains(PointIndex(100)));
    }

    #[test]
    fn text_format() {
        let text = "# a small set\n3 2\n\n0,0\n1,0   # trailing comment\n0, 1\n1,0\n";
        let s = PointSet::parse(text).unwrap();
        assert_eq!(s.cardinality(), 3);
        assert_eq!(s.coords(), vec![0, 0, 1, 0, 0, 1]);
        assert_eq!(PointSet::parse(&s.to_text()).unwrap(), s);
        assert_eq!(s.to_text(), "3 2\n0,0\n1,0\n0,1\n");
    }

    #[test]
    fn text_format_errors() {
        for (bad, line) in [
            ("", 1),
            ("4 2\n", 1),
            ("3\n", 1),
            ("3 2\n0,3\n", 2),
            ("3 2\n0,0,0\n", 2),
            ("3 2\n# c\n\n1,x\n", 4),
        ] {
            match PointSet::parse(bad) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
                other => panic!("{bad:?}: {other:?}"),
            }
        }
    }
}
