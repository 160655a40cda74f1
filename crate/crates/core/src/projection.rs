//! Projection images, exceptional sets, the overlap number, and the
//! hyperplane slicing used by the incidence argument.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{decode_into, encode_unchecked, PointIndex, PrimeModulus};
use crate::grassmann::{
    self, coset_of, dual, enumerate_subspaces, AffinePlane, CosetKey, Subspace,
};
use crate::guard::SizeGuard;
use crate::pointset::PointSet;

/// Knobs shared by the exhaustive scans.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScanOptions {
    pub guard: SizeGuard,
    /// Worker threads for the direction scan; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl ScanOptions {
    pub fn sequential() -> Self {
        Self {
            workers: Some(1),
            ..Self::default()
        }
    }
}

/// Run `f` on a pool with the requested number of workers.
pub(crate) fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(f),
    }
}

fn check_ambient(v: &Subspace, a: &PointSet) -> Result<()> {
    if v.prime() != a.prime() || v.ambient_dim() != a.ambient_dim() {
        return Err(Error::AmbientMismatch(
            v.prime().get() as u64,
            v.ambient_dim(),
            a.prime().get() as u64,
            a.ambient_dim(),
        ));
    }
    Ok(())
}

/// Reusable marks for counting distinct coset keys.
#[derive(Default)]
pub(crate) struct CosetCounter {
    marks: Vec<u32>,
    epoch: u32,
}

impl CosetCounter {
    /// Number of distinct cosets of `key` met by the flattened points.
    pub(crate) fn count(&mut self, key: &CosetKey, coords: &[u32], n: usize) -> usize {
        if self.marks.len() < key.count() {
            self.marks.resize(key.count(), 0);
        }
        if self.epoch == u32::MAX {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
        let mut distinct = 0;
        for x in coords.chunks_exact(n) {
            let k = key.key(x);
            if self.marks[k] != self.epoch {
                self.marks[k] = self.epoch;
                distinct += 1;
            }
        }
        distinct
    }
}

/// The cosets of `v` meeting `a`, sorted by representative.
pub fn project(v: &Subspace, a: &PointSet) -> Result<Vec<AffinePlane>> {
    check_ambient(v, a)?;
    let mut reps: Vec<PointIndex> = Vec::with_capacity(a.cardinality());
    let mut c = vec![0; a.ambient_dim()];
    for x in a.iter() {
        decode_into(x.0, a.prime(), &mut c);
        v.reduce(&mut c);
        reps.push(PointIndex(encode_unchecked(&c, a.prime())));
    }
    reps.sort_unstable();
    reps.dedup();
    Ok(reps
        .into_iter()
        .map(|rep| AffinePlane {
            direction: v.clone(),
            rep,
        })
        .collect())
}

/// `#pi_V(A)`.
pub fn projection_count(v: &Subspace, a: &PointSet) -> Result<usize> {
    check_ambient(v, a)?;
    Ok(CosetCounter::default().count(&CosetKey::new(v), &a.coords(), a.ambient_dim()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionCount {
    pub direction: Subspace,
    pub count: usize,
    pub exceptional: bool,
}

/// Full result of an exceptional-set scan for projections with fibres in
/// G(n-k, F_p^n).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalReport {
    pub p: PrimeModulus,
    pub n: usize,
    pub k: usize,
    pub s: f64,
    pub cardinality: usize,
    /// `log_p #A`, absent for the empty set.
    pub a: Option<f64>,
    /// `p^s`; a direction is exceptional iff its count is strictly below it.
    pub threshold: f64,
    /// Whether `0 < s < min{k, a}`.
    pub in_range: bool,
    pub directions: Vec<DirectionCount>,
    /// Indices into `directions`.
    pub exceptional: Vec<usize>,
    /// The overlap number M.
    pub overlap: usize,
    /// Smallest nonzero frequency attaining M.
    pub xi0: Option<PointIndex>,
    pub xi0_coords: Option<Vec<u32>>,
    /// Exceptional directions whose dual contains `xi0`, as indices into
    /// `directions`.
    pub theta: Vec<usize>,
}

impl ExceptionalReport {
    pub fn exceptional_count(&self) -> usize {
        self.exceptional.len()
    }

    pub fn exceptional_directions(&self) -> impl Iterator<Item = &Subspace> + '_ {
        self.exceptional
            .iter()
            .map(|&i| &self.directions[i].direction)
    }

    pub fn theta_directions(&self) -> impl Iterator<Item = &Subspace> + '_ {
        self.theta.iter().map(|&i| &self.directions[i].direction)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `count < p^s` with the strict comparison carried out in `f64`.
#[inline]
pub fn below_threshold(count: usize, p: PrimeModulus, s: f64) -> bool {
    (count as f64) < p.as_f64().powf(s)
}

/// Whether `s` lies in `(0, min{k, a})`.
pub fn s_in_range(k: usize, a: Option<f64>, s: f64) -> bool {
    match a {
        Some(a) => s > 0.0 && s < (k as f64).min(a),
        None => false,
    }
}

/// Scan every direction in G(n-k, F_p^n) and collect `E_s(A)`, M, and the
/// pencil Theta. Results are independent of the worker count.
pub fn exceptional_set(
    a: &PointSet,
    k: usize,
    s: f64,
    opts: &ScanOptions,
) -> Result<ExceptionalReport> {
    let (p, n) = (a.prime(), a.ambient_dim());
    if k == 0 || k >= n {
        return Err(Error::param(format!(
            "need 0 < k < n, got k = {k}, n = {n}"
        )));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param(format!("need a positive finite s, got {s}")));
    }
    let subspaces: Vec<Subspace> = enumerate_subspaces(p, n, n - k, &opts.guard)?.collect();
    let coords = a.coords();
    let counts: Vec<usize> = with_workers(opts.workers, || {
        subspaces
            .par_iter()
            .map_init(CosetCounter::default, |ctr, v| {
                ctr.count(&CosetKey::new(v), &coords, n)
            })
            .collect()
    });

    let directions: Vec<DirectionCount> = subspaces
        .into_iter()
        .zip(counts)
        .map(|(direction, count)| DirectionCount {
            direction,
            count,
            exceptional: below_threshold(count, p, s),
        })
        .collect();
    let exceptional: Vec<usize> = (0..directions.len())
        .filter(|&i| directions[i].exceptional)
        .collect();
    let members: Vec<Subspace> = exceptional
        .iter()
        .map(|&i| directions[i].direction.clone())
        .collect();
    let (overlap, xi0) = overlap_number(&members)?;
    let theta = match xi0 {
        Some(xi) => {
            let xi_c = crate::field::decode_point(xi, p, n)?;
            exceptional
                .iter()
                .copied()
                .filter(|&i| annihilates(&directions[i].direction, &xi_c))
                .collect()
        }
        None => Vec::new(),
    };
    let a_exp = a.exponent();
    Ok(ExceptionalReport {
        p,
        n,
        k,
        s,
        cardinality: a.cardinality(),
        a: a_exp,
        threshold: p.as_f64().powf(s),
        in_range: s_in_range(k, a_exp, s),
        directions,
        exceptional,
        overlap,
        xi0,
        xi0_coords: xi0.map(|x| crate::field::decode_point(x, p, n).expect("in range")),
        theta,
    })
}

/// `xi . v = 0` for every basis row `v`, i.e. `xi` lies in the dual.
fn annihilates(v: &Subspace, xi: &[u32]) -> bool {
    let p = v.prime();
    v.basis().row_iter().all(|r| {
        r.iter()
            .zip(xi)
            .fold(0u32, |acc, (&a, &b)| p.add(acc, p.mul(a, b)))
            == 0
    })
}

/// The maximum over nonzero `xi` of the number of members whose dual
/// contains `xi`, and the smallest `xi` attaining it.
pub fn overlap_number(family: &[Subspace]) -> Result<(usize, Option<PointIndex>)> {
    let Some(first) = family.first() else {
        return Ok((0, None));
    };
    let (p, n) = (first.prime(), first.ambient_dim());
    if let Some(bad) = family
        .iter()
        .find(|v| v.prime() != p || v.ambient_dim() != n)
    {
        return Err(Error::AmbientMismatch(
            p.get() as u64,
            n,
            bad.prime().get() as u64,
            bad.ambient_dim(),
        ));
    }
    let size = crate::field::num_points(p, n).expect("subspace ambient fits");
    let mut tally = vec![0usize; size];
    for v in family {
        for xi in dual(v).points() {
            tally[xi.0] += 1;
        }
    }
    let mut best = (0, None);
    for (i, &t) in tally.iter().enumerate().skip(1) {
        if t > best.0 {
            best = (t, Some(PointIndex(i)));
        }
    }
    Ok(best)
}

/// `M * p^(n - k + s - a)`, the right side of the overlap-weighted bound.
pub fn falconer_rhs(a: &PointSet, k: usize, s: f64, overlap: usize) -> Result<f64> {
    let a_exp = a
        .exponent()
        .ok_or_else(|| Error::Precondition("#A must be at least 1".into()))?;
    let n = a.ambient_dim() as f64;
    Ok(overlap as f64 * a.prime().as_f64().powf(n - k as f64 + s - a_exp))
}

/// Slices of the same dyadic size class: `2^beta <= #A_i < 2^(beta+1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DyadicClass {
    pub beta: u32,
    pub slices: Vec<usize>,
}

impl DyadicClass {
    /// `#I * 2^beta`.
    pub fn mass(&self) -> u128 {
        (self.slices.len() as u128) << self.beta
    }
}

/// `A` cut by the `p` translates of a hyperplane `H0`. Slice `i` is
/// `{x : x . normal = i}`, which is the coset of `H0` whose canonical
/// representative has value `i` at the free column.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceDecomposition {
    pub hyperplane: Subspace,
    pub normal: Vec<u32>,
    pub slices: Vec<Vec<PointIndex>>,
    /// Nonempty classes in increasing `beta`.
    pub histogram: Vec<DyadicClass>,
    /// The class maximizing `#I * 2^beta` (smallest `beta` on ties).
    pub best: Option<DyadicClass>,
}

impl SliceDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        self.slices.iter().map(Vec::len).collect()
    }

    pub fn slice_set(&self, i: usize) -> PointSet {
        let p = self.hyperplane.prime();
        let n = self.hyperplane.ambient_dim();
        PointSet::from_indices(p, n, self.slices[i].iter().copied()).expect("slice of a valid set")
    }
}

fn require_hyperplane(h0: &Subspace, n: usize) -> Result<()> {
    if h0.ambient_dim() != n || h0.dim() + 1 != n {
        return Err(Error::Precondition(format!(
            "expected a hyperplane of F_p^{n}, got a {}-dimensional subspace of F_p^{}",
            h0.dim(),
            h0.ambient_dim()
        )));
    }
    Ok(())
}

pub fn slice(a: &PointSet, h0: &Subspace) -> Result<SliceDecomposition> {
    let (p, n) = (a.prime(), a.ambient_dim());
    require_hyperplane(h0, n)?;
    if h0.prime() != p {
        return Err(Error::AmbientMismatch(
            h0.prime().get() as u64,
            n,
            p.get() as u64,
            n,
        ));
    }
    let normal = dual(h0).basis().row(0).to_vec();
    let mut slices = vec![Vec::new(); p.as_usize()];
    let mut c = vec![0; n];
    for x in a.iter() {
        decode_into(x.0, p, &mut c);
        let i = c
            .iter()
            .zip(&normal)
            .fold(0u32, |acc, (&u, &w)| p.add(acc, p.mul(u, w)));
        slices[i as usize].push(x);
    }

    let mut histogram: Vec<DyadicClass> = Vec::new();
    for (i, sl) in slices.iter().enumerate() {
        if sl.is_empty() {
            continue;
        }
        let beta = usize::BITS - 1 - sl.len().leading_zeros();
        match histogram.iter_mut().find(|c| c.beta == beta) {
            Some(c) => c.slices.push(i),
            None => histogram.push(DyadicClass {
                beta,
                slices: vec![i],
            }),
        }
    }
    histogram.sort_by_key(|c| c.beta);
    let mut best: Option<DyadicClass> = None;
    for c in &histogram {
        if best.as_ref().is_none_or(|b| c.mass() > b.mass()) {
            best = Some(c.clone());
        }
    }
    Ok(SliceDecomposition {
        hyperplane: h0.clone(),
        normal,
        slices,
        histogram,
        best,
    })
}

/// Checks `#pi_V(A) = sum_i #pi_V(A_i)` over the slices parallel to `H0`.
pub fn fubini_check(a: &PointSet, v: &Subspace, h0: &Subspace) -> Result<bool> {
    check_ambient(v, a)?;
    require_hyperplane(h0, a.ambient_dim())?;
    if !grassmann::contains(h0, v)? {
        return Err(Error::Precondition(format!("{v} is not contained in {h0}")));
    }
    let whole = projection_count(v, a)?;
    let dec = slice(a, h0)?;
    let key = CosetKey::new(v);
    let mut ctr = CosetCounter::default();
    let n = a.ambient_dim();
    let parts: usize = (0..dec.slices.len())
        .map(|i| ctr.count(&key, &dec.slice_set(i).coords(), n))
        .sum();
    Ok(whole == parts)
}

/// A rich affine hyperplane: `#(A ∩ H) >= p^(s + n - k - 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case1Certificate {
    pub plane: AffinePlane,
    pub hyperplane: Subspace,
    pub count: usize,
}

/// The first affine hyperplane, in enumeration order of directions and then
/// slice value, holding at least `p^(s + n - k - 1)` points of `A`.
pub fn case1_certificate(
    a: &PointSet,
    k: usize,
    s: f64,
    guard: &SizeGuard,
) -> Result<Option<Case1Certificate>> {
    let (p, n) = (a.prime(), a.ambient_dim());
    if k == 0 || k >= n {
        return Err(Error::param(format!(
            "need 0 < k < n, got k = {k}, n = {n}"
        )));
    }
    let needed = p.as_f64().powf(s + n as f64 - k as f64 - 1.0);
    for h0 in enumerate_subspaces(p, n, n - 1, guard)? {
        let dec = slice(a, &h0)?;
        if let Some(sl) = dec.slices.iter().find(|sl| sl.len() as f64 >= needed) {
            return Ok(Some(Case1Certificate {
                plane: coset_of(&h0, sl[0])?,
                count: sl.len(),
                hyperplane: h0,
            }));
        }
    }
    Ok(None)
}
