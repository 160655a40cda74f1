//! Structured and random point sets with predicted low-projection
//! directions.
//!
//! A construction is written `kind:key=value,...`, for example
//! `st_product:p=101,a=1.2,s=0.8` or
//! `cylinder:p=101,n=3,base=st_product,a=1.2,s=0.8`. Kinds:
//!
//! * `point` (`k`): the origin; every direction in G(n-k) sees one coset.
//! * `full`: all of F_p^n.
//! * `st_product` (`a`, `s`): the product of integer intervals in F_p^2.
//! * `planar_slab` (`sub_dim`, `slab_exponent`, `k`): F_p^sub_dim x I^(n-sub_dim).
//! * `random` (`a`, `seed`): a uniform subset of size `round(p^a)`.
//! * `cylinder` (`base`, then the base's keys): base set in F_p^(n-1) times F_p.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{decode_into, encode_unchecked, PointIndex, PrimeModulus};
use crate::grassmann::{enumerate_subspaces, Subspace};
use crate::guard::SizeGuard;
use crate::pointset::PointSet;
use crate::projection::projection_count;

/// SplitMix64: `state += 0x9E3779B97F4A7C15`, then two xor-shift-multiply
/// rounds with `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// `ceil(x - 1/2)`: nearest integer, halves rounded down.
pub fn round_half_down(x: f64) -> u64 {
    (x - 0.5).ceil().max(0.0) as u64
}

/// First `m` entries of a partial Fisher-Yates shuffle of `0..universe`,
/// swapping slot `i` with `i + next % (universe - i)`.
pub fn sample_indices(universe: usize, m: usize, rng: &mut SplitMix64) -> Vec<usize> {
    assert!(m <= universe);
    let mut slots: Vec<usize> = (0..universe).collect();
    for i in 0..m {
        let j = i + (rng.next_u64() % (universe - i) as u64) as usize;
        slots.swap(i, j);
    }
    slots.truncate(m);
    slots
}

/// Uniform subset of size `round(p^a)` drawn with [`sample_indices`].
pub fn random_set(
    p: PrimeModulus,
    n: usize,
    a: f64,
    seed: u64,
    guard: &SizeGuard,
) -> Result<PointSet> {
    if !(a > 0.0 && a <= n as f64) {
        return Err(Error::param(format!(
            "need 0 < a <= n, got a = {a}, n = {n}"
        )));
    }
    let universe = guard.check_points(p, n)?;
    let m = round_half_down(p.as_f64().powf(a));
    if m > universe as u64 {
        return Err(Error::param(format!(
            "round({p}^{a}) = {m} exceeds {p}^{n}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let picks = sample_indices(universe, m as usize, &mut rng);
    PointSet::from_indices(p, n, picks.into_iter().map(PointIndex))
}

/// Uniform subset of `pool` of size `m`.
pub fn random_subset(
    p: PrimeModulus,
    n: usize,
    pool: &[PointIndex],
    m: usize,
    seed: u64,
) -> Result<PointSet> {
    if m > pool.len() {
        return Err(Error::param(format!(
            "cannot draw {m} of {} points",
            pool.len()
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let picks = sample_indices(pool.len(), m, &mut rng);
    PointSet::from_indices(p, n, picks.into_iter().map(|i| pool[i]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Point {
        k: usize,
    },
    Full,
    StProduct {
        a: f64,
        s: f64,
    },
    PlanarSlab {
        sub_dim: usize,
        slab_exponent: f64,
        k: usize,
    },
    Random {
        a: f64,
        seed: u64,
    },
    Cylinder {
        base: Box<Shape>,
    },
}

impl Shape {
    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Point { .. } => "point",
            Shape::Full => "full",
            Shape::StProduct { .. } => "st_product",
            Shape::PlanarSlab { .. } => "planar_slab",
            Shape::Random { .. } => "random",
            Shape::Cylinder { .. } => "cylinder",
        }
    }

    fn write_params(&self, out: &mut Vec<String>) {
        match self {
            Shape::Point { k } => out.push(format!("k={k}")),
            Shape::Full => {}
            Shape::StProduct { a, s } => out.extend([format!("a={a}"), format!("s={s}")]),
            Shape::PlanarSlab {
                sub_dim,
                slab_exponent,
                k,
            } => out.extend([
                format!("sub_dim={sub_dim}"),
                format!("slab_exponent={slab_exponent}"),
                format!("k={k}"),
            ]),
            Shape::Random { a, seed } => out.extend([format!("a={a}"), format!("seed={seed}")]),
            Shape::Cylinder { base } => {
                out.push(format!("base={}", base.kind()));
                base.write_params(out);
            }
        }
    }

    fn from_params(kind: &str, n: usize, params: &mut BTreeMap<String, String>) -> Result<Shape> {
        fn take<T: std::str::FromStr>(
            params: &mut BTreeMap<String, String>,
            key: &str,
            default: Option<T>,
        ) -> Result<T> {
            match params.remove(key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::param(format!("bad value {v:?} for {key}"))),
                None => default.ok_or_else(|| Error::param(format!("missing parameter {key}"))),
            }
        }
        Ok(match kind {
            "point" => Shape::Point {
                k: take(params, "k", Some(n.saturating_sub(1).max(1)))?,
            },
            "full" => Shape::Full,
            "st_product" => Shape::StProduct {
                a: take(params, "a", None)?,
                s: take(params, "s", None)?,
            },
            "planar_slab" => Shape::PlanarSlab {
                sub_dim: take(params, "sub_dim", None)?,
                slab_exponent: take(params, "slab_exponent", None)?,
                k: take(params, "k", None)?,
            },
            "random" => Shape::Random {
                a: take(params, "a", None)?,
                seed: take(params, "seed", Some(0))?,
            },
            "cylinder" => {
                let base: String = take(params, "base", None)?;
                if base == "cylinder" {
                    return Err(Error::param("nested cylinders are not supported"));
                }
                Shape::Cylinder {
                    base: Box::new(Shape::from_params(&base, n.saturating_sub(1), params)?),
                }
            }
            other => return Err(Error::param(format!("unknown construction kind {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionSpec {
    pub p: PrimeModulus,
    pub n: usize,
    pub shape: Shape,
}

impl ConstructionSpec {
    pub fn new(p: PrimeModulus, n: usize, shape: Shape) -> Self {
        Self { p, n, shape }
    }

    /// Parse `kind:key=value,...`. `n` defaults to 2 for `st_product`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = text.trim().split_once(':').unwrap_or((text.trim(), ""));
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value, got {item:?}")))?;
            if params
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(Error::param(format!("duplicate parameter {k}")));
            }
        }
        let p: u64 = params
            .remove("p")
            .ok_or_else(|| Error::param("missing parameter p"))?
            .parse()
            .map_err(|_| Error::param("bad value for p"))?;
        let p = PrimeModulus::new(p)?;
        let n_default = (kind == "st_product").then_some("2".to_string());
        let n: usize = params
            .remove("n")
            .or(n_default)
            .ok_or_else(|| Error::param("missing parameter n"))?
            .parse()
            .map_err(|_| Error::param("bad value for n"))?;
        let shape = Shape::from_params(kind, n, &mut params)?;
        if let Some(k) = params.keys().next() {
            return Err(Error::param(format!("unknown parameter {k} for {kind}")));
        }
        Ok(Self { p, n, shape })
    }

    /// One-line description of what the construction models.
    pub fn note(&self) -> &'static str {
        match self.shape {
            Shape::Point { .. } => "a single point; every projection is one coset",
            Shape::Full => "the whole space; no direction is exceptional",
            Shape::StProduct { .. } => {
                "integer box |x| <= p^(a-s), |y| <= p^s covered by <= 21 p^s lines y = kx + m for each |k| <= p^(2s-a)"
            }
            Shape::PlanarSlab { .. } => "F_p^sub_dim times an interval of length round(p^e) in the remaining coordinates",
            Shape::Random { .. } => "uniform random subset from a seeded shuffle",
            Shape::Cylinder { .. } => "base set times F_p; vertical lifts of base directions keep their counts",
        }
    }

    pub fn build(&self, guard: &SizeGuard) -> Result<ConstructionResult> {
        guard.check_points(self.p, self.n)?;
        let (set, predictions) = build_shape(self.p, self.n, &self.shape, guard)?;
        Ok(ConstructionResult {
            spec: self.clone(),
            set,
            predictions,
        })
    }
}

impl fmt::Display for ConstructionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut params = vec![format!("p={}", self.p), format!("n={}", self.n)];
        self.shape.write_params(&mut params);
        write!(f, "{}:{}", self.shape.kind(), params.join(","))
    }
}

/// Directions in G(n-k) expected to see at most `count_bound` cosets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub label: String,
    pub k: usize,
    pub directions: Vec<Subspace>,
    pub count_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionCheck {
    pub label: String,
    pub k: usize,
    pub directions: usize,
    pub count_bound: f64,
    pub max_count: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionResult {
    pub spec: ConstructionSpec,
    pub set: PointSet,
    /// The first family is the primary prediction of the construction.
    pub predictions: Vec<Prediction>,
}

impl ConstructionResult {
    pub fn predicted_directions(&self) -> &[Subspace] {
        self.predictions.first().map_or(&[], |p| &p.directions)
    }

    pub fn predicted_count_bound(&self) -> Option<f64> {
        self.predictions.first().map(|p| p.count_bound)
    }

    /// Measure every predicted direction.
    pub fn check(&self) -> Result<Vec<PredictionCheck>> {
        self.predictions
            .iter()
            .map(|pr| {
                let mut max_count = 0;
                for v in &pr.directions {
                    max_count = max_count.max(projection_count(v, &self.set)?);
                }
                Ok(PredictionCheck {
                    label: pr.label.clone(),
                    k: pr.k,
                    directions: pr.directions.len(),
                    count_bound: pr.count_bound,
                    max_count,
                    holds: max_count as f64 <= pr.count_bound,
                })
            })
            .collect()
    }
}

fn build_shape(
    p: PrimeModulus,
    n: usize,
    shape: &Shape,
    guard: &SizeGuard,
) -> Result<(PointSet, Vec<Prediction>)> {
    match *shape {
        Shape::Point { k } => {
            if k == 0 || k > n {
                return Err(Error::param(format!(
                    "need 0 < k <= n, got k = {k}, n = {n}"
                )));
            }
            let set = PointSet::from_indices(p, n, [PointIndex(0)])?;
            let directions = enumerate_subspaces(p, n, n - k, guard)?.collect();
            Ok((
                set,
                vec![Prediction {
                    label: "all directions".into(),
                    k,
                    directions,
                    count_bound: 1.0,
                }],
            ))
        }
        Shape::Full => Ok((PointSet::full(p, n)?, Vec::new())),
        Shape::Random { a, seed } => Ok((random_set(p, n, a, seed, guard)?, Vec::new())),
        Shape::StProduct { a, s } => {
            if n != 2 {
                return Err(Error::param(format!(
                    "st_product lives in F_p^2, got n = {n}"
                )));
            }
            st_product(p, a, s)
        }
        Shape::PlanarSlab {
            sub_dim,
            slab_exponent,
            k,
        } => planar_slab(p, n, sub_dim, slab_exponent, k, guard),
        Shape::Cylinder { ref base } => {
            if n < 2 {
                return Err(Error::param("a cylinder needs n >= 2"));
            }
            let (base_set, base_pred) = build_shape(p, n - 1, base, guard)?;
            cylinder(&base_set, &base_pred, guard)
        }
    }
}

fn floor_pow(p: PrimeModulus, e: f64) -> u64 {
    p.as_f64().powf(e).floor() as u64
}

/// Residues of the integers in `[-r, r]`.
fn symmetric(p: PrimeModulus, r: u64) -> impl Iterator<Item = u32> {
    (-(r as i64)..=r as i64).map(move |x| p.reduce(x))
}

/// The integer box `|x| <= p^(a-s)`, `|y| <= p^s` reduced mod p, with the
/// lines of slope `|k| <= p^(2s-a)` as predicted directions.
///
/// Each of the three ranges must fit in F_p without two integers meeting
/// mod p. The covering count only depends on this: over Z every slope-k
/// line through the box has intercept `|m| <= 2 p^s`, and reduction mod p
/// can only merge intercepts.
pub fn st_product(p: PrimeModulus, a: f64, s: f64) -> Result<(PointSet, Vec<Prediction>)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::param(format!("need 0 < s < 1, got {s}")));
    }
    if a.is_nan() || a <= 0.0 || 2.0 * s < a {
        return Err(Error::param(format!(
            "need 0 < a <= 2s, got a = {a}, s = {s}"
        )));
    }
    let rx = floor_pow(p, a - s);
    let ry = floor_pow(p, s);
    let rk = floor_pow(p, 2.0 * s - a);
    for (name, r) in [("p^(a-s)", rx), ("p^s", ry), ("p^(2s-a)", rk)] {
        if 2 * r + 1 > p.get() as u64 {
            return Err(Error::WouldWrap(format!(
                "2 floor({name}) + 1 = {} > p = {p}",
                2 * r + 1
            )));
        }
    }
    let mut set = PointSet::empty(p, 2)?;
    for x in symmetric(p, rx) {
        for y in symmetric(p, ry) {
            set.insert(PointIndex(encode_unchecked(&[x, y], p)))?;
        }
    }
    let directions = symmetric(p, rk)
        .map(|k| Subspace::span(p, 2, &[vec![1, k]]))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        set,
        vec![Prediction {
            label: "slopes |k| <= p^(2s-a)".into(),
            k: 1,
            directions,
            count_bound: 21.0 * p.as_f64().powf(s),
        }],
    ))
}

/// `F_p^sub_dim x I^(n-sub_dim)` with `I = {0, .., L-1}`, `L = round(p^e)`.
/// Predicted: every V in G(n-k) inside `F_p^sub_dim x 0`, each seeing
/// exactly `p^(sub_dim-(n-k)) L^(n-sub_dim)` cosets.
pub fn planar_slab(
    p: PrimeModulus,
    n: usize,
    sub_dim: usize,
    slab_exponent: f64,
    k: usize,
    guard: &SizeGuard,
) -> Result<(PointSet, Vec<Prediction>)> {
    if sub_dim == 0 || sub_dim >= n {
        return Err(Error::param(format!(
            "need 0 < sub_dim < n, got {sub_dim}, n = {n}"
        )));
    }
    if !(0.0..1.0).contains(&slab_exponent) {
        return Err(Error::param(format!(
            "need 0 <= slab_exponent < 1, got {slab_exponent}"
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::param(format!(
            "need 0 < k < n, got k = {k}, n = {n}"
        )));
    }
    let universe = guard.check_points(p, n)?;
    let len = round_half_down(p.as_f64().powf(slab_exponent)).clamp(1, p.get() as u64) as u32;
    let mut set = PointSet::empty(p, n)?;
    let mut c = vec![0; n];
    for i in 0..universe {
        decode_into(i, p, &mut c);
        if c[sub_dim..].iter().all(|&x| x < len) {
            set.insert(PointIndex(i))?;
        }
    }
    let mut predictions = Vec::new();
    if n - k <= sub_dim {
        let directions = enumerate_subspaces(p, sub_dim, n - k, guard)?
            .map(|v| v.embed(n))
            .collect::<Result<Vec<_>>>()?;
        let bound =
            p.as_f64().powi((sub_dim - (n - k)) as i32) * (len as f64).powi((n - sub_dim) as i32);
        predictions.push(Prediction {
            label: "directions inside the planar factor".into(),
            k,
            directions,
            count_bound: bound,
        });
    }
    Ok((set, predictions))
}

/// `V + span{e_n}` for `V` in F_p^(n-1) x 0.
pub fn vertical_lift(v: &Subspace) -> Result<Subspace> {
    let n = v.ambient_dim() + 1;
    let mut rows: Vec<Vec<u32>> = v
        .embed(n)?
        .basis()
        .row_iter()
        .map(<[u32]>::to_vec)
        .collect();
    let mut e = vec![0; n];
    e[n - 1] = 1;
    rows.push(e);
    Subspace::span(v.prime(), n, &rows)
}

/// The `p + 1` subspaces of dimension `dim L + 1` containing `L`, for `L`
/// of codimension 2.
pub fn pencil(l: &Subspace) -> Result<Vec<Subspace>> {
    let (p, n) = (l.prime(), l.ambient_dim());
    if l.dim() + 2 != n {
        return Err(Error::param(format!(
            "a pencil needs codimension 2, got dim {} in F_p^{n}",
            l.dim()
        )));
    }
    let free: Vec<usize> = (0..n).filter(|j| !l.pivots().contains(j)).collect();
    let (j1, j2) = (free[0], free[1]);
    let base: Vec<Vec<u32>> = l.basis().row_iter().map(<[u32]>::to_vec).collect();
    let with = |extra: Vec<u32>| {
        let mut rows = base.clone();
        rows.push(extra);
        Subspace::span(p, n, &rows)
    };
    let mut out = Vec::with_capacity(p.as_usize() + 1);
    for c in 0..p.get() {
        let mut w = vec![0; n];
        w[j1] = 1;
        w[j2] = c;
        out.push(with(w)?);
    }
    let mut w = vec![0; n];
    w[j2] = 1;
    out.push(with(w)?);
    Ok(out)
}

/// `A' x F_p`. Base predictions lift vertically with the same bound; the
/// fibre direction `span{e_n}` sees `#A'` cosets; for a planar base, the
/// pencil through each predicted line sees at most `max(bound, p)`.
fn cylinder(
    base: &PointSet,
    base_pred: &[Prediction],
    guard: &SizeGuard,
) -> Result<(PointSet, Vec<Prediction>)> {
    let (p, m) = (base.prime(), base.ambient_dim());
    let n = m + 1;
    guard.check_points(p, n)?;
    let mut set = PointSet::empty(p, n)?;
    let stride = base.universe();
    for x in base.iter() {
        for t in 0..p.as_usize() {
            set.insert(PointIndex(x.0 + t * stride))?;
        }
    }
    let mut predictions = Vec::new();
    for pr in base_pred {
        predictions.push(Prediction {
            label: format!("vertical lifts of {}", pr.label),
            k: pr.k,
            directions: pr
                .directions
                .iter()
                .map(vertical_lift)
                .collect::<Result<_>>()?,
            count_bound: pr.count_bound,
        });
    }
    let mut e = vec![0; n];
    e[m] = 1;
    predictions.push(Prediction {
        label: "fibre".into(),
        k: n - 1,
        directions: vec![Subspace::span(p, n, &[e])?],
        count_bound: base.cardinality() as f64,
    });
    if let Some(pr) = base_pred.first().filter(|pr| m == 2 && pr.k == 1) {
        let mut planes = Vec::new();
        for v in &pr.directions {
            planes.extend(pencil(&v.embed(n)?)?);
        }
        planes.sort();
        planes.dedup();
        predictions.push(Prediction {
            label: format!("pencils through {}", pr.label),
            k: 1,
            directions: planes,
            count_bound: pr.count_bound.max(p.as_f64()),
        });
    }
    Ok((set, predictions))
}
