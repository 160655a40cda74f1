//! Parameter sweeps: a small config language, deterministic record streams,
//! CSV/JSON emission and a summary table.
//!
//! Config files are line oriented. `#` starts a comment. A `[section]` line
//! opens a block and `key = value` lines fill it; lists are comma
//! separated and integer lists accept `lo..hi` ranges (inclusive).
//!
//! ```text
//! [sweep]
//! workers = 4
//!
//! [random]
//! p = 5, 7
//! nk = 3:1, 3:2
//! a = 2.2
//! s_frac = 0.45          # s = s_frac (a + 2k - n) / 2 + s_offset
//! s_offset = 0, 0.05
//! seeds = 1..5
//!
//! [construct]
//! spec = planar_slab:p=5,n=3,sub_dim=2,slab_exponent=0.5,k=2
//! p = 5, 7               # overrides the prime in spec
//! k = 2
//! s_frac = 0.9           # here a is log_p of the constructed set
//! ```
//!
//! A block takes either `s` (explicit values) or `s_frac` with optional
//! `s_offset`. Records come out in block order, and inside a block in the
//! nesting order `nk, a, s, p, seed` (random) or `p, k, s` (construct),
//! whatever the number of workers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{random_set, ConstructionSpec};
use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::guard::SizeGuard;
use crate::projection::{exceptional_set, with_workers, ScanOptions};
use crate::verify::SweepRecord;

pub const CSV_MAGIC: &str = "# ffproj sweep v1";

pub const CSV_COLUMNS: [&str; 17] = [
    "p",
    "n",
    "k",
    "a",
    "s",
    "size",
    "exceptional",
    "overlap",
    "main_t",
    "main_ratio",
    "falconer_ratio",
    "remark_ratio",
    "in_range",
    "construction",
    "seed",
    "status",
    "block",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SRule {
    Fixed(f64),
    /// `frac (a + 2k - n) / 2 + offset`.
    Scaled {
        frac: f64,
        offset: f64,
    },
}

impl SRule {
    pub fn eval(&self, n: usize, k: usize, a: f64) -> f64 {
        match *self {
            SRule::Fixed(s) => s,
            SRule::Scaled { frac, offset } => frac * (a + 2.0 * k as f64 - n as f64) / 2.0 + offset,
        }
    }

    fn label(&self) -> String {
        match self {
            SRule::Fixed(s) => format!("s={s}"),
            SRule::Scaled { frac, offset } => format!("s_frac={frac},s_offset={offset}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    Random {
        primes: Vec<PrimeModulus>,
        nk: Vec<(usize, usize)>,
        a: Vec<f64>,
        s: Vec<SRule>,
        seeds: Vec<u64>,
    },
    Construct {
        spec: ConstructionSpec,
        primes: Vec<PrimeModulus>,
        k: Vec<usize>,
        s: Vec<SRule>,
    },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepConfig {
    pub workers: Option<usize>,
    pub blocks: Vec<Block>,
}

/// One scan to run. `a_nominal` is the grid value for random blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub block: usize,
    pub p: PrimeModulus,
    pub n: usize,
    pub k: usize,
    pub a_nominal: Option<f64>,
    pub s: SRule,
    pub seed: Option<u64>,
    pub spec: Option<ConstructionSpec>,
}

fn parse_list<T>(
    line: usize,
    key: &str,
    value: &str,
    f: impl Fn(&str) -> Option<T>,
) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| f(t).ok_or_else(|| Error::parse(line, format!("bad value {t:?} for {key}"))))
        .collect()
}

fn parse_ints(line: usize, key: &str, value: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for t in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let bad = || Error::parse(line, format!("bad value {t:?} for {key}"));
        if let Some((lo, hi)) = t.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(t.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

type Section = (usize, String, BTreeMap<String, (usize, String)>);

fn s_rules(line: usize, keys: &mut BTreeMap<String, (usize, String)>) -> Result<Vec<SRule>> {
    let num = |t: &str| t.parse::<f64>().ok().filter(|v| v.is_finite());
    match (keys.remove("s"), keys.remove("s_frac")) {
        (Some((l, v)), None) => {
            if keys.contains_key("s_offset") {
                return Err(Error::parse(l, "s_offset needs s_frac, not s"));
            }
            Ok(parse_list(l, "s", &v, num)?
                .into_iter()
                .map(SRule::Fixed)
                .collect())
        }
        (None, Some((l, v))) => {
            let fracs = parse_list(l, "s_frac", &v, num)?;
            let offsets = match keys.remove("s_offset") {
                Some((lo, vo)) => parse_list(lo, "s_offset", &vo, num)?,
                None => vec![0.0],
            };
            Ok(fracs
                .iter()
                .flat_map(|&frac| {
                    offsets
                        .iter()
                        .map(move |&offset| SRule::Scaled { frac, offset })
                })
                .collect())
        }
        (Some((l, _)), Some(_)) => Err(Error::parse(l, "give either s or s_frac, not both")),
        (None, None) => Err(Error::parse(line, "missing s or s_frac")),
    }
}

fn primes(line: usize, value: &str) -> Result<Vec<PrimeModulus>> {
    parse_ints(line, "p", value)?
        .into_iter()
        .map(|p| PrimeModulus::new(p).map_err(|e| Error::parse(line, e.to_string())))
        .collect()
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: Vec<Section> = Vec::new();
        let mut cfg = SweepConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                sections.push((ln, name.trim().to_string(), BTreeMap::new()));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(ln, format!("expected key = value, got {line:?}")))?;
            let Some((_, _, keys)) = sections.last_mut() else {
                return Err(Error::parse(ln, "key outside of a [section]"));
            };
            if keys
                .insert(key.trim().to_string(), (ln, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::parse(ln, format!("duplicate key {}", key.trim())));
            }
        }

        for (ln, name, mut keys) in sections {
            match name.as_str() {
                "sweep" => {
                    if let Some((l, v)) = keys.remove("workers") {
                        let w: usize =
                            v.parse().ok().filter(|&w| w > 0).ok_or_else(|| {
                                Error::parse(l, format!("bad worker count {v:?}"))
                            })?;
                        cfg.workers = Some(w);
                    }
                }
                "random" => {
                    let (lp, vp) = keys
                        .remove("p")
                        .ok_or_else(|| Error::parse(ln, "missing p"))?;
                    let (lnk, vnk) = keys
                        .remove("nk")
                        .ok_or_else(|| Error::parse(ln, "missing nk"))?;
                    let nk = parse_list(lnk, "nk", &vnk, |t| {
                        let (n, k) = t.split_once(':')?;
                        let (n, k) = (n.trim().parse().ok()?, k.trim().parse().ok()?);
                        (0 < k && k < n).then_some((n, k))
                    })?;
                    let (la, va) = keys
                        .remove("a")
                        .ok_or_else(|| Error::parse(ln, "missing a"))?;
                    let a =
                        parse_list(la, "a", &va, |t| t.parse::<f64>().ok().filter(|v| *v > 0.0))?;
                    let s = s_rules(ln, &mut keys)?;
                    let seeds = match keys.remove("seeds") {
                        Some((l, v)) => parse_ints(l, "seeds", &v)?,
                        None => vec![0],
                    };
                    cfg.blocks.push(Block::Random {
                        primes: primes(lp, &vp)?,
                        nk,
                        a,
                        s,
                        seeds,
                    });
                }
                "construct" => {
                    let (ls, vs) = keys
                        .remove("spec")
                        .ok_or_else(|| Error::parse(ln, "missing spec"))?;
                    let spec = ConstructionSpec::parse(&vs)
                        .map_err(|e| Error::parse(ls, e.to_string()))?;
                    let ps = match keys.remove("p") {
                        Some((l, v)) => primes(l, &v)?,
                        None => vec![spec.p],
                    };
                    let (lk, vk) = keys
                        .remove("k")
                        .ok_or_else(|| Error::parse(ln, "missing k"))?;
                    let k = parse_ints(lk, "k", &vk)?
                        .into_iter()
                        .map(|k| k as usize)
                        .collect();
                    let s = s_rules(ln, &mut keys)?;
                    cfg.blocks.push(Block::Construct {
                        spec,
                        primes: ps,
                        k,
                        s,
                    });
                }
                other => return Err(Error::parse(ln, format!("unknown section [{other}]"))),
            }
            if let Some((key, (l, _))) = keys.into_iter().next() {
                return Err(Error::parse(l, format!("unknown key {key} in [{name}]")));
            }
        }
        Ok(cfg)
    }

    pub fn instances(&self) -> Vec<Instance> {
        let mut out = Vec::new();
        for (b, block) in self.blocks.iter().enumerate() {
            match block {
                Block::Random {
                    primes,
                    nk,
                    a,
                    s,
                    seeds,
                } => {
                    for &(n, k) in nk {
                        for &av in a {
                            for rule in s {
                                for &p in primes {
                                    for &seed in seeds {
                                        out.push(Instance {
                                            block: b,
                                            p,
                                            n,
                                            k,
                                            a_nominal: Some(av),
                                            s: rule.clone(),
                                            seed: Some(seed),
                                            spec: None,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
                Block::Construct { spec, primes, k, s } => {
                    for &p in primes {
                        for &kv in k {
                            for rule in s {
                                out.push(Instance {
                                    block: b,
                                    p,
                                    n: spec.n,
                                    k: kv,
                                    a_nominal: None,
                                    s: rule.clone(),
                                    seed: None,
                                    spec: Some(ConstructionSpec { p, ..spec.clone() }),
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// A record plus the config block it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(flatten)]
    pub record: SweepRecord,
    pub block: usize,
}

fn run_instance(inst: &Instance, guard: &SizeGuard) -> SweepRecord {
    let label = match &inst.spec {
        Some(spec) => spec.to_string(),
        None => "random".to_string(),
    };
    let attempt = || -> Result<SweepRecord> {
        let set = match &inst.spec {
            Some(spec) => spec.build(guard)?.set,
            None => random_set(
                inst.p,
                inst.n,
                inst.a_nominal.unwrap_or(0.0),
                inst.seed.unwrap_or(0),
                guard,
            )?,
        };
        let a = inst
            .a_nominal
            .or_else(|| set.exponent())
            .ok_or_else(|| Error::Precondition("empty set".into()))?;
        let s = inst.s.eval(inst.n, inst.k, a);
        let opts = ScanOptions {
            guard: *guard,
            workers: None,
        };
        let report = exceptional_set(&set, inst.k, s, &opts)?;
        Ok(SweepRecord::from_report(&report, &label, inst.seed))
    };
    attempt().unwrap_or_else(|e| {
        let s = match (&inst.s, inst.a_nominal) {
            (SRule::Fixed(s), _) => Some(*s),
            (rule, Some(a)) => Some(rule.eval(inst.n, inst.k, a)),
            (_, None) => None,
        };
        SweepRecord::failed(
            inst.p.get(),
            inst.n,
            inst.k,
            s,
            &label,
            inst.seed,
            &e.to_string(),
        )
    })
}

/// Run every instance; output order is config order.
pub fn run(cfg: &SweepConfig, guard: &SizeGuard, workers: Option<usize>) -> Vec<Row> {
    let instances = cfg.instances();
    let workers = workers.or(cfg.workers);
    with_workers(workers, || {
        instances
            .par_iter()
            .map(|inst| Row {
                record: run_instance(inst, guard),
                block: inst.block,
            })
            .collect()
    })
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or(String::new(), T::to_string)
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for row in rows {
        let r = &row.record;
        w.write_record([
            r.p.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            opt(&r.a),
            opt(&r.s),
            r.size.to_string(),
            r.exceptional.to_string(),
            r.overlap.to_string(),
            opt(&r.main_t),
            opt(&r.main_ratio),
            opt(&r.falconer_ratio),
            opt(&r.remark_ratio),
            r.in_range.to_string(),
            r.construction.clone(),
            opt(&r.seed),
            r.status.clone(),
            row.block.to_string(),
        ])
        .expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    format!("{CSV_MAGIC}\n{body}")
}

pub fn parse_csv(text: &str) -> Result<Vec<Row>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_MAGIC) {
        return Err(Error::parse(1, format!("expected {CSV_MAGIC:?}")));
    }
    let mut rd = csv::ReaderBuilder::new()
        .from_reader(text[CSV_MAGIC.len()..].trim_start_matches('\n').as_bytes());
    let header = rd
        .headers()
        .map_err(|e| Error::parse(2, e.to_string()))?
        .clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::parse(2, "unexpected column layout"));
    }
    rd.records()
        .enumerate()
        .map(|(i, rec)| {
            let ln = i + 3;
            let rec = rec.map_err(|e| Error::parse(ln, e.to_string()))?;
            let bad = |c: &str| Error::parse(ln, format!("bad {c}"));
            fn num<T: std::str::FromStr>(v: &str) -> Option<T> {
                v.parse().ok()
            }
            fn maybe<T: std::str::FromStr>(v: &str) -> Option<Option<T>> {
                if v.is_empty() {
                    Some(None)
                } else {
                    v.parse().ok().map(Some)
                }
            }
            let f = |i: usize| &rec[i];
            Ok(Row {
                record: SweepRecord {
                    p: num(f(0)).ok_or_else(|| bad("p"))?,
                    n: num(f(1)).ok_or_else(|| bad("n"))?,
                    k: num(f(2)).ok_or_else(|| bad("k"))?,
                    a: maybe(f(3)).ok_or_else(|| bad("a"))?,
                    s: maybe(f(4)).ok_or_else(|| bad("s"))?,
                    size: num(f(5)).ok_or_else(|| bad("size"))?,
                    exceptional: num(f(6)).ok_or_else(|| bad("exceptional"))?,
                    overlap: num(f(7)).ok_or_else(|| bad("overlap"))?,
                    main_t: maybe(f(8)).ok_or_else(|| bad("main_t"))?,
                    main_ratio: maybe(f(9)).ok_or_else(|| bad("main_ratio"))?,
                    falconer_ratio: maybe(f(10)).ok_or_else(|| bad("falconer_ratio"))?,
                    remark_ratio: maybe(f(11)).ok_or_else(|| bad("remark_ratio"))?,
                    in_range: num(f(12)).ok_or_else(|| bad("in_range"))?,
                    construction: f(13).to_string(),
                    seed: maybe(f(14)).ok_or_else(|| bad("seed"))?,
                    status: f(15).to_string(),
                },
                block: num(f(16)).ok_or_else(|| bad("block"))?,
            })
        })
        .collect()
}

/// Maxima over the successful records of one `(n, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupMax {
    pub n: usize,
    pub k: usize,
    pub records: usize,
    pub failed: usize,
    pub max_exceptional: usize,
    pub max_main_ratio: Option<f64>,
    pub max_falconer_ratio: Option<f64>,
    pub max_remark_ratio: Option<f64>,
}

/// Least-squares slope of `ln(max #E / ln p)` against `ln p` for one grid
/// point, using only primes where the maximum is positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub block: usize,
    pub n: usize,
    pub k: usize,
    pub a: Option<f64>,
    pub s_rule: String,
    /// `(p, max over seeds of #E)`.
    pub points: Vec<(u32, usize)>,
    pub slope: Option<f64>,
    /// Largest `t(a, s)` among the records of the group.
    pub t: Option<f64>,
    /// Largest `2s - a` among the records, for n = 2 only. Reported next to
    /// the slope, never asserted.
    pub planar: Option<f64>,
}

impl SlopeFit {
    /// `slope <= t + margin`; true when there is nothing to fit.
    pub fn within(&self, margin: f64) -> bool {
        match (self.slope, self.t) {
            (Some(slope), Some(t)) => slope <= t + margin,
            _ => true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub groups: Vec<GroupMax>,
    pub slopes: Vec<SlopeFit>,
    pub max_falconer_ratio: Option<f64>,
    pub max_remark_ratio: Option<f64>,
}

fn fmax(acc: Option<f64>, v: Option<f64>) -> Option<f64> {
    match (acc, v) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    }
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn summarize(rows: &[Row], cfg: &SweepConfig) -> Summary {
    let mut out = Summary::default();
    let mut groups: BTreeMap<(usize, usize), GroupMax> = BTreeMap::new();
    for row in rows {
        let r = &row.record;
        let g = groups.entry((r.n, r.k)).or_insert(GroupMax {
            n: r.n,
            k: r.k,
            records: 0,
            failed: 0,
            max_exceptional: 0,
            max_main_ratio: None,
            max_falconer_ratio: None,
            max_remark_ratio: None,
        });
        g.records += 1;
        if !r.is_ok() {
            g.failed += 1;
            continue;
        }
        g.max_exceptional = g.max_exceptional.max(r.exceptional);
        g.max_main_ratio = fmax(g.max_main_ratio, r.main_ratio);
        g.max_falconer_ratio = fmax(g.max_falconer_ratio, r.falconer_ratio);
        g.max_remark_ratio = fmax(g.max_remark_ratio, r.remark_ratio);
        out.max_falconer_ratio = fmax(out.max_falconer_ratio, r.falconer_ratio);
        out.max_remark_ratio = fmax(out.max_remark_ratio, r.remark_ratio);
    }
    out.groups = groups.into_values().collect();

    // group rows by grid point, preserving first-seen order
    let instances = cfg.instances();
    let mut order: Vec<(usize, usize, usize, Option<u64>, String)> = Vec::new();
    type Fit = (Vec<(u32, usize)>, Option<f64>, Option<f64>);
    let mut fits: BTreeMap<(usize, usize, usize, Option<u64>, String), Fit> = BTreeMap::new();
    for (row, inst) in rows.iter().zip(&instances) {
        let r = &row.record;
        let key = (
            inst.block,
            inst.n,
            inst.k,
            inst.a_nominal.map(f64::to_bits),
            inst.s.label(),
        );
        let entry = fits.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (Vec::new(), None, None)
        });
        if !r.is_ok() {
            continue;
        }
        entry.1 = fmax(entry.1, r.main_t);
        if r.n == 2 {
            if let (Some(a), Some(s)) = (r.a, r.s) {
                entry.2 = fmax(entry.2, Some(2.0 * s - a));
            }
        }
        match entry.0.iter_mut().find(|(p, _)| *p == r.p) {
            Some(pt) => pt.1 = pt.1.max(r.exceptional),
            None => entry.0.push((r.p, r.exceptional)),
        }
    }
    for key in order {
        let (points, t, planar) = fits.remove(&key).expect("recorded key");
        let logs: Vec<(f64, f64)> = points
            .iter()
            .filter(|(_, e)| *e > 0)
            .map(|&(p, e)| {
                let lp = (p as f64).ln();
                (lp, (e as f64 / lp).ln())
            })
            .collect();
        out.slopes.push(SlopeFit {
            block: key.0,
            n: key.1,
            k: key.2,
            a: key.3.map(f64::from_bits),
            s_rule: key.4,
            points,
            slope: least_squares_slope(&logs),
            t,
            planar,
        });
    }
    out
}

/// Fixed-width text rendering of a summary.
pub fn summary_table(s: &Summary) -> String {
    let f = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3} {:>3} {:>7} {:>6} {:>6} {:>12} {:>12} {:>12}",
        "n", "k", "records", "failed", "max#E", "main", "falconer", "remark"
    );
    for g in &s.groups {
        let _ = writeln!(
            out,
            "{:>3} {:>3} {:>7} {:>6} {:>6} {:>12} {:>12} {:>12}",
            g.n,
            g.k,
            g.records,
            g.failed,
            g.max_exceptional,
            f(g.max_main_ratio),
            f(g.max_falconer_ratio),
            f(g.max_remark_ratio)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>5} {:>3} {:>3} {:>6} {:<28} {:>10} {:>8} {:>8}",
        "block", "n", "k", "a", "s", "slope", "t", "2s-a"
    );
    for fit in &s.slopes {
        let _ = writeln!(
            out,
            "{:>5} {:>3} {:>3} {:>6} {:<28} {:>10} {:>8} {:>8}",
            fit.block,
            fit.n,
            fit.k,
            fit.a.map_or("-".into(), |a| a.to_string()),
            fit.s_rule,
            f(fit.slope),
            f(fit.t),
            f(fit.planar)
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub records: Vec<Row>,
    pub summary: Summary,
}

pub fn to_json(rows: &[Row], summary: &Summary) -> String {
    serde_json::to_string_pretty(&SweepOutput {
        records: rows.to_vec(),
        summary: summary.clone(),
    })
    .expect("sweep output serializes")
}

pub fn parse_json(text: &str) -> Result<SweepOutput> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
[sweep]
workers = 2

[random]   # two primes
p = 3, 5
nk = 3:1, 3:2
a = 1.5
s_frac = 0.45
s_offset = 0, 0.05
seeds = 1..2

[construct]
spec = full:p=3,n=2
k = 1
s = 0.5
";

    #[test]
    fn parses_and_orders() {
        let cfg = SweepConfig::parse(SMALL).unwrap();
        assert_eq!(cfg.workers, Some(2));
        let inst = cfg.instances();
        assert_eq!(inst.len(), 2 * 2 * 2 * 2 + 1);
        assert_eq!(
            (inst[0].n, inst[0].k, inst[0].p.get(), inst[0].seed),
            (3, 1, 3, Some(1))
        );
        assert_eq!(inst[1].seed, Some(2));
        assert_eq!(inst[2].p.get(), 5);
        assert_eq!(inst[16].block, 1);
    }

    #[test]
    fn config_errors_carry_lines() {
        for (bad, line) in [
            ("p = 3", 1),
            ("[random]\np = 4\nnk = 3:1\na = 1\ns = 0.5", 2),
            ("[random]\np = 3\nnk = 3:3\na = 1\ns = 0.5", 3),
            ("[oops]\n", 1),
            ("[random]\np = 3\nnk = 3:1\na = 1\ns = 0.5\nzzz = 1", 6),
            ("[construct]\nspec = blob:p=3\nk = 1\ns = 1", 2),
            ("[sweep]\nworkers = 0", 2),
            ("[random]\np = 3\np = 5", 3),
        ] {
            match SweepConfig::parse(bad) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
                other => panic!("{bad:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn empty_config() {
        let cfg = SweepConfig::parse("").unwrap();
        let rows = run(&cfg, &SizeGuard::default(), None);
        assert!(rows.is_empty());
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 2);
        assert!(parse_csv(&csv).unwrap().is_empty());
    }

    #[test]
    fn trivial_instance() {
        let cfg = SweepConfig::parse("[construct]\nspec = full:p=5,n=3\nk = 1\ns = 0.5").unwrap();
        let rows = run(&cfg, &SizeGuard::default(), None);
        assert_eq!(rows.len(), 1);
        let r = &rows[0].record;
        assert!(r.is_ok());
        assert_eq!(
            (r.exceptional, r.main_ratio, r.falconer_ratio),
            (0, Some(0.0), Some(0.0))
        );
    }

    #[test]
    fn failures_are_recorded() {
        let cfg = SweepConfig::parse("[random]\np = 3\nnk = 2:1\na = 2.5\ns = 0.5").unwrap();
        let rows = run(&cfg, &SizeGuard::default(), None);
        assert_eq!(rows.len(), 1);
        assert!(rows[0].record.status.starts_with("failed: "));
        assert_eq!(parse_csv(&to_csv(&rows)).unwrap(), rows);
    }

    #[test]
    fn round_trips_and_determinism() {
        let cfg = SweepConfig::parse(SMALL).unwrap();
        let g = SizeGuard::default();
        let one = run(&cfg, &g, Some(1));
        let many = run(&cfg, &g, Some(4));
        assert_eq!(to_csv(&one), to_csv(&many));
        assert_eq!(parse_csv(&to_csv(&one)).unwrap(), one);
        let summary = summarize(&one, &cfg);
        let back = parse_json(&to_json(&one, &summary)).unwrap();
        assert_eq!(back.records, one);
        assert_eq!(back.summary, summary);
        assert!(!summary_table(&summary).is_empty());
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 3.0]
            .iter()
            .map(|&x| (x, 2.0 * x + 1.0))
            .collect();
        assert!((least_squares_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(least_squares_slope(&pts[..1]), None);
        assert_eq!(least_squares_slope(&[(1.0, 1.0), (1.0, 2.0)]), None);
    }

    #[test]
    fn planar_reference_only_for_n2() {
        let text = "[random]\np = 5, 7\nnk = 2:1, 3:1\na = 1.2\ns = 0.5\nseeds = 1..2\n";
        let cfg = SweepConfig::parse(text).unwrap();
        let rows = run(&cfg, &SizeGuard::default(), None);
        let summary = summarize(&rows, &cfg);
        for fit in &summary.slopes {
            let expect = rows
                .iter()
                .filter(|r| r.record.n == 2 && r.record.n == fit.n)
                .map(|r| 2.0 * r.record.s.unwrap() - r.record.a.unwrap())
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
            assert_eq!(fit.planar, expect, "n = {}", fit.n);
        }
        assert!(summary.slopes.iter().any(|f| f.planar.is_some()));
    }

    #[test]
    fn bad_csv() {
        assert!(parse_csv("p,n\n").is_err());
        assert!(parse_csv(&format!("{CSV_MAGIC}\np,n\n")).is_err());
    }
}
