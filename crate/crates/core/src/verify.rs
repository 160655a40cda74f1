//! Empirical checks of the exceptional-set bounds. Implicit constants are
//! never asserted; each check reports the ratio of the measured quantity to
//! the bound. `log p` is the natural logarithm throughout.

use serde::{Deserialize, Serialize};

use crate::bounds::{below_main_threshold, main_exponent};
use crate::error::Result;
use crate::grassmann::{dual, Subspace};
use crate::pointset::PointSet;
use crate::projection::{
    exceptional_set, projection_count, slice, DyadicClass, ExceptionalReport, ScanOptions,
};

/// One row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub p: u32,
    pub n: usize,
    pub k: usize,
    /// `log_p #A`.
    pub a: Option<f64>,
    /// Absent only for failed instances whose `s` depends on the set.
    pub s: Option<f64>,
    pub size: usize,
    pub exceptional: usize,
    pub overlap: usize,
    pub main_t: Option<f64>,
    /// `#E / (ln p * p^t)`.
    pub main_ratio: Option<f64>,
    /// `#E / (M p^(n-k+s-a))`, zero when `E` is empty.
    pub falconer_ratio: Option<f64>,
    /// `#E / p^(k(n-k)+s-a)`.
    pub remark_ratio: Option<f64>,
    /// `s < (a+2k-n)/2` and `0 < s < min{k, a}`.
    pub in_range: bool,
    pub construction: String,
    pub seed: Option<u64>,
    /// `ok`, or the error that stopped this instance.
    pub status: String,
}

impl SweepRecord {
    pub fn from_report(r: &ExceptionalReport, construction: &str, seed: Option<u64>) -> Self {
        let f = FalconerCheck::from_report(r);
        let main_t = r.a.and_then(|a| main_exponent(r.n, r.k, a, r.s).ok());
        let ln_p = r.p.as_f64().ln();
        let e = r.exceptional_count();
        Self {
            p: r.p.get(),
            n: r.n,
            k: r.k,
            a: r.a,
            s: Some(r.s),
            size: r.cardinality,
            exceptional: e,
            overlap: r.overlap,
            main_t,
            main_ratio: main_t.map(|t| e as f64 / (ln_p * r.p.as_f64().powf(t))),
            falconer_ratio: f.as_ref().map(|f| f.ratio),
            remark_ratio: f.as_ref().map(|f| f.remark_ratio),
            in_range: r.in_range && r.a.is_some_and(|a| below_main_threshold(r.n, r.k, a, r.s)),
            construction: construction.to_string(),
            seed,
            status: "ok".into(),
        }
    }

    pub fn failed(
        p: u32,
        n: usize,
        k: usize,
        s: Option<f64>,
        construction: &str,
        seed: Option<u64>,
        msg: &str,
    ) -> Self {
        Self {
            p,
            n,
            k,
            a: None,
            s,
            size: 0,
            exceptional: 0,
            overlap: 0,
            main_t: None,
            main_ratio: None,
            falconer_ratio: None,
            remark_ratio: None,
            in_range: false,
            construction: construction.to_string(),
            seed,
            status: format!("failed: {msg}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Scan `A` and summarize it as a [`SweepRecord`].
pub fn verify_theorem(a: &PointSet, k: usize, s: f64, opts: &ScanOptions) -> Result<SweepRecord> {
    let r = exceptional_set(a, k, s, opts)?;
    Ok(SweepRecord::from_report(&r, "input", None))
}

/// Both forms of the Fourier-side bound: `#E <~ M p^(n-k+s-a)` and the
/// overlap-free `#E <~ p^(k(n-k)+s-a)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FalconerCheck {
    pub lhs: usize,
    pub overlap: usize,
    pub rhs: f64,
    pub ratio: f64,
    pub remark_rhs: f64,
    pub remark_ratio: f64,
}

impl FalconerCheck {
    /// `None` when `A` is empty.
    pub fn from_report(r: &ExceptionalReport) -> Option<Self> {
        let a = r.a?;
        let (n, k, p) = (r.n as f64, r.k as f64, r.p.as_f64());
        let lhs = r.exceptional_count();
        let rhs = r.overlap as f64 * p.powf(n - k + r.s - a);
        let remark_rhs = p.powf(k * (n - k) + r.s - a);
        Some(Self {
            lhs,
            overlap: r.overlap,
            rhs,
            ratio: if lhs == 0 { 0.0 } else { lhs as f64 / rhs },
            remark_rhs,
            remark_ratio: lhs as f64 / remark_rhs,
        })
    }
}

pub fn verify_falconer(
    a: &PointSet,
    k: usize,
    s: f64,
    opts: &ScanOptions,
) -> Result<Option<FalconerCheck>> {
    Ok(FalconerCheck::from_report(&exceptional_set(a, k, s, opts)?))
}

/// Both sides of the per-slice incidence bound
/// `sum_{V in Theta} #pi_V(A_i) >~ #Theta min{p^(k-1), #A_i p^(-(n-k)(k-1)) #Theta}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceBound {
    pub index: usize,
    pub size: usize,
    pub lhs: usize,
    pub rhs: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperReport {
    pub exceptional: usize,
    pub overlap: usize,
    pub xi0: Option<Vec<u32>>,
    pub theta: Vec<Subspace>,
    /// `ln p * p^((n-k)(k-1)+s-a)`.
    pub overlap_rhs: Option<f64>,
    pub overlap_ratio: Option<f64>,
    /// `dual(span{xi0})`; every member of Theta lies in it.
    pub hyperplane: Option<Subspace>,
    pub slices: Vec<SliceBound>,
    /// Smallest slice ratio over nonempty slices.
    pub min_slice_ratio: Option<f64>,
    /// `sum_i sum_{V in Theta} #pi_V(A_i) = sum_{V in Theta} #pi_V(A)`.
    pub fubini_holds: bool,
    pub best_class: Option<DyadicClass>,
}

impl HyperReport {
    fn empty(r: &ExceptionalReport) -> Self {
        Self {
            exceptional: r.exceptional_count(),
            overlap: r.overlap,
            xi0: r.xi0_coords.clone(),
            theta: Vec::new(),
            overlap_rhs: None,
            overlap_ratio: None,
            hyperplane: None,
            slices: Vec::new(),
            min_slice_ratio: None,
            fubini_holds: true,
            best_class: None,
        }
    }
}

pub fn verify_hyper_lemmas(
    a: &PointSet,
    k: usize,
    s: f64,
    opts: &ScanOptions,
) -> Result<HyperReport> {
    let r = exceptional_set(a, k, s, opts)?;
    hyper_lemmas_from_report(a, &r)
}

pub fn hyper_lemmas_from_report(a: &PointSet, r: &ExceptionalReport) -> Result<HyperReport> {
    let mut out = HyperReport::empty(r);
    let (Some(xi0), Some(a_exp)) = (r.xi0, r.a) else {
        return Ok(out);
    };
    if r.theta.is_empty() {
        return Ok(out);
    }
    let (p, n, k) = (r.p, r.n, r.k);
    let theta: Vec<Subspace> = r.theta_directions().cloned().collect();
    let th = theta.len() as f64;
    let pf = p.as_f64();
    let (nf, kf) = (n as f64, k as f64);

    let overlap_rhs = pf.ln() * pf.powf((nf - kf) * (kf - 1.0) + r.s - a_exp);
    out.overlap_rhs = Some(overlap_rhs);
    out.overlap_ratio = Some(r.overlap as f64 / overlap_rhs);

    let line = Subspace::span(p, n, &[crate::field::decode_point(xi0, p, n)?])?;
    let h = dual(&line);
    let dec = slice(a, &h)?;
    let whole: usize = theta
        .iter()
        .map(|v| projection_count(v, a))
        .sum::<Result<usize>>()?;
    let mut total = 0;
    for (i, members) in dec.slices.iter().enumerate() {
        let part = PointSet::from_indices(p, n, members.iter().copied())?;
        let lhs: usize = theta
            .iter()
            .map(|v| projection_count(v, &part))
            .sum::<Result<usize>>()?;
        total += lhs;
        let size = members.len();
        let rhs = th
            * pf.powf(kf - 1.0)
                .min(size as f64 * pf.powf(-(nf - kf) * (kf - 1.0)) * th);
        out.slices.push(SliceBound {
            index: i,
            size,
            lhs,
            rhs,
            ratio: (size > 0).then(|| lhs as f64 / rhs),
        });
    }
    out.min_slice_ratio = out.slices.iter().filter_map(|b| b.ratio).reduce(f64::min);
    out.fubini_holds = total == whole;
    out.best_class = dec.best;
    out.hyperplane = Some(h);
    out.theta = theta;
    Ok(out)
}
