//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ffproj_core::constructions::{random_set, random_subset, st_product, SplitMix64};
use ffproj_core::fourier::fourier_suite;
use ffproj_core::grassmann::{contains, gaussian_binomial};
use ffproj_core::projection::{case1_certificate, fubini_check};
use ffproj_core::sweep::{self, Row, SweepConfig};
use ffproj_core::{
    dual, enumerate_subspaces, exceptional_set, projection_count, PointIndex, PointSet,
    PrimeModulus, ScanOptions, SizeGuard, Subspace,
};

const SWEEP: &str = include_str!("../../../configs/acceptance.sweep");

// Frozen from the first verified run of the acceptance sweep.
const GOLDEN_MAX_FALCONER: f64 = 0.9260456074880341;
const GOLDEN_MAX_REMARK: f64 = 1.0583378371291818;

type Check = fn() -> Result<String, String>;

fn p(v: u64) -> PrimeModulus {
    PrimeModulus::new(v).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grassmannian_counts() -> Result<String, String> {
    let g = SizeGuard::default();
    let mut total = 0;
    for q in [2, 3, 5] {
        let q = p(q);
        for n in 1..=4 {
            // brute force: spans of a (k-1)-space and one extra vector
            let mut layer: BTreeSet<Subspace> = BTreeSet::from([Subspace::zero(q, n)]);
            for k in 0..=n {
                let listed: Vec<Subspace> = enumerate_subspaces(q, n, k, &g)
                    .map_err(|e| e.to_string())?
                    .collect();
                let distinct: BTreeSet<Subspace> = listed.iter().cloned().collect();
                let want = gaussian_binomial(n, k, q).map_err(|e| e.to_string())?;
                ensure(distinct.len() == listed.len(), || {
                    format!("duplicates at p={q} n={n} k={k}")
                })?;
                ensure(want == listed.len().into(), || {
                    format!(
                        "p={q} n={n} k={k}: {} listed, [n k]_p = {want}",
                        listed.len()
                    )
                })?;
                ensure(distinct == layer, || {
                    format!("p={q} n={n} k={k}: differs from brute force")
                })?;
                total += listed.len();

                let mut next = BTreeSet::new();
                for w in &layer {
                    let rows: Vec<Vec<u32>> = w.basis().row_iter().map(<[u32]>::to_vec).collect();
                    for x in 0..q.as_usize().pow(n as u32) {
                        if w.contains_point(PointIndex(x)) {
                            continue;
                        }
                        let mut r = rows.clone();
                        r.push(ffproj_core::field::decode_point(PointIndex(x), q, n).unwrap());
                        next.insert(Subspace::span(q, n, &r).unwrap());
                    }
                }
                layer = next;
            }
        }
    }
    Ok(format!(
        "{total} subspaces match [n k]_p and brute-force spans"
    ))
}

fn duality_suite() -> Result<String, String> {
    let g = SizeGuard::default();
    let mut pairs = 0;
    for q in [2, 3] {
        for n in 1..=4 {
            let all: Vec<Subspace> = (0..=n)
                .flat_map(|k| enumerate_subspaces(p(q), n, k, &g).unwrap())
                .collect();
            let duals: Vec<Subspace> = all.iter().map(dual).collect();
            for (v, d) in all.iter().zip(&duals) {
                ensure(&dual(d) == v, || format!("dual(dual({v})) != {v}"))?;
                ensure(d.dim() == n - v.dim(), || {
                    format!("dim dual({v}) = {}", d.dim())
                })?;
            }
            for (v, dv) in all.iter().zip(&duals) {
                for (w, dw) in all.iter().zip(&duals) {
                    let fwd = contains(w, v).unwrap();
                    let back = contains(dv, dw).unwrap();
                    ensure(fwd == back, || {
                        format!("{v} in {w} is {fwd}, {dw} in {dv} is {back}")
                    })?;
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{pairs} ordered pairs checked"))
}

fn fourier_checks() -> Result<String, String> {
    let r = fourier_suite(&[p(2), p(3), p(5)], 3, 100, 2024, &SizeGuard::default())
        .map_err(|e| e.to_string())?;
    ensure(r.passes() && r.random_functions == 100, || format!("{r:?}"))?;
    Ok(format!(
        "{} subspaces, indicator err {:.1e}, plancherel rel {:.1e}, high(0) {:.1e}",
        r.subspaces, r.indicator_error, r.plancherel_relative, r.high_at_zero
    ))
}

fn exceptional_oracles() -> Result<String, String> {
    let opts = ScanOptions::default();
    let pt = PointSet::from_indices(p(3), 2, [PointIndex(0)]).unwrap();
    let r = exceptional_set(&pt, 1, 0.5, &opts).unwrap();
    ensure(r.exceptional_count() == 4 && r.overlap == 1, || {
        format!(
            "single point: #E = {}, M = {}",
            r.exceptional_count(),
            r.overlap
        )
    })?;

    for (q, n, k) in [(3, 3, 1), (3, 3, 2), (5, 2, 1)] {
        let full = PointSet::full(p(q), n).unwrap();
        let r = exceptional_set(&full, k, k as f64 - 0.01, &opts).unwrap();
        ensure(r.exceptional.is_empty(), || {
            format!("full F_{q}^{n}: #E = {}", r.exceptional_count())
        })?;
    }

    let l = Subspace::span(p(3), 3, &[vec![1, 2, 0]]).unwrap();
    let a = PointSet::from_indices(p(3), 3, l.points()).unwrap();
    let r = exceptional_set(&a, 1, 0.5, &opts).unwrap();
    ensure(r.exceptional_count() == 4, || {
        format!("line: #E = {}", r.exceptional_count())
    })?;
    for v in r.exceptional_directions() {
        ensure(contains(v, &l).unwrap(), || {
            format!("exceptional plane {v} misses the line")
        })?;
    }
    Ok("point: 4 lines, M = 1; full: none; line: 4 planes".into())
}

fn st_guarantee() -> Result<String, String> {
    let q = p(101);
    let (a, preds) = st_product(q, 1.2, 0.8).map_err(|e| e.to_string())?;
    let pred = &preds[0];
    let bound = 21.0 * 101f64.powf(0.8);
    let kmax = 101f64.powf(0.4).floor() as usize;
    ensure(pred.directions.len() == 13 && 2 * kmax + 1 == 13, || {
        format!(
            "{} directions, 2 floor(p^(2s-a)) + 1 = {}",
            pred.directions.len(),
            2 * kmax + 1
        )
    })?;
    let mut worst = 0;
    for v in &pred.directions {
        let c = projection_count(v, &a).unwrap();
        worst = worst.max(c);
        ensure(c as f64 <= bound, || format!("{v}: {c} > {bound}"))?;
    }
    let s = bound.ln() / 101f64.ln();
    let r = exceptional_set(&a, 1, s, &ScanOptions::default()).unwrap();
    let found: BTreeSet<&Subspace> = r.exceptional_directions().collect();
    for v in &pred.directions {
        ensure(found.contains(v), || {
            format!("{v} not below 21 p^s in the scan")
        })?;
    }
    // 21 p^s exceeds p here, so every line direction is below it
    Ok(format!(
        "13 directions, max count {worst} <= {bound:.1} (> p, so the scan finds all {} directions)",
        found.len()
    ))
}

fn case1() -> Result<String, String> {
    let g = SizeGuard::default();
    let opts = ScanOptions::default();
    let mut rng = SplitMix64::new(6);
    let mut certified = 0;
    for trial in 0..200 {
        let q = p([3, 5][trial % 2]);
        let k = [1, 2][(trial / 2) % 2];
        let n = 3;
        let s = [0.3, 0.5, 0.7, 0.9][(trial / 4) % 4];
        let hyperplanes: Vec<Subspace> = enumerate_subspaces(q, n, n - 1, &g).unwrap().collect();
        let h0 = &hyperplanes[(rng.next_u64() % hyperplanes.len() as u64) as usize];
        let offset = PointIndex((rng.next_u64() % (q.as_usize().pow(3) as u64)) as usize);
        let plane = ffproj_core::grassmann::coset_of(h0, offset).unwrap();
        let pool: Vec<PointIndex> = (0..q.as_usize().pow(3))
            .map(PointIndex)
            .filter(|&x| plane.contains(x))
            .collect();
        let need = q.as_f64().powf(s + (n - k) as f64 - 1.0).ceil() as usize;
        let m = need + (rng.next_u64() % (pool.len() - need + 1) as u64) as usize;
        let a = random_subset(q, n, &pool, m, rng.next_u64()).unwrap();
        let r = exceptional_set(&a, k, s, &opts).unwrap();
        for v in r.exceptional_directions() {
            ensure(contains(h0, v).unwrap(), || {
                format!(
                    "trial {trial}: {v} in E_s(A) is not inside {h0} (p={q}, k={k}, s={s}, #A={m})"
                )
            })?;
        }
        if case1_certificate(&a, k, s, &g).unwrap().is_some() {
            certified += 1;
        }
    }
    ensure(certified == 200, || {
        format!("only {certified} of 200 sets have a rich hyperplane")
    })?;
    Ok("200 sets, 0 violations".into())
}

fn fubini() -> Result<String, String> {
    let g = SizeGuard::default();
    let q = p(3);
    let hyperplanes: Vec<Subspace> = enumerate_subspaces(q, 3, 2, &g).unwrap().collect();
    let all: Vec<Subspace> = (0..=2)
        .flat_map(|k| enumerate_subspaces(q, 3, k, &g).unwrap())
        .collect();
    let mut checks = 0;
    for seed in 0..50u64 {
        let a = random_set(q, 3, 1.0 + (seed % 5) as f64 * 0.4, seed, &g).unwrap();
        for h0 in &hyperplanes {
            for v in all.iter().filter(|v| contains(h0, v).unwrap()) {
                ensure(fubini_check(&a, v, h0).unwrap(), || {
                    format!("seed {seed}: {v} in {h0}")
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (A, H0, V) triples, 0 violations"))
}

fn sweep_rows() -> &'static (SweepConfig, Vec<Row>) {
    static ROWS: OnceLock<(SweepConfig, Vec<Row>)> = OnceLock::new();
    ROWS.get_or_init(|| {
        let cfg = SweepConfig::parse(SWEEP).expect("acceptance config parses");
        let rows = sweep::run(&cfg, &SizeGuard::default(), None);
        (cfg, rows)
    })
}

fn scaling() -> Result<String, String> {
    let (cfg, rows) = sweep_rows();
    let failed: Vec<&Row> = rows.iter().filter(|r| !r.record.is_ok()).collect();
    ensure(failed.is_empty(), || {
        format!(
            "{} failed instances, first: {}",
            failed.len(),
            failed[0].record.status
        )
    })?;
    ensure(rows.iter().all(|r| r.record.in_range), || {
        "an instance is outside the stated range".into()
    })?;
    let summary = sweep::summarize(rows, cfg);
    let mut fitted = Vec::new();
    for fit in &summary.slopes {
        ensure(fit.within(0.25), || {
            format!(
                "n={} k={} a={:?} {}: slope {:?} > t {:?} + 0.25",
                fit.n, fit.k, fit.a, fit.s_rule, fit.slope, fit.t
            )
        })?;
        if let (Some(slope), Some(t)) = (fit.slope, fit.t) {
            fitted.push(format!("{slope:.3} vs t={t:.3}"));
        }
    }
    Ok(format!(
        "{} records, {} grid points, {} with exceptions to fit: {}",
        rows.len(),
        summary.slopes.len(),
        fitted.len(),
        fitted.join("; ")
    ))
}

fn falconer_monitoring() -> Result<String, String> {
    let (cfg, rows) = sweep_rows();
    let summary = sweep::summarize(rows, cfg);
    let all_finite = rows.iter().all(|r| {
        r.record.falconer_ratio.is_some_and(f64::is_finite)
            && r.record.remark_ratio.is_some_and(f64::is_finite)
    });
    ensure(all_finite, || "a ratio is missing or not finite".into())?;
    let (Some(m_form), Some(remark)) = (summary.max_falconer_ratio, summary.max_remark_ratio)
    else {
        return Err("no ratios recorded".into());
    };
    ensure(m_form.to_bits() == GOLDEN_MAX_FALCONER.to_bits(), || {
        format!("max M-form ratio {m_form:?} != golden {GOLDEN_MAX_FALCONER:?}")
    })?;
    ensure(remark.to_bits() == GOLDEN_MAX_REMARK.to_bits(), || {
        format!("max remark ratio {remark:?} != golden {GOLDEN_MAX_REMARK:?}")
    })?;
    Ok(format!(
        "max M-form ratio {m_form:?}, max M-free ratio {remark:?}"
    ))
}

fn determinism() -> Result<String, String> {
    let cfg = SweepConfig::parse(SWEEP).unwrap();
    let g = SizeGuard::default();
    let first = sweep::to_csv(&sweep::run(&cfg, &g, Some(1)));
    let second = sweep::to_csv(&sweep::run(&cfg, &g, Some(1)));
    let eight = sweep::to_csv(&sweep::run(&cfg, &g, Some(8)));
    let shared = sweep::to_csv(&sweep_rows().1);
    ensure(first == second, || "two runs with one worker differ".into())?;
    ensure(first == eight, || {
        "one worker and eight workers differ".into()
    })?;
    ensure(first == shared, || "default pool differs".into())?;
    let back = sweep::parse_csv(&first).map_err(|e| e.to_string())?;
    ensure(sweep::to_csv(&back) == first, || {
        "CSV does not round-trip".into()
    })?;
    Ok(format!(
        "{} bytes identical across runs and worker counts",
        first.len()
    ))
}

fn main() {
    let checks: [(&str, Check, Duration); 10] = [
        (
            "grassmannian counts",
            grassmannian_counts,
            Duration::from_secs(30),
        ),
        ("duality suite", duality_suite, Duration::from_secs(60)),
        ("fourier suite", fourier_checks, Duration::from_secs(60)),
        (
            "exceptional-set oracles",
            exceptional_oracles,
            Duration::from_secs(1),
        ),
        (
            "st construction guarantee",
            st_guarantee,
            Duration::from_secs(10),
        ),
        ("case-1 property", case1, Duration::from_secs(300)),
        ("fubini slice identity", fubini, Duration::from_secs(120)),
        ("scaling sweep", scaling, Duration::from_secs(900)),
        (
            "falconer monitoring",
            falconer_monitoring,
            Duration::from_secs(900),
        ),
        ("determinism", determinism, Duration::from_secs(900)),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > *budget => Err(format!("{msg}; took {took:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name} ({took:.2?}): {msg}", i + 1),
            Err(msg) => {
                failures += 1;
                println!("FAIL {:>2} {name} ({took:.2?}): {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        checks.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
