//! Acceptance suite. Runs every criterion, prints one `PASS`/`FAIL` line per
//! criterion and exits non-zero if any failed.
//!
//! `cargo test --release --test acceptance` runs everything; extra arguments
//! select criteria by number, e.g. `-- 1 6`.

mod common;

use std::collections::HashSet;
use std::time::Instant;

use common::regression::{close, random_records, rational_ols};
use common::*;
use manifold_id::analysis::{fit, fit_multiple, fit_simple, Domain, ExperimentRecord, FitMode};
use manifold_id::estimator::estimate_dataset;
use manifold_id::ingest::{stratified_sample, LabeledItem, SourceRef};
use manifold_id::knn::{build_neighbor_table, naive_neighbor_oracle};
use manifold_id::synthetic::generate;
use manifold_id::{DataMatrix, LabeledCollection, ManifoldKind, ManifoldSpec};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn synth(kind: ManifoldKind, m: usize, d: usize, n: usize, seed: u64) -> DataMatrix {
    generate(&ManifoldSpec::new(kind, m, d, n, seed)).expect("valid spec")
}

fn synthetic_recovery() -> Outcome {
    let cases = [
        ("cube m=5", ManifoldKind::Cube, 5, 100, 4.0, 6.0),
        ("cube m=10", ManifoldKind::Cube, 10, 100, 8.0, 12.0),
        ("cube m=20", ManifoldKind::Cube, 20, 100, 15.0, 25.0),
        ("swiss roll", ManifoldKind::SwissRoll, 2, 3, 1.6, 2.6),
        ("sphere m=2", ManifoldKind::Sphere, 2, 3, 1.7, 2.4),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut cube_ids = Vec::new();
    for (name, kind, m, d, lo, hi) in cases {
        let t = Instant::now();
        let g = estimate_dataset(&synth(kind, m, d, 2500, 1), 20)
            .expect("estimate")
            .global_id;
        let secs = t.elapsed().as_secs_f64();
        let good = (lo..=hi).contains(&g) && secs < 60.0;
        ok &= good;
        if kind == ManifoldKind::Cube {
            cube_ids.push(g);
        }
        parts.push(format!(
            "{name}: {g:.3} in [{lo}, {hi}] {}{secs:.2}s",
            if good { "" } else { "MISS " }
        ));
    }
    let increasing = cube_ids.windows(2).all(|w| w[0] < w[1]);
    ok &= increasing;
    parts.push(format!("cubes increasing: {increasing}"));
    check(ok, parts.join("; "))
}

fn harmonic_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for seed in 0..10 {
        for (kind, m, d) in [
            (ManifoldKind::Cube, 4, 30),
            (ManifoldKind::Gaussian, 7, 12),
            (ManifoldKind::SwissRoll, 2, 3),
        ] {
            let est = estimate_dataset(&synth(kind, m, d, 600, seed), 20).expect("estimate");
            worst = worst.max(rel_diff(est.harmonic_mean_of_local(), est.global_id));
            n += 1;
        }
        let est = estimate_dataset(&random_matrix(300, 9, seed), 5).expect("estimate");
        worst = worst.max(rel_diff(est.harmonic_mean_of_local(), est.global_id));
        n += 1;
    }
    check(
        worst <= 1e-12,
        format!("{n} estimates, worst relative gap {worst:.2e} (tol 1e-12)"),
    )
}

fn invariance_suite() -> Outcome {
    let kinds = [
        ManifoldKind::Cube,
        ManifoldKind::Gaussian,
        ManifoldKind::Sphere,
        ManifoldKind::SwissRoll,
    ];
    let mut worst = [0.0f64; 5];
    for seed in 0..10u64 {
        let kind = kinds[seed as usize % kinds.len()];
        let m = if kind == ManifoldKind::SwissRoll {
            2
        } else {
            2 + seed as usize % 5
        };
        let data = synth(kind, m, 24, 500, seed);
        let base = estimate_dataset(&data, 20).expect("estimate").global_id;
        let d = data.n_dims();
        let q = random_orthogonal(d, seed);
        let rotated: Vec<f64> = data
            .rows()
            .flat_map(|x| {
                (0..d)
                    .map(|r| {
                        q[r * d..(r + 1) * d]
                            .iter()
                            .zip(x)
                            .map(|(a, b)| a * b)
                            .sum::<f64>()
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let rotated = DataMatrix::new(data.n_points(), d, rotated).unwrap();
        let translated = DataMatrix::new(
            data.n_points(),
            d,
            data.values()
                .iter()
                .enumerate()
                .map(|(i, v)| v + 7.0 - (i % d) as f64 * 0.5)
                .collect(),
        )
        .unwrap();
        let variants = [
            scaled(&data, 1e-3),
            scaled(&data, 1e3),
            rotated,
            translated,
            padded(&data, 40, 2.5),
        ];
        for (w, v) in worst.iter_mut().zip(&variants) {
            let g = estimate_dataset(v, 20).expect("estimate").global_id;
            *w = w.max(rel_diff(g, base));
        }
    }
    let names = ["x1e-3", "x1e3", "orthogonal", "translation", "padding"];
    let detail = names
        .iter()
        .zip(&worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(
        worst.iter().all(|w| *w <= 1e-6),
        format!("10 datasets, worst relative change: {detail} (tol 1e-6)"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for instance in 0..100 {
        let k = rng.random_range(2..=20);
        let n = rng.random_range(k + 1..=200);
        let d = rng.random_range(1..=50);
        let data = random_matrix(n, d, instance);
        let fast = build_neighbor_table(&data, k).expect("fast");
        let slow = naive_neighbor_oracle(&data, k).expect("oracle");
        let gap = fast
            .all_distances()
            .iter()
            .zip(slow.all_distances())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
        if fast.all_neighbor_ids() != slow.all_neighbor_ids() || gap > 1e-12 {
            failures += 1;
        }
    }
    check(
        failures == 0,
        format!("100 instances, {failures} mismatched, worst distance gap {worst:.1e} (tol 1e-12)"),
    )
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace()
        .nth(1)?
        .parse::<u64>()
        .ok()
        .map(|kb| kb * 1024)
}

fn full_scale() -> Outcome {
    const N: usize = 7500;
    const D: usize = 224 * 224;
    let t = Instant::now();
    let data = synth(ManifoldKind::Cube, 10, D, N, 42);
    let generated = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let one = in_pool(1, || estimate_dataset(&data, 20).expect("estimate"));
    let first = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let four = in_pool(4, || estimate_dataset(&data, 20).expect("estimate"));
    let second = t.elapsed().as_secs_f64();
    let peak = peak_rss_bytes();
    let identical = one.global_id.to_bits() == four.global_id.to_bits()
        && one
            .per_point_ids
            .iter()
            .zip(&four.per_point_ids)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    let within_time = generated + first.max(second) < 30.0 * 60.0;
    let within_memory = peak.is_some_and(|p| p < 8 << 30);
    check(
        within_time && within_memory && identical,
        format!(
            "N={N} d={D}: generate {generated:.0}s, estimate {first:.0}s (1 worker) / {second:.0}s (4 workers), \
             global_id {:.4}, bit-identical {identical}, peak RSS {:.2} GiB",
            one.global_id,
            peak.map_or(f64::NAN, |p| p as f64 / (1u64 << 30) as f64),
        ),
    )
}

fn planted(ids: &[f64], ns: &[u64], ga: impl Fn(f64, f64) -> f64) -> Vec<ExperimentRecord> {
    ids.iter()
        .zip(ns)
        .map(|(&id, &n)| ExperimentRecord {
            dataset: "planted".into(),
            domain: Domain::Natural,
            intrinsic_dim: id,
            generalization_ability: ga(id, (n as f64).ln()),
            n_train: n,
            model: "m".into(),
        })
        .collect()
}

fn regression_correctness() -> Outcome {
    let ids = [8.0, 11.5, 13.0, 17.25, 20.0, 24.0, 31.0, 40.0];
    let ns = [500, 2000, 1000, 1500, 500, 1000, 2000, 1500];
    let s =
        fit_simple(&planted(&ids, &ns, |id, _| 0.98 - 0.0075 * id)).map_err(|e| e.to_string())?;
    let m = fit_multiple(&planted(&ids, &ns, |id, l| 0.6 - 0.019 * id + 0.06 * l))
        .map_err(|e| e.to_string())?;
    let planted_ok = (s.intercept - 0.98).abs() <= 1e-9
        && (s.slope_id + 0.0075).abs() <= 1e-9
        && (m.intercept - 0.6).abs() <= 1e-9
        && (m.slope_id + 0.019).abs() <= 1e-9
        && (m.slope_logn.unwrap() - 0.06).abs() <= 1e-9;

    let mut oracle_misses = 0;
    for seed in 0..50 {
        let recs = random_records(10 + seed as usize % 8, 7000 + seed);
        let ids: Vec<f64> = recs.iter().map(|r| r.intrinsic_dim).collect();
        let logn: Vec<f64> = recs.iter().map(|r| r.log_n_train()).collect();
        let ga: Vec<f64> = recs.iter().map(|r| r.generalization_ability).collect();
        let b1 = rational_ols(std::slice::from_ref(&ids), &ga);
        let b2 = rational_ols(&[ids, logn], &ga);
        let f1 = fit_simple(&recs).map_err(|e| e.to_string())?;
        let f2 = fit_multiple(&recs).map_err(|e| e.to_string())?;
        let ok = close(f1.intercept, b1[0])
            && close(f1.slope_id, b1[1])
            && close(f2.intercept, b2[0])
            && close(f2.slope_id, b2[1])
            && close(f2.slope_logn.unwrap(), b2[2]);
        oracle_misses += usize::from(!ok);
    }

    let mut invariant_misses = 0;
    for seed in 0..100 {
        let recs = random_records(6 + seed as usize % 30, 9000 + seed);
        for mode in [FitMode::Simple, FitMode::Multiple] {
            let f = fit(&recs, mode).map_err(|e| e.to_string())?;
            let sum: f64 = f.residuals.iter().sum();
            invariant_misses +=
                usize::from(sum.abs() > 1e-9 || !(0.0..=1.0).contains(&f.r_squared));
        }
    }
    check(
        planted_ok && oracle_misses == 0 && invariant_misses == 0,
        format!(
            "planted recovery {planted_ok} (tol 1e-9); rational oracle: {oracle_misses}/50 mismatches (tol 1e-10); \
             invariants: {invariant_misses}/200 violations"
        ),
    )
}

fn collection(n0: usize, n1: usize) -> LabeledCollection {
    let items = (0..n0 + n1)
        .map(|i| LabeledItem {
            source: SourceRef::Row(i),
            label: u8::from(i >= n0),
        })
        .collect();
    LabeledCollection {
        name: "prop".into(),
        origin: "generated".into(),
        items,
    }
}

fn protocol_fidelity() -> Outcome {
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 500,
            failure_persistence: None,
            ..Config::default()
        },
        rng,
    );
    let strategy = (1usize..400, 1usize..400, any::<u64>(), 0.0f64..=1.0);
    let result = runner.run(&strategy, |(n0, n1, seed, frac)| {
        let coll = collection(n0, n1);
        let counts = coll.label_counts();
        let per_class = 1 + ((counts[&0].min(counts[&1]) - 1) as f64 * frac) as usize;
        let s = stratified_sample(&coll, 2 * per_class, seed).expect("feasible sample");
        let c = s.label_counts();
        prop_assert_eq!(c[&0], per_class);
        prop_assert_eq!(c[&1], per_class);
        let unique: HashSet<_> = s.items.iter().map(|it| it.source.clone()).collect();
        prop_assert_eq!(unique.len(), s.len());
        prop_assert!(s.items.iter().all(|it| coll.items.contains(it)));
        let again = stratified_sample(&coll, 2 * per_class, seed).expect("feasible sample");
        prop_assert_eq!(again, s);
        Ok(())
    });
    match result {
        Ok(()) => Ok(
            "500 random class sizes and seeds: exact 50/50, distinct members, reproducible".into(),
        ),
        Err(e) => Err(e.to_string()),
    }
}

fn non_reproducibility_note() -> Outcome {
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md"))
        .map_err(|e| format!("README.md unreadable: {e}"))?;
    let required = [
        "not desk-reproducible",
        "manifold-id estimate --manifest",
        "--sample 7500 --balanced",
        "manifold-id regress --results",
    ];
    let missing: Vec<_> = required.iter().filter(|r| !readme.contains(*r)).collect();
    check(
        missing.is_empty(),
        format!("README walkthrough present; missing: {missing:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("synthetic dimension recovery", synthetic_recovery),
        (
            "global estimate is harmonic mean of local estimates",
            harmonic_identity,
        ),
        ("invariance suite", invariance_suite),
        ("kNN oracle equivalence", oracle_equivalence),
        ("full-scale execution", full_scale),
        ("regression correctness", regression_correctness),
        ("stratified sampling balance", protocol_fidelity),
        (
            "non-reproducibility note and walkthrough",
            non_reproducibility_note,
        ),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        let (verdict, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(outcome.is_err());
        println!("criterion {number} [{verdict}] {name} ({secs:.1}s): {detail}");
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
