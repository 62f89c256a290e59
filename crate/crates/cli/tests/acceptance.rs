//! Release gate. Each check prints one PASS or FAIL line so the suite
//! doubles as a shipping checklist.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use smellprone_core::dataset::{Augmentation, BaseModel, Dataset, FeatureRow, ModelSpec};
use smellprone_core::intensity::{
    class_intensity, instance_intensity, DistributionSet, IntensityConfig,
};
use smellprone_core::metrics::{EntityKind, EntityMetricVector, MetricId};
use smellprone_core::ml::{
    auc_roc, cliffs_delta, confusion_metrics, cross_validate, overlap_analysis, scott_knott_esd,
    vif_filter, ConfusionCounts, CvParams,
};
use smellprone_core::smells::{
    detect_smells, Op, SatisfiedPredicate, SmellInstance, SmellKind, ThresholdConfig,
};

fn criterion(n: usize, name: &str, budget: Duration, body: impl FnOnce()) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let verdict = if outcome.is_ok() && elapsed <= budget {
        "PASS"
    } else {
        "FAIL"
    };
    println!(
        "criterion {n} {verdict}: {name} ({:.2}s)",
        elapsed.as_secs_f64()
    );
    if let Err(cause) = outcome {
        std::panic::resume_unwind(cause);
    }
    assert!(
        elapsed <= budget,
        "criterion {n} took {elapsed:?}, budget {budget:?}"
    );
}

#[test]
fn criterion_1_f_measure_operating_points() {
    criterion(1, "f-measure at fixed operating points", Duration::from_secs(5), || {
        let (p, r, f): (f64, f64, f64) = confusion_metrics(ConfusionCounts {
            tp: 4026,
            fp: 2574,
            tn: 0,
            fn_: 2074,
        });
        assert!((p - 0.61).abs() < 1e-12, "precision {p}");
        assert!((r - 0.66).abs() < 1e-12, "recall {r}");
        assert!((f - 0.63).abs() <= 0.005, "f {f}");

        let (p, r, f): (f64, f64, f64) = confusion_metrics(ConfusionCounts {
            tp: 14,
            fp: 14,
            tn: 0,
            fn_: 11,
        });
        assert!((p - 0.50).abs() < 1e-12, "precision {p}");
        assert!((r - 0.56).abs() <= 0.005, "recall {r}");
        assert!((f - 0.53).abs() <= 0.005, "f {f}");
    });
}

fn random_class(rng: &mut ChaCha8Rng, idx: usize) -> EntityMetricVector<f64> {
    let mut v = EntityMetricVector::new("r1", EntityKind::Class, &format!("p.C{idx}"), "p");
    let locnamm = (rng.gen::<f64>() * 400.0).floor();
    for (m, x) in [
        (MetricId::Locnamm, locnamm),
        (MetricId::Loc, locnamm + (rng.gen::<f64>() * 60.0).floor()),
        (MetricId::Wmcnamm, (rng.gen::<f64>() * 40.0).floor()),
        (MetricId::Nomnamm, (rng.gen::<f64>() * 30.0).floor()),
        (MetricId::Tcc, rng.gen::<f64>()),
        (MetricId::Atfd, (rng.gen::<f64>() * 12.0).floor()),
        (MetricId::Woc, rng.gen::<f64>()),
        (MetricId::Noam, (rng.gen::<f64>() * 8.0).floor()),
        (MetricId::Nopa, (rng.gen::<f64>() * 6.0).floor()),
        (MetricId::Cbo, (rng.gen::<f64>() * 10.0).floor()),
        (MetricId::Rfc, (rng.gen::<f64>() * 30.0).floor()),
        (MetricId::Dit, (rng.gen::<f64>() * 4.0).floor()),
        (MetricId::Lcom, (rng.gen::<f64>() * 10.0).floor()),
    ] {
        v.set(m, x).unwrap();
    }
    v
}

fn random_method(rng: &mut ChaCha8Rng, idx: usize) -> EntityMetricVector<f64> {
    let mut v =
        EntityMetricVector::new("r1", EntityKind::Method, &format!("p.C{idx}#m{idx}"), "p");
    for (m, x) in [
        (MetricId::Loc, 1.0 + (rng.gen::<f64>() * 59.0).floor()),
        (MetricId::Cyclo, 1.0 + (rng.gen::<f64>() * 13.0).floor()),
        (MetricId::Maxnesting, (rng.gen::<f64>() * 10.0).floor()),
        (MetricId::Nolv, (rng.gen::<f64>() * 10.0).floor()),
        (MetricId::Atld, (rng.gen::<f64>() * 8.0).floor()),
        (MetricId::Cc, (rng.gen::<f64>() * 10.0).floor()),
        (MetricId::Cm, (rng.gen::<f64>() * 12.0).floor()),
        (MetricId::Fanout, (rng.gen::<f64>() * 6.0).floor()),
        (MetricId::Cint, (rng.gen::<f64>() * 16.0).floor()),
        (MetricId::Cdisp, rng.gen::<f64>()),
        (MetricId::Mamcl, (rng.gen::<f64>() * 6.0).floor()),
        (MetricId::Nmcs, (rng.gen::<f64>() * 6.0).floor()),
        (MetricId::Memcl, (rng.gen::<f64>() * 4.0).floor()),
    ] {
        v.set(m, x).unwrap();
    }
    v
}

/// Direct evaluation of every detection proposition, written out
/// independently of the strategy tables.
fn brute_force_smells(v: &EntityMetricVector<f64>) -> BTreeSet<SmellKind> {
    let g = |m: MetricId| v.require(m).unwrap();
    let mut out = BTreeSet::new();
    match v.kind {
        EntityKind::Class => {
            if g(MetricId::Locnamm) >= 176.0
                && g(MetricId::Wmcnamm) >= 22.0
                && g(MetricId::Nomnamm) >= 18.0
                && g(MetricId::Tcc) <= 0.33
                && g(MetricId::Atfd) >= 6.0
            {
                out.insert(SmellKind::GodClass);
            }
            if g(MetricId::Wmcnamm) <= 14.0
                && g(MetricId::Woc) <= 0.33
                && g(MetricId::Noam) >= 4.0
                && g(MetricId::Nopa) >= 3.0
            {
                out.insert(SmellKind::DataClass);
            }
        }
        EntityKind::Method => {
            if (g(MetricId::Loc) >= 33.0
                && g(MetricId::Cyclo) >= 7.0
                && g(MetricId::Maxnesting) >= 6.0)
                || (g(MetricId::Nolv) >= 6.0 && g(MetricId::Atld) >= 5.0)
            {
                out.insert(SmellKind::BrainMethod);
            }
            if g(MetricId::Cc) >= 5.0 && g(MetricId::Cm) >= 6.0 && g(MetricId::Fanout) >= 3.0 {
                out.insert(SmellKind::ShotgunSurgery);
            }
            if g(MetricId::Cint) >= 8.0 && g(MetricId::Cdisp) >= 0.66 {
                out.insert(SmellKind::DispersedCoupling);
            }
            if g(MetricId::Mamcl) >= 3.0 || (g(MetricId::Nmcs) >= 3.0 && g(MetricId::Memcl) >= 2.0)
            {
                out.insert(SmellKind::MessageChains);
            }
        }
    }
    out
}

#[test]
fn criterion_2_detection_matches_brute_force() {
    criterion(2, "detection agrees with direct rule evaluation on 1,000 random vectors", Duration::from_secs(5), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
        let mut vectors = Vec::with_capacity(1000);
        for i in 0..500 {
            vectors.push(random_class(&mut rng, i));
        }
        for i in 500..1000 {
            vectors.push(random_method(&mut rng, i));
        }
        let config = ThresholdConfig::<f64>::default();
        let report = detect_smells("r1", &vectors, &config).unwrap();
        let detected: BTreeSet<(String, SmellKind)> = report
            .instances
            .iter()
            .map(|inst| (inst.qualified_name.clone(), inst.smell))
            .collect();
        let mut expected = BTreeSet::new();
        for v in &vectors {
            for smell in brute_force_smells(v) {
                expected.insert((v.qualified_name.clone(), smell));
            }
        }
        assert_eq!(detected, expected);
    });
}

#[test]
fn criterion_3_intensity_range_and_monotonicity() {
    criterion(3, "intensity in [1,10] when smelly, 0 otherwise, monotone in exceedance", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
        let population: Vec<_> = (0..80).map(|i| random_class(&mut rng, i)).collect();
        let dists = DistributionSet::from_vectors(&population);
        let config = IntensityConfig::default();

        let ge_pool = [
            MetricId::Locnamm,
            MetricId::Wmcnamm,
            MetricId::Nomnamm,
            MetricId::Atfd,
            MetricId::Noam,
            MetricId::Nopa,
        ];
        let le_pool = [MetricId::Tcc, MetricId::Woc];

        let make = |satisfied: Vec<SatisfiedPredicate<f64>>| SmellInstance {
            smell: SmellKind::GodClass,
            entity_kind: EntityKind::Class,
            qualified_name: "p.X".to_string(),
            package: "p".to_string(),
            satisfied,
        };

        for _ in 0..10_000 {
            let n = rng.gen_range(1..=4);
            let mut satisfied = Vec::with_capacity(n);
            for _ in 0..n {
                let (metric, op) = if rng.gen_bool(0.75) {
                    (ge_pool[rng.gen_range(0..ge_pool.len())], Op::Ge)
                } else {
                    (le_pool[rng.gen_range(0..le_pool.len())], Op::Le)
                };
                let dist = dists.get(EntityKind::Class, metric).unwrap();
                let (lo, hi) = (dist.min(), dist.max());
                let threshold = lo + rng.gen::<f64>() * (hi - lo);
                let observed = match op {
                    Op::Ge => threshold + rng.gen::<f64>() * (hi - threshold).max(0.0),
                    Op::Le => rng.gen::<f64>() * threshold,
                };
                satisfied.push(SatisfiedPredicate {
                    metric,
                    op,
                    threshold,
                    observed,
                });
            }
            let value = instance_intensity(&make(satisfied), &dists, config).unwrap();
            assert!((1.0..=10.0).contains(&value), "intensity {value}");
        }

        for i in 0..1_000 {
            let ci = class_intensity(&format!("p.None{i}"), &[], &dists, config).unwrap();
            assert_eq!(ci.value, 0.0);
        }

        let loc_dist = dists.get(EntityKind::Class, MetricId::Locnamm).unwrap();
        let (lo, hi) = (loc_dist.min(), loc_dist.max());
        for _ in 0..1_000 {
            let threshold = lo + rng.gen::<f64>() * (hi - lo) * 0.95;
            let near = threshold + rng.gen::<f64>() * (hi - threshold);
            let far = near + rng.gen::<f64>() * 50.0;
            let at = |observed: f64| {
                instance_intensity(
                    &make(vec![SatisfiedPredicate {
                        metric: MetricId::Locnamm,
                        op: Op::Ge,
                        threshold,
                        observed,
                    }]),
                    &dists,
                    config,
                )
                .unwrap()
            };
            let (a, b) = (at(near), at(far));
            assert!(b >= a - 1e-9, "intensity fell from {a} to {b}");
        }
    });
}

#[test]
fn criterion_4_rank_statistics_match_brute_force() {
    criterion(4, "auc and cliffs delta exact vs brute force, esd grouping fixtures", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
        for _ in 0..500 {
            let n = rng.gen_range(2..=30);
            let scores: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(0..=10) as f64 / 10.0)
                .collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            if labels.iter().all(|l| *l) {
                labels[0] = false;
            }
            if labels.iter().all(|l| !*l) {
                labels[0] = true;
            }
            let mut wins = 0u64;
            let mut ties = 0u64;
            let mut pairs = 0u64;
            for (i, li) in labels.iter().enumerate() {
                if !li {
                    continue;
                }
                for (j, lj) in labels.iter().enumerate() {
                    if *lj {
                        continue;
                    }
                    pairs += 1;
                    if scores[i] > scores[j] {
                        wins += 1;
                    } else if scores[i] == scores[j] {
                        ties += 1;
                    }
                }
            }
            let expected = (2 * wins + ties) as f64 / (2 * pairs) as f64;
            let got: f64 = auc_roc(&scores, &labels).unwrap();
            assert_eq!(got, expected);
        }

        for _ in 0..300 {
            let na = rng.gen_range(1..=20);
            let nb = rng.gen_range(1..=20);
            let a: Vec<f64> = (0..na).map(|_| rng.gen_range(0..=6) as f64).collect();
            let b: Vec<f64> = (0..nb).map(|_| rng.gen_range(0..=6) as f64).collect();
            let mut net = 0i64;
            for x in &a {
                for y in &b {
                    if x > y {
                        net += 1;
                    } else if x < y {
                        net -= 1;
                    }
                }
            }
            let expected = net as f64 / (na * nb) as f64;
            let got: f64 = cliffs_delta(&a, &b).unwrap();
            assert_eq!(got, expected);
        }

        let sample = |center: f64, jitter: &mut ChaCha8Rng| -> Vec<f64> {
            (0..40)
                .map(|_| center + (jitter.gen::<f64>() - 0.5) * 0.02)
                .collect()
        };
        let mut separated = BTreeMap::new();
        separated.insert("high".to_string(), sample(0.9, &mut rng));
        separated.insert("mid".to_string(), sample(0.5, &mut rng));
        separated.insert("low".to_string(), sample(0.1, &mut rng));
        assert_eq!(
            scott_knott_esd(&separated).unwrap(),
            vec![
                vec!["high".to_string()],
                vec!["mid".to_string()],
                vec!["low".to_string()],
            ]
        );

        let shared: Vec<f64> = sample(0.5, &mut rng);
        let mut identical = BTreeMap::new();
        identical.insert("a".to_string(), shared.clone());
        identical.insert("b".to_string(), shared);
        assert_eq!(
            scott_knott_esd(&identical).unwrap(),
            vec![vec!["a".to_string(), "b".to_string()]]
        );

        // statistically significant split, but |delta| = 0.10 < 0.147: one group
        let binary = |ones: usize| -> Vec<f64> {
            let mut v = vec![1.0; ones];
            v.extend(std::iter::repeat(0.0).take(500 - ones));
            v
        };
        let mut borderline = BTreeMap::new();
        borderline.insert("a".to_string(), binary(275));
        borderline.insert("b".to_string(), binary(225));
        assert_eq!(
            scott_knott_esd(&borderline).unwrap(),
            vec![vec!["a".to_string(), "b".to_string()]]
        );
    });
}

fn dataset_from_columns(names: &[&str], columns: &[Vec<f64>]) -> Dataset<f64> {
    let rows = columns[0].len();
    Dataset {
        spec: ModelSpec::new(BaseModel::Sm, Augmentation::None),
        features: names.iter().map(|s| s.to_string()).collect(),
        rows: (0..rows)
            .map(|i| FeatureRow {
                release: "r1".to_string(),
                class: format!("p.C{i}"),
                values: columns.iter().map(|c| c[i]).collect(),
                is_smelly: false,
                label: i % 2 == 0,
            })
            .collect(),
        provenance: Vec::new(),
    }
}

#[test]
fn criterion_5_collinearity_filter_behavior() {
    criterion(5, "collinearity filter drops one duplicate, keeps orthogonal, idempotent", Duration::from_secs(1), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
        let x: Vec<f64> = (0..12).map(|_| rng.gen::<f64>() * 10.0).collect();
        let noise: Vec<f64> = (0..12).map(|_| rng.gen::<f64>() * 10.0).collect();
        let dup = dataset_from_columns(&["dup_a", "dup_b", "noise"], &[x.clone(), x, noise]);
        let (kept, removed) = vif_filter(&dup).unwrap();
        assert_eq!(removed, vec!["dup_b".to_string()]);
        assert_eq!(kept.features, vec!["dup_a".to_string(), "noise".to_string()]);
        for (i, row) in kept.rows.iter().enumerate() {
            assert_eq!(row.values, vec![dup.rows[i].values[0], dup.rows[i].values[2]]);
        }
        let (again, removed2) = vif_filter(&kept).unwrap();
        assert!(removed2.is_empty());
        assert_eq!(again.features, kept.features);

        let signs = |pattern: [f64; 8]| pattern.to_vec();
        let orth = dataset_from_columns(
            &["h1", "h2", "h3"],
            &[
                signs([1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]),
                signs([1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0]),
                signs([1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]),
            ],
        );
        let (kept, removed) = vif_filter(&orth).unwrap();
        assert!(removed.is_empty());
        assert_eq!(kept.features, orth.features);
        let (_, removed2) = vif_filter(&kept).unwrap();
        assert!(removed2.is_empty());
    });
}

fn synthetic_cv_dataset(seed: u64) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = move || rng.gen::<f64>() * 2.0 - 1.0;
    let rows: Vec<FeatureRow<f64>> = (0..200)
        .map(|i| {
            let label = i < 60;
            let shift = if label { 1.2 } else { -0.3 };
            FeatureRow {
                release: "r1".to_string(),
                class: format!("p.C{i}"),
                values: vec![
                    shift + noise(),
                    noise(),
                    0.4 * if label { 1.0 } else { 0.0 } + noise(),
                    noise(),
                ],
                is_smelly: label,
                label,
            }
        })
        .collect();
    Dataset {
        spec: ModelSpec::new(BaseModel::Sm, Augmentation::None),
        features: vec![
            "f_direct".to_string(),
            "f_noise_a".to_string(),
            "f_weak".to_string(),
            "f_noise_b".to_string(),
        ],
        rows,
        provenance: Vec::new(),
    }
}

#[test]
fn criterion_6_cross_validation_stratified_and_deterministic() {
    criterion(6, "stratified folds within one, bitwise repeatable, 100x10 in budget", Duration::from_secs(60), || {
        let data = synthetic_cv_dataset(0xC6);
        let params = CvParams {
            k: 10,
            repeats: 100,
            lambda: 1.0,
            base_seed: 99,
        };
        let first = cross_validate(&data, &params).unwrap();
        assert_eq!(first.folds.len(), 1000);

        let positives = data.rows.iter().filter(|r| r.label).count();
        let negatives = data.rows.len() - positives;
        let (pos_share, neg_share) = (positives / params.k, negatives / params.k);
        for assignment in &first.fold_assignments {
            let mut pos = vec![0usize; params.k];
            let mut neg = vec![0usize; params.k];
            for (row, fold) in assignment.iter().enumerate() {
                if data.rows[row].label {
                    pos[*fold] += 1;
                } else {
                    neg[*fold] += 1;
                }
            }
            for f in 0..params.k {
                assert!(pos[f].abs_diff(pos_share) <= 1, "fold {f} has {} positives", pos[f]);
                assert!(neg[f].abs_diff(neg_share) <= 1, "fold {f} has {} negatives", neg[f]);
            }
        }

        let second = cross_validate(&data, &params).unwrap();
        assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&second).unwrap()
        );

        let reseeded = cross_validate(
            &data,
            &CvParams {
                base_seed: 100,
                ..params
            },
        )
        .unwrap();
        assert_ne!(first.fold_assignments, reseeded.fold_assignments);
    });
}

/// P(X >= wins) for X ~ Binomial(n, 1/2).
fn sign_test_tail(n: usize, wins: usize) -> f64 {
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    let tail: f64 = row[wins..].iter().sum();
    tail / 2f64.powi(n as i32)
}

#[test]
fn criterion_7_intensity_feature_improves_smell_model() {
    criterion(7, "adding intensity lifts mean f by 0.05 with sign-test support", Duration::from_secs(300), || {
        let reps = 25;
        let mut base_f = Vec::with_capacity(reps);
        let mut intensity_f = Vec::with_capacity(reps);

        for rep in 0..reps {
            let mut rng = ChaCha8Rng::seed_from_u64(0xC7_000 + rep as u64);
            let mut per_release_base = Vec::new();
            let mut per_release_int = Vec::new();
            for release in 0..3 {
                let n = 300;
                let smelly: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
                let changes: Vec<u64> = smelly
                    .iter()
                    .map(|s| {
                        if *s {
                            10 + rng.gen_range(0..=3)
                        } else {
                            rng.gen_range(0..=8)
                        }
                    })
                    .collect();
                let mut sorted = changes.clone();
                sorted.sort_unstable();
                let median = (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0;
                let labels: Vec<bool> = changes.iter().map(|c| *c as f64 > median).collect();

                let mut rows_base = Vec::with_capacity(n);
                let mut rows_int = Vec::with_capacity(n);
                for i in 0..n {
                    let noise: Vec<f64> = (0..5).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                    let label_lift = if labels[i] { 0.6 } else { 0.0 };
                    let base_values = vec![
                        40.0 + 6.0 * label_lift + 10.0 * noise[0],
                        2.0 + noise[1],
                        8.0 + 2.0 * noise[2],
                        1.0 + noise[3].abs(),
                        3.0 + noise[4],
                    ];
                    let intensity = if smelly[i] {
                        1.0 + 9.0 * rng.gen::<f64>()
                    } else {
                        0.0
                    };
                    let mut int_values = base_values.clone();
                    int_values.push(intensity);
                    let release_tag = format!("r{release}");
                    let class = format!("p.C{i}");
                    rows_base.push(FeatureRow {
                        release: release_tag.clone(),
                        class: class.clone(),
                        values: base_values,
                        is_smelly: smelly[i],
                        label: labels[i],
                    });
                    rows_int.push(FeatureRow {
                        release: release_tag,
                        class,
                        values: int_values,
                        is_smelly: smelly[i],
                        label: labels[i],
                    });
                }
                let feature_names = ["loc", "cbo", "rfc", "dit", "lcom"];
                let base = Dataset {
                    spec: ModelSpec::new(BaseModel::Sm, Augmentation::None),
                    features: feature_names.iter().map(|s| s.to_string()).collect(),
                    rows: rows_base,
                    provenance: Vec::new(),
                };
                let int = Dataset {
                    spec: ModelSpec::new(BaseModel::Sm, Augmentation::Intensity),
                    features: feature_names
                        .iter()
                        .map(|s| s.to_string())
                        .chain(std::iter::once("intensity".to_string()))
                        .collect(),
                    rows: rows_int,
                    provenance: Vec::new(),
                };
                let params = CvParams {
                    k: 5,
                    repeats: 2,
                    lambda: 1.0,
                    base_seed: 7000 + rep as u64,
                };
                per_release_base.push(cross_validate(&base, &params).unwrap().f_measure);
                per_release_int.push(cross_validate(&int, &params).unwrap().f_measure);
            }
            base_f.push(per_release_base.iter().sum::<f64>() / 3.0);
            intensity_f.push(per_release_int.iter().sum::<f64>() / 3.0);
        }

        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let margin = mean(&intensity_f) - mean(&base_f);
        assert!(
            margin >= 0.05,
            "mean f lift {margin:.4} below 0.05 ({:.4} vs {:.4})",
            mean(&intensity_f),
            mean(&base_f)
        );
        let wins = intensity_f
            .iter()
            .zip(&base_f)
            .filter(|(i, b)| i > b)
            .count();
        let p = sign_test_tail(reps, wins);
        assert!(
            wins >= 18 && p < 0.05,
            "only {wins}/{reps} wins, sign test p = {p:.4}"
        );
    });
}

#[test]
fn criterion_8_overlap_percentages() {
    criterion(8, "overlap parts sum to 100, equal sets agree completely", Duration::from_secs(1), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
        let universe: BTreeSet<String> = (0..200).map(|i| format!("e{i}")).collect();
        let ids: Vec<&String> = universe.iter().collect();
        let subset = |rng: &mut ChaCha8Rng, p: f64| -> BTreeSet<String> {
            ids.iter()
                .filter(|_| rng.gen_bool(p))
                .map(|s| (*s).clone())
                .collect()
        };
        for _ in 0..1_000 {
            let pa = rng.gen_range(0.05..0.8);
            let pb = rng.gen_range(0.05..0.8);
            let a = subset(&mut rng, pa);
            let b = subset(&mut rng, pb);
            let (both, only_a, only_b) = overlap_analysis(&a, &b, &universe).unwrap();
            if a.is_empty() && b.is_empty() {
                assert_eq!((both, only_a, only_b), (0.0, 0.0, 0.0));
            } else {
                assert!((both + only_a + only_b - 100.0).abs() < 1e-9);
            }
            let (eq_both, eq_a, eq_b) = overlap_analysis(&a, &a.clone(), &universe).unwrap();
            if a.is_empty() {
                assert_eq!((eq_both, eq_a, eq_b), (0.0, 0.0, 0.0));
            } else {
                assert_eq!((eq_both, eq_a, eq_b), (100.0, 0.0, 0.0));
            }
        }
    });
}

fn snapshot_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .expect("under root")
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, std::fs::read(&path).expect("readable file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn median_sorted(xs: &mut Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

#[test]
fn criterion_9_pipeline_reproducible_and_summary_consistent() {
    criterion(9, "pipeline byte-identical across runs, summary medians recomputable", Duration::from_secs(120), || {
        let bin = env!("CARGO_BIN_EXE_smellprone");
        let config = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures/golden/config.json");
        let run = |out: &Path| {
            let status = std::process::Command::new(bin)
                .arg("run")
                .arg("--config")
                .arg(&config)
                .arg("--out")
                .arg(out)
                .status()
                .expect("spawn pipeline binary");
            assert!(status.success(), "pipeline exited with {status}");
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run(dir_a.path());
        run(dir_b.path());

        let tree_a = snapshot_tree(dir_a.path());
        let tree_b = snapshot_tree(dir_b.path());
        assert_eq!(
            tree_a.keys().collect::<Vec<_>>(),
            tree_b.keys().collect::<Vec<_>>()
        );
        for (path, bytes) in &tree_a {
            assert_eq!(bytes, &tree_b[path], "{path} differs between runs");
        }

        let summary: serde_json::Value =
            serde_json::from_slice(&tree_a["summary.json"]).expect("summary parses");
        let mut pooled_f: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut pooled_auc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (path, bytes) in &tree_a {
            if !(path.starts_with("eval/") && path.ends_with(".json")) {
                continue;
            }
            let artifact: serde_json::Value =
                serde_json::from_slice(bytes).expect("eval artifact parses");
            let spec = artifact["result"]["spec"].as_str().expect("spec name");
            for fold in artifact["result"]["folds"].as_array().expect("folds") {
                pooled_f
                    .entry(spec.to_string())
                    .or_default()
                    .push(fold["f_measure"].as_f64().expect("fold f"));
                pooled_auc
                    .entry(spec.to_string())
                    .or_default()
                    .push(fold["auc"].as_f64().expect("fold auc"));
            }
        }
        let models = summary["models"].as_array().expect("models");
        assert_eq!(models.len(), pooled_f.len());
        for model in models {
            let name = model["model"].as_str().expect("model name");
            let mut f = pooled_f.remove(name).expect("pooled f for model");
            let mut auc = pooled_auc.remove(name).expect("pooled auc for model");
            assert_eq!(model["folds"].as_u64().unwrap() as usize, f.len());
            assert_eq!(
                model["median_f"].as_f64().unwrap(),
                median_sorted(&mut f),
                "median f mismatch for {name}"
            );
            assert_eq!(
                model["median_auc"].as_f64().unwrap(),
                median_sorted(&mut auc),
                "median auc mismatch for {name}"
            );
        }
    });
}
