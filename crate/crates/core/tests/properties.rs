//! Randomized invariant checks across the detection, intensity,
//! history, dataset, and evaluation layers.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{TimeZone, Utc};
use proptest::prelude::*;

use smellprone_core::dataset::{clean_dataset, Augmentation, BaseModel, Dataset, FeatureRow, ModelSpec};
use smellprone_core::history::{
    change_entropy, label_change_proneness, resolve_renames, ChangeHistory, Commit, LogRecord,
};
use smellprone_core::intensity::{
    class_intensity, exceeding_placement, normalize_exceed, DistributionSet, IntensityConfig,
    MetricDistribution, NormalizationMode, PlacementMode,
};
use smellprone_core::metrics::{
    load_metrics_table, write_metrics_table, EntityKind, EntityMetricVector, MetricId,
};
use smellprone_core::ml::{auc_roc, cliffs_delta, confusion_metrics, overlap_analysis, vif_filter, ConfusionCounts};
use smellprone_core::smells::{detect_smells, Op, SmellKind, ThresholdConfig};

fn class_vector(
    name: String,
    locnamm: f64,
    loc_extra: f64,
    wmcnamm: f64,
    nomnamm: f64,
    tcc: f64,
    atfd: f64,
    woc: f64,
    noam: f64,
    nopa: f64,
) -> EntityMetricVector<f64> {
    let mut v = EntityMetricVector::new("r1", EntityKind::Class, &name, "p");
    for (m, x) in [
        (MetricId::Locnamm, locnamm),
        (MetricId::Loc, locnamm + loc_extra),
        (MetricId::Wmcnamm, wmcnamm),
        (MetricId::Nomnamm, nomnamm),
        (MetricId::Tcc, tcc),
        (MetricId::Atfd, atfd),
        (MetricId::Woc, woc),
        (MetricId::Noam, noam),
        (MetricId::Nopa, nopa),
        (MetricId::Cbo, 3.0),
        (MetricId::Rfc, 9.0),
        (MetricId::Dit, 1.0),
        (MetricId::Lcom, 2.0),
    ] {
        v.set(m, x).unwrap();
    }
    v
}

fn method_vector(
    name: String,
    loc: f64,
    cyclo: f64,
    maxnesting: f64,
    nolv: f64,
    atld: f64,
    cc: f64,
    cm: f64,
    fanout: f64,
    cint: f64,
    cdisp: f64,
    mamcl: f64,
    nmcs: f64,
    memcl: f64,
) -> EntityMetricVector<f64> {
    let mut v = EntityMetricVector::new("r1", EntityKind::Method, &name, "p");
    for (m, x) in [
        (MetricId::Loc, loc),
        (MetricId::Cyclo, cyclo),
        (MetricId::Maxnesting, maxnesting),
        (MetricId::Nolv, nolv),
        (MetricId::Atld, atld),
        (MetricId::Cc, cc),
        (MetricId::Cm, cm),
        (MetricId::Fanout, fanout),
        (MetricId::Cint, cint),
        (MetricId::Cdisp, cdisp),
        (MetricId::Mamcl, mamcl),
        (MetricId::Nmcs, nmcs),
        (MetricId::Memcl, memcl),
    ] {
        v.set(m, x).unwrap();
    }
    v
}

prop_compose! {
    fn arb_class(idx: usize)(
        locnamm in 0.0..400.0f64,
        loc_extra in 0.0..60.0f64,
        wmcnamm in 0.0..40.0f64,
        nomnamm in 0.0..30.0f64,
        tcc in 0.0..=1.0f64,
        atfd in 0.0..12.0f64,
        woc in 0.0..=1.0f64,
        noam in 0.0..8.0f64,
        nopa in 0.0..6.0f64,
    ) -> EntityMetricVector<f64> {
        class_vector(
            format!("p.C{idx}"),
            locnamm.floor(), loc_extra.floor(), wmcnamm.floor(), nomnamm.floor(),
            tcc, atfd.floor(), woc, noam.floor(), nopa.floor(),
        )
    }
}

prop_compose! {
    fn arb_method(idx: usize)(
        loc in 1.0..60.0f64,
        cyclo in 1.0..14.0f64,
        maxnesting in 0.0..10.0f64,
        nolv in 0.0..10.0f64,
        atld in 0.0..8.0f64,
        cc in 0.0..10.0f64,
        cm in 0.0..10.0f64,
        fanout in 0.0..6.0f64,
        cint in 0.0..16.0f64,
        cdisp in 0.0..=1.0f64,
        mamcl in 0.0..6.0f64,
        nmcs in 0.0..6.0f64,
        memcl in 0.0..4.0f64,
    ) -> EntityMetricVector<f64> {
        method_vector(
            format!("p.C{idx}#m{idx}"),
            loc.floor(), cyclo.floor(), maxnesting.floor(), nolv.floor(), atld.floor(),
            cc.floor(), cm.floor(), fanout.floor(), cint.floor(), cdisp,
            mamcl.floor(), nmcs.floor(), memcl.floor(),
        )
    }
}

fn arb_population() -> impl Strategy<Value = Vec<EntityMetricVector<f64>>> {
    (1usize..6).prop_flat_map(|n| {
        let classes: Vec<_> = (0..n).map(arb_class).collect();
        let methods: Vec<_> = (0..n).map(arb_method).collect();
        (classes, methods).prop_map(|(c, m)| c.into_iter().chain(m).collect())
    })
}

/// direct evaluation of the detection propositions, written out
/// independently of the strategy tables
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
            if g(MetricId::Mamcl) >= 3.0
                || (g(MetricId::Nmcs) >= 3.0 && g(MetricId::Memcl) >= 2.0)
            {
                out.insert(SmellKind::MessageChains);
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn detection_agrees_with_direct_proposition_evaluation(vectors in arb_population()) {
        let config = ThresholdConfig::<f64>::default();
        let report = detect_smells("r1", &vectors, &config).unwrap();
        let mut detected: BTreeSet<(String, SmellKind)> = BTreeSet::new();
        for inst in &report.instances {
            detected.insert((inst.qualified_name.clone(), inst.smell));
        }
        let mut expected: BTreeSet<(String, SmellKind)> = BTreeSet::new();
        for v in &vectors {
            for smell in brute_force_smells(v) {
                expected.insert((v.qualified_name.clone(), smell));
            }
        }
        prop_assert_eq!(detected, expected);
    }

    #[test]
    fn smelly_intensity_lands_in_one_to_ten(vectors in arb_population()) {
        let config = ThresholdConfig::<f64>::default();
        let report = detect_smells("r1", &vectors, &config).unwrap();
        let dists = DistributionSet::from_vectors(&vectors);
        let by_class = report.by_class();
        for (class, instances) in &by_class {
            let ci = class_intensity(class, instances, &dists, IntensityConfig::default()).unwrap();
            prop_assert!(ci.value >= 1.0 && ci.value <= 10.0, "intensity {}", ci.value);
        }
        // classes without any instance score zero
        let empty = class_intensity("p.None", &[], &dists, IntensityConfig::default()).unwrap();
        prop_assert_eq!(empty.value, 0.0);
    }

    #[test]
    fn placement_is_bounded_and_monotone(
        values in proptest::collection::vec(0.0..100.0f64, 3..30),
        threshold in 10.0..90.0f64,
        bump in 0.0..20.0f64,
    ) {
        let dist = MetricDistribution::new(MetricId::Loc, values.clone()).unwrap();
        let base = threshold.max(dist.min()).min(dist.max());
        for mode in [PlacementMode::Linear, PlacementMode::RankPercentile] {
            let lower = exceeding_placement(base, threshold, Op::Ge, &dist, mode);
            let higher = exceeding_placement(base + bump, threshold, Op::Ge, &dist, mode);
            if let (Ok(lo), Ok(hi)) = (lower, higher) {
                prop_assert!((0.0..=1.0).contains(&lo));
                prop_assert!((0.0..=1.0).contains(&hi));
                prop_assert!(hi >= lo - 1e-12);
                let np = normalize_exceed(lo, NormalizationMode::Affine).unwrap();
                prop_assert!((1.0..=10.0).contains(&np));
                let nt = normalize_exceed(hi, NormalizationMode::TimesTen).unwrap();
                prop_assert!((0.0..=10.0).contains(&nt));
            }
        }
    }

    #[test]
    fn auc_survives_monotone_transforms(
        raw in proptest::collection::vec((0.0..1.0f64, any::<bool>()), 4..40),
    ) {
        let scores: Vec<f64> = raw.iter().map(|(s, _)| *s).collect();
        let mut labels: Vec<bool> = raw.iter().map(|(_, l)| *l).collect();
        labels[0] = true;
        let last = labels.len() - 1;
        labels[last] = false;
        let base: f64 = auc_roc(&scores, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&base));
        let warped: Vec<f64> = scores.iter().map(|s| (s * 3.0).exp() + 7.0).collect();
        let transformed: f64 = auc_roc(&warped, &labels).unwrap();
        prop_assert_eq!(base, transformed);
    }

    #[test]
    fn cliffs_delta_is_antisymmetric(
        a in proptest::collection::vec(-50.0..50.0f64, 1..20),
        b in proptest::collection::vec(-50.0..50.0f64, 1..20),
    ) {
        let ab: f64 = cliffs_delta(&a, &b).unwrap();
        let ba: f64 = cliffs_delta(&b, &a).unwrap();
        prop_assert_eq!(ab, -ba);
        prop_assert!((-1.0..=1.0).contains(&ab));
    }

    #[test]
    fn overlap_parts_always_sum_to_hundred(
        items in proptest::collection::btree_set(0u32..40, 1..25),
        mask_a in any::<u64>(),
        mask_b in any::<u64>(),
    ) {
        let universe: BTreeSet<String> = items.iter().map(|i| format!("c{i}")).collect();
        let pick = |mask: u64| -> BTreeSet<String> {
            items
                .iter()
                .enumerate()
                .filter(|(pos, _)| mask >> (pos % 64) & 1 == 1)
                .map(|(_, i)| format!("c{i}"))
                .collect()
        };
        let a = pick(mask_a);
        let b = pick(mask_b);
        let (both, only_a, only_b) = overlap_analysis(&a, &b, &universe).unwrap();
        for part in [both, only_a, only_b] {
            prop_assert!((0.0..=100.0).contains(&part));
        }
        if a.union(&b).next().is_some() {
            prop_assert!((both + only_a + only_b - 100.0).abs() < 1e-9);
        } else {
            prop_assert_eq!((both, only_a, only_b), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn confusion_metrics_stay_in_range(
        tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500,
    ) {
        let (p, r, f): (f64, f64, f64) = confusion_metrics(ConfusionCounts { tp, fp, tn, fn_ });
        for x in [p, r, f] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        if p > 0.0 && r > 0.0 {
            // harmonic mean sits between the minimum and the arithmetic mean
            prop_assert!(f >= p.min(r) - 1e-12);
            prop_assert!(f <= (p + r) / 2.0 + 1e-12);
        }
    }

    #[test]
    fn change_entropy_ignores_class_identity(
        counts in proptest::collection::vec(1u32..20, 2..10),
    ) {
        let commit = |class: String, churn: u32| Commit {
            id: format!("{class}-{churn}"),
            timestamp: Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap(),
            author: "dev".to_string(),
            touched: vec![(class, churn, 0)],
        };
        let forward = ChangeHistory {
            release: "r1".to_string(),
            commits: counts
                .iter()
                .enumerate()
                .map(|(i, c)| commit(format!("p.C{i}"), *c))
                .collect(),
        };
        let reversed = ChangeHistory {
            release: "r1".to_string(),
            commits: counts
                .iter()
                .rev()
                .enumerate()
                .map(|(i, c)| commit(format!("p.C{i}"), *c))
                .collect(),
        };
        let a: f64 = change_entropy(&forward);
        let b: f64 = change_entropy(&reversed);
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn labels_split_strictly_above_the_median(
        counts in proptest::collection::vec(0u64..30, 1..20),
    ) {
        let map: BTreeMap<String, u64> = counts
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("p.C{i}"), *c))
            .collect();
        let labels = label_change_proneness(&map).unwrap();
        let mut sorted: Vec<u64> = map.values().copied().collect();
        sorted.sort_unstable();
        let median = if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2] as f64
        } else {
            (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) as f64 / 2.0
        };
        for l in &labels {
            prop_assert_eq!(l.label, (l.change_count as f64) > median);
        }
        if sorted.iter().all(|c| *c == sorted[0]) {
            prop_assert!(labels.iter().all(|l| !l.label));
        }
    }

    #[test]
    fn rename_resolution_conserves_change_mass(
        steps in proptest::collection::vec((0usize..6, 1u32..50, 0u32..50, any::<bool>()), 1..30),
    ) {
        let mut records = Vec::new();
        for (i, (path, added, deleted, rename)) in steps.iter().enumerate() {
            records.push(LogRecord::change(
                &format!("c{i}"),
                Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, i as u32 % 60).unwrap(),
                "dev",
                &format!("src/F{path}.java"),
                *added,
                *deleted,
            ));
            if *rename {
                records.push(LogRecord::Rename {
                    old: format!("src/F{path}.java"),
                    new: format!("src/G{path}.java"),
                });
            }
        }
        let mass = |rs: &[LogRecord]| -> (u64, u64) {
            rs.iter().fold((0, 0), |(a, d), r| match r {
                LogRecord::Change { added, deleted, .. } => (a + *added as u64, d + *deleted as u64),
                LogRecord::Rename { .. } => (a, d),
            })
        };
        let before = mass(&records);
        let resolved = resolve_renames(records);
        prop_assert_eq!(before, mass(&resolved));
        let all_changes = resolved.iter().all(|r| matches!(r, LogRecord::Change { .. }));
        prop_assert!(all_changes);
    }

    #[test]
    fn metrics_table_round_trips(vectors in arb_population()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        write_metrics_table(&path, &vectors).unwrap();
        let loaded = load_metrics_table::<f64>(&path).unwrap();
        let all: Vec<EntityMetricVector<f64>> =
            loaded.into_values().flatten().collect();
        let key = |v: &EntityMetricVector<f64>| (v.kind, v.qualified_name.clone());
        let mut expected = vectors.clone();
        expected.sort_by_key(&key);
        let mut actual = all;
        actual.sort_by_key(&key);
        prop_assert_eq!(expected, actual);
    }

    #[test]
    fn dataset_cleaning_reaches_a_fixpoint(
        raw in proptest::collection::vec(
            (proptest::collection::vec(0u8..3, 3), any::<bool>()),
            2..12,
        ),
    ) {
        let d = Dataset {
            spec: ModelSpec::new(BaseModel::Sm, Augmentation::None),
            features: vec!["a".to_string(), "b".to_string(), "c".to_string()],
            rows: raw
                .iter()
                .enumerate()
                .map(|(i, (values, label))| FeatureRow {
                    release: "r1".to_string(),
                    class: format!("p.C{i}"),
                    values: values.iter().map(|v| *v as f64).collect(),
                    is_smelly: false,
                    label: *label,
                })
                .collect(),
            provenance: Vec::new(),
        };
        if let Ok(once) = clean_dataset(d) {
            let twice = clean_dataset(once.clone()).unwrap();
            prop_assert_eq!(once.features, twice.features);
            prop_assert_eq!(once.rows, twice.rows);
        }
    }

    #[test]
    fn vif_filter_output_is_stable(
        raw in proptest::collection::vec(proptest::collection::vec(0u8..5, 3), 10..16),
    ) {
        let d = Dataset {
            spec: ModelSpec::new(BaseModel::Sm, Augmentation::None),
            features: vec!["a".to_string(), "b".to_string(), "c".to_string()],
            rows: raw
                .iter()
                .enumerate()
                .map(|(i, values)| FeatureRow {
                    release: "r1".to_string(),
                    class: format!("p.C{i}"),
                    values: values.iter().map(|v| *v as f64).collect(),
                    is_smelly: false,
                    label: i % 2 == 0,
                })
                .collect(),
            provenance: Vec::new(),
        };
        let (once, _) = vif_filter(&d).unwrap();
        if once.features.len() >= 2 && once.rows.len() >= once.features.len() + 1 {
            let (twice, removed) = vif_filter(&once).unwrap();
            prop_assert!(removed.is_empty());
            prop_assert_eq!(once.features, twice.features);
        }
    }
}
