use std::collections::{BTreeSet, HashSet};

use mtperf_core::data::{partition, Corpus, ExperimentRecord, Lang, PartitionScheme, RecordSet};
use mtperf_core::diagnostics::{breusch_pagan, dagostino_pearson};
use mtperf_core::featurize::{frequency_distribution, jsd, tokenize_and_normalize, FeatureSet, FeatureVector, SizeScaler, SizeScaling};
use mtperf_core::importance::{fit_tree, mdi_importance, pearson, train_random_forest, RfHyperparams};
use mtperf_core::linalg::Matrix;
use mtperf_core::regress::{fit, PredictorFamily, PredictorSpec};
use mtperf_core::special::chi2_sf;
use proptest::prelude::*;

const SIZES: [u32; 4] = [1000, 10000, 25000, 50000];

fn record_set() -> impl Strategy<Value = RecordSet> {
    // every (finetune, size, test, lang) cell at most once
    proptest::collection::btree_set((0usize..2, 0usize..4, 0usize..3, 0usize..5), 1..60).prop_flat_map(|cells| {
        let n = cells.len();
        (Just(cells), proptest::collection::vec(0.0f64..60.0, n))
    })
    .prop_map(|(cells, scores)| {
        let recs = cells
            .into_iter()
            .zip(scores)
            .map(|((f, s, t, l), y)| {
                ExperimentRecord::new(
                    [Corpus::Bible, Corpus::Gov][f],
                    SIZES[s],
                    [Corpus::Bible, Corpus::Flores, Corpus::Gov][t],
                    Lang::ALL[l],
                    y,
                    None,
                )
                .unwrap()
            })
            .collect();
        RecordSet::new(recs).unwrap()
    })
}

fn tokens() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec("[a-e]{1,2}", 1..40)
}

proptest! {
    #[test]
    fn partitions_are_a_disjoint_cover(set in record_set()) {
        for scheme in PartitionScheme::ALL {
            let parts = partition(&set, scheme);
            let total: usize = parts.iter().map(|p| p.len()).sum();
            prop_assert_eq!(total, set.len());
            let keys: HashSet<_> = parts.iter().flat_map(|p| p.records.iter().map(|r| r.key())).collect();
            prop_assert_eq!(keys.len(), set.len());
            for p in &parts {
                prop_assert!(p.records.iter().all(|r| scheme.key_of(r) == p.key));
            }
        }
    }

    #[test]
    fn jsd_symmetric_and_bounded(a in tokens(), b in tokens()) {
        let p = frequency_distribution(&a).unwrap();
        let q = frequency_distribution(&b).unwrap();
        let (pq, qp) = (jsd(&p, &q), jsd(&q, &p));
        prop_assert!((pq - qp).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!(jsd(&p, &p).abs() < 1e-12);
    }

    #[test]
    fn size_scaling_is_monotone(mut sizes in proptest::collection::vec(1u32..1_000_000, 2..20), minmax in any::<bool>()) {
        sizes.sort_unstable();
        prop_assume!(sizes[0] != sizes[sizes.len() - 1]);
        let mode = if minmax { SizeScaling::MinMax } else { SizeScaling::Max };
        let sc = SizeScaler::fit(&sizes, mode).unwrap();
        let v: Vec<f64> = sizes.iter().map(|&s| sc.apply(s)).collect();
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert_eq!(*v.last().unwrap(), 1.0);
    }

    #[test]
    fn tokenizer_is_idempotent(text in "[ a-zA-Z0-9:,.+\\-!?<>]{0,60}") {
        let none = BTreeSet::new();
        let once = tokenize_and_normalize(&text, &none);
        prop_assert_eq!(tokenize_and_normalize(&once.join(" "), &none), once);
    }

    #[test]
    fn pearson_affine_invariant(
        xy in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
        a in 0.01f64..50.0, b in -50.0f64..50.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let base = match pearson(&x, &y) { Ok(c) => c, Err(_) => return Ok(()) };
        let xt: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let c = pearson(&xt, &y).unwrap();
        prop_assert!((c.r - base.r).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&c.r));
    }

    #[test]
    fn dagostino_location_scale_invariant(
        x in proptest::collection::vec(-10.0f64..10.0, 8..80),
        a in 0.1f64..10.0, b in -100.0f64..100.0,
    ) {
        let base = match dagostino_pearson(&x) { Ok(t) => t, Err(_) => return Ok(()) };
        let xt: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let t = dagostino_pearson(&xt).unwrap();
        prop_assert!((t.k2 - base.k2).abs() < 1e-9 * base.k2.max(1.0));
        prop_assert!((t.p - base.p).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&t.p));
    }

    #[test]
    fn chi2_tail_is_monotone(x in 0.0f64..60.0, dx in 0.0f64..10.0, k in 1u32..12) {
        let (a, b) = (chi2_sf(x, k as f64), chi2_sf(x + dx, k as f64));
        prop_assert!(b <= a + 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn breusch_pagan_lm_nonnegative(r in proptest::collection::vec((-5.0f64..5.0, 0.0f64..30.0), 5..60)) {
        let (res, fitted): (Vec<f64>, Vec<f64>) = r.into_iter().unzip();
        if let Ok(t) = breusch_pagan(&res, &fitted) {
            prop_assert!(t.lm >= 0.0);
            prop_assert!((0.0..=1.0).contains(&t.p));
            prop_assert_eq!(t.homoscedastic(), t.p >= 0.05);
        }
    }

    #[test]
    fn ols_residuals_sum_to_zero(pts in proptest::collection::vec((0.01f64..1.0, 0.0f64..60.0), 6..40)) {
        let rows: Vec<FeatureVector> = pts
            .iter()
            .map(|&(s, y)| FeatureVector::new(FeatureSet::SIZE, vec![s], y).unwrap())
            .collect();
        let spec = PredictorSpec::new(PredictorFamily::Poly2, FeatureSet::SIZE).unwrap();
        let m = fit(&spec, &rows, 0).unwrap();
        let pred = m.predict(&rows).unwrap();
        let sum: f64 = rows.iter().zip(&pred).map(|(r, p)| r.response - p).sum();
        prop_assert!(sum.abs() < 1e-8, "sum {}", sum);
    }

    #[test]
    fn mdi_is_a_distribution(data in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, -3.0f64..3.0), 4..40), seed in any::<u64>()) {
        let x = Matrix::from_rows(&data.iter().map(|r| [r.0, r.1]).collect::<Vec<_>>()).unwrap();
        let y: Vec<f64> = data.iter().map(|r| r.2).collect();
        let hp = RfHyperparams { n_estimators: 5, max_depth: Some(4), ..RfHyperparams::default() };
        let m = mdi_importance(&train_random_forest(&x, &y, &hp, seed).unwrap());
        prop_assert!(m.percent.iter().all(|&v| v >= 0.0));
        if !m.all_zero {
            prop_assert!((m.percent.iter().sum::<f64>() - 100.0).abs() < 0.01);
        }
    }

    // Greedy trees can get deeper when leaves grow (a larger leaf bars the
    // split that would have isolated a point early), so depth is checked
    // against the bound a leaf size imposes: a path of depth d holds at
    // least (d + 1) * leaf rows.
    #[test]
    fn leaf_size_bounds_depth(data in proptest::collection::vec((0.0f64..1.0, -3.0f64..3.0), 2..50), leaf in 1usize..6) {
        let x = Matrix::from_rows(&data.iter().map(|r| [r.0]).collect::<Vec<_>>()).unwrap();
        let y: Vec<f64> = data.iter().map(|r| r.1).collect();
        let hp = RfHyperparams { n_estimators: 1, bootstrap: false, min_samples_leaf: leaf, ..RfHyperparams::default() };
        let t = fit_tree(&x, &y, &hp, None).unwrap();
        prop_assert!((t.depth() + 1) * leaf <= data.len().max(leaf));
        if t.nodes().len() > 1 {
            prop_assert!(t.leaf_sizes().iter().all(|&s| s >= leaf));
        }
    }
}
