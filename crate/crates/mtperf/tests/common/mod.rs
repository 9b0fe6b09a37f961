//! Seeded synthetic experiments with every feature available.

#![allow(dead_code)]

use mtperf_core::data::{Corpus, DistanceKind, Lang};
use mtperf_core::featurize::{FeatureSet, FeatureVector};
use mtperf_core::rng::task_rng;
use rand::Rng;

pub struct Synthetic {
    pub rows: Vec<FeatureVector>,
    /// Records file with a `jsd` column; spBLEU is clamped to [0, 100].
    pub csv: String,
}

/// `n` draws of y = intercept + wj * j + ws * s + N(0, sigma^2) with
/// j ~ U(0, 1), sizes ~ U{1..100000} and s = size / max size. Language
/// distances come from the bundled profiles.
pub fn synthetic(n: usize, seed: u64, intercept: f64, wj: f64, ws: f64, sigma: f64) -> Synthetic {
    let profiles = mtperf::io::bundled_profiles();
    let mut rng = task_rng(seed, &[0x5717]);
    let mut seen = std::collections::BTreeSet::new();
    let mut draws = Vec::with_capacity(n);
    while draws.len() < n {
        let ft = [Corpus::Bible, Corpus::Gov][rng.random_range(0..2)];
        let test = [Corpus::Bible, Corpus::Flores, Corpus::Gov][rng.random_range(0..3)];
        let lang = Lang::ALL[rng.random_range(0..5)];
        let size: u32 = rng.random_range(1..=100_000);
        if !seen.insert((ft, size, test, lang)) {
            continue;
        }
        let j: f64 = rng.random_range(0.0..1.0);
        // Box-Muller
        let (u1, u2): (f64, f64) = (rng.random_range(f64::EPSILON..1.0), rng.random_range(0.0..1.0));
        let eps = sigma * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        draws.push((ft, size, test, lang, j, eps));
    }
    let max = draws.iter().map(|d| d.1).max().unwrap() as f64;
    let mut rows = Vec::with_capacity(n);
    let mut csv = String::from("finetune_corpus,finetune_size,test_corpus,target_lang,spbleu,jsd\n");
    for (ft, size, test, lang, j, eps) in draws {
        let s = size as f64 / max;
        let y = intercept + wj * j + ws * s + eps;
        let p = profiles.get(lang).unwrap();
        let mut values = vec![s, j];
        values.extend(DistanceKind::ALL.iter().map(|&k| p.distance(k)));
        rows.push(FeatureVector::new(FeatureSet::ALL, values, y).unwrap());
        csv.push_str(&format!("{ft},{size},{test},{lang},{:.4},{j:.6}\n", y.clamp(0.0, 100.0)));
    }
    Synthetic { rows, csv }
}
