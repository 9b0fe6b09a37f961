//! Partitioned k-fold cross-validation.
//!
//! Within a partition the records are shuffled with a generator seeded from
//! (master seed, partition label) and cut into k folds whose sizes differ by
//! at most one. Each fold's model is fitted on the other folds with a seed
//! derived from (master seed, partition label, fold index). A scheme's score
//! is the unweighted mean over partitions of the mean fold RMSE.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::data::{filter_small_partitions, partition, PartitionKey, PartitionScheme, RecordSet};
use crate::featurize::{FeatureVector, Featurizer};
use crate::regress::family::PredictorSpec;
use crate::regress::model::{fit, rmse, FitNotes};
use crate::rng::{derive_seed, label_hash, task_rng, DEFAULT_SEED};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 10,
            seed: DEFAULT_SEED,
            shuffle: true,
        }
    }
}

/// Splits `0..n` into `k` folds (first `n % k` folds one larger).
pub fn fold_assignment(n: usize, k: usize, shuffle: bool, seed: u64, label: &str) -> Result<Vec<Vec<usize>>> {
    if k < 2 || n < k {
        return Err(Error::FoldInfeasible { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if shuffle {
        idx.shuffle(&mut task_rng(seed, &[label_hash(label), 0]));
    }
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// Per-fold held-out RMSE of `spec` on `rows`.
pub fn kfold_rmse(
    rows: &[FeatureVector],
    spec: &PredictorSpec,
    cfg: &CvConfig,
    label: &str,
) -> Result<Vec<f64>> {
    kfold_detail(rows, spec, cfg, label).map(|(r, _)| r)
}

fn kfold_detail(
    rows: &[FeatureVector],
    spec: &PredictorSpec,
    cfg: &CvConfig,
    label: &str,
) -> Result<(Vec<f64>, FitNotes)> {
    let folds = fold_assignment(rows.len(), cfg.k, cfg.shuffle, cfg.seed, label)?;
    let mut held_out = alloc::vec![usize::MAX; rows.len()];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            held_out[i] = f;
        }
    }
    let mut notes = FitNotes::default();
    let mut out = Vec::with_capacity(folds.len());
    for (f, fold) in folds.iter().enumerate() {
        let train: Vec<FeatureVector> = rows
            .iter()
            .zip(&held_out)
            .filter(|(_, &h)| h != f)
            .map(|(r, _)| r.clone())
            .collect();
        let test: Vec<FeatureVector> = fold.iter().map(|&i| rows[i].clone()).collect();
        let model = fit(spec, &train, derive_seed(cfg.seed, &[label_hash(label), f as u64 + 1]))?;
        notes.merge(model.notes);
        let pred = model.predict(&test)?;
        let obs: Vec<f64> = test.iter().map(|r| r.response).collect();
        out.push(rmse(&obs, &pred));
    }
    Ok((out, notes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCv {
    pub key: PartitionKey,
    pub n: usize,
    /// Folds actually used (lowered to `n` for small partitions).
    pub k: usize,
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
    pub notes: FitNotes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPartition {
    pub key: PartitionKey,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub scheme: PartitionScheme,
    pub spec: PredictorSpec,
    pub cv: CvConfig,
    pub partitions: Vec<PartitionCv>,
    /// Partitions below the minimum size, with their sizes.
    pub removed_small: Vec<(PartitionKey, usize)>,
    /// Partitions whose evaluation failed.
    pub skipped: Vec<SkippedPartition>,
    pub weighted: bool,
    pub overall_rmse: f64,
}

impl CvReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        for (key, n) in &self.removed_small {
            w.push(format!("partition {key} ({n} records) below minimum size, removed"));
        }
        for p in &self.partitions {
            if p.k < self.cv.k {
                w.push(format!("partition {}: k lowered from {} to {}", p.key, self.cv.k, p.k));
            }
            if p.notes.rank_deficient {
                w.push(format!("partition {}: rank-deficient design", p.key));
            }
            if p.notes.unconverged {
                w.push(format!("partition {}: scaling-law fit hit the iteration cap", p.key));
            }
            if p.notes.floored_values > 0 {
                w.push(format!(
                    "partition {}: {} feature values floored at 1e-6",
                    p.key, p.notes.floored_values
                ));
            }
        }
        for s in &self.skipped {
            w.push(format!("partition {} ({} records) not assessable: {}", s.key, s.n, s.reason));
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub cv: CvConfig,
    pub min_partition: usize,
    /// Weight partition means by record count instead of equally.
    pub weighted: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            cv: CvConfig::default(),
            min_partition: crate::data::DEFAULT_MIN_PARTITION,
            weighted: false,
        }
    }
}

/// Cross-validates `spec` on every partition of `scheme`.
pub fn evaluate_scheme(
    records: &RecordSet,
    scheme: PartitionScheme,
    spec: &PredictorSpec,
    featurizer: &Featurizer,
    opts: &EvalOptions,
) -> Result<CvReport> {
    if records.is_empty() {
        return Err(Error::EmptyAnalysis {
            reason: "no records".into(),
        });
    }
    let featurizer = featurizer.with_features(spec.features());
    let filtered = filter_small_partitions(partition(records, scheme), opts.min_partition)?;
    let mut partitions = Vec::new();
    let mut skipped = Vec::new();
    for part in &filtered.kept {
        let rows = featurizer.featurize_all(&part.records)?;
        let n = rows.len();
        let k = opts.cv.k.min(n);
        if k < 2 {
            skipped.push(SkippedPartition {
                key: part.key,
                n,
                reason: format!("{n} records cannot be split into folds"),
            });
            continue;
        }
        let cfg = CvConfig { k, ..opts.cv };
        match kfold_detail(&rows, spec, &cfg, &part.key.label()) {
            Ok((fold_rmse, notes)) => {
                let mean_rmse = fold_rmse.iter().sum::<f64>() / fold_rmse.len() as f64;
                partitions.push(PartitionCv {
                    key: part.key,
                    n,
                    k,
                    fold_rmse,
                    mean_rmse,
                    notes,
                });
            }
            Err(e) => skipped.push(SkippedPartition {
                key: part.key,
                n,
                reason: format!("{e}"),
            }),
        }
    }
    if partitions.is_empty() {
        return Err(Error::EmptyAnalysis {
            reason: format!("no partition of {scheme} could be evaluated"),
        });
    }
    let overall_rmse = if opts.weighted {
        let total: usize = partitions.iter().map(|p| p.n).sum();
        partitions.iter().map(|p| p.mean_rmse * p.n as f64).sum::<f64>() / total as f64
    } else {
        partitions.iter().map(|p| p.mean_rmse).sum::<f64>() / partitions.len() as f64
    };
    Ok(CvReport {
        scheme,
        spec: *spec,
        cv: opts.cv,
        partitions,
        removed_small: filtered.removed,
        skipped,
        weighted: opts.weighted,
        overall_rmse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Corpus, ExperimentRecord, Lang};
    use crate::featurize::{FeatureSet, SizeScaling};
    use crate::regress::family::PredictorFamily;
    use alloc::vec;

    #[test]
    fn folds_are_near_equal_cover() {
        let folds = fold_assignment(23, 10, true, 7, "x").unwrap();
        assert_eq!(folds.len(), 10);
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        let folds = fold_assignment(20, 10, true, 7, "x").unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
    }

    #[test]
    fn infeasible_folds() {
        assert_eq!(
            fold_assignment(5, 10, true, 0, "x"),
            Err(Error::FoldInfeasible { n: 5, k: 10 })
        );
        assert!(fold_assignment(5, 1, true, 0, "x").is_err());
    }

    fn constant_rows(n: usize) -> Vec<FeatureVector> {
        (0..n)
            .map(|i| FeatureVector::new(FeatureSet::SIZE, vec![(i % 4) as f64 / 4.0 + 0.1], 5.0).unwrap())
            .collect()
    }

    #[test]
    fn constant_response_has_zero_error() {
        let spec = PredictorSpec::new(PredictorFamily::Linear, FeatureSet::SIZE).unwrap();
        let r = kfold_rmse(&constant_rows(20), &spec, &CvConfig::default(), "p").unwrap();
        assert_eq!(r.len(), 10);
        assert!(r.iter().all(|&e| e.abs() < 1e-9));
    }

    #[test]
    fn single_partition_constant_records() {
        let sizes = [1000, 10000, 25000, 50000];
        let recs: Vec<ExperimentRecord> = (0..20)
            .map(|i| {
                ExperimentRecord::new(
                    if i % 2 == 0 { Corpus::Gov } else { Corpus::Bible },
                    sizes[i % 4],
                    [Corpus::Gov, Corpus::Bible, Corpus::Flores][i % 3],
                    Lang::ALL[i % 5],
                    12.5,
                    None,
                )
                .unwrap()
            })
            .collect();
        let set = RecordSet::new(recs).unwrap();
        let fz = Featurizer::new(&set, FeatureSet::SIZE, None, SizeScaling::Max).unwrap();
        let spec = PredictorSpec::new(PredictorFamily::Poly2, FeatureSet::SIZE).unwrap();
        let rep = evaluate_scheme(&set, PartitionScheme::None, &spec, &fz, &EvalOptions::default()).unwrap();
        assert_eq!(rep.partitions.len(), 1);
        assert!(rep.overall_rmse.abs() < 1e-9);
    }
}
