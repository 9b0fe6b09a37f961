use alloc::vec::Vec;

use crate::featurize::{Feature, FeatureSet, FeatureVector};
use crate::importance::correlation::{competition_ranks, Rank};
use crate::linalg::{lstsq, Matrix};
use crate::{Error, Result};

/// Min-max scales each column to `[0, 1]`; constant columns become 0.
/// Returns the scaled rows and the indices of constant columns.
pub fn minmax_columns(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>) {
    let Some(first) = rows.first() else {
        return (Vec::new(), Vec::new());
    };
    let p = first.len();
    let mut lo = alloc::vec![f64::INFINITY; p];
    let mut hi = alloc::vec![f64::NEG_INFINITY; p];
    for r in rows {
        for c in 0..p {
            lo[c] = lo[c].min(r[c]);
            hi[c] = hi[c].max(r[c]);
        }
    }
    let constant: Vec<usize> = (0..p).filter(|&c| hi[c] <= lo[c]).collect();
    let scaled = rows
        .iter()
        .map(|r| {
            (0..p)
                .map(|c| if hi[c] > lo[c] { (r[c] - lo[c]) / (hi[c] - lo[c]) } else { 0.0 })
                .collect()
        })
        .collect();
    (scaled, constant)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightEntry {
    pub feature: Feature,
    pub weight: f64,
    pub rank: Rank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightAnalysis {
    pub intercept: f64,
    /// Ordered by |weight|.
    pub entries: Vec<WeightEntry>,
    pub rank_deficient: bool,
    pub constant_features: Vec<Feature>,
    /// Fewer than all eight features were available.
    pub partial: bool,
}

impl WeightAnalysis {
    pub fn weight(&self, f: Feature) -> Option<f64> {
        self.entries.iter().find(|e| e.feature == f).map(|e| e.weight)
    }
}

/// Linear regression of the response on min-max normalized features;
/// features are ranked by the magnitude of their weight.
pub fn multifactor_weights(rows: &[FeatureVector]) -> Result<WeightAnalysis> {
    let Some(first) = rows.first() else {
        return Err(Error::EmptyAnalysis {
            reason: "no feature vectors".into(),
        });
    };
    let fs = first.feature_set();
    let features = fs.features();
    let p = features.len();
    if rows.len() <= p + 1 {
        return Err(Error::Underdetermined {
            rows: rows.len(),
            cols: p + 1,
        });
    }
    let raw: Vec<Vec<f64>> = rows.iter().map(|r| r.values().to_vec()).collect();
    let (scaled, constant) = minmax_columns(&raw);
    let design: Vec<Vec<f64>> = scaled
        .iter()
        .map(|r| {
            let mut row = Vec::with_capacity(p + 1);
            row.push(1.0);
            row.extend_from_slice(r);
            row
        })
        .collect();
    let y: Vec<f64> = rows.iter().map(|r| r.response).collect();
    let sol = lstsq(&Matrix::from_rows(&design)?, &y)?;
    let weights = &sol.coefficients[1..];
    let scores: Vec<f64> = weights.iter().map(|w| libm::fabs(*w)).collect();
    let names: Vec<&str> = features.iter().map(|f| f.name()).collect();
    let (ranks, order) = competition_ranks(&scores, &names);
    Ok(WeightAnalysis {
        intercept: sol.coefficients[0],
        entries: order
            .into_iter()
            .map(|i| WeightEntry {
                feature: features[i],
                weight: weights[i],
                rank: ranks[i],
            })
            .collect(),
        rank_deficient: sol.rank_deficient,
        constant_features: constant.into_iter().map(|c| features[c]).collect(),
        partial: fs != FeatureSet::ALL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rows(f: impl Fn(f64, f64) -> f64) -> Vec<FeatureVector> {
        let fs = FeatureSet::SIZE.union(FeatureSet::JSD);
        (0..30)
            .map(|i| {
                let s = (i % 5) as f64 / 4.0;
                let j = ((i * 7) % 11) as f64 / 10.0;
                FeatureVector::new(fs, vec![s, j], f(s, j)).unwrap()
            })
            .collect()
    }

    #[test]
    fn exact_weights_on_unit_ranges() {
        let a = multifactor_weights(&rows(|s, j| 50.0 - 70.0 * j + 20.0 * s)).unwrap();
        assert!((a.weight(Feature::Jsd).unwrap() + 70.0).abs() < 1e-9);
        assert!((a.weight(Feature::Size).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(a.entries[0].feature, Feature::Jsd);
        assert!(a.partial);
    }

    #[test]
    fn constant_response() {
        let a = multifactor_weights(&rows(|_, _| 7.0)).unwrap();
        assert!((a.intercept - 7.0).abs() < 1e-9);
        assert!(a.entries.iter().all(|e| e.weight.abs() < 1e-9));
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let fs = FeatureSet::SIZE.union(FeatureSet::JSD);
        let data: Vec<_> = (0..20)
            .map(|i| {
                let x = i as f64 / 19.0;
                FeatureVector::new(fs, vec![x, x], 3.0 * x).unwrap()
            })
            .collect();
        let a = multifactor_weights(&data).unwrap();
        assert!(a.rank_deficient);
        assert!((a.weight(Feature::Size).unwrap() - 1.5).abs() < 1e-9);
        assert!((a.weight(Feature::Jsd).unwrap() - 1.5).abs() < 1e-9);
        assert!(a.entries[0].rank.tied);
    }
}
