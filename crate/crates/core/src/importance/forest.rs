use alloc::vec::Vec;

use rand::Rng;

use crate::importance::tree::{fit_tree_on, RegressionTree, RfHyperparams};
use crate::linalg::Matrix;
use crate::rng::task_rng;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<RegressionTree>,
    hyperparams: RfHyperparams,
    seed: u64,
}

/// Trains `n_estimators` trees; tree `t` draws its bootstrap sample and
/// feature subsets from a generator derived from `(seed, t)`.
pub fn train_random_forest(x: &Matrix, y: &[f64], hp: &RfHyperparams, seed: u64) -> Result<RandomForest> {
    hp.validate()?;
    let n = x.rows();
    let all: Vec<usize> = (0..n).collect();
    let mut trees = Vec::with_capacity(hp.n_estimators);
    for t in 0..hp.n_estimators {
        let mut rng = task_rng(seed, &[t as u64]);
        let tree = if hp.bootstrap {
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n.max(1))).collect();
            fit_tree_on(x, y, &sample, hp, Some(&mut rng))?
        } else {
            fit_tree_on(x, y, &all, hp, Some(&mut rng))?
        };
        trees.push(tree);
    }
    Ok(RandomForest {
        trees,
        hyperparams: *hp,
        seed,
    })
}

impl RandomForest {
    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn hyperparams(&self) -> &RfHyperparams {
        &self.hyperparams
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|r| self.predict_row(x.row(r))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdiImportance {
    /// Percent per feature column, summing to 100 unless `all_zero`.
    pub percent: Vec<f64>,
    /// No tree split at all (e.g. constant response).
    pub all_zero: bool,
}

/// Mean decrease in impurity: per feature, the sum over trees of the split
/// gains divided by the tree's root sample count, normalized to 100.
pub fn mdi_importance(forest: &RandomForest) -> MdiImportance {
    let p = forest.trees.first().map_or(0, RegressionTree::n_features);
    let mut acc = alloc::vec![0.0; p];
    for t in &forest.trees {
        let n = t.root_samples() as f64;
        for (a, g) in acc.iter_mut().zip(t.feature_gains()) {
            *a += g / n;
        }
    }
    let total: f64 = acc.iter().sum();
    if total > 0.0 {
        MdiImportance {
            percent: acc.iter().map(|v| 100.0 * v / total).collect(),
            all_zero: false,
        }
    } else {
        MdiImportance {
            percent: alloc::vec![0.0; p],
            all_zero: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::importance::tree::fit_tree;

    fn data(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = task_rng(seed, &[]);
        let rows: Vec<[f64; 3]> = (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        let y = rows.iter().map(|r| 10.0 * r[0] * r[0] + rng.random::<f64>() * 0.1).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn single_tree_forest_equals_tree() {
        let (x, y) = data(60, 1);
        let hp = RfHyperparams {
            n_estimators: 1,
            bootstrap: false,
            max_depth: Some(4),
            ..RfHyperparams::default()
        };
        let f = train_random_forest(&x, &y, &hp, 3).unwrap();
        let t = fit_tree(&x, &y, &hp, None).unwrap();
        assert_eq!(f.predict(&x), t.predict(&x));
    }

    #[test]
    fn no_bootstrap_trees_identical() {
        let (x, y) = data(40, 2);
        let hp = RfHyperparams {
            n_estimators: 4,
            bootstrap: false,
            ..RfHyperparams::default()
        };
        let f = train_random_forest(&x, &y, &hp, 3).unwrap();
        assert!(f.trees().windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn seeded_forest_is_reproducible() {
        let (x, y) = data(50, 4);
        let hp = RfHyperparams {
            n_estimators: 10,
            ..RfHyperparams::default()
        };
        let a = train_random_forest(&x, &y, &hp, 9).unwrap();
        let b = train_random_forest(&x, &y, &hp, 9).unwrap();
        assert_eq!(a.predict(&x), b.predict(&x));
    }

    #[test]
    fn informative_feature_dominates() {
        let (x, y) = data(200, 5);
        let hp = RfHyperparams {
            n_estimators: 30,
            ..RfHyperparams::default()
        };
        let m = mdi_importance(&train_random_forest(&x, &y, &hp, 1).unwrap());
        assert!(m.percent[0] > 80.0, "{:?}", m.percent);
        assert!((m.percent.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn constant_response_flagged() {
        let (x, _) = data(30, 6);
        let f = train_random_forest(&x, &[2.0; 30], &RfHyperparams::default(), 1).unwrap();
        let m = mdi_importance(&f);
        assert!(m.all_zero && m.percent.iter().all(|&v| v == 0.0));
    }
}
