//! Exhaustive cross-validated search over forest hyperparameters.

use alloc::vec::Vec;

use rand::seq::index;

use crate::importance::forest::train_random_forest;
use crate::importance::tree::RfHyperparams;
use crate::linalg::Matrix;
use crate::regress::{fold_assignment, rmse, CvConfig};
use crate::rng::{derive_seed, task_rng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RfGrid {
    pub n_estimators: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub min_samples_split: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
    pub bootstrap: Vec<bool>,
}

impl RfGrid {
    /// n_estimators 50..=400 step 25, max_depth 3..=15 step 2,
    /// min_samples_split 2..=5, min_samples_leaf 1..=3, bootstrap both.
    pub fn paper() -> Self {
        RfGrid {
            n_estimators: (0..15).map(|k| 50 + 25 * k).collect(),
            max_depth: (0..7).map(|k| 3 + 2 * k).collect(),
            min_samples_split: alloc::vec![2, 3, 4, 5],
            min_samples_leaf: alloc::vec![1, 2, 3],
            bootstrap: alloc::vec![true, false],
        }
    }

    pub fn len(&self) -> usize {
        self.n_estimators.len()
            * self.max_depth.len()
            * self.min_samples_split.len()
            * self.min_samples_leaf.len()
            * self.bootstrap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All cells, n_estimators varying slowest.
    pub fn cells(&self) -> Vec<RfHyperparams> {
        let mut out = Vec::with_capacity(self.len());
        for &n_estimators in &self.n_estimators {
            for &d in &self.max_depth {
                for &min_samples_split in &self.min_samples_split {
                    for &min_samples_leaf in &self.min_samples_leaf {
                        for &bootstrap in &self.bootstrap {
                            out.push(RfHyperparams {
                                n_estimators,
                                max_depth: Some(d),
                                min_samples_split,
                                min_samples_leaf,
                                bootstrap,
                                max_features: None,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// `count` cells drawn without replacement, kept in grid order.
    pub fn sample_cells(&self, count: usize, seed: u64) -> Vec<RfHyperparams> {
        let cells = self.cells();
        if count >= cells.len() {
            return cells;
        }
        let mut pick = index::sample(&mut task_rng(seed, &[0x6121D]), cells.len(), count).into_vec();
        pick.sort_unstable();
        pick.into_iter().map(|i| cells[i]).collect()
    }
}

/// Stable code of a cell, used to derive its forest seeds.
fn cell_code(hp: &RfHyperparams) -> u64 {
    ((hp.n_estimators as u64) << 32)
        | ((hp.max_depth.map_or(0xFFFF, |d| d as u64) & 0xFFFF) << 16)
        | ((hp.min_samples_split as u64 & 0xFF) << 8)
        | ((hp.min_samples_leaf as u64 & 0x7F) << 1)
        | u64::from(hp.bootstrap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub hyperparams: RfHyperparams,
    pub mean_rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub cells: Vec<GridCell>,
    pub best: RfHyperparams,
    pub best_rmse: f64,
}

/// Mean k-fold RMSE of one cell on fixed folds.
pub fn evaluate_grid_cell(
    x: &Matrix,
    y: &[f64],
    hp: &RfHyperparams,
    folds: &[Vec<usize>],
    seed: u64,
) -> Result<f64> {
    let n = x.rows();
    let mut in_fold = alloc::vec![0usize; n];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            in_fold[i] = f;
        }
    }
    let mut total = 0.0;
    for (f, fold) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..n).filter(|&i| in_fold[i] != f).collect();
        let xt = x.select_rows(&train);
        let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let forest = train_random_forest(&xt, &yt, hp, derive_seed(seed, &[cell_code(hp), f as u64]))?;
        let pred = forest.predict(&x.select_rows(fold));
        let obs: Vec<f64> = fold.iter().map(|&i| y[i]).collect();
        total += rmse(&obs, &pred);
    }
    Ok(total / folds.len() as f64)
}

/// Evaluates every cell on the same seeded folds and returns the argmin;
/// ties go to fewer trees, then shallower depth.
pub fn grid_search_rf(x: &Matrix, y: &[f64], cells: &[RfHyperparams], cv: &CvConfig) -> Result<GridSearch> {
    if cells.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    let folds = fold_assignment(x.rows(), cv.k, cv.shuffle, cv.seed, "rf-grid")?;
    let mut out = Vec::with_capacity(cells.len());
    for hp in cells {
        out.push(GridCell {
            hyperparams: *hp,
            mean_rmse: evaluate_grid_cell(x, y, hp, &folds, cv.seed)?,
        });
    }
    let best = out
        .iter()
        .min_by(|a, b| {
            a.mean_rmse
                .total_cmp(&b.mean_rmse)
                .then(a.hyperparams.n_estimators.cmp(&b.hyperparams.n_estimators))
                .then(a.hyperparams.max_depth.cmp(&b.hyperparams.max_depth))
        })
        .copied()
        .expect("non-empty grid");
    Ok(GridSearch {
        cells: out,
        best: best.hyperparams,
        best_rmse: best.mean_rmse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn paper_grid_has_2520_cells() {
        let g = RfGrid::paper();
        assert_eq!(g.len(), 2520);
        assert_eq!(g.cells().len(), 2520);
        assert_eq!(*g.n_estimators.last().unwrap(), 400);
        assert_eq!(*g.max_depth.last().unwrap(), 15);
        let s = g.sample_cells(200, 1);
        assert_eq!(s.len(), 200);
    }

    #[test]
    fn cell_codes_are_distinct() {
        let mut codes: Vec<u64> = RfGrid::paper().cells().iter().map(cell_code).collect();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), 2520);
    }

    #[test]
    fn better_cell_wins() {
        // step response needs depth; a stump underfits the second step
        let mut rng = task_rng(3, &[]);
        let rows: Vec<[f64; 2]> = (0..60).map(|_| [rng.random(), rng.random()]).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| if r[0] < 0.33 { 0.0 } else if r[0] < 0.66 { 10.0 } else { 20.0 })
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let mk = |d| RfHyperparams {
            n_estimators: 5,
            max_depth: Some(d),
            bootstrap: false,
            ..RfHyperparams::default()
        };
        let cv = CvConfig {
            k: 5,
            ..CvConfig::default()
        };
        let r = grid_search_rf(&x, &y, &[mk(1), mk(3)], &cv).unwrap();
        assert_eq!(r.best.max_depth, Some(3));
    }

    #[test]
    fn infeasible_k() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let r = grid_search_rf(&x, &[1.0, 2.0, 3.0], &[RfHyperparams::default()], &CvConfig::default());
        assert!(matches!(r, Err(Error::FoldInfeasible { n: 3, k: 10 })));
    }
}
