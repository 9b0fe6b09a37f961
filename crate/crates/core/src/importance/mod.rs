//! Feature rankings: Pearson correlation, multifactor linear weights and
//! random-forest impurity importance.

mod correlation;
mod forest;
mod grid;
mod tree;
mod weights;

use alloc::string::String;
use alloc::vec::Vec;

pub use correlation::{competition_ranks, pearson, rank_by_correlation, Correlation, CorrelationEntry, Rank};
pub use forest::{mdi_importance, train_random_forest, MdiImportance, RandomForest};
pub use grid::{evaluate_grid_cell, grid_search_rf, GridCell, GridSearch, RfGrid};
pub use tree::{fit_tree, fit_tree_on, Node, RegressionTree, RfHyperparams};
pub use weights::{minmax_columns, multifactor_weights, WeightAnalysis, WeightEntry};

use crate::featurize::{Feature, FeatureVector};
use crate::linalg::Matrix;
use crate::regress::CvConfig;
use crate::rng::DEFAULT_SEED;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRow {
    pub feature: Feature,
    pub pearson_r: f64,
    pub pearson_p: f64,
    pub pearson_rank: Rank,
    pub linear_weight: f64,
    pub weight_rank: Rank,
    pub rf_percent: f64,
    pub rf_rank: Rank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    /// Canonical feature order.
    pub rows: Vec<ImportanceRow>,
    pub intercept: f64,
    pub n: usize,
    /// Some of the eight features (typically JSD) were unavailable.
    pub partial: bool,
    pub rank_deficient: bool,
    pub mdi_all_zero: bool,
    pub forest: RfHyperparams,
    pub grid: Option<GridSearch>,
    pub notes: Vec<String>,
}

impl ImportanceReport {
    pub fn row(&self, f: Feature) -> Option<&ImportanceRow> {
        self.rows.iter().find(|r| r.feature == f)
    }

    /// Features in order of the given rank column.
    pub fn ranked_by(&self, key: impl Fn(&ImportanceRow) -> Rank) -> Vec<Feature> {
        let mut v: Vec<&ImportanceRow> = self.rows.iter().collect();
        v.sort_by_key(|r| (key(r).position, r.feature.name()));
        v.into_iter().map(|r| r.feature).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceOptions {
    pub forest: RfHyperparams,
    /// Cells to search; the winner replaces `forest`.
    pub grid: Option<Vec<RfHyperparams>>,
    pub cv: CvConfig,
    pub seed: u64,
}

impl Default for ImportanceOptions {
    fn default() -> Self {
        ImportanceOptions {
            forest: RfHyperparams::default(),
            grid: None,
            cv: CvConfig::default(),
            seed: DEFAULT_SEED,
        }
    }
}

/// Runs the three rankings over the features carried by `rows`.
pub fn importance_report(rows: &[FeatureVector], opts: &ImportanceOptions) -> Result<ImportanceReport> {
    let corr = rank_by_correlation(rows)?;
    let weights = multifactor_weights(rows)?;
    let features = rows[0].feature_set().features();
    let x = Matrix::from_rows(&rows.iter().map(|r| r.values().to_vec()).collect::<Vec<_>>())?;
    let y: Vec<f64> = rows.iter().map(|r| r.response).collect();

    let mut notes = Vec::new();
    let grid = match &opts.grid {
        Some(cells) => Some(grid_search_rf(&x, &y, cells, &opts.cv)?),
        None => None,
    };
    let hp = grid.as_ref().map_or(opts.forest, |g| g.best);
    let mdi = mdi_importance(&train_random_forest(&x, &y, &hp, opts.seed)?);
    if mdi.all_zero {
        notes.push("random forest made no splits; importances are all zero".into());
    }
    if weights.rank_deficient {
        notes.push("multifactor design is rank-deficient; weights are minimum-norm".into());
    }
    if weights.partial {
        notes.push("jsd unavailable; partial analysis over the available features".into());
    }

    let names: Vec<&str> = features.iter().map(|f| f.name()).collect();
    let (rf_ranks, _) = competition_ranks(&mdi.percent, &names);
    let out_rows = features
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let c = corr.iter().find(|e| e.feature == f).expect("feature ranked");
            let w = weights.entries.iter().find(|e| e.feature == f).expect("feature weighted");
            ImportanceRow {
                feature: f,
                pearson_r: c.correlation.r,
                pearson_p: c.correlation.p,
                pearson_rank: c.rank,
                linear_weight: w.weight,
                weight_rank: w.rank,
                rf_percent: mdi.percent[i],
                rf_rank: rf_ranks[i],
            }
        })
        .collect();
    Ok(ImportanceReport {
        rows: out_rows,
        intercept: weights.intercept,
        n: rows.len(),
        partial: weights.partial,
        rank_deficient: weights.rank_deficient,
        mdi_all_zero: mdi.all_zero,
        forest: hp,
        grid,
        notes,
    })
}
