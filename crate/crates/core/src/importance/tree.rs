//! CART regression trees.
//!
//! Splits minimize the summed squared error of the two children. Candidate
//! thresholds are midpoints between consecutive distinct sorted values and
//! a row goes left when its value is `<=` the threshold. Among equally good
//! splits the first found wins (features in column order, thresholds
//! ascending).

use alloc::vec::Vec;

use rand::seq::index;

use crate::linalg::Matrix;
use crate::rng::TaskRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RfHyperparams {
    pub n_estimators: usize,
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    /// Features drawn per split; `None` considers all of them.
    pub max_features: Option<usize>,
}

impl Default for RfHyperparams {
    fn default() -> Self {
        RfHyperparams {
            n_estimators: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            bootstrap: true,
            max_features: None,
        }
    }
}

impl RfHyperparams {
    /// Forest used for ranking when no grid search is requested: 100 trees
    /// of depth at most 9 with leaves of at least 2 rows.
    pub const RANKING: RfHyperparams = RfHyperparams {
        n_estimators: 100,
        max_depth: Some(9),
        min_samples_split: 2,
        min_samples_leaf: 2,
        bootstrap: true,
        max_features: None,
    };

    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::InvalidArgument("n_estimators must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidArgument("min_samples_split must be at least 2".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidArgument("min_samples_leaf must be at least 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::InvalidArgument("max_features must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        samples: usize,
        /// Parent SSE minus the children's SSE.
        gain: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    n_features: usize,
    root_samples: usize,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn root_samples(&self) -> usize {
        self.root_samples
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|r| self.predict_row(x.row(r))).collect()
    }

    /// Length of the longest root-to-leaf path in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_sizes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { samples, .. } => Some(*samples),
                Node::Split { .. } => None,
            })
            .collect()
    }

    /// Summed split gain per feature.
    pub fn feature_gains(&self) -> Vec<f64> {
        let mut g = alloc::vec![0.0; self.n_features];
        for n in &self.nodes {
            if let Node::Split { feature, gain, .. } = n {
                g[*feature] += gain;
            }
        }
        g
    }
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    hp: &'a RfHyperparams,
    rng: Option<&'a mut TaskRng>,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    pos: usize,
    sse: f64,
}

fn sse_of(y: &[f64], idx: &[usize]) -> (f64, f64) {
    let m = idx.len() as f64;
    let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / m;
    let sse = idx.iter().map(|&i| (y[i] - mean) * (y[i] - mean)).sum();
    (mean, sse)
}

impl Builder<'_> {
    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.x.cols();
        match (self.hp.max_features, self.rng.as_deref_mut()) {
            (Some(k), Some(rng)) if k < p => {
                let mut f = index::sample(rng, p, k).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&mut self, idx: &mut [usize], mean: f64, parent_sse: f64) -> Option<BestSplit> {
        let m = idx.len();
        let leaf = self.hp.min_samples_leaf;
        let mut best: Option<BestSplit> = None;
        let mut pre = alloc::vec![(0.0f64, 0.0f64); m + 1];
        // identical partitions reached through different features must tie
        let tol = 1e-10 * parent_sse;
        for f in self.candidate_features() {
            let x = self.x;
            idx.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
            for (k, &i) in idx.iter().enumerate() {
                let d = self.y[i] - mean;
                pre[k + 1] = (pre[k].0 + d, pre[k].1 + d * d);
            }
            let (tot, tot2) = pre[m];
            for pos in leaf..=(m - leaf) {
                let (lo, hi) = (x.get(idx[pos - 1], f), x.get(idx[pos], f));
                if lo == hi {
                    continue;
                }
                let (sl, sl2) = pre[pos];
                let (sr, sr2) = (tot - sl, tot2 - sl2);
                let nl = pos as f64;
                let nr = (m - pos) as f64;
                let sse = (sl2 - sl * sl / nl).max(0.0) + (sr2 - sr * sr / nr).max(0.0);
                if best.as_ref().is_none_or(|b| sse < b.sse - tol) {
                    let mid = lo + (hi - lo) / 2.0;
                    best = Some(BestSplit {
                        feature: f,
                        threshold: if mid < hi { mid } else { lo },
                        pos,
                        sse,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let m = idx.len();
        let (mean, sse) = sse_of(self.y, idx);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { value: mean, samples: m });
        let first = self.y[idx[0]];
        let stop = self.hp.max_depth.is_some_and(|d| depth >= d)
            || m < self.hp.min_samples_split
            || m < 2 * self.hp.min_samples_leaf
            || idx.iter().all(|&i| self.y[i] == first);
        if stop {
            return at;
        }
        let Some(best) = self.best_split(idx, mean, sse) else {
            return at;
        };
        let gain = sse - best.sse;
        if gain <= 1e-12 * sse {
            return at;
        }
        let x = self.x;
        idx.sort_by(|&a, &b| x.get(a, best.feature).total_cmp(&x.get(b, best.feature)));
        let (l, r) = idx.split_at_mut(best.pos);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            samples: m,
            gain,
        };
        at
    }
}

/// Grows one tree on the rows listed in `sample` (repeats allowed). The
/// generator is only consulted when `max_features` subsamples features.
pub fn fit_tree_on(
    x: &Matrix,
    y: &[f64],
    sample: &[usize],
    hp: &RfHyperparams,
    rng: Option<&mut TaskRng>,
) -> Result<RegressionTree> {
    hp.validate()?;
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if sample.is_empty() {
        return Err(Error::EmptyAnalysis {
            reason: "tree needs at least one row".into(),
        });
    }
    let mut idx = sample.to_vec();
    let mut b = Builder {
        x,
        y,
        hp,
        rng,
        nodes: Vec::new(),
    };
    b.grow(&mut idx, 0);
    Ok(RegressionTree {
        nodes: b.nodes,
        n_features: x.cols(),
        root_samples: sample.len(),
    })
}

/// Grows one tree on all rows.
pub fn fit_tree(x: &Matrix, y: &[f64], hp: &RfHyperparams, rng: Option<&mut TaskRng>) -> Result<RegressionTree> {
    let all: Vec<usize> = (0..x.rows()).collect();
    fit_tree_on(x, y, &all, hp, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(depth: Option<usize>) -> RfHyperparams {
        RfHyperparams {
            n_estimators: 1,
            max_depth: depth,
            bootstrap: false,
            ..RfHyperparams::default()
        }
    }

    #[test]
    fn constant_response_single_leaf() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let t = fit_tree(&x, &[4.0, 4.0, 4.0], &hp(None), None).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_row(&[10.0]), 4.0);
    }

    #[test]
    fn step_function_is_fitted_exactly() {
        let x = Matrix::from_rows(&[[0.1], [0.2], [0.3], [0.7], [0.8], [0.9]]).unwrap();
        let y = [1.0, 1.0, 1.0, 5.0, 5.0, 5.0];
        let t = fit_tree(&x, &y, &hp(Some(1)), None).unwrap();
        assert_eq!(t.predict(&x), y.to_vec());
        match &t.nodes()[0] {
            Node::Split { threshold, gain, .. } => {
                assert!((threshold - 0.5).abs() < 1e-12);
                assert!((gain - 24.0).abs() < 1e-9);
            }
            Node::Leaf { .. } => panic!("expected a split"),
        }
    }

    #[test]
    fn min_leaf_respected() {
        let x = Matrix::from_rows(&(0..20).map(|i| [i as f64]).collect::<Vec<_>>()).unwrap();
        let y: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64).collect();
        let h = RfHyperparams {
            min_samples_leaf: 3,
            ..hp(None)
        };
        let t = fit_tree(&x, &y, &h, None).unwrap();
        assert!(t.leaf_sizes().iter().all(|&s| s >= 3));
    }

    #[test]
    fn depth_cap() {
        let x = Matrix::from_rows(&(0..64).map(|i| [i as f64]).collect::<Vec<_>>()).unwrap();
        let y: Vec<f64> = (0..64).map(|i| (i as f64).sin()).collect();
        assert!(fit_tree(&x, &y, &hp(Some(3)), None).unwrap().depth() <= 3);
    }
}
