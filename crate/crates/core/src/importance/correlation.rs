use alloc::vec::Vec;
use core::fmt;

use crate::featurize::{Feature, FeatureVector};
use crate::special::student_t_two_sided;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Two-sided p-value of `t = r sqrt(n-2) / sqrt(1-r²)` on n-2 df.
    pub p: f64,
    pub n: usize,
}

/// Sample Pearson correlation with its significance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::SampleTooSmall { needed: 3, given: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::CorrelationUndefined);
    }
    let r = (sxy / (libm::sqrt(sxx) * libm::sqrt(syy))).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if 1.0 - libm::fabs(r) <= f64::EPSILON {
        0.0
    } else {
        student_t_two_sided(r * libm::sqrt(df) / libm::sqrt(1.0 - r * r), df)
    };
    Ok(Correlation { r, p, n })
}

/// Competition rank ("1224" style); `tied` marks a shared position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rank {
    pub position: usize,
    pub tied: bool,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tied {
            write!(f, "{}=", self.position)
        } else {
            write!(f, "{}", self.position)
        }
    }
}

fn same_score(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= 1e-12 * libm::fabs(a).max(libm::fabs(b)).max(1.0)
}

/// Ranks `scores` descending. Returns, per input position, its rank, plus
/// the input indices in rank order (ties by ascending `names`).
pub fn competition_ranks(scores: &[f64], names: &[&str]) -> (Vec<Rank>, Vec<usize>) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        if same_score(scores[a], scores[b]) {
            names[a].cmp(names[b])
        } else {
            scores[b].total_cmp(&scores[a])
        }
    });
    let mut ranks = alloc::vec![Rank { position: 0, tied: false }; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && same_score(scores[order[i]], scores[order[j]]) {
            j += 1;
        }
        for &idx in &order[i..j] {
            ranks[idx] = Rank {
                position: i + 1,
                tied: j - i > 1,
            };
        }
        i = j;
    }
    (ranks, order)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEntry {
    pub feature: Feature,
    pub correlation: Correlation,
    pub rank: Rank,
}

/// Pearson correlation of every feature of `rows` with the response,
/// ordered by |r|.
pub fn rank_by_correlation(rows: &[FeatureVector]) -> Result<Vec<CorrelationEntry>> {
    let Some(first) = rows.first() else {
        return Err(Error::EmptyAnalysis {
            reason: "no feature vectors".into(),
        });
    };
    let features = first.feature_set().features();
    let y: Vec<f64> = rows.iter().map(|r| r.response).collect();
    let mut corr = Vec::with_capacity(features.len());
    for (c, _) in features.iter().enumerate() {
        let x: Vec<f64> = rows.iter().map(|r| r.values()[c]).collect();
        corr.push(pearson(&x, &y)?);
    }
    let scores: Vec<f64> = corr.iter().map(|c| libm::fabs(c.r)).collect();
    let names: Vec<&str> = features.iter().map(|f| f.name()).collect();
    let (ranks, order) = competition_ranks(&scores, &names);
    Ok(order
        .into_iter()
        .map(|i| CorrelationEntry {
            feature: features[i],
            correlation: corr[i],
            rank: ranks[i],
        })
        .collect())
}
