//! Unigram distributions and the KL / Jensen-Shannon divergences between
//! them. All logarithms are base 2, so JSD lies in [0, 1].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

use crate::featurize::text::tokenize_and_normalize;
use crate::{Error, Result};

/// Maximum-likelihood unigram distribution over tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenDistribution {
    total: u64,
    probs: BTreeMap<String, f64>,
}

impl TokenDistribution {
    /// Builds a distribution from explicit probabilities (which must be
    /// positive and sum to one within 1e-9).
    pub fn from_probs<I, S>(probs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (tok, p) in probs {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::OutOfRange {
                    field: "probability",
                    value: p,
                    range: "(0, 1]",
                });
            }
            *map.entry(tok.into()).or_insert(0.0) += p;
        }
        if map.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let sum: f64 = map.values().sum();
        if libm::fabs(sum - 1.0) > 1e-9 {
            return Err(Error::OutOfRange {
                field: "probability sum",
                value: sum,
                range: "1 +- 1e-9",
            });
        }
        Ok(TokenDistribution {
            total: 0,
            probs: map,
        })
    }

    /// Number of tokens the distribution was counted from (0 when built
    /// from explicit probabilities).
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn prob(&self, token: &str) -> f64 {
        self.probs.get(token).copied().unwrap_or(0.0)
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Equal-weight mixture of two distributions.
    pub fn mixture(&self, other: &TokenDistribution) -> TokenDistribution {
        let mut probs = BTreeMap::new();
        for (tok, p) in &self.probs {
            probs.insert(tok.clone(), 0.5 * (p + other.prob(tok)));
        }
        for (tok, q) in &other.probs {
            probs
                .entry(tok.clone())
                .or_insert_with(|| 0.5 * (self.prob(tok) + q));
        }
        TokenDistribution {
            total: self.total + other.total,
            probs,
        }
    }
}

pub fn frequency_distribution<S: AsRef<str>>(tokens: &[S]) -> Result<TokenDistribution> {
    if tokens.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for t in tokens {
        *counts.entry(String::from(t.as_ref())).or_insert(0) += 1;
    }
    let total = tokens.len() as u64;
    let probs = counts
        .into_iter()
        .map(|(tok, c)| (tok, c as f64 / total as f64))
        .collect();
    Ok(TokenDistribution { total, probs })
}

/// `sum_w P(w) log2(P(w) / Q(w))`; requires supp(P) within supp(Q).
pub fn kl_divergence(p: &TokenDistribution, q: &TokenDistribution) -> Result<f64> {
    let mut acc = 0.0;
    for (tok, pw) in p.iter() {
        let qw = q.prob(tok);
        if qw <= 0.0 {
            return Err(Error::DivergenceUndefined { token: tok.into() });
        }
        acc += pw * libm::log2(pw / qw);
    }
    Ok(acc.max(0.0))
}

/// Jensen-Shannon divergence `KL(P||M)/2 + KL(Q||M)/2`, `M = (P + Q)/2`.
pub fn jsd(p: &TokenDistribution, q: &TokenDistribution) -> f64 {
    let m = p.mixture(q);
    // supports of p and q are inside supp(m) by construction
    let kl_p = kl_divergence(p, &m).unwrap_or(0.0);
    let kl_q = kl_divergence(q, &m).unwrap_or(0.0);
    (0.5 * kl_p + 0.5 * kl_q).clamp(0.0, 1.0)
}

/// JSD between the unigram distributions of two raw corpora.
pub fn corpus_jsd(
    finetune_text: &str,
    test_text: &str,
    stopwords: &BTreeSet<String>,
) -> Result<f64> {
    let p = frequency_distribution(&tokenize_and_normalize(finetune_text, stopwords))?;
    let q = frequency_distribution(&tokenize_and_normalize(test_text, stopwords))?;
    Ok(jsd(&p, &q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(&str, f64)]) -> TokenDistribution {
        TokenDistribution::from_probs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn frequency_counts() {
        let d = frequency_distribution(&["a", "a", "b"]).unwrap();
        assert_eq!(d.total(), 3);
        assert!((d.prob("a") - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.prob("b") - 1.0 / 3.0).abs() < 1e-15);
        let d = frequency_distribution(&["x"]).unwrap();
        assert_eq!(d.prob("x"), 1.0);
        let empty: [&str; 0] = [];
        assert_eq!(frequency_distribution(&empty), Err(Error::EmptyCorpus));
    }

    #[test]
    fn kl_cases() {
        let p = dist(&[("a", 0.5), ("b", 0.5)]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let p = dist(&[("a", 1.0)]);
        let q = dist(&[("a", 0.75), ("b", 0.25)]);
        let expected = (4.0f64 / 3.0).log2();
        assert!((kl_divergence(&p, &q).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.4150).abs() < 1e-4);
        let q = dist(&[("b", 1.0)]);
        assert!(matches!(
            kl_divergence(&p, &q),
            Err(Error::DivergenceUndefined { .. })
        ));
    }

    #[test]
    fn jsd_cases() {
        let p = dist(&[("a", 0.5), ("b", 0.5)]);
        assert_eq!(jsd(&p, &p), 0.0);
        let a = dist(&[("a", 1.0)]);
        let b = dist(&[("b", 1.0)]);
        assert!((jsd(&a, &b) - 1.0).abs() < 1e-15);
        // KL(P||M) = log2(4/3), KL(Q||M) = 0.5 log2(2/3) + 0.5 log2(2)
        let q = dist(&[("a", 0.5), ("b", 0.5)]);
        let hand = 0.5 * 0.415_037_499_278_843_8 + 0.5 * 0.207_518_749_639_421_9;
        assert!((jsd(&a, &q) - hand).abs() < 1e-12);
        assert!((jsd(&a, &q) - 0.31128).abs() < 1e-5);
    }

    #[test]
    fn invalid_probabilities() {
        assert!(TokenDistribution::from_probs([("a", 0.5)]).is_err());
        assert!(TokenDistribution::from_probs([("a", 0.0), ("b", 1.0)]).is_err());
    }

    #[test]
    fn corpus_level() {
        let none = BTreeSet::new();
        assert_eq!(corpus_jsd("a b c", "a b c", &none).unwrap(), 0.0);
        assert!((corpus_jsd("a b", "c d", &none).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(corpus_jsd("...", "a", &none), Err(Error::EmptyCorpus));
    }
}
