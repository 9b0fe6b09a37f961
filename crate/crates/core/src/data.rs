//! Experiment records, language profiles and partitioning schemes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// Corpus identifier. Government and PMIndia share `Gov`; the two FLORES
/// releases share `Flores`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Corpus {
    Bible,
    Flores,
    Gov,
}

impl Corpus {
    pub fn as_str(self) -> &'static str {
        match self {
            Corpus::Bible => "bible",
            Corpus::Flores => "flores",
            Corpus::Gov => "gov",
        }
    }
}

impl fmt::Display for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Corpus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bible" => Ok(Corpus::Bible),
            "flores" => Ok(Corpus::Flores),
            "gov" => Ok(Corpus::Gov),
            other => Err(Error::UnknownValue {
                field: "corpus",
                value: other.to_string(),
            }),
        }
    }
}

/// Target language (the source is always English).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lang {
    Gu,
    Hi,
    Ka,
    Si,
    Ta,
}

impl Lang {
    pub const ALL: [Lang; 5] = [Lang::Gu, Lang::Hi, Lang::Ka, Lang::Si, Lang::Ta];

    pub fn as_str(self) -> &'static str {
        match self {
            Lang::Gu => "gu",
            Lang::Hi => "hi",
            Lang::Ka => "ka",
            Lang::Si => "si",
            Lang::Ta => "ta",
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lang {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gu" => Ok(Lang::Gu),
            "hi" => Ok(Lang::Hi),
            "ka" => Ok(Lang::Ka),
            "si" => Ok(Lang::Si),
            "ta" => Ok(Lang::Ta),
            other => Err(Error::UnknownValue {
                field: "target_lang",
                value: other.to_string(),
            }),
        }
    }
}

/// Whether fine-tuning and testing corpora share a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainCategory {
    InDomain,
    OutDomain,
}

/// Uniquely identifies an experiment within a record set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigKey {
    pub finetune_corpus: Corpus,
    pub finetune_size: u32,
    pub test_corpus: Corpus,
    pub target_lang: Lang,
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.finetune_corpus, self.finetune_size, self.test_corpus, self.target_lang
        )
    }
}

/// One fine-tune/test run and its measured spBLEU.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub finetune_corpus: Corpus,
    pub finetune_size: u32,
    pub test_corpus: Corpus,
    pub target_lang: Lang,
    pub spbleu: f64,
    pub jsd: Option<f64>,
}

impl ExperimentRecord {
    pub fn new(
        finetune_corpus: Corpus,
        finetune_size: u32,
        test_corpus: Corpus,
        target_lang: Lang,
        spbleu: f64,
        jsd: Option<f64>,
    ) -> Result<Self> {
        let record = ExperimentRecord {
            finetune_corpus,
            finetune_size,
            test_corpus,
            target_lang,
            spbleu,
            jsd,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        if self.finetune_corpus == Corpus::Flores {
            return Err(Error::UnknownValue {
                field: "finetune_corpus",
                value: "flores".into(),
            });
        }
        if self.finetune_size == 0 {
            return Err(Error::OutOfRange {
                field: "finetune_size",
                value: 0.0,
                range: "> 0",
            });
        }
        if !(0.0..=100.0).contains(&self.spbleu) {
            return Err(Error::OutOfRange {
                field: "spbleu",
                value: self.spbleu,
                range: "[0, 100]",
            });
        }
        if let Some(j) = self.jsd {
            if !(0.0..=1.0).contains(&j) {
                return Err(Error::OutOfRange {
                    field: "jsd",
                    value: j,
                    range: "[0, 1]",
                });
            }
        }
        Ok(())
    }

    pub fn key(&self) -> ConfigKey {
        ConfigKey {
            finetune_corpus: self.finetune_corpus,
            finetune_size: self.finetune_size,
            test_corpus: self.test_corpus,
            target_lang: self.target_lang,
        }
    }

    pub fn domain_category(&self) -> DomainCategory {
        domain_category(self)
    }

    /// Source of the `gov` corpus for this language: PMIndia news for the
    /// Indian languages, the Sri Lankan government corpus for si/ta.
    /// Metadata only; partitioning ignores it.
    pub fn gov_provenance(&self) -> Option<&'static str> {
        if self.finetune_corpus != Corpus::Gov && self.test_corpus != Corpus::Gov {
            return None;
        }
        Some(match self.target_lang {
            Lang::Gu | Lang::Hi | Lang::Ka => "pmindia",
            Lang::Si | Lang::Ta => "government",
        })
    }
}

/// In-domain iff the fine-tuning and test corpora coincide (FLORES is never
/// a fine-tuning corpus, so a FLORES test is always out-domain).
pub fn domain_category(record: &ExperimentRecord) -> DomainCategory {
    if record.finetune_corpus == record.test_corpus {
        DomainCategory::InDomain
    } else {
        DomainCategory::OutDomain
    }
}

/// A validated set of records with unique configuration keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordSet {
    records: Vec<ExperimentRecord>,
}

impl RecordSet {
    /// Validates each record and rejects duplicated configuration keys.
    /// On failure the error is paired with the offending record's index.
    pub fn new(records: Vec<ExperimentRecord>) -> core::result::Result<Self, (usize, Error)> {
        let mut seen = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            r.validate().map_err(|e| (i, e))?;
            if seen.insert(r.key(), i).is_some() {
                return Err((
                    i,
                    Error::DuplicateKey {
                        key: r.key().to_string(),
                    },
                ));
            }
        }
        Ok(RecordSet { records })
    }

    pub fn records(&self) -> &[ExperimentRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, ExperimentRecord> {
        self.records.iter()
    }

    /// True when every record carries a JSD value.
    pub fn has_jsd(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.jsd.is_some())
    }

    pub fn into_inner(self) -> Vec<ExperimentRecord> {
        self.records
    }
}

impl<'a> IntoIterator for &'a RecordSet {
    type Item = &'a ExperimentRecord;
    type IntoIter = core::slice::Iter<'a, ExperimentRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

/// The six lang2vec distances from English.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistanceKind {
    Geo,
    Gen,
    Syn,
    Pho,
    Inv,
    Fea,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 6] = [
        DistanceKind::Geo,
        DistanceKind::Gen,
        DistanceKind::Syn,
        DistanceKind::Pho,
        DistanceKind::Inv,
        DistanceKind::Fea,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn column(self) -> &'static str {
        match self {
            DistanceKind::Geo => "d_geo",
            DistanceKind::Gen => "d_gen",
            DistanceKind::Syn => "d_syn",
            DistanceKind::Pho => "d_pho",
            DistanceKind::Inv => "d_inv",
            DistanceKind::Fea => "d_fea",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageProfile {
    pub lang: Lang,
    /// Indexed by [`DistanceKind::index`].
    pub distances: [f64; 6],
}

impl LanguageProfile {
    pub fn new(lang: Lang, distances: [f64; 6]) -> Result<Self> {
        for (kind, &d) in DistanceKind::ALL.iter().zip(&distances) {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::OutOfRange {
                    field: kind.column(),
                    value: d,
                    range: "[0, 1]",
                });
            }
        }
        Ok(LanguageProfile { lang, distances })
    }

    pub fn distance(&self, kind: DistanceKind) -> f64 {
        self.distances[kind.index()]
    }
}

/// Language profiles keyed by language code.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileTable {
    profiles: BTreeMap<Lang, LanguageProfile>,
}

impl ProfileTable {
    pub fn new(profiles: Vec<LanguageProfile>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in profiles {
            let lang = p.lang;
            if map.insert(lang, p).is_some() {
                return Err(Error::DuplicateKey {
                    key: format!("profile {lang}"),
                });
            }
        }
        Ok(ProfileTable { profiles: map })
    }

    pub fn get(&self, lang: Lang) -> Result<&LanguageProfile> {
        self.profiles.get(&lang).ok_or_else(|| Error::MissingProfile {
            lang: lang.to_string(),
        })
    }

    /// Fails on the first record whose language has no profile.
    pub fn check_covers(&self, records: &RecordSet) -> Result<()> {
        records.iter().try_for_each(|r| self.get(r.target_lang).map(|_| ()))
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LanguageProfile> {
        self.profiles.values()
    }
}

/// How records are grouped before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartitionScheme {
    None,
    ByFinetune,
    ByTest,
    ByLang,
    ByFinetuneTest,
}

impl PartitionScheme {
    pub const ALL: [PartitionScheme; 5] = [
        PartitionScheme::None,
        PartitionScheme::ByFinetune,
        PartitionScheme::ByTest,
        PartitionScheme::ByLang,
        PartitionScheme::ByFinetuneTest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PartitionScheme::None => "none",
            PartitionScheme::ByFinetune => "by_finetune",
            PartitionScheme::ByTest => "by_test",
            PartitionScheme::ByLang => "by_lang",
            PartitionScheme::ByFinetuneTest => "by_finetune_test",
        }
    }

    pub fn key_of(self, record: &ExperimentRecord) -> PartitionKey {
        let (finetune, test, lang) = match self {
            PartitionScheme::None => (None, None, None),
            PartitionScheme::ByFinetune => (Some(record.finetune_corpus), None, None),
            PartitionScheme::ByTest => (None, Some(record.test_corpus), None),
            PartitionScheme::ByLang => (None, None, Some(record.target_lang)),
            PartitionScheme::ByFinetuneTest => {
                (Some(record.finetune_corpus), Some(record.test_corpus), None)
            }
        };
        PartitionKey {
            finetune,
            test,
            lang,
        }
    }
}

impl fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PartitionScheme::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownValue {
                field: "scheme",
                value: s.to_string(),
            })
    }
}

/// The configuration values shared by every record of a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PartitionKey {
    pub finetune: Option<Corpus>,
    pub test: Option<Corpus>,
    pub lang: Option<Lang>,
}

impl PartitionKey {
    pub const ALL: PartitionKey = PartitionKey {
        finetune: None,
        test: None,
        lang: None,
    };

    pub fn label(&self) -> String {
        self.to_string()
    }
}

/// Renders as `all`, `gov`, `bible-flores`, `ka`, ...
impl fmt::Display for PartitionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<&str> = Vec::new();
        if let Some(c) = self.finetune {
            parts.push(c.as_str());
        }
        if let Some(c) = self.test {
            parts.push(c.as_str());
        }
        if let Some(l) = self.lang {
            parts.push(l.as_str());
        }
        if parts.is_empty() {
            f.write_str("all")
        } else {
            f.write_str(&parts.join("-"))
        }
    }
}


#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub key: PartitionKey,
    pub records: Vec<ExperimentRecord>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Groups records by the fields named by `scheme`. Partitions come back in
/// key order; records keep their input order within a partition.
pub fn partition(records: &RecordSet, scheme: PartitionScheme) -> Vec<Partition> {
    let mut groups: BTreeMap<PartitionKey, Vec<ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(scheme.key_of(r)).or_default().push(r.clone());
    }
    groups
        .into_iter()
        .map(|(key, records)| Partition { key, records })
        .collect()
}

/// Result of dropping undersized partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredPartitions {
    pub kept: Vec<Partition>,
    /// Removed partitions with their sizes.
    pub removed: Vec<(PartitionKey, usize)>,
}

pub const DEFAULT_MIN_PARTITION: usize = 10;

pub fn filter_small_partitions(
    partitions: Vec<Partition>,
    min_size: usize,
) -> Result<FilteredPartitions> {
    if min_size == 0 {
        return Err(Error::InvalidArgument("min_size must be at least 1".into()));
    }
    let (kept, small): (Vec<_>, Vec<_>) =
        partitions.into_iter().partition(|p| p.len() >= min_size);
    if kept.is_empty() {
        return Err(Error::EmptyAnalysis {
            reason: format!("no partition has at least {min_size} records"),
        });
    }
    Ok(FilteredPartitions {
        kept,
        removed: small.into_iter().map(|p| (p.key, p.len())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(ft: Corpus, size: u32, test: Corpus, lang: Lang, y: f64) -> ExperimentRecord {
        ExperimentRecord::new(ft, size, test, lang, y, None).unwrap()
    }

    fn sample() -> RecordSet {
        let mut v = Vec::new();
        for (i, &lang) in Lang::ALL.iter().enumerate() {
            for &test in &[Corpus::Bible, Corpus::Flores, Corpus::Gov] {
                for &ft in &[Corpus::Gov, Corpus::Bible] {
                    v.push(rec(ft, 1000 * (i as u32 + 1), test, lang, 10.0));
                }
            }
        }
        RecordSet::new(v).unwrap()
    }

    #[test]
    fn rejects_out_of_range_values() {
        let err = ExperimentRecord::new(Corpus::Gov, 1000, Corpus::Gov, Lang::Si, -1.0, None)
            .unwrap_err();
        assert!(matches!(err, Error::OutOfRange { field: "spbleu", .. }));
        let err = ExperimentRecord::new(Corpus::Gov, 1000, Corpus::Gov, Lang::Si, 1.0, Some(1.5))
            .unwrap_err();
        assert!(matches!(err, Error::OutOfRange { field: "jsd", .. }));
        assert!(ExperimentRecord::new(Corpus::Gov, 0, Corpus::Gov, Lang::Si, 1.0, None).is_err());
        assert!(
            ExperimentRecord::new(Corpus::Flores, 10, Corpus::Gov, Lang::Si, 1.0, None).is_err()
        );
    }

    #[test]
    fn duplicate_keys_are_rejected_with_index() {
        let a = rec(Corpus::Gov, 1000, Corpus::Gov, Lang::Si, 1.0);
        let mut b = a.clone();
        b.spbleu = 2.0;
        let (idx, err) = RecordSet::new(vec![a, b]).unwrap_err();
        assert_eq!(idx, 1);
        assert!(matches!(err, Error::DuplicateKey { .. }));
    }

    #[test]
    fn unknown_enum_values() {
        assert!("pmi".parse::<Corpus>().is_err());
        assert!("en".parse::<Lang>().is_err());
        assert_eq!("by_lang".parse::<PartitionScheme>().unwrap(), PartitionScheme::ByLang);
        assert!("by_size".parse::<PartitionScheme>().is_err());
    }

    #[test]
    fn domain_categories() {
        let gg = rec(Corpus::Gov, 1000, Corpus::Gov, Lang::Hi, 1.0);
        let bf = rec(Corpus::Bible, 1000, Corpus::Flores, Lang::Hi, 1.0);
        let bb = rec(Corpus::Bible, 1000, Corpus::Bible, Lang::Hi, 1.0);
        assert_eq!(domain_category(&gg), DomainCategory::InDomain);
        assert_eq!(domain_category(&bf), DomainCategory::OutDomain);
        assert_eq!(domain_category(&bb), DomainCategory::InDomain);
    }

    #[test]
    fn provenance_metadata() {
        let r = rec(Corpus::Gov, 1000, Corpus::Gov, Lang::Hi, 1.0);
        assert_eq!(r.gov_provenance(), Some("pmindia"));
        let r = rec(Corpus::Bible, 1000, Corpus::Gov, Lang::Ta, 1.0);
        assert_eq!(r.gov_provenance(), Some("government"));
        let r = rec(Corpus::Bible, 1000, Corpus::Flores, Lang::Ta, 1.0);
        assert_eq!(r.gov_provenance(), None);
    }

    #[test]
    fn partition_by_finetune_test_is_sorted_cover() {
        let set = sample();
        let parts = partition(&set, PartitionScheme::ByFinetuneTest);
        let labels: Vec<String> = parts.iter().map(|p| p.key.label()).collect();
        assert_eq!(
            labels,
            vec![
                "bible-bible",
                "bible-flores",
                "bible-gov",
                "gov-bible",
                "gov-flores",
                "gov-gov"
            ]
        );
        assert_eq!(parts.iter().map(Partition::len).sum::<usize>(), set.len());
        for p in &parts {
            for r in &p.records {
                assert_eq!(PartitionScheme::ByFinetuneTest.key_of(r), p.key);
            }
        }
    }

    #[test]
    fn scheme_none_is_one_partition() {
        let set = sample();
        let parts = partition(&set, PartitionScheme::None);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].key.label(), "all");
        assert_eq!(parts[0].records, set.records());
    }

    #[test]
    fn filter_removes_small_partitions() {
        let mk = |n: usize, lang: Lang| Partition {
            key: PartitionKey {
                lang: Some(lang),
                ..PartitionKey::ALL
            },
            records: (0..n)
                .map(|i| rec(Corpus::Gov, 1 + i as u32, Corpus::Gov, lang, 1.0))
                .collect(),
        };
        let out = filter_small_partitions(vec![mk(3, Lang::Gu), mk(12, Lang::Hi)], 10).unwrap();
        assert_eq!(out.kept.len(), 1);
        assert_eq!(out.kept[0].len(), 12);
        assert_eq!(out.removed.len(), 1);
        assert_eq!(out.removed[0].1, 3);

        let err = filter_small_partitions(vec![mk(3, Lang::Gu)], 10).unwrap_err();
        assert!(matches!(err, Error::EmptyAnalysis { .. }));
        assert!(filter_small_partitions(vec![mk(3, Lang::Gu)], 0).is_err());
    }

    #[test]
    fn profile_range_and_lookup() {
        assert!(LanguageProfile::new(Lang::Ka, [1.5, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        let t = ProfileTable::new(vec![
            LanguageProfile::new(Lang::Ka, [0.4, 1.0, 0.64, 0.35, 0.47, 0.5]).unwrap(),
        ])
        .unwrap();
        assert_eq!(t.get(Lang::Ka).unwrap().distance(DistanceKind::Gen), 1.0);
        assert!(matches!(t.get(Lang::Si), Err(Error::MissingProfile { .. })));
    }
}
