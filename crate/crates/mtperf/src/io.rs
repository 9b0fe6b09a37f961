//! Reading records, language profiles, corpora and JSD tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use csv::StringRecord;
use mtperf_core::data::{
    Corpus, DistanceKind, ExperimentRecord, Lang, LanguageProfile, ProfileTable, RecordSet,
};
use mtperf_core::featurize::corpus_jsd;

use crate::error::{Error, Result};

/// The 99 experiment records shipped with the crate.
pub const BUNDLED_RECORDS: &str = include_str!("../../../data/records.csv");
/// Distances of the five bundled languages from English.
pub const BUNDLED_PROFILES: &str = include_str!("../../../data/language_profiles.csv");

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

struct Columns {
    origin: String,
    index: BTreeMap<String, usize>,
}

impl Columns {
    fn new(origin: &str, header: &StringRecord) -> Self {
        Columns {
            origin: origin.to_string(),
            index: header
                .iter()
                .enumerate()
                .map(|(i, h)| (h.trim().to_ascii_lowercase(), i))
                .collect(),
        }
    }

    fn require(&self, names: &[&str]) -> Result<()> {
        for n in names {
            if !self.index.contains_key(*n) {
                return Err(Error::parse(&self.origin, 1, format!("missing column `{n}`")));
            }
        }
        Ok(())
    }

    fn get<'r>(&self, row: &'r StringRecord, name: &str) -> Option<&'r str> {
        self.index.get(name).and_then(|&i| row.get(i)).map(str::trim)
    }

    fn parse<T: std::str::FromStr>(&self, row: &StringRecord, line: u64, name: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self
            .get(row, name)
            .ok_or_else(|| Error::parse(&self.origin, line, format!("missing field `{name}`")))?;
        raw.parse()
            .map_err(|e| Error::parse(&self.origin, line, format!("{name} = {raw:?}: {e}")))
    }
}

fn rows(origin: &str, text: &str) -> Result<(Columns, Vec<(u64, StringRecord)>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let csv_err = |source| Error::Csv {
        origin: origin.to_string(),
        source,
    };
    let cols = Columns::new(origin, rdr.headers().map_err(csv_err)?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok((cols, out))
}

/// Parses a records CSV (`finetune_corpus,finetune_size,test_corpus,
/// target_lang,spbleu[,jsd]`). A header-only file gives an empty set.
pub fn parse_records(text: &str, origin: &str) -> Result<RecordSet> {
    let (cols, rows) = rows(origin, text)?;
    cols.require(&["finetune_corpus", "finetune_size", "test_corpus", "target_lang", "spbleu"])?;
    let mut out = Vec::with_capacity(rows.len());
    let mut lines = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let jsd = match cols.get(&row, "jsd") {
            None | Some("") => None,
            Some(_) => Some(cols.parse::<f64>(&row, line, "jsd")?),
        };
        let rec = ExperimentRecord::new(
            cols.parse::<Corpus>(&row, line, "finetune_corpus")?,
            cols.parse::<u32>(&row, line, "finetune_size")?,
            cols.parse::<Corpus>(&row, line, "test_corpus")?,
            cols.parse::<Lang>(&row, line, "target_lang")?,
            cols.parse::<f64>(&row, line, "spbleu")?,
            jsd,
        )
        .map_err(|e| Error::parse(origin, line, e.to_string()))?;
        out.push(rec);
        lines.push(line);
    }
    RecordSet::new(out).map_err(|(i, e)| Error::parse(origin, lines[i], e.to_string()))
}

pub fn load_records(path: &Path) -> Result<RecordSet> {
    parse_records(&read_text(path)?, &path.display().to_string())
}

/// Parses `lang,d_geo,d_gen,d_syn,d_pho,d_inv,d_fea`.
pub fn parse_language_profiles(text: &str, origin: &str) -> Result<ProfileTable> {
    let (cols, rows) = rows(origin, text)?;
    cols.require(&["lang"])?;
    cols.require(&DistanceKind::ALL.map(DistanceKind::column))?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let lang: Lang = cols.parse(&row, line, "lang")?;
        let mut d = [0.0; 6];
        for k in DistanceKind::ALL {
            d[k.index()] = cols.parse(&row, line, k.column())?;
        }
        out.push(LanguageProfile::new(lang, d).map_err(|e| Error::parse(origin, line, e.to_string()))?);
    }
    Ok(ProfileTable::new(out)?)
}

pub fn load_language_profiles(path: &Path) -> Result<ProfileTable> {
    parse_language_profiles(&read_text(path)?, &path.display().to_string())
}

pub fn bundled_records() -> RecordSet {
    parse_records(BUNDLED_RECORDS, "bundled records").expect("bundled records are valid")
}

pub fn bundled_profiles() -> ProfileTable {
    parse_language_profiles(BUNDLED_PROFILES, "bundled profiles").expect("bundled profiles are valid")
}

/// One word per line; blank lines and lines starting with `#` are skipped.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn load_stopwords(path: &Path) -> Result<BTreeSet<String>> {
    Ok(parse_stopwords(&read_text(path)?))
}

/// JSD of two corpus files.
pub fn file_jsd(a: &Path, b: &Path, stopwords: &BTreeSet<String>) -> Result<f64> {
    let (ta, tb) = (read_text(a)?, read_text(b)?);
    corpus_jsd(&ta, &tb, stopwords).map_err(|e| match e {
        mtperf_core::Error::EmptyCorpus => Error::Usage(format!(
            "empty corpus after preprocessing: {} or {}",
            a.display(),
            b.display()
        )),
        e => e.into(),
    })
}

/// Key of a JSD table entry; the size is optional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct JsdKey {
    pub finetune_corpus: Corpus,
    pub finetune_size: Option<u32>,
    pub test_corpus: Corpus,
    pub target_lang: Lang,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JsdEntry {
    pub key: JsdKey,
    pub jsd: f64,
}

#[derive(Debug, Clone)]
pub struct ManifestPair {
    pub key: JsdKey,
    pub finetune_path: PathBuf,
    pub test_path: PathBuf,
}

fn parse_key(cols: &Columns, row: &StringRecord, line: u64) -> Result<JsdKey> {
    let finetune_size = match cols.get(row, "finetune_size") {
        None | Some("") => None,
        Some(_) => Some(cols.parse(row, line, "finetune_size")?),
    };
    Ok(JsdKey {
        finetune_corpus: cols.parse(row, line, "finetune_corpus")?,
        finetune_size,
        test_corpus: cols.parse(row, line, "test_corpus")?,
        target_lang: cols.parse(row, line, "target_lang")?,
    })
}

/// Batch manifest: `finetune_corpus,[finetune_size,]test_corpus,
/// target_lang,finetune_path,test_path`; relative paths resolve against
/// `base`.
pub fn parse_jsd_manifest(text: &str, origin: &str, base: &Path) -> Result<Vec<ManifestPair>> {
    let (cols, rows) = rows(origin, text)?;
    cols.require(&["finetune_corpus", "test_corpus", "target_lang", "finetune_path", "test_path"])?;
    rows.into_iter()
        .map(|(line, row)| {
            let path = |name| base.join(cols.get(&row, name).unwrap_or_default());
            Ok(ManifestPair {
                key: parse_key(&cols, &row, line)?,
                finetune_path: path("finetune_path"),
                test_path: path("test_path"),
            })
        })
        .collect()
}

/// Reads a JSD table as written by `jsd --batch`.
pub fn parse_jsd_table(text: &str, origin: &str) -> Result<Vec<JsdEntry>> {
    let (cols, rows) = rows(origin, text)?;
    cols.require(&["finetune_corpus", "test_corpus", "target_lang", "jsd"])?;
    rows.into_iter()
        .map(|(line, row)| {
            Ok(JsdEntry {
                key: parse_key(&cols, &row, line)?,
                jsd: cols.parse(&row, line, "jsd")?,
            })
        })
        .collect()
}

/// Fills each record's JSD from `table`, preferring an entry that names
/// the record's size. Records without a matching entry keep their value.
pub fn attach_jsd(records: &RecordSet, table: &[JsdEntry]) -> Result<RecordSet> {
    let map: BTreeMap<JsdKey, f64> = table.iter().map(|e| (e.key, e.jsd)).collect();
    let out: Vec<ExperimentRecord> = records
        .iter()
        .map(|r| {
            let mut key = JsdKey {
                finetune_corpus: r.finetune_corpus,
                finetune_size: Some(r.finetune_size),
                test_corpus: r.test_corpus,
                target_lang: r.target_lang,
            };
            let exact = map.get(&key).copied();
            key.finetune_size = None;
            let jsd = exact.or_else(|| map.get(&key).copied()).or(r.jsd);
            ExperimentRecord::new(
                r.finetune_corpus,
                r.finetune_size,
                r.test_corpus,
                r.target_lang,
                r.spbleu,
                jsd,
            )
        })
        .collect::<mtperf_core::Result<_>>()?;
    RecordSet::new(out).map_err(|(_, e)| e.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_data_loads() {
        let r = bundled_records();
        assert_eq!(r.len(), 99);
        assert!(!r.has_jsd());
        assert_eq!(bundled_profiles().len(), 5);
    }

    #[test]
    fn header_only_is_empty() {
        let r = parse_records("finetune_corpus,finetune_size,test_corpus,target_lang,spbleu\n", "t").unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "finetune_corpus,finetune_size,test_corpus,target_lang,spbleu\n\
                    gov,1000,gov,si,20.0\n\
                    gov,abc,gov,ta,20.0\n";
        let err = parse_records(text, "t.csv").unwrap_err().to_string();
        assert!(err.starts_with("t.csv:3:"), "{err}");
        let text = "finetune_corpus,finetune_size,test_corpus,target_lang,spbleu\n\
                    flores,1000,gov,si,20.0\n";
        assert!(parse_records(text, "t.csv").unwrap_err().to_string().starts_with("t.csv:2:"));
    }

    #[test]
    fn duplicate_row_reports_line() {
        let text = "finetune_corpus,finetune_size,test_corpus,target_lang,spbleu\n\
                    gov,1000,gov,si,20.0\n\
                    bible,1000,gov,si,2.0\n\
                    gov,1000,gov,si,21.0\n";
        let err = parse_records(text, "t.csv").unwrap_err().to_string();
        assert!(err.starts_with("t.csv:4:"), "{err}");
    }

    #[test]
    fn jsd_column_and_attach() {
        let text = "finetune_corpus,finetune_size,test_corpus,target_lang,spbleu,jsd\n\
                    gov,1000,gov,si,20.0,0.25\n\
                    gov,10000,flores,si,10.0,\n";
        let r = parse_records(text, "t").unwrap();
        assert_eq!(r.records()[0].jsd, Some(0.25));
        assert_eq!(r.records()[1].jsd, None);
        let table = parse_jsd_table(
            "finetune_corpus,test_corpus,target_lang,jsd\ngov,flores,si,0.5\n",
            "j",
        )
        .unwrap();
        let r = attach_jsd(&r, &table).unwrap();
        assert!(r.has_jsd());
        assert_eq!(r.records()[1].jsd, Some(0.5));
    }
}
