use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::data::{DistanceKind, ExperimentRecord, ProfileTable, RecordSet};
use crate::{Error, Result};

/// One regression input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    Size,
    Jsd,
    Dist(DistanceKind),
}

impl Feature {
    /// Canonical order: size, jsd, then the six distances.
    pub const ALL: [Feature; 8] = [
        Feature::Size,
        Feature::Jsd,
        Feature::Dist(DistanceKind::Geo),
        Feature::Dist(DistanceKind::Gen),
        Feature::Dist(DistanceKind::Syn),
        Feature::Dist(DistanceKind::Pho),
        Feature::Dist(DistanceKind::Inv),
        Feature::Dist(DistanceKind::Fea),
    ];

    fn bit(self) -> u8 {
        match self {
            Feature::Size => 1,
            Feature::Jsd => 2,
            Feature::Dist(k) => 4 << k.index(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Size => "s_tilde",
            Feature::Jsd => "j",
            Feature::Dist(k) => k.column(),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A subset of the eight features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FeatureSet(u8);

impl FeatureSet {
    pub const EMPTY: FeatureSet = FeatureSet(0);
    pub const SIZE: FeatureSet = FeatureSet(1);
    pub const JSD: FeatureSet = FeatureSet(2);
    pub const LANG: FeatureSet = FeatureSet(0b1111_1100);
    pub const ALL: FeatureSet = FeatureSet(0xFF);

    pub fn from_features<I: IntoIterator<Item = Feature>>(features: I) -> Self {
        FeatureSet(features.into_iter().fold(0, |acc, f| acc | f.bit()))
    }

    pub fn contains(self, f: Feature) -> bool {
        self.0 & f.bit() != 0
    }

    pub fn union(self, other: FeatureSet) -> FeatureSet {
        FeatureSet(self.0 | other.0)
    }

    pub fn without(self, f: Feature) -> FeatureSet {
        FeatureSet(self.0 & !f.bit())
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn uses_distances(self) -> bool {
        self.0 & Self::LANG.0 != 0
    }

    /// Members in canonical order.
    pub fn features(self) -> Vec<Feature> {
        Feature::ALL
            .into_iter()
            .filter(|f| self.contains(*f))
            .collect()
    }

    /// Short label such as `size`, `jsd`, `size+jsd+lang`.
    pub fn label(self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if self.contains(Feature::Size) {
            parts.push("size".into());
        }
        if self.contains(Feature::Jsd) {
            parts.push("jsd".into());
        }
        if self.0 & Self::LANG.0 == Self::LANG.0 {
            parts.push("lang".into());
        } else {
            for k in DistanceKind::ALL {
                if self.contains(Feature::Dist(k)) {
                    parts.push(k.column().into());
                }
            }
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("+")
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses comma- or plus-separated names: `size`, `jsd`, `lang` (all six
/// distances) or individual distance columns such as `d_gen`.
impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut set = FeatureSet::EMPTY;
        for part in s.split([',', '+']).map(str::trim).filter(|p| !p.is_empty()) {
            let add = match part {
                "size" | "s" | "s_tilde" => FeatureSet::SIZE,
                "jsd" | "j" => FeatureSet::JSD,
                "lang" | "l" => FeatureSet::LANG,
                other => DistanceKind::ALL
                    .into_iter()
                    .find(|k| k.column() == other)
                    .map(|k| FeatureSet::from_features([Feature::Dist(k)]))
                    .ok_or_else(|| Error::UnknownValue {
                        field: "feature",
                        value: other.to_string(),
                    })?,
            };
            set = set.union(add);
        }
        if set.is_empty() {
            return Err(Error::InvalidArgument("empty feature set".into()));
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizeScaling {
    /// `s / s_max`, range (0, 1].
    #[default]
    Max,
    /// `(s - s_min) / (s_max - s_min)`, range [0, 1].
    MinMax,
}

impl FromStr for SizeScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "max" => Ok(SizeScaling::Max),
            "minmax" => Ok(SizeScaling::MinMax),
            other => Err(Error::UnknownValue {
                field: "size scaling",
                value: other.to_string(),
            }),
        }
    }
}

impl SizeScaling {
    pub fn as_str(self) -> &'static str {
        match self {
            SizeScaling::Max => "max",
            SizeScaling::MinMax => "minmax",
        }
    }
}

/// Size normalization fitted on a reference set of sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeScaler {
    mode: SizeScaling,
    min: f64,
    max: f64,
}

impl SizeScaler {
    pub fn fit(sizes: &[u32], mode: SizeScaling) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidArgument("no sizes to scale".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::OutOfRange {
                field: "finetune_size",
                value: 0.0,
                range: "> 0",
            });
        }
        let min = f64::from(*sizes.iter().min().unwrap());
        let max = f64::from(*sizes.iter().max().unwrap());
        if mode == SizeScaling::MinMax && min == max {
            return Err(Error::DegenerateScaling);
        }
        Ok(SizeScaler { mode, min, max })
    }

    pub fn mode(&self) -> SizeScaling {
        self.mode
    }

    /// Scaled value; sizes outside the fitted range are clamped into [0, 1].
    pub fn apply(&self, size: u32) -> f64 {
        let s = f64::from(size);
        let v = match self.mode {
            SizeScaling::Max => s / self.max,
            SizeScaling::MinMax => (s - self.min) / (self.max - self.min),
        };
        v.clamp(0.0, 1.0)
    }
}

pub fn scale_size(sizes: &[u32], mode: SizeScaling) -> Result<Vec<f64>> {
    let scaler = SizeScaler::fit(sizes, mode)?;
    Ok(sizes.iter().map(|&s| scaler.apply(s)).collect())
}

/// Regression inputs of one record: the requested features in canonical
/// order plus the spBLEU response.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    features: FeatureSet,
    values: Vec<f64>,
    pub response: f64,
}

impl FeatureVector {
    /// `values` must follow the canonical order of `features`.
    pub fn new(features: FeatureSet, values: Vec<f64>, response: f64) -> Result<Self> {
        if values.len() != features.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: features.len(),
            });
        }
        Ok(FeatureVector {
            features,
            values,
            response,
        })
    }

    pub fn feature_set(&self) -> FeatureSet {
        self.features
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, f: Feature) -> Option<f64> {
        self.features
            .features()
            .iter()
            .position(|&g| g == f)
            .map(|i| self.values[i])
    }

    pub fn s_tilde(&self) -> Option<f64> {
        self.get(Feature::Size)
    }

    pub fn j(&self) -> Option<f64> {
        self.get(Feature::Jsd)
    }

    /// All six distances, when every one of them is present.
    pub fn lang_dists(&self) -> Option<[f64; 6]> {
        let mut out = [0.0; 6];
        for k in DistanceKind::ALL {
            out[k.index()] = self.get(Feature::Dist(k))?;
        }
        Some(out)
    }

    /// Values of `subset` in canonical order.
    pub fn project(&self, subset: FeatureSet) -> Result<Vec<f64>> {
        subset
            .features()
            .into_iter()
            .map(|f| {
                self.get(f).ok_or(Error::FeatureUnavailable {
                    feature: f.name(),
                    record: String::from("feature vector"),
                })
            })
            .collect()
    }
}

pub fn assemble_features(
    record: &ExperimentRecord,
    features: FeatureSet,
    profiles: Option<&ProfileTable>,
    scaler: &SizeScaler,
) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(features.len());
    for f in features.features() {
        let v = match f {
            Feature::Size => scaler.apply(record.finetune_size),
            Feature::Jsd => record.jsd.ok_or_else(|| Error::FeatureUnavailable {
                feature: "j",
                record: record.key().to_string(),
            })?,
            Feature::Dist(k) => {
                let table = profiles.ok_or_else(|| Error::FeatureUnavailable {
                    feature: k.column(),
                    record: record.key().to_string(),
                })?;
                let profile =
                    table
                        .get(record.target_lang)
                        .map_err(|_| Error::FeatureUnavailable {
                            feature: k.column(),
                            record: record.key().to_string(),
                        })?;
                profile.distance(k)
            }
        };
        values.push(v);
    }
    FeatureVector::new(features, values, record.spbleu)
}

/// Turns records into feature vectors with a fixed feature set, size
/// scaler and profile table.
#[derive(Debug, Clone)]
pub struct Featurizer {
    features: FeatureSet,
    profiles: Option<ProfileTable>,
    scaler: SizeScaler,
}

impl Featurizer {
    /// Fits the size scaler on every record of `records`.
    pub fn new(
        records: &RecordSet,
        features: FeatureSet,
        profiles: Option<ProfileTable>,
        scaling: SizeScaling,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("empty feature set".into()));
        }
        let sizes: Vec<u32> = records.iter().map(|r| r.finetune_size).collect();
        let scaler = SizeScaler::fit(&sizes, scaling)?;
        Ok(Featurizer {
            features,
            profiles,
            scaler,
        })
    }

    pub fn with_scaler(
        features: FeatureSet,
        profiles: Option<ProfileTable>,
        scaler: SizeScaler,
    ) -> Self {
        Featurizer {
            features,
            profiles,
            scaler,
        }
    }

    pub fn features(&self) -> FeatureSet {
        self.features
    }

    pub fn scaler(&self) -> &SizeScaler {
        &self.scaler
    }

    pub fn with_features(&self, features: FeatureSet) -> Featurizer {
        Featurizer {
            features,
            ..self.clone()
        }
    }

    pub fn featurize(&self, record: &ExperimentRecord) -> Result<FeatureVector> {
        assemble_features(record, self.features, self.profiles.as_ref(), &self.scaler)
    }

    pub fn featurize_all<'a, I>(&self, records: I) -> Result<Vec<FeatureVector>>
    where
        I: IntoIterator<Item = &'a ExperimentRecord>,
    {
        records.into_iter().map(|r| self.featurize(r)).collect()
    }
}
