use alloc::format;
use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use crate::featurize::{Feature, FeatureSet};
use crate::{Error, Result};

/// Predictor-function families. Polynomial families expand every feature
/// separately and never add cross terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredictorFamily {
    /// `b0 + sum_j b_j x_j`
    Linear,
    /// `b0 + sum_j (b1j x_j + b2j x_j^2)`
    Poly2,
    /// `b0 + sum_j (b1j x_j + b2j x_j^2 + b3j x_j^3)`
    Poly3,
    /// `b0 + sum_j b_j ln x_j`
    Logarithmic,
    /// `b0 (s^-1 + b1)^b2`, size only
    ScalingLaw,
}

impl PredictorFamily {
    pub const ALL: [PredictorFamily; 5] = [
        PredictorFamily::Linear,
        PredictorFamily::Poly2,
        PredictorFamily::Poly3,
        PredictorFamily::Logarithmic,
        PredictorFamily::ScalingLaw,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PredictorFamily::Linear => "linear",
            PredictorFamily::Poly2 => "poly2",
            PredictorFamily::Poly3 => "poly3",
            PredictorFamily::Logarithmic => "logarithmic",
            PredictorFamily::ScalingLaw => "scaling_law",
        }
    }

    /// Design columns contributed by each feature; `None` for the
    /// nonlinear scaling law.
    pub fn terms_per_feature(self) -> Option<usize> {
        match self {
            PredictorFamily::Linear | PredictorFamily::Logarithmic => Some(1),
            PredictorFamily::Poly2 => Some(2),
            PredictorFamily::Poly3 => Some(3),
            PredictorFamily::ScalingLaw => None,
        }
    }

    pub fn is_linear_in_parameters(self) -> bool {
        self.terms_per_feature().is_some()
    }
}

impl fmt::Display for PredictorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredictorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let alias = match s {
            "lnr" => "linear",
            "log" => "logarithmic",
            "sl" | "scaling" => "scaling_law",
            other => other,
        };
        PredictorFamily::ALL
            .into_iter()
            .find(|f| f.as_str() == alias)
            .ok_or_else(|| Error::UnknownValue {
                field: "family",
                value: s.to_string(),
            })
    }
}

/// A family applied to a feature set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredictorSpec {
    family: PredictorFamily,
    features: FeatureSet,
}

impl PredictorSpec {
    pub fn new(family: PredictorFamily, features: FeatureSet) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidSpec("empty feature set".into()));
        }
        if family == PredictorFamily::ScalingLaw
            && features != FeatureSet::from_features([Feature::Size])
        {
            return Err(Error::InvalidSpec(format!(
                "scaling_law takes the size feature only, got {features}"
            )));
        }
        Ok(PredictorSpec { family, features })
    }

    pub fn family(&self) -> PredictorFamily {
        self.family
    }

    pub fn features(&self) -> FeatureSet {
        self.features
    }

    /// Number of coefficients of a fitted model.
    pub fn coefficient_count(&self) -> usize {
        match self.family.terms_per_feature() {
            Some(t) => 1 + t * self.features.len(),
            None => 3,
        }
    }
}

impl fmt::Display for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family, self.features)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_law_only_for_size() {
        assert!(PredictorSpec::new(PredictorFamily::ScalingLaw, FeatureSet::SIZE).is_ok());
        assert!(PredictorSpec::new(PredictorFamily::ScalingLaw, FeatureSet::JSD).is_err());
        assert!(PredictorSpec::new(
            PredictorFamily::ScalingLaw,
            FeatureSet::SIZE.union(FeatureSet::JSD)
        )
        .is_err());
        assert!(PredictorSpec::new(PredictorFamily::Linear, FeatureSet::EMPTY).is_err());
    }

    #[test]
    fn coefficient_counts() {
        let all = FeatureSet::ALL;
        assert_eq!(
            PredictorSpec::new(PredictorFamily::Poly3, all).unwrap().coefficient_count(),
            25
        );
        assert_eq!(
            PredictorSpec::new(PredictorFamily::Poly2, FeatureSet::SIZE)
                .unwrap()
                .coefficient_count(),
            3
        );
        assert_eq!(
            PredictorSpec::new(PredictorFamily::ScalingLaw, FeatureSet::SIZE)
                .unwrap()
                .coefficient_count(),
            3
        );
    }

    #[test]
    fn parse_names() {
        assert_eq!("log".parse::<PredictorFamily>().unwrap(), PredictorFamily::Logarithmic);
        assert_eq!(
            "scaling_law".parse::<PredictorFamily>().unwrap(),
            PredictorFamily::ScalingLaw
        );
        assert!("spline".parse::<PredictorFamily>().is_err());
    }
}
