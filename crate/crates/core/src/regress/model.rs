use alloc::vec::Vec;

use crate::data::PartitionKey;
use crate::featurize::{Feature, FeatureVector};
use crate::regress::design::{design_matrix, expand_row, fit_ols};
use crate::regress::family::{PredictorFamily, PredictorSpec};
use crate::regress::scaling_law::{fit_scaling_law, scaling_law};
use crate::{Error, Result};

/// Non-fatal conditions met while fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitNotes {
    pub rank_deficient: bool,
    pub floored_values: usize,
    pub constant_columns: usize,
    /// Scaling law: no start met the stopping test within the iteration
    /// cap; the lowest-SSE iterate was kept.
    pub unconverged: bool,
}

impl FitNotes {
    pub fn merge(&mut self, other: FitNotes) {
        self.rank_deficient |= other.rank_deficient;
        self.floored_values += other.floored_values;
        self.constant_columns = self.constant_columns.max(other.constant_columns);
        self.unconverged |= other.unconverged;
    }

    pub fn is_clean(&self) -> bool {
        *self == FitNotes::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub spec: PredictorSpec,
    /// Intercept first, then per feature (canonical order) its terms; for
    /// the scaling law `[b0, b1, b2]`.
    pub coefficients: Vec<f64>,
    pub partition_key: Option<PartitionKey>,
    pub notes: FitNotes,
}

/// Fits `spec` on `rows`; `seed` drives the scaling-law random starts.
pub fn fit(spec: &PredictorSpec, rows: &[FeatureVector], seed: u64) -> Result<FittedModel> {
    match spec.family() {
        PredictorFamily::ScalingLaw => {
            let s: Vec<f64> = rows
                .iter()
                .map(|r| {
                    r.s_tilde().ok_or(Error::FeatureUnavailable {
                        feature: Feature::Size.name(),
                        record: "feature vector".into(),
                    })
                })
                .collect::<Result<_>>()?;
            let y: Vec<f64> = rows.iter().map(|r| r.response).collect();
            let f = fit_scaling_law(&s, &y, seed)?;
            Ok(FittedModel {
                spec: *spec,
                coefficients: f.params.to_vec(),
                partition_key: None,
                notes: FitNotes {
                    floored_values: f.floored,
                    unconverged: f.converged_starts == 0,
                    ..FitNotes::default()
                },
            })
        }
        _ => {
            let d = design_matrix(rows, spec)?;
            let ols = fit_ols(&d.matrix, &d.response)?;
            Ok(FittedModel {
                spec: *spec,
                coefficients: ols.coefficients,
                partition_key: None,
                notes: FitNotes {
                    rank_deficient: ols.rank_deficient,
                    floored_values: d.floored,
                    constant_columns: d.constant_columns.len(),
                    unconverged: false,
                },
            })
        }
    }
}

impl FittedModel {
    pub fn with_key(mut self, key: PartitionKey) -> Self {
        self.partition_key = Some(key);
        self
    }

    /// Raw (unclamped) prediction for one feature vector.
    pub fn predict_one(&self, row: &FeatureVector) -> Result<f64> {
        let x = row.project(self.spec.features())?;
        self.predict_values(&x)
    }

    /// Prediction from the model's feature values in canonical order.
    pub fn predict_values(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.spec.features().len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.spec.features().len(),
            });
        }
        match self.spec.family() {
            PredictorFamily::ScalingLaw => {
                let p = [self.coefficients[0], self.coefficients[1], self.coefficients[2]];
                Ok(scaling_law(&p, x[0]))
            }
            family => {
                let mut row = Vec::with_capacity(self.coefficients.len());
                let mut floored = 0;
                expand_row(family, x, &mut row, &mut floored);
                Ok(row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum())
            }
        }
    }

    pub fn predict(&self, rows: &[FeatureVector]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict_one(r)).collect()
    }
}

/// Predictions of `model` on `rows`.
pub fn predict(model: &FittedModel, rows: &[FeatureVector]) -> Result<Vec<f64>> {
    model.predict(rows)
}

pub fn rmse(observed: &[f64], predicted: &[f64]) -> f64 {
    if observed.is_empty() {
        return 0.0;
    }
    let sse: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - p) * (o - p))
        .sum();
    libm::sqrt(sse / observed.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::FeatureSet;
    use alloc::vec;

    fn rows(xs: &[f64], f: impl Fn(f64) -> f64) -> Vec<FeatureVector> {
        xs.iter()
            .map(|&x| FeatureVector::new(FeatureSet::SIZE, vec![x], f(x)).unwrap())
            .collect()
    }

    #[test]
    fn linear_prediction() {
        let spec = PredictorSpec::new(PredictorFamily::Linear, FeatureSet::SIZE).unwrap();
        let m = FittedModel {
            spec,
            coefficients: vec![1.0, 2.0],
            partition_key: None,
            notes: FitNotes::default(),
        };
        assert_eq!(m.predict_values(&[3.0]).unwrap(), 7.0);
    }

    #[test]
    fn zero_poly3_predicts_zero() {
        let spec = PredictorSpec::new(PredictorFamily::Poly3, FeatureSet::SIZE).unwrap();
        let m = FittedModel {
            spec,
            coefficients: vec![0.0; 4],
            partition_key: None,
            notes: FitNotes::default(),
        };
        for x in [0.0, 0.3, 1.0, 17.0] {
            assert_eq!(m.predict_values(&[x]).unwrap(), 0.0);
        }
    }

    #[test]
    fn exact_members_are_reproduced() {
        let xs = [0.02, 0.2, 0.5, 1.0, 0.35, 0.7];
        type Case = (PredictorFamily, fn(f64) -> f64);
        let cases: [Case; 4] = [
            (PredictorFamily::Linear, |x| 3.0 - 2.0 * x),
            (PredictorFamily::Poly2, |x| 1.0 + x - 4.0 * x * x),
            (PredictorFamily::Poly3, |x| 2.0 * x * x * x - x + 5.0),
            (PredictorFamily::Logarithmic, |x| 10.0 + 3.0 * libm::log(x)),
        ];
        for (family, f) in cases {
            let data = rows(&xs, f);
            let spec = PredictorSpec::new(family, FeatureSet::SIZE).unwrap();
            let m = fit(&spec, &data, 0).unwrap();
            let pred = m.predict(&data).unwrap();
            for (p, r) in pred.iter().zip(&data) {
                assert!((p - r.response).abs() < 1e-9, "{family}");
            }
        }
    }

    #[test]
    fn underdetermined_poly3() {
        let data = rows(&[0.1, 0.2], |x| x);
        let spec = PredictorSpec::new(PredictorFamily::Poly3, FeatureSet::SIZE).unwrap();
        assert!(matches!(
            fit(&spec, &data, 0),
            Err(Error::Underdetermined { rows: 2, cols: 4 })
        ));
    }
}
