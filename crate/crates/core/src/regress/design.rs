use alloc::vec::Vec;

use crate::featurize::FeatureVector;
use crate::linalg::{lstsq, Matrix};
use crate::regress::family::{PredictorFamily, PredictorSpec};
use crate::{Error, Result};

/// Inputs at or below zero are floored to this before a log or reciprocal.
pub const LOG_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub matrix: Matrix,
    pub response: Vec<f64>,
    /// Number of feature values replaced by [`LOG_FLOOR`].
    pub floored: usize,
    /// Non-intercept columns that are constant over the rows.
    pub constant_columns: Vec<usize>,
}

pub(crate) fn expand_row(family: PredictorFamily, x: &[f64], row: &mut Vec<f64>, floored: &mut usize) {
    row.push(1.0);
    for &v in x {
        match family {
            PredictorFamily::Linear => row.push(v),
            PredictorFamily::Poly2 => {
                row.push(v);
                row.push(v * v);
            }
            PredictorFamily::Poly3 => {
                row.push(v);
                row.push(v * v);
                row.push(v * v * v);
            }
            PredictorFamily::Logarithmic => {
                let v = if v <= LOG_FLOOR {
                    *floored += 1;
                    LOG_FLOOR
                } else {
                    v
                };
                row.push(libm::log(v));
            }
            PredictorFamily::ScalingLaw => unreachable!("scaling law has no design matrix"),
        }
    }
}

/// Builds the intercept-plus-terms design matrix of a linear-in-parameters
/// family.
pub fn design_matrix(features: &[FeatureVector], spec: &PredictorSpec) -> Result<Design> {
    if !spec.family().is_linear_in_parameters() {
        return Err(Error::InvalidSpec(
            "scaling_law is fitted by nonlinear least squares".into(),
        ));
    }
    let cols = spec.coefficient_count();
    let mut data = Vec::with_capacity(features.len());
    let mut response = Vec::with_capacity(features.len());
    let mut floored = 0;
    for fv in features {
        let x = fv.project(spec.features())?;
        let mut row = Vec::with_capacity(cols);
        expand_row(spec.family(), &x, &mut row, &mut floored);
        data.push(row);
        response.push(fv.response);
    }
    let matrix = if data.is_empty() {
        Matrix::zeros(0, cols)
    } else {
        Matrix::from_rows(&data)?
    };
    let constant_columns = (1..cols)
        .filter(|&c| {
            let first = data.first().map(|r| r[c]);
            data.iter().all(|r| Some(r[c]) == first)
        })
        .collect();
    Ok(Design {
        matrix,
        response,
        floored,
        constant_columns,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub rank_deficient: bool,
}

/// Least-squares coefficients via pivoted QR; rank-deficient systems get
/// the minimum-norm solution and a flag.
pub fn fit_ols(matrix: &Matrix, response: &[f64]) -> Result<OlsFit> {
    let sol = lstsq(matrix, response)?;
    Ok(OlsFit {
        coefficients: sol.coefficients,
        rank_deficient: sol.rank_deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::FeatureSet;
    use alloc::vec;

    fn fv(fs: FeatureSet, values: Vec<f64>, y: f64) -> FeatureVector {
        FeatureVector::new(fs, values, y).unwrap()
    }

    #[test]
    fn poly2_one_feature_shape() {
        let rows: Vec<_> = (0..5).map(|i| fv(FeatureSet::SIZE, vec![i as f64 / 4.0], 1.0)).collect();
        let spec = PredictorSpec::new(PredictorFamily::Poly2, FeatureSet::SIZE).unwrap();
        let d = design_matrix(&rows, &spec).unwrap();
        assert_eq!((d.matrix.rows(), d.matrix.cols()), (5, 3));
        assert_eq!(d.matrix.row(2), &[1.0, 0.5, 0.25]);
    }

    #[test]
    fn poly3_eight_features_no_cross_terms() {
        let rows: Vec<_> = (0..30)
            .map(|i| {
                let x: Vec<f64> = (0..8).map(|k| ((i * 7 + k * 3) % 11) as f64 / 10.0).collect();
                fv(FeatureSet::ALL, x, 1.0)
            })
            .collect();
        let spec = PredictorSpec::new(PredictorFamily::Poly3, FeatureSet::ALL).unwrap();
        let d = design_matrix(&rows, &spec).unwrap();
        assert_eq!(d.matrix.cols(), 25);
        let x = rows[3].values();
        let r = d.matrix.row(3);
        for (k, &v) in x.iter().enumerate() {
            assert_eq!(&r[1 + 3 * k..4 + 3 * k], &[v, v * v, v * v * v]);
        }
    }

    #[test]
    fn log_floor_is_counted() {
        let rows = vec![
            fv(FeatureSet::JSD, vec![0.0], 1.0),
            fv(FeatureSet::JSD, vec![0.5], 2.0),
        ];
        let spec = PredictorSpec::new(PredictorFamily::Logarithmic, FeatureSet::JSD).unwrap();
        let d = design_matrix(&rows, &spec).unwrap();
        assert_eq!(d.floored, 1);
        assert_eq!(d.matrix.get(0, 1), libm::log(LOG_FLOOR));
    }

    #[test]
    fn constant_column_flagged() {
        let rows: Vec<_> = (0..4).map(|_| fv(FeatureSet::SIZE, vec![0.5], 1.0)).collect();
        let spec = PredictorSpec::new(PredictorFamily::Linear, FeatureSet::SIZE).unwrap();
        assert_eq!(design_matrix(&rows, &spec).unwrap().constant_columns, vec![1]);
    }

    #[test]
    fn missing_feature() {
        let rows = vec![fv(FeatureSet::SIZE, vec![0.5], 1.0)];
        let spec = PredictorSpec::new(PredictorFamily::Linear, FeatureSet::JSD).unwrap();
        assert!(matches!(
            design_matrix(&rows, &spec),
            Err(Error::FeatureUnavailable { .. })
        ));
    }

    #[test]
    fn exact_line_fit() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]).unwrap();
        let fit = fit_ols(&a, &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        let pred = a.mul_vec(&fit.coefficients);
        assert!(pred.iter().zip([1.0, 3.0, 5.0]).all(|(p, y)| (p - y).abs() < 1e-12));
    }
}
