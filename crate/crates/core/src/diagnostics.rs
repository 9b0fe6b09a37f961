//! Residual extraction, normality and homoscedasticity tests, and residual
//! boxplot summaries.
//!
//! Models here are fitted on whole partitions; there are no held-out folds.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{
    filter_small_partitions, partition, Partition, PartitionKey, PartitionScheme, RecordSet,
};
use crate::featurize::Featurizer;
use crate::linalg::{lstsq, Matrix};
use crate::regress::{fit, FittedModel, PredictorSpec};
use crate::rng::{derive_seed, label_hash};
use crate::special::chi2_sf;
use crate::{Error, Result};

/// Significance level of the homoscedasticity decision.
pub const HOMOSCEDASTICITY_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub partition_key: PartitionKey,
    pub observed: Vec<f64>,
    pub fitted: Vec<f64>,
    /// `observed - fitted`
    pub residuals: Vec<f64>,
}

impl ResidualSeries {
    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }
}

/// Fits `spec` on the whole partition and returns its residuals together
/// with the fitted model.
pub fn residuals(
    spec: &PredictorSpec,
    part: &Partition,
    featurizer: &Featurizer,
    seed: u64,
) -> Result<(ResidualSeries, FittedModel)> {
    let featurizer = featurizer.with_features(spec.features());
    let rows = featurizer.featurize_all(&part.records)?;
    let model = fit(spec, &rows, derive_seed(seed, &[label_hash(&part.key.label())]))?
        .with_key(part.key);
    let fitted = model.predict(&rows)?;
    let observed: Vec<f64> = rows.iter().map(|r| r.response).collect();
    let residuals = observed.iter().zip(&fitted).map(|(o, f)| o - f).collect();
    Ok((
        ResidualSeries {
            partition_key: part.key,
            observed,
            fitted,
            residuals,
        },
        model,
    ))
}

fn central_moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

/// D'Agostino skewness transform of the biased sample skewness `g1`.
fn skew_z(g1: f64, n: f64) -> f64 {
    let y = g1 * libm::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + libm::sqrt(2.0 * (beta2 - 1.0));
    let delta = 1.0 / libm::sqrt(0.5 * libm::log(w2));
    let alpha = libm::sqrt(2.0 / (w2 - 1.0));
    delta * libm::asinh(y / alpha)
}

/// Anscombe-Glynn transform of the sample kurtosis `b2 = m4 / m2^2`.
fn kurtosis_z(b2: f64, n: f64) -> f64 {
    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let var = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    let x = (b2 - e) / libm::sqrt(var);
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * libm::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
    let a = 6.0
        + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + libm::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * libm::sqrt(2.0 / (a - 4.0));
    let term2 = if denom == 0.0 {
        f64::NAN
    } else {
        libm::copysign(libm::cbrt((1.0 - 2.0 / a) / libm::fabs(denom)), denom)
    };
    (term1 - term2) / libm::sqrt(2.0 / (9.0 * a))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityTest {
    pub k2: f64,
    pub p: f64,
    pub z_skew: f64,
    pub z_kurt: f64,
    /// Set when n < 20, where the kurtosis transform is unreliable.
    pub small_sample: bool,
}

/// D'Agostino-Pearson omnibus K² test.
pub fn dagostino_pearson(sample: &[f64]) -> Result<NormalityTest> {
    if sample.len() < 8 {
        return Err(Error::SampleTooSmall {
            needed: 8,
            given: sample.len(),
        });
    }
    let (mean, m2, m3, m4) = central_moments(sample);
    let scale = sample.iter().fold(0.0f64, |a, v| a.max(libm::fabs(v - mean)));
    // spread at rounding level counts as constant
    if m2 <= (8.0 * f64::EPSILON * scale) * (8.0 * f64::EPSILON * scale) {
        return Err(Error::DegenerateSample);
    }
    let n = sample.len() as f64;
    let z_skew = skew_z(m3 / libm::pow(m2, 1.5), n);
    let z_kurt = kurtosis_z(m4 / (m2 * m2), n);
    let k2 = z_skew * z_skew + z_kurt * z_kurt;
    if !k2.is_finite() {
        return Err(Error::TestUndefined("kurtosis transform undefined for this sample"));
    }
    Ok(NormalityTest {
        k2,
        p: chi2_sf(k2, 2.0),
        z_skew,
        z_kurt,
        small_sample: sample.len() < 20,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeteroscedasticityTest {
    pub lm: f64,
    pub p: f64,
}

impl HeteroscedasticityTest {
    pub fn homoscedastic(&self) -> bool {
        self.p >= HOMOSCEDASTICITY_ALPHA
    }
}

/// Breusch-Pagan test: `LM = n R²` of squared residuals regressed on the
/// fitted values, referred to χ²(1).
pub fn breusch_pagan(residuals: &[f64], fitted: &[f64]) -> Result<HeteroscedasticityTest> {
    if residuals.len() != fitted.len() {
        return Err(Error::LengthMismatch {
            left: residuals.len(),
            right: fitted.len(),
        });
    }
    let n = residuals.len();
    if n < 5 {
        return Err(Error::SampleTooSmall { needed: 5, given: n });
    }
    if fitted.iter().all(|&f| f == fitted[0]) {
        return Err(Error::TestUndefined("fitted values are constant"));
    }
    let e2: Vec<f64> = residuals.iter().map(|e| e * e).collect();
    let mean = e2.iter().sum::<f64>() / n as f64;
    let sst: f64 = e2.iter().map(|v| (v - mean) * (v - mean)).sum();
    if sst <= 0.0 {
        return Ok(HeteroscedasticityTest { lm: 0.0, p: 1.0 });
    }
    let rows: Vec<[f64; 2]> = fitted.iter().map(|&f| [1.0, f]).collect();
    let a = Matrix::from_rows(&rows)?;
    let beta = lstsq(&a, &e2)?.coefficients;
    let pred = a.mul_vec(&beta);
    let sse: f64 = e2.iter().zip(&pred).map(|(y, p)| (y - p) * (y - p)).sum();
    let r2 = (1.0 - sse / sst).clamp(0.0, 1.0);
    let lm = n as f64 * r2;
    Ok(HeteroscedasticityTest {
        lm,
        p: chi2_sf(lm, 1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsResult {
    pub partition_key: PartitionKey,
    pub n: usize,
    pub normality_stat: Option<f64>,
    pub normality_p: Option<f64>,
    pub hetero_stat: Option<f64>,
    pub hetero_p: Option<f64>,
    pub homoscedastic: Option<bool>,
    pub notes: Vec<String>,
}

impl DiagnosticsResult {
    fn not_assessable(key: PartitionKey, n: usize, why: String) -> Self {
        DiagnosticsResult {
            partition_key: key,
            n,
            normality_stat: None,
            normality_p: None,
            hetero_stat: None,
            hetero_p: None,
            homoscedastic: None,
            notes: alloc::vec![format!("not assessable: {why}")],
        }
    }
}

/// Runs both tests on one residual series; test failures become notes.
pub fn assess(series: &ResidualSeries) -> DiagnosticsResult {
    let mut out = DiagnosticsResult {
        partition_key: series.partition_key,
        n: series.len(),
        normality_stat: None,
        normality_p: None,
        hetero_stat: None,
        hetero_p: None,
        homoscedastic: None,
        notes: Vec::new(),
    };
    match dagostino_pearson(&series.residuals) {
        Ok(t) => {
            out.normality_stat = Some(t.k2);
            out.normality_p = Some(t.p);
            if t.small_sample {
                out.notes.push(format!("normality: n = {} < 20, approximate", series.len()));
            }
        }
        Err(e) => out.notes.push(format!("normality not assessable: {e}")),
    }
    match breusch_pagan(&series.residuals, &series.fitted) {
        Ok(t) => {
            out.hetero_stat = Some(t.lm);
            out.hetero_p = Some(t.p);
            out.homoscedastic = Some(t.homoscedastic());
        }
        Err(e) => out.notes.push(format!("homoscedasticity not assessable: {e}")),
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionDiagnostics {
    pub result: DiagnosticsResult,
    /// Absent when the fit failed.
    pub series: Option<ResidualSeries>,
    pub model: Option<FittedModel>,
}

/// Diagnostics per kept partition, plus partitions removed as too small.
pub type SchemeDiagnostics = (Vec<PartitionDiagnostics>, Vec<(PartitionKey, usize)>);

/// Full-partition fits and diagnostics for every partition of `scheme`.
pub fn diagnose_scheme(
    records: &RecordSet,
    scheme: PartitionScheme,
    spec: &PredictorSpec,
    featurizer: &Featurizer,
    min_partition: usize,
    seed: u64,
) -> Result<SchemeDiagnostics> {
    let filtered = filter_small_partitions(partition(records, scheme), min_partition)?;
    let mut out = Vec::with_capacity(filtered.kept.len());
    for part in &filtered.kept {
        match residuals(spec, part, featurizer, seed) {
            Ok((series, model)) => out.push(PartitionDiagnostics {
                result: assess(&series),
                series: Some(series),
                model: Some(model),
            }),
            Err(e @ Error::FeatureUnavailable { .. }) => return Err(e),
            Err(e) => out.push(PartitionDiagnostics {
                result: DiagnosticsResult::not_assessable(part.key, part.records.len(), format!("{e}")),
                series: None,
                model: None,
            }),
        }
    }
    Ok((out, filtered.removed))
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxplotStats {
    pub partition_key: PartitionKey,
    pub n: usize,
    pub mean: f64,
    /// Sample variance (n - 1 denominator; 0 for a single value).
    pub variance: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
    /// Most extreme values within 1.5 IQR of the quartiles.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Boxplot summary of one residual sample. Panics on an empty sample.
pub fn boxplot(key: PartitionKey, values: &[f64]) -> BoxplotStats {
    assert!(!values.is_empty(), "boxplot of an empty sample");
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let mean = s.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let q1 = quantile_sorted(&s, 0.25);
    let median = quantile_sorted(&s, 0.5);
    let q3 = quantile_sorted(&s, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = s.iter().copied().filter(|&v| v >= lo_fence && v <= hi_fence).collect();
    BoxplotStats {
        partition_key: key,
        n,
        mean,
        variance,
        min: s[0],
        q1,
        median,
        q3,
        max: s[n - 1],
        iqr,
        whisker_low: inside.first().copied().unwrap_or(q1),
        whisker_high: inside.last().copied().unwrap_or(q3),
        outliers: s.iter().copied().filter(|&v| v < lo_fence || v > hi_fence).collect(),
    }
}

/// Boxplot summaries for a list of residual series, skipping empty ones.
pub fn residual_summary(series: &[ResidualSeries]) -> Vec<BoxplotStats> {
    series
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| boxplot(s.partition_key, &s.residuals))
        .collect()
}
