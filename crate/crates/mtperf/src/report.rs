//! Pipelines behind the subcommands. Each step computes everything first
//! and returns tables; files are written afterwards in a fixed order.

use std::fs;
use std::path::{Path, PathBuf};

use mtperf_core::data::{
    domain_category, DomainCategory, PartitionKey, PartitionScheme, ProfileTable, RecordSet, DEFAULT_MIN_PARTITION,
};
use mtperf_core::diagnostics::{diagnose_scheme, residual_summary, BoxplotStats, PartitionDiagnostics};
use mtperf_core::featurize::{FeatureSet, Featurizer, SizeScaling};
use mtperf_core::importance::{importance_report, ImportanceOptions, ImportanceReport, RfGrid, RfHyperparams};
use mtperf_core::regress::{evaluate_scheme, CvConfig, CvReport, EvalOptions, PredictorFamily, PredictorSpec};
use mtperf_core::rng::DEFAULT_SEED;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io;
use crate::svg::{self, Series};
use crate::table::{Format, Table, PLOT_DECIMALS, TABLE_DECIMALS};

/// Abscissae per fitted curve.
pub const CURVE_POINTS: usize = 100;

pub const BUNDLED_RECORDS_LABEL: &str = "bundled:data/records.csv";
pub const BUNDLED_PROFILES_LABEL: &str = "bundled:data/language_profiles.csv";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// An input file as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    pub role: &'static str,
    pub label: String,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub records: RecordSet,
    pub profiles: ProfileTable,
    pub sources: Vec<Source>,
}

impl Inputs {
    pub fn bundled() -> Inputs {
        Inputs::load(None, None, None).expect("bundled data parses")
    }

    /// Reads records and profiles (bundled copies when `None`) and, when
    /// given, a JSD table whose values are attached to the records.
    pub fn load(records: Option<&Path>, profiles: Option<&Path>, jsd: Option<&Path>) -> Result<Inputs> {
        let mut sources = Vec::new();
        let mut text = |role, path: Option<&Path>, bundled: &'static str, label: &str| -> Result<(String, String)> {
            let (body, label) = match path {
                Some(p) => (io::read_text(p)?, p.display().to_string()),
                None => (bundled.to_string(), label.to_string()),
            };
            sources.push(Source {
                role,
                label: label.clone(),
                sha256: sha256_hex(body.as_bytes()),
            });
            Ok((body, label))
        };
        let (rtext, rlabel) = text("records", records, io::BUNDLED_RECORDS, BUNDLED_RECORDS_LABEL)?;
        let (ptext, plabel) = text("profiles", profiles, io::BUNDLED_PROFILES, BUNDLED_PROFILES_LABEL)?;
        let mut records = io::parse_records(&rtext, &rlabel)?;
        let profiles = io::parse_language_profiles(&ptext, &plabel)?;
        if let Some(p) = jsd {
            let body = io::read_text(p)?;
            let label = p.display().to_string();
            records = io::attach_jsd(&records, &io::parse_jsd_table(&body, &label)?)?;
            sources.push(Source {
                role: "jsd",
                label,
                sha256: sha256_hex(body.as_bytes()),
            });
        }
        profiles.check_covers(&records)?;
        Ok(Inputs {
            records,
            profiles,
            sources,
        })
    }

    fn featurizer(&self, cfg: &RunConfig, features: FeatureSet) -> Result<Featurizer> {
        Ok(Featurizer::new(
            &self.records,
            features,
            Some(self.profiles.clone()),
            cfg.size_scaling,
        )?)
    }
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub features: Vec<FeatureSet>,
    pub schemes: Vec<PartitionScheme>,
    pub families: Vec<PredictorFamily>,
    /// Predictor checked by `diagnose` and by the report's diagnostics.
    pub diagnose_family: PredictorFamily,
    pub diagnose_scheme: PartitionScheme,
    /// Feature set for `rank`; `None` takes every available feature.
    pub rank_features: Option<FeatureSet>,
    pub k: usize,
    pub seed: u64,
    pub size_scaling: SizeScaling,
    pub min_partition: usize,
    pub weighted: bool,
    pub grid_search: bool,
    /// Grid cells to sample; 0 runs the full grid.
    pub grid_cells: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            features: vec![FeatureSet::SIZE],
            schemes: PartitionScheme::ALL.to_vec(),
            families: PredictorFamily::ALL.to_vec(),
            diagnose_family: PredictorFamily::ScalingLaw,
            diagnose_scheme: PartitionScheme::ByFinetuneTest,
            rank_features: None,
            k: 10,
            seed: DEFAULT_SEED,
            size_scaling: SizeScaling::Max,
            min_partition: DEFAULT_MIN_PARTITION,
            weighted: false,
            grid_search: false,
            grid_cells: 0,
        }
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    fn cv(&self) -> CvConfig {
        CvConfig {
            k: self.k,
            seed: self.seed,
            shuffle: true,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "features": self.features.iter().map(|f| f.label()).collect::<Vec<_>>(),
            "schemes": self.schemes.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            "families": self.families.iter().map(|f| f.as_str()).collect::<Vec<_>>(),
            "diagnose_family": self.diagnose_family.as_str(),
            "diagnose_scheme": self.diagnose_scheme.as_str(),
            "rank_features": self.rank_features.map(|f| f.label()),
            "k": self.k,
            "seed": self.seed,
            "size_scaling": self.size_scaling.as_str(),
            "min_partition": self.min_partition,
            "weighted": self.weighted,
            "grid_search": self.grid_search,
            "grid_cells": self.grid_cells,
        })
    }

    /// Flags that reproduce this configuration.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = Vec::new();
        for f in &self.features {
            args.extend(["--features".into(), f.label()]);
        }
        args.extend(["--scheme".into(), join(&self.schemes)]);
        args.extend(["--family".into(), join(&self.families)]);
        args.extend(["--diagnose-family".into(), self.diagnose_family.to_string()]);
        args.extend(["--diagnose-scheme".into(), self.diagnose_scheme.to_string()]);
        if let Some(f) = self.rank_features {
            args.extend(["--rank-features".into(), f.label()]);
        }
        args.extend(["--k".into(), self.k.to_string()]);
        args.extend(["--seed".into(), self.seed.to_string()]);
        args.extend(["--size-scaling".into(), self.size_scaling.as_str().into()]);
        args.extend(["--min-partition".into(), self.min_partition.to_string()]);
        if self.weighted {
            args.push("--weighted".into());
        }
        if self.grid_search {
            args.push("--grid-search".into());
            args.extend(["--grid-cells".into(), self.grid_cells.to_string()]);
        }
        args
    }
}

/// CV reports for every valid (features, family, scheme) cell.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub reports: Vec<CvReport>,
    pub warnings: Vec<String>,
}

pub fn evaluate(inputs: &Inputs, cfg: &RunConfig) -> Result<Evaluation> {
    let mut reports = Vec::new();
    let mut warnings = Vec::new();
    let opts = EvalOptions {
        cv: cfg.cv(),
        min_partition: cfg.min_partition,
        weighted: cfg.weighted,
    };
    for &features in &cfg.features {
        let featurizer = inputs.featurizer(cfg, features)?;
        for &family in &cfg.families {
            let spec = match PredictorSpec::new(family, features) {
                Ok(s) => s,
                Err(e) => {
                    warnings.push(format!("skipping {family} on {features}: {e}"));
                    continue;
                }
            };
            for &scheme in &cfg.schemes {
                match evaluate_scheme(&inputs.records, scheme, &spec, &featurizer, &opts) {
                    Ok(r) => {
                        warnings.extend(r.warnings().into_iter().map(|w| format!("{spec} / {scheme}: {w}")));
                        reports.push(r);
                    }
                    Err(mtperf_core::Error::EmptyAnalysis { reason }) => {
                        warnings.push(format!("skipping {spec} / {scheme}: {reason}"));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    if reports.is_empty() {
        return Err(mtperf_core::Error::EmptyAnalysis {
            reason: "no evaluable (family, scheme, features) cell".into(),
        }
        .into());
    }
    Ok(Evaluation { reports, warnings })
}

impl Evaluation {
    /// Long-format grid; `best_family` flags the lowest RMSE among families
    /// for a (features, scheme) pair, `best_scheme` the lowest among schemes
    /// for a (features, family) pair.
    pub fn grid_table(&self) -> Table {
        let mut t = Table::new(
            "rmse_grid",
            &[
                "features",
                "family",
                "scheme",
                "rmse",
                "n_partitions",
                "removed_small",
                "skipped",
                "best_family",
                "best_scheme",
            ],
            TABLE_DECIMALS,
        );
        let min_over = |pred: &dyn Fn(&CvReport) -> bool| {
            self.reports
                .iter()
                .filter(|r| pred(r))
                .map(|r| r.overall_rmse)
                .fold(f64::INFINITY, f64::min)
        };
        for r in &self.reports {
            let fs = r.spec.features();
            let best_family = r.overall_rmse <= min_over(&|o| o.spec.features() == fs && o.scheme == r.scheme);
            let best_scheme =
                r.overall_rmse <= min_over(&|o| o.spec.features() == fs && o.spec.family() == r.spec.family());
            t.push(vec![
                fs.label().into(),
                r.spec.family().as_str().into(),
                r.scheme.as_str().into(),
                r.overall_rmse.into(),
                r.partitions.len().into(),
                r.removed_small.len().into(),
                r.skipped.len().into(),
                best_family.into(),
                best_scheme.into(),
            ]);
        }
        t
    }

    pub fn folds_table(&self) -> Table {
        let mut t = Table::new(
            "cv_folds",
            &["features", "family", "scheme", "partition", "n", "k", "mean_rmse", "fold_rmse"],
            TABLE_DECIMALS,
        );
        for r in &self.reports {
            for p in &r.partitions {
                let folds: Vec<String> = p.fold_rmse.iter().map(|v| format!("{v:.TABLE_DECIMALS$}")).collect();
                t.push(vec![
                    r.spec.features().label().into(),
                    r.spec.family().as_str().into(),
                    r.scheme.as_str().into(),
                    p.key.label().into(),
                    p.n.into(),
                    p.k.into(),
                    p.mean_rmse.into(),
                    folds.join(";").into(),
                ]);
            }
        }
        t
    }

    /// The report for one cell, if it was evaluated.
    pub fn get(&self, features: FeatureSet, family: PredictorFamily, scheme: PartitionScheme) -> Option<&CvReport> {
        self.reports
            .iter()
            .find(|r| r.spec.features() == features && r.spec.family() == family && r.scheme == scheme)
    }
}

/// Residual diagnostics for one predictor and scheme.
#[derive(Debug, Clone)]
pub struct Diagnosis {
    pub spec: PredictorSpec,
    pub scheme: PartitionScheme,
    pub partitions: Vec<PartitionDiagnostics>,
    pub removed_small: Vec<(PartitionKey, usize)>,
    pub boxplots: Vec<BoxplotStats>,
    featurizer: Featurizer,
}

pub fn diagnose(inputs: &Inputs, cfg: &RunConfig, features: FeatureSet) -> Result<Diagnosis> {
    let spec = PredictorSpec::new(cfg.diagnose_family, features)?;
    let featurizer = inputs.featurizer(cfg, features)?;
    let (partitions, removed_small) = diagnose_scheme(
        &inputs.records,
        cfg.diagnose_scheme,
        &spec,
        &featurizer,
        cfg.min_partition,
        cfg.seed,
    )?;
    let series: Vec<_> = partitions.iter().filter_map(|p| p.series.clone()).collect();
    Ok(Diagnosis {
        spec,
        scheme: cfg.diagnose_scheme,
        boxplots: residual_summary(&series),
        partitions,
        removed_small,
        featurizer,
    })
}

impl Diagnosis {
    pub fn warnings(&self) -> Vec<String> {
        self.removed_small
            .iter()
            .map(|(k, n)| format!("{} / {}: partition {k} dropped ({n} records)", self.spec, self.scheme))
            .collect()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(
            "diagnostics",
            &[
                "partition",
                "n",
                "k2",
                "normality_p",
                "normal",
                "bp_lm",
                "bp_p",
                "homoscedastic",
                "notes",
            ],
            TABLE_DECIMALS,
        );
        for p in &self.partitions {
            let r = &p.result;
            let normal = r.normality_p.map(|v| v > mtperf_core::diagnostics::HOMOSCEDASTICITY_ALPHA);
            t.push(vec![
                r.partition_key.label().into(),
                r.n.into(),
                r.normality_stat.into(),
                r.normality_p.into(),
                normal.into(),
                r.hetero_stat.into(),
                r.hetero_p.into(),
                r.homoscedastic.into(),
                r.notes.join("; ").into(),
            ]);
        }
        t
    }

    pub fn residuals_table(&self) -> Table {
        let mut t = Table::new("residuals", &["partition", "observed", "fitted", "residual"], PLOT_DECIMALS);
        for s in self.partitions.iter().filter_map(|p| p.series.as_ref()) {
            for i in 0..s.len() {
                t.push(vec![
                    s.partition_key.label().into(),
                    s.observed[i].into(),
                    s.fitted[i].into(),
                    s.residuals[i].into(),
                ]);
            }
        }
        t
    }

    pub fn boxplot_table(&self) -> Table {
        let mut t = Table::new(
            "boxplots",
            &[
                "partition",
                "n",
                "mean",
                "variance",
                "min",
                "q1",
                "median",
                "q3",
                "max",
                "iqr",
                "whisker_low",
                "whisker_high",
                "outliers",
            ],
            PLOT_DECIMALS,
        );
        for b in &self.boxplots {
            let outliers: Vec<String> = b.outliers.iter().map(|v| format!("{v:.PLOT_DECIMALS$}")).collect();
            t.push(vec![
                b.partition_key.label().into(),
                b.n.into(),
                b.mean.into(),
                b.variance.into(),
                b.min.into(),
                b.q1.into(),
                b.median.into(),
                b.q3.into(),
                b.max.into(),
                b.iqr.into(),
                b.whisker_low.into(),
                b.whisker_high.into(),
                outliers.join(";").into(),
            ]);
        }
        t
    }

    /// Fitted curves over each partition's size range, for size-only
    /// predictors; empty otherwise.
    pub fn curves(&self, records: &RecordSet) -> Vec<(PartitionKey, Vec<(f64, f64)>)> {
        if self.spec.features() != FeatureSet::SIZE {
            return Vec::new();
        }
        let mut out = Vec::new();
        for p in &self.partitions {
            let Some(model) = &p.model else { continue };
            let key = p.result.partition_key;
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| self.scheme.key_of(r) == key)
                .map(|r| self.featurizer.scaler().apply(r.finetune_size))
                .collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                continue;
            }
            let pts = (0..CURVE_POINTS)
                .filter_map(|i| {
                    let x = lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64;
                    model.predict_values(&[x]).ok().map(|y| (x, y))
                })
                .collect();
            out.push((key, pts));
        }
        out
    }

    pub fn curves_table(&self, records: &RecordSet) -> Table {
        let mut t = Table::new("curves", &["partition", "family", "s_tilde", "predicted"], PLOT_DECIMALS);
        for (key, pts) in self.curves(records) {
            for (x, y) in pts {
                t.push(vec![
                    key.label().into(),
                    self.spec.family().as_str().into(),
                    x.into(),
                    y.into(),
                ]);
            }
        }
        t
    }
}

/// Feature rankings plus the note shown when JSD is missing.
#[derive(Debug, Clone)]
pub struct Ranking {
    pub report: ImportanceReport,
    pub features: FeatureSet,
    pub banner: Option<String>,
}

pub const JSD_BANNER: &str = "jsd unavailable: ranking covers size and language distances only";

pub fn rank(inputs: &Inputs, cfg: &RunConfig) -> Result<Ranking> {
    let (features, banner) = match cfg.rank_features {
        Some(f) => (f, None),
        None if inputs.records.has_jsd() => (FeatureSet::ALL, None),
        None => (FeatureSet::SIZE.union(FeatureSet::LANG), Some(JSD_BANNER.to_string())),
    };
    let rows = inputs.featurizer(cfg, features)?.featurize_all(&inputs.records)?;
    let grid = cfg.grid_search.then(|| {
        let g = RfGrid::paper();
        if cfg.grid_cells == 0 || cfg.grid_cells >= g.len() {
            g.cells()
        } else {
            g.sample_cells(cfg.grid_cells, cfg.seed)
        }
    });
    let opts = ImportanceOptions {
        forest: RfHyperparams::RANKING,
        grid,
        cv: cfg.cv(),
        seed: cfg.seed,
    };
    Ok(Ranking {
        report: importance_report(&rows, &opts)?,
        features,
        banner,
    })
}

impl Ranking {
    pub fn table(&self) -> Table {
        let mut t = Table::new(
            "importance",
            &[
                "feature",
                "pearson_r",
                "pearson_p",
                "pearson_rank",
                "linear_weight",
                "weight_rank",
                "rf_percent",
                "rf_rank",
            ],
            TABLE_DECIMALS,
        );
        for r in &self.report.rows {
            t.push(vec![
                r.feature.name().into(),
                r.pearson_r.into(),
                r.pearson_p.into(),
                r.pearson_rank.to_string().into(),
                r.linear_weight.into(),
                r.weight_rank.to_string().into(),
                r.rf_percent.into(),
                r.rf_rank.to_string().into(),
            ]);
        }
        t
    }

    /// The winning grid cell and its CV RMSE.
    pub fn best_table(&self) -> Option<Table> {
        let g = self.report.grid.as_ref()?;
        let hp = &g.best;
        let mut t = Table::new(
            "rf_best",
            &[
                "n_estimators",
                "max_depth",
                "min_samples_split",
                "min_samples_leaf",
                "bootstrap",
                "cv_rmse",
            ],
            TABLE_DECIMALS,
        );
        t.push(vec![
            hp.n_estimators.into(),
            hp.max_depth.into(),
            hp.min_samples_split.into(),
            hp.min_samples_leaf.into(),
            hp.bootstrap.into(),
            g.best_rmse.into(),
        ]);
        Some(t)
    }

    pub fn grid_table(&self) -> Option<Table> {
        let g = self.report.grid.as_ref()?;
        let mut t = Table::new(
            "rf_grid",
            &[
                "n_estimators",
                "max_depth",
                "min_samples_split",
                "min_samples_leaf",
                "bootstrap",
                "mean_rmse",
                "best",
            ],
            TABLE_DECIMALS,
        );
        for c in &g.cells {
            let hp = &c.hyperparams;
            t.push(vec![
                hp.n_estimators.into(),
                hp.max_depth.into(),
                hp.min_samples_split.into(),
                hp.min_samples_leaf.into(),
                hp.bootstrap.into(),
                c.mean_rmse.into(),
                (*hp == g.best).into(),
            ]);
        }
        Some(t)
    }

    pub fn notes(&self) -> Vec<String> {
        let mut v: Vec<String> = self.banner.iter().cloned().collect();
        let dup = |n: &String| self.banner.is_some() && n.starts_with("jsd unavailable");
        v.extend(self.report.notes.iter().filter(|n| !dup(n)).cloned());
        v
    }
}

/// Raw points behind the spBLEU-vs-size scatter plots.
pub fn scatter_table(inputs: &Inputs, cfg: &RunConfig) -> Result<Table> {
    let featurizer = inputs.featurizer(cfg, FeatureSet::SIZE)?;
    let mut t = Table::new(
        "scatter",
        &[
            "finetune_corpus",
            "finetune_size",
            "test_corpus",
            "target_lang",
            "domain",
            "s_tilde",
            "jsd",
            "spbleu",
        ],
        PLOT_DECIMALS,
    );
    for r in &inputs.records {
        let domain = match domain_category(r) {
            DomainCategory::InDomain => "in",
            DomainCategory::OutDomain => "out",
        };
        t.push(vec![
            r.finetune_corpus.as_str().into(),
            (r.finetune_size as usize).into(),
            r.test_corpus.as_str().into(),
            r.target_lang.as_str().into(),
            domain.into(),
            featurizer.scaler().apply(r.finetune_size).into(),
            r.jsd.into(),
            r.spbleu.into(),
        ]);
    }
    Ok(t)
}

/// Table text, with the banner as a leading quote line in Markdown.
pub fn render_with_notes(table: &Table, format: Format, banner: Option<&str>) -> String {
    match (format, banner) {
        (Format::Md, Some(b)) => format!("> {b}\n\n{}", table.render(format)),
        _ => table.render(format),
    }
}

/// All files of a report, in write order, plus run notes.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub files: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

pub fn build_report(inputs: &Inputs, cfg: &RunConfig, format: Format) -> Result<Bundle> {
    let ext = format.extension();
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    let mut add = |name: &str, body: String| files.push((name.to_string(), body));

    let eval = evaluate(inputs, cfg)?;
    warnings.extend(eval.warnings.iter().cloned());
    add(&format!("rmse_grid.{ext}"), eval.grid_table().render(format));
    add(&format!("cv_folds.{ext}"), eval.folds_table().render(format));

    let diag = diagnose(inputs, cfg, cfg.features.first().copied().unwrap_or(FeatureSet::SIZE))?;
    warnings.extend(diag.warnings());
    add(&format!("diagnostics.{ext}"), diag.table().render(format));
    add(&format!("residuals.{ext}"), diag.residuals_table().render(format));
    add(&format!("boxplots.{ext}"), diag.boxplot_table().render(format));
    add(&format!("curves.{ext}"), diag.curves_table(&inputs.records).render(format));

    let ranking = rank(inputs, cfg)?;
    warnings.extend(ranking.notes());
    add(
        &format!("importance.{ext}"),
        render_with_notes(&ranking.table(), format, ranking.banner.as_deref()),
    );
    if let Some(g) = ranking.grid_table() {
        add(&format!("rf_grid.{ext}"), g.render(format));
    }

    let scatter = scatter_table(inputs, cfg)?;
    add(&format!("scatter.{ext}"), scatter.render(format));

    let sizer = inputs.featurizer(cfg, FeatureSet::SIZE)?;
    let mut series: Vec<Series> = Vec::new();
    for r in &inputs.records {
        let label = diag.scheme.key_of(r).label();
        let pt = (sizer.scaler().apply(r.finetune_size), r.spbleu);
        match series.iter_mut().find(|s| s.label == label && !s.line) {
            Some(s) => s.points.push(pt),
            None => series.push(Series {
                label,
                points: vec![pt],
                line: false,
            }),
        }
    }
    series.sort_by(|a, b| a.label.cmp(&b.label));
    for (key, pts) in diag.curves(&inputs.records) {
        series.push(Series {
            label: key.label(),
            points: pts,
            line: true,
        });
    }
    add(
        "scatter.svg",
        svg::xy_chart(&format!("spBLEU vs size, {}", diag.spec), "normalized size", "spBLEU", &series),
    );
    add(
        "boxplots.svg",
        svg::boxplot_chart(&format!("Residuals, {} / {}", diag.spec, diag.scheme), "residual", &diag.boxplots),
    );
    let resid: Vec<Series> = diag
        .partitions
        .iter()
        .filter_map(|p| p.series.as_ref())
        .map(|s| Series {
            label: s.partition_key.label(),
            points: s.fitted.iter().copied().zip(s.residuals.iter().copied()).collect(),
            line: false,
        })
        .collect();
    add(
        "residuals.svg",
        svg::xy_chart(&format!("Residuals vs fitted, {}", diag.spec), "fitted", "residual", &resid),
    );

    Ok(Bundle { files, warnings })
}

/// Run manifest: configuration, inputs and output checksums. Holds no
/// timestamps so reruns match byte for byte.
pub fn manifest(command: &str, inputs: &Inputs, cfg: &RunConfig, format: Format, bundle: &Bundle) -> String {
    let mut args = vec![command.to_string()];
    for s in &inputs.sources {
        if !s.label.starts_with("bundled:") {
            args.extend([format!("--{}", s.role), s.label.clone()]);
        }
    }
    args.extend(cfg.to_args());
    args.extend(["--format".into(), format.extension().into()]);
    let v = json!({
        "tool": "mtperf",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "args": args,
        "config": cfg.to_json(),
        "format": format.extension(),
        "inputs": inputs.sources.iter().map(|s| json!({
            "role": s.role,
            "path": s.label,
            "sha256": s.sha256,
        })).collect::<Vec<_>>(),
        "outputs": bundle.files.iter().map(|(name, body)| json!({
            "file": name,
            "sha256": sha256_hex(body.as_bytes()),
        })).collect::<Vec<_>>(),
        "notes": bundle.warnings,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("json tree");
    s.push('\n');
    s
}

/// Writes the bundle and its manifest into `dir`, creating it if needed.
pub fn write_bundle(dir: &Path, bundle: &Bundle, manifest: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let all = bundle
        .files
        .iter()
        .map(|(n, b)| (n.as_str(), b.as_str()))
        .chain([("manifest.json", manifest)]);
    for (name, body) in all {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// JSD values computed for a batch manifest, as a table `--jsd` accepts.
pub fn jsd_table(entries: &[io::JsdEntry]) -> Table {
    let mut t = Table::new(
        "jsd",
        &["finetune_corpus", "finetune_size", "test_corpus", "target_lang", "jsd"],
        PLOT_DECIMALS,
    );
    for e in entries {
        t.push(vec![
            e.key.finetune_corpus.as_str().into(),
            e.key.finetune_size.map(|s| s as usize).into(),
            e.key.test_corpus.as_str().into(),
            e.key.target_lang.as_str().into(),
            e.jsd.into(),
        ]);
    }
    t
}
