//! Command-line surface. Every flag can also come from an `MTPERF_*`
//! environment variable.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mtperf_core::data::{PartitionScheme, DEFAULT_MIN_PARTITION};
use mtperf_core::featurize::{FeatureSet, SizeScaling};
use mtperf_core::regress::PredictorFamily;
use mtperf_core::rng::DEFAULT_SEED;

use crate::error::{Error, Result};
use crate::io;
use crate::report::{self, Bundle, Inputs, RunConfig};
use crate::table::Format;

#[derive(Debug, Parser)]
#[command(name = "mtperf", version, about = "Predict MT spBLEU on low-resource languages from corpus and language features")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cross-validated RMSE for every family x scheme x feature set.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Residual normality and homoscedasticity for one family and scheme.
    Diagnose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Feature rankings by correlation, linear weight and forest importance.
    Rank {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        forest: ForestArgs,
    },
    /// Jensen-Shannon divergence between two corpora, or a batch of pairs.
    Jsd(JsdArgs),
    /// Every table, plot data file, SVG and the run manifest.
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        forest: ForestArgs,
        /// Family for the diagnostics section.
        #[arg(long, env = "MTPERF_DIAGNOSE_FAMILY", default_value = "scaling_law")]
        diagnose_family: PredictorFamily,
        /// Scheme for the diagnostics section.
        #[arg(long, env = "MTPERF_DIAGNOSE_SCHEME", default_value = "by_finetune_test")]
        diagnose_scheme: PartitionScheme,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Records CSV (bundled data when omitted).
    #[arg(long, env = "MTPERF_RECORDS")]
    pub records: Option<PathBuf>,
    /// Language profile CSV (bundled data when omitted).
    #[arg(long, env = "MTPERF_PROFILES")]
    pub profiles: Option<PathBuf>,
    /// JSD table as written by `jsd --batch`, attached to the records.
    #[arg(long, env = "MTPERF_JSD")]
    pub jsd: Option<PathBuf>,
    #[arg(long, env = "MTPERF_K", default_value_t = 10)]
    pub k: usize,
    #[arg(long, env = "MTPERF_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, env = "MTPERF_SIZE_SCALING", default_value = "max")]
    pub size_scaling: SizeScaling,
    #[arg(long, env = "MTPERF_MIN_PARTITION", default_value_t = DEFAULT_MIN_PARTITION)]
    pub min_partition: usize,
    /// Weight partition means by partition size.
    #[arg(long, env = "MTPERF_WEIGHTED")]
    pub weighted: bool,
    /// Output directory; tables go to stdout when omitted.
    #[arg(long, env = "MTPERF_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "MTPERF_FORMAT", default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Feature set such as `size`, `jsd`, `size,jsd,lang`; repeatable.
    #[arg(long, env = "MTPERF_FEATURES")]
    pub features: Vec<FeatureSet>,
    /// Partitioning schemes, comma separated.
    #[arg(long, env = "MTPERF_SCHEME", value_delimiter = ',')]
    pub scheme: Vec<PartitionScheme>,
    /// Predictor families, comma separated.
    #[arg(long, env = "MTPERF_FAMILY", value_delimiter = ',')]
    pub family: Vec<PredictorFamily>,
}

#[derive(Debug, Args)]
pub struct ForestArgs {
    /// Features to rank; all available when omitted.
    #[arg(long, env = "MTPERF_RANK_FEATURES")]
    pub rank_features: Option<FeatureSet>,
    /// Tune the forest over the hyperparameter grid first.
    #[arg(long, env = "MTPERF_GRID_SEARCH")]
    pub grid_search: bool,
    /// Grid cells to sample (0 = full grid).
    #[arg(long, env = "MTPERF_GRID_CELLS", default_value_t = 0)]
    pub grid_cells: usize,
}

#[derive(Debug, Args)]
pub struct JsdArgs {
    /// First corpus.
    #[arg(required_unless_present = "batch")]
    pub a: Option<PathBuf>,
    /// Second corpus.
    #[arg(required_unless_present = "batch")]
    pub b: Option<PathBuf>,
    /// Stopword list, one word per line.
    #[arg(long, env = "MTPERF_STOPWORDS")]
    pub stopwords: Option<PathBuf>,
    /// Manifest of corpus pairs; writes a JSD table.
    #[arg(long, conflicts_with_all = ["a", "b"])]
    pub batch: Option<PathBuf>,
    /// Output file for `--batch` (stdout when omitted).
    #[arg(long, env = "MTPERF_OUT")]
    pub out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            k: self.k,
            seed: self.seed,
            size_scaling: self.size_scaling,
            min_partition: self.min_partition,
            weighted: self.weighted,
            ..RunConfig::default()
        }
    }

    fn inputs(&self) -> Result<Inputs> {
        Inputs::load(self.records.as_deref(), self.profiles.as_deref(), self.jsd.as_deref())
    }
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if !self.features.is_empty() {
            cfg.features = self.features.clone();
        }
        if !self.scheme.is_empty() {
            cfg.schemes = self.scheme.clone();
        }
        if !self.family.is_empty() {
            cfg.families = self.family.clone();
        }
    }
}

impl ForestArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.rank_features = self.rank_features;
        cfg.grid_search = self.grid_search;
        cfg.grid_cells = self.grid_cells;
    }
}

fn one<T: Copy + std::fmt::Display>(what: &str, given: &[T], default: T) -> Result<T> {
    match given {
        [] => Ok(default),
        [x] => Ok(*x),
        _ => Err(Error::Usage(format!("diagnose takes exactly one {what}"))),
    }
}

fn finish(command: &str, common: &Common, inputs: &Inputs, cfg: &RunConfig, bundle: Bundle) -> Result<()> {
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    match &common.out {
        Some(dir) => {
            let manifest = report::manifest(command, inputs, cfg, common.format, &bundle);
            for path in report::write_bundle(dir, &bundle, &manifest)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            let (_, body) = bundle.files.first().expect("non-empty bundle");
            print_stdout(body)?;
        }
    }
    Ok(())
}

fn print_stdout(body: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(body.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

fn run_jsd(args: &JsdArgs) -> Result<()> {
    let stopwords = match &args.stopwords {
        Some(p) => io::load_stopwords(p)?,
        None => Default::default(),
    };
    if let Some(manifest) = &args.batch {
        let text = io::read_text(manifest)?;
        let base = manifest.parent().unwrap_or(Path::new("."));
        let pairs = io::parse_jsd_manifest(&text, &manifest.display().to_string(), base)?;
        let entries = pairs
            .iter()
            .map(|p| {
                Ok(io::JsdEntry {
                    key: p.key,
                    jsd: io::file_jsd(&p.finetune_path, &p.test_path, &stopwords)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let csv = report::jsd_table(&entries).to_csv();
        return match &args.out {
            Some(path) => std::fs::write(path, csv).map_err(|e| Error::io(path, e)),
            None => print_stdout(&csv),
        };
    }
    let (a, b) = (args.a.as_deref(), args.b.as_deref());
    let v = io::file_jsd(a.expect("clap requires a"), b.expect("clap requires b"), &stopwords)?;
    print_stdout(&format!("{v:.6}\n"))
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Evaluate { common, grid } => {
            let mut cfg = common.config();
            grid.apply(&mut cfg);
            let inputs = common.inputs()?;
            let eval = report::evaluate(&inputs, &cfg)?;
            let ext = common.format.extension();
            let bundle = Bundle {
                files: vec![
                    (format!("rmse_grid.{ext}"), eval.grid_table().render(common.format)),
                    (format!("cv_folds.{ext}"), eval.folds_table().render(common.format)),
                ],
                warnings: eval.warnings,
            };
            finish("evaluate", common, &inputs, &cfg, bundle)
        }
        Command::Diagnose { common, grid } => {
            let mut cfg = common.config();
            cfg.diagnose_family = one("family", &grid.family, PredictorFamily::ScalingLaw)?;
            cfg.diagnose_scheme = one("scheme", &grid.scheme, PartitionScheme::ByFinetuneTest)?;
            let features = one("feature set", &grid.features, FeatureSet::SIZE)?;
            cfg.features = vec![features];
            let inputs = common.inputs()?;
            let diag = report::diagnose(&inputs, &cfg, features)?;
            let ext = common.format.extension();
            let f = common.format;
            let bundle = Bundle {
                files: vec![
                    (format!("diagnostics.{ext}"), diag.table().render(f)),
                    (format!("residuals.{ext}"), diag.residuals_table().render(f)),
                    (format!("boxplots.{ext}"), diag.boxplot_table().render(f)),
                    (format!("curves.{ext}"), diag.curves_table(&inputs.records).render(f)),
                ],
                warnings: diag.warnings(),
            };
            finish("diagnose", common, &inputs, &cfg, bundle)
        }
        Command::Rank { common, forest } => {
            let mut cfg = common.config();
            forest.apply(&mut cfg);
            let inputs = common.inputs()?;
            let ranking = report::rank(&inputs, &cfg)?;
            let ext = common.format.extension();
            let mut main = report::render_with_notes(&ranking.table(), common.format, ranking.banner.as_deref());
            if common.out.is_none() {
                if let Some(best) = ranking.best_table() {
                    main.push('\n');
                    main.push_str(&best.render(common.format));
                }
            }
            let mut files = vec![(format!("importance.{ext}"), main)];
            if let Some(g) = ranking.grid_table() {
                files.push((format!("rf_grid.{ext}"), g.render(common.format)));
            }
            let bundle = Bundle {
                files,
                warnings: ranking.notes(),
            };
            finish("rank", common, &inputs, &cfg, bundle)
        }
        Command::Jsd(args) => run_jsd(args),
        Command::Report {
            common,
            grid,
            forest,
            diagnose_family,
            diagnose_scheme,
        } => {
            let mut cfg = common.config();
            grid.apply(&mut cfg);
            forest.apply(&mut cfg);
            cfg.diagnose_family = *diagnose_family;
            cfg.diagnose_scheme = *diagnose_scheme;
            let Some(dir) = &common.out else {
                return Err(Error::Usage("report needs --out DIR".into()));
            };
            let inputs = common.inputs()?;
            let bundle = report::build_report(&inputs, &cfg, common.format)?;
            for w in &bundle.warnings {
                eprintln!("warning: {w}");
            }
            let manifest = report::manifest("report", &inputs, &cfg, common.format, &bundle);
            let written = report::write_bundle(dir, &bundle, &manifest)?;
            eprintln!("wrote {} files to {}", written.len(), dir.display());
            Ok(())
        }
    }
}

/// Entry point for the binary: parses `std::env::args`, runs, reports
/// errors on stderr.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
