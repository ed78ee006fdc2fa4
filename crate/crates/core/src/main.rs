use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use genreforge::autoencoder;
use genreforge::dataset::LabeledDataset;
use genreforge::pipeline::{self, fit_minmax, ExperimentConfig, ExperimentReport, Stage};
use genreforge::schema::FeatureSchema;
use genreforge::selection::{train_forest, ForestConfig};
use genreforge::svm::{grid_search_cv, SvmModel};
use genreforge::{Error, ErrorKind, Result};

#[derive(Parser)]
#[command(
    name = "genreforge",
    version,
    about = "Content-based music genre classification pipeline"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration (TOML); defaults apply to missing fields
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed override
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker thread cap
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Errors only
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Extract 224-component content features from a WAV corpus
    Extract {
        /// Directory with one subdirectory of WAV files per class
        #[arg(long, env = "GENREFORGE_DATA", value_name = "DIR")]
        dataset: PathBuf,
        /// Output feature CSV
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Rank components by forest information gain and drop the useless ones
    Select {
        #[arg(long, value_name = "CSV")]
        features: PathBuf,
        /// Output directory for selection.csv and selected_features.csv
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Train the autoencoder and append bottleneck codes to each vector
    Encode {
        #[arg(long, value_name = "CSV")]
        features: PathBuf,
        /// Output directory for autoencoder.json, scaling.json, encoded_features.csv
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Grid-search and train the SVM on a feature CSV
    TrainSvm {
        #[arg(long, value_name = "CSV")]
        features: PathBuf,
        /// Output directory for cv.csv, svm.json, scaling.json
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the repeated train/test experiment
    Run {
        /// WAV corpus directory or feature CSV; overrides the config
        #[arg(long, env = "GENREFORGE_DATA", value_name = "PATH")]
        dataset: Option<PathBuf>,
        /// Output directory for the report and per-repetition artifacts
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Run only this stage (repeatable)
        #[arg(long, value_name = "NAME")]
        stage: Vec<String>,
    },
    /// Print the summary of a finished run
    Report {
        /// Run output directory or its report.csv
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Io => 1,
        ErrorKind::Config => 2,
        ErrorKind::Internal => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.quiet {
        log::LevelFilter::Error
    } else {
        match cli.global.verbose {
            0 => log::LevelFilter::Info,
            1 => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        }
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("cannot size thread pool: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}

fn load_config(global: &Global) -> Result<ExperimentConfig> {
    match &global.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: "not a readable file".into(),
        })
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Extract { dataset, out } => {
            let cfg = load_config(g)?;
            if !dataset.is_dir() {
                return Err(Error::UnreadableFile {
                    path: dataset.clone(),
                    reason: "not a directory".into(),
                });
            }
            extract(dataset, out, &cfg)
        }
        Command::Select { features, out } => {
            let cfg = load_config(g)?;
            require_file(features)?;
            let data = LabeledDataset::load_csv(features)?;
            let forest = ForestConfig {
                rng_seed: g.seed.unwrap_or(cfg.forest.rng_seed),
                ..cfg.forest.clone()
            };
            let (_, report) = train_forest(&data, &forest)?;
            create_dir(out)?;
            report.save_csv(out.join("selection.csv"))?;
            report
                .apply_to_dataset(&data)?
                .save_csv(out.join("selected_features.csv"))?;
            log::info!("retained {} of {} components", report.retained_count(), report.len());
            Ok(())
        }
        Command::Encode { features, out } => {
            let cfg = load_config(g)?;
            require_file(features)?;
            let data = LabeledDataset::load_csv(features)?;
            let scaler = fit_minmax(&data.features)?;
            let scaled = scaler.apply_all(&data.features)?;
            let ae_cfg = autoencoder::AutoencoderConfig {
                rng_seed: g.seed.unwrap_or(cfg.autoencoder.rng_seed),
                ..cfg.autoencoder.clone()
            };
            let ae = autoencoder::train(&scaled, &ae_cfg)?;
            let encoded = scaled
                .iter()
                .zip(&data.features)
                .map(|(s, raw)| {
                    let mut v = raw.clone();
                    v.extend(ae.encode(s)?);
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            let schema = data.schema.with_bottleneck(ae.model.code_dim());
            create_dir(out)?;
            ae.save(out.join("autoencoder.json"))?;
            write_json(&out.join("scaling.json"), &scaler)?;
            data.with_features(schema, encoded)?
                .save_csv(out.join("encoded_features.csv"))?;
            log::info!(
                "final training loss {:.6}",
                ae.loss_history.last().copied().unwrap_or(f64::NAN)
            );
            Ok(())
        }
        Command::TrainSvm { features, out } => {
            let cfg = load_config(g)?;
            require_file(features)?;
            let data = LabeledDataset::load_csv(features)?;
            let scaler = fit_minmax(&data.features)?;
            let x = scaler.apply_all(&data.features)?;
            let seed = g.seed.unwrap_or(0);
            let search = grid_search_cv(&x, &data.labels, data.n_classes(), &cfg.grid, &cfg.svm, seed)?;
            let model = SvmModel::fit(&x, &data.labels, &data.classes, &search.best, seed)?;
            create_dir(out)?;
            search.save_csv(out.join("cv.csv"))?;
            model.save(out.join("svm.json"))?;
            write_json(&out.join("scaling.json"), &scaler)?;
            let best = search
                .table
                .iter()
                .find(|r| r.kernel == search.best.kernel && r.c == search.best.c)
                .map_or(f64::NAN, |r| r.mean());
            println!(
                "best: kernel={} C={} gamma={} cv_accuracy={best:.4}",
                search.best.kernel,
                search.best.c,
                search.best.kernel.gamma().map_or("-".into(), |v| v.to_string())
            );
            Ok(())
        }
        Command::Run { dataset, out, stage } => {
            let mut cfg = load_config(g)?;
            if let Some(d) = dataset {
                cfg.dataset = Some(d.clone());
            }
            if !stage.is_empty() {
                cfg.stages = stage.iter().map(|s| s.parse()).collect::<Result<Vec<Stage>>>()?;
            }
            if let Some(base) = g.seed {
                cfg.seeds = (0..cfg.n_repetitions as u64).map(|i| base.wrapping_add(i)).collect();
            }
            cfg.validate()?;
            let path = cfg
                .dataset
                .clone()
                .ok_or_else(|| Error::Config("no dataset given (config, --dataset or GENREFORGE_DATA)".into()))?;
            if !path.exists() {
                return Err(Error::UnreadableFile {
                    path,
                    reason: "no such file or directory".into(),
                });
            }
            let data = pipeline::load_dataset(&path, &cfg.framing)?;
            let report = pipeline::run_experiment(&data, &cfg, Some(out))?;
            print!("{}", report.summary_text());
            Ok(())
        }
        Command::Report { out } => {
            let path = if out.is_dir() {
                out.join("report.csv")
            } else {
                out.clone()
            };
            require_file(&path)?;
            let report = ExperimentReport::load_csv(&path)?;
            print!("{}", report.summary_text());
            Ok(())
        }
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Invariant(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes to a sibling temporary file and renames it into place, so a
/// failed extraction leaves no partial CSV behind.
fn extract(dataset: &Path, out: &Path, cfg: &ExperimentConfig) -> Result<()> {
    let vectors = pipeline::extract_corpus(dataset, &cfg.framing)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let tmp = out.with_extension("csv.partial");
    let result = (|| {
        let file = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        genreforge::dataset::write_feature_csv(std::io::BufWriter::new(file), &FeatureSchema::content(), &vectors)?;
        std::fs::rename(&tmp, out).map_err(|e| Error::io(out, e))
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result?;
    log::info!("wrote {} tracks to {}", vectors.len(), out.display());
    Ok(())
}
