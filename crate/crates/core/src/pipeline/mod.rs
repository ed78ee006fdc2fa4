//! Repeated stratified train/test experiment over the three pipeline
//! stages: content features only, IG-selected features, and selected
//! features augmented with autoencoder bottleneck codes.
//!
//! Everything trained inside a repetition (scalers, selection report,
//! autoencoder, SVM hyperparameters and models) is a function of the
//! training split alone; test rows are touched only for prediction.

pub mod config;
pub mod report;
pub mod scaling;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{ExperimentConfig, Stage};
pub use report::{ExperimentReport, ReportRow, StageSummary};
pub use scaling::{apply_minmax, fit_minmax, ScalingParams};

use crate::audio::{load_wav, FramingConfig};
use crate::autoencoder::{self, TrainedAutoencoder};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::schema::{FeatureSchema, FeatureVector};
use crate::seed::{derive_seed, named_seed};
use crate::selection::{train_forest, ForestConfig, SelectionReport};
use crate::svm::{grid_search_cv, GridSearch, SvmConfig, SvmModel};
use crate::temporal::build_feature_vector;

/// Row indices of a class-proportional train/test partition, each sorted.
pub fn stratified_split(
    labels: &[usize],
    n_classes: usize,
    train_size: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = labels.len();
    if train_size == 0 || train_size >= n {
        return Err(Error::IndivisibleSplit(format!("train size {train_size} of {n} rows")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(train_size);
    let mut test = Vec::with_capacity(n - train_size);
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        if !(members.len() * train_size).is_multiple_of(n) {
            return Err(Error::IndivisibleSplit(format!(
                "class {c} has {} of {n} rows; {train_size} training rows do not divide proportionally",
                members.len()
            )));
        }
        let k = members.len() * train_size / n;
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..k]);
        test.extend_from_slice(&members[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seeded random partition that ignores class proportions.
pub fn random_split(n: usize, train_size: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if train_size == 0 || train_size >= n {
        return Err(Error::IndivisibleSplit(format!("train size {train_size} of {n} rows")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = idx[..train_size].to_vec();
    let mut test = idx[train_size..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Extracts content vectors from a class-per-directory WAV corpus. Classes
/// and files are visited in lexicographic order; track ids are
/// `class/file_name`.
pub fn extract_corpus(root: &Path, framing: &FramingConfig) -> Result<Vec<FeatureVector>> {
    let list_dir = |dir: &Path| -> Result<Vec<std::fs::DirEntry>> {
        let mut entries = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(dir, e))?;
        entries.sort_by_key(|e| e.file_name());
        Ok(entries)
    };
    let mut jobs = Vec::new();
    for class_dir in list_dir(root)? {
        if !class_dir.path().is_dir() {
            continue;
        }
        let label = class_dir.file_name().to_string_lossy().into_owned();
        for file in list_dir(&class_dir.path())? {
            let path = file.path();
            let is_wav = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
            if is_wav {
                let id = format!("{label}/{}", file.file_name().to_string_lossy());
                jobs.push((path, label.clone(), id));
            }
        }
    }
    if jobs.is_empty() {
        return Err(Error::UnreadableFile {
            path: root.to_path_buf(),
            reason: "no WAV files in class subdirectories".into(),
        });
    }
    log::info!("extracting {} tracks from {}", jobs.len(), root.display());
    jobs.par_iter()
        .map(|(path, label, id)| {
            let mut clip = load_wav(path)?.with_label(label.clone());
            clip.source_id = id.clone();
            build_feature_vector(&clip, framing)
        })
        .collect()
}

/// Loads a dataset from a feature CSV file or a WAV corpus directory.
pub fn load_dataset(path: &Path, framing: &FramingConfig) -> Result<LabeledDataset> {
    if path.is_dir() {
        LabeledDataset::from_vectors(FeatureSchema::content(), extract_corpus(path, framing)?)
    } else if path.is_file() {
        LabeledDataset::load_csv(path)
    } else {
        Err(Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: "no such file or directory".into(),
        })
    }
}

/// Accuracy and audit data of one stage in one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub accuracy: f64,
    pub n_components: usize,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<usize>,
}

/// Every model fitted on one training split.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainedArtifacts {
    pub scalers: Vec<(Stage, ScalingParams)>,
    pub selection: Option<SelectionReport>,
    pub autoencoder: Option<TrainedAutoencoder>,
    pub cv: Vec<(Stage, GridSearch)>,
    pub models: Vec<(Stage, SvmModel)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    pub stages: Vec<StageOutcome>,
    pub artifacts: TrainedArtifacts,
}

struct StageInput<'a> {
    stage: Stage,
    train: Vec<Vec<f64>>,
    test: Vec<Vec<f64>>,
    train_data: &'a LabeledDataset,
    test_data: &'a LabeledDataset,
}

fn fit_scaler(train: &[Vec<f64>], test: &[Vec<f64>], full: bool) -> Result<ScalingParams> {
    if full {
        let all: Vec<Vec<f64>> = train.iter().chain(test).cloned().collect();
        fit_minmax(&all)
    } else {
        fit_minmax(train)
    }
}

fn classify(
    input: StageInput<'_>,
    cfg: &ExperimentConfig,
    seed: u64,
    art: &mut TrainedArtifacts,
) -> Result<StageOutcome> {
    let StageInput {
        stage,
        train,
        test,
        train_data,
        test_data,
    } = input;
    let scaler = fit_scaler(&train, &test, cfg.scale_on_full_dataset)?;
    let xtr = scaler.apply_all(&train)?;
    let xte = scaler.apply_all(&test)?;
    let n_classes = train_data.n_classes();
    let search = grid_search_cv(
        &xtr,
        &train_data.labels,
        n_classes,
        &cfg.grid,
        &cfg.svm,
        named_seed(seed, &format!("{stage}/cv")),
    )?;
    let best: SvmConfig = search.best;
    let model = SvmModel::fit(
        &xtr,
        &train_data.labels,
        &train_data.classes,
        &best,
        named_seed(seed, &format!("{stage}/svm")),
    )?;
    let predictions = model.predict_all(&xte)?;
    let mut confusion = vec![vec![0usize; n_classes]; n_classes];
    for (&t, &p) in test_data.labels.iter().zip(&predictions) {
        confusion[t][p] += 1;
    }
    let correct = (0..n_classes).map(|c| confusion[c][c]).sum::<usize>();
    let n_components = xtr.first().map_or(0, Vec::len);
    art.scalers.push((stage, scaler));
    art.cv.push((stage, search));
    art.models.push((stage, model));
    Ok(StageOutcome {
        stage,
        accuracy: correct as f64 / test_data.len() as f64,
        n_components,
        confusion,
        predictions,
    })
}

/// Runs the requested stages on one train/test split. `seed` is the
/// repetition seed; component seeds are derived from it.
pub fn run_split(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<SplitOutcome> {
    if train.schema != test.schema || train.classes != test.classes {
        return Err(Error::SchemaMismatch("train and test splits disagree".into()));
    }
    let stages = cfg.ordered_stages();
    let mut art = TrainedArtifacts::default();
    let mut outcomes = Vec::new();
    let wrap = |stage: Stage| {
        move |e: Error| Error::Experiment {
            repetition: 0,
            stage: stage.to_string(),
            source: Box::new(e),
        }
    };

    if stages.contains(&Stage::ContentOnly) {
        let input = StageInput {
            stage: Stage::ContentOnly,
            train: train.features.clone(),
            test: test.features.clone(),
            train_data: train,
            test_data: test,
        };
        outcomes.push(classify(input, cfg, seed, &mut art).map_err(wrap(Stage::ContentOnly))?);
    }
    if !stages.iter().any(|&s| s >= Stage::Selected) {
        return Ok(SplitOutcome {
            stages: outcomes,
            artifacts: art,
        });
    }

    let forest_cfg = ForestConfig {
        rng_seed: derive_seed(named_seed(seed, "forest"), cfg.forest.rng_seed),
        ..cfg.forest.clone()
    };
    let (_, report) = train_forest(train, &forest_cfg).map_err(wrap(Stage::Selected))?;
    if report.retained_count() == 0 {
        return Err(wrap(Stage::Selected)(Error::DegenerateDataset(
            "selection retained no components".into(),
        )));
    }
    let sel_train = report.apply_to_dataset(train)?;
    let sel_test = report.apply_to_dataset(test)?;
    art.selection = Some(report);

    if stages.contains(&Stage::Selected) {
        let input = StageInput {
            stage: Stage::Selected,
            train: sel_train.features.clone(),
            test: sel_test.features.clone(),
            train_data: train,
            test_data: test,
        };
        outcomes.push(classify(input, cfg, seed, &mut art).map_err(wrap(Stage::Selected))?);
    }

    if stages.contains(&Stage::SelectedPlusBottleneck) {
        let stage = Stage::SelectedPlusBottleneck;
        let (augmented_train, augmented_test, ae) = (|| {
            let scaler = fit_scaler(&sel_train.features, &sel_test.features, cfg.scale_on_full_dataset)?;
            let s_train = scaler.apply_all(&sel_train.features)?;
            let s_test = scaler.apply_all(&sel_test.features)?;
            let ae_cfg = autoencoder::AutoencoderConfig {
                rng_seed: derive_seed(named_seed(seed, "autoencoder"), cfg.autoencoder.rng_seed),
                ..cfg.autoencoder.clone()
            };
            let ae = autoencoder::train(&s_train, &ae_cfg)?;
            let augment = |rows: &[Vec<f64>]| -> Result<Vec<Vec<f64>>> {
                rows.par_iter()
                    .map(|r| {
                        let mut v = r.clone();
                        v.extend(ae.encode(r)?);
                        Ok(v)
                    })
                    .collect()
            };
            Ok::<_, Error>((augment(&s_train)?, augment(&s_test)?, ae))
        })()
        .map_err(wrap(stage))?;
        art.autoencoder = Some(ae);
        let input = StageInput {
            stage,
            train: augmented_train,
            test: augmented_test,
            train_data: train,
            test_data: test,
        };
        outcomes.push(classify(input, cfg, seed, &mut art).map_err(wrap(stage))?);
    }
    Ok(SplitOutcome {
        stages: outcomes,
        artifacts: art,
    })
}

/// Schema of the vectors fed to the final SVM in `stage`.
pub fn stage_schema(stage: Stage, content: &FeatureSchema, outcome: &SplitOutcome) -> Result<FeatureSchema> {
    let selected = || -> Result<FeatureSchema> {
        outcome
            .artifacts
            .selection
            .as_ref()
            .ok_or_else(|| Error::Invariant("no selection report".into()))?
            .projected_schema(content)
    };
    match stage {
        Stage::ContentOnly => Ok(content.clone()),
        Stage::Selected => selected(),
        Stage::SelectedPlusBottleneck => {
            let code = outcome
                .artifacts
                .autoencoder
                .as_ref()
                .ok_or_else(|| Error::Invariant("no autoencoder".into()))?
                .model
                .code_dim();
            Ok(selected()?.with_bottleneck(code))
        }
    }
}

/// Split, train and evaluate one repetition.
pub fn run_repetition(
    data: &LabeledDataset,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>, SplitOutcome)> {
    let split_seed = named_seed(seed, "split");
    let (tr, te) = if cfg.stratified {
        stratified_split(&data.labels, data.n_classes(), cfg.train_size, split_seed)?
    } else {
        random_split(data.len(), cfg.train_size, split_seed)?
    };
    let outcome = run_split(&data.subset(&tr), &data.subset(&te), cfg, seed)?;
    Ok((tr, te, outcome))
}

/// Runs every repetition and, when `out` is given, writes the report and
/// per-repetition artifacts there.
pub fn run_experiment(data: &LabeledDataset, cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.train_size + cfg.test_size != data.len() {
        return Err(Error::Config(format!(
            "train_size {} + test_size {} != {} tracks",
            cfg.train_size,
            cfg.test_size,
            data.len()
        )));
    }
    let seeds = cfg.repetition_seeds();
    let results: Vec<(Vec<usize>, Vec<usize>, SplitOutcome)> = seeds
        .par_iter()
        .enumerate()
        .map(|(rep, &seed)| {
            log::info!("repetition {} (seed {seed})", rep + 1);
            run_repetition(data, cfg, seed).map_err(|e| match e {
                Error::Experiment { stage, source, .. } => Error::Experiment {
                    repetition: rep + 1,
                    stage,
                    source,
                },
                other => Error::Experiment {
                    repetition: rep + 1,
                    stage: "split".into(),
                    source: Box::new(other),
                },
            })
        })
        .collect::<Result<_>>()?;

    let report = ExperimentReport::from_outcomes(cfg, &seeds, &data.classes, results.iter().map(|r| &r.2));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        report.write_to_dir(dir)?;
        for (rep, (tr, te, outcome)) in results.iter().enumerate() {
            let rep_dir = dir.join(format!("rep_{:02}", rep + 1));
            report::write_artifacts(&rep_dir, data, tr, te, outcome)?;
        }
    }
    Ok(report)
}
