use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use super::config::{ExperimentConfig, Stage};
use super::SplitOutcome;
use crate::dataset::{format_value, LabeledDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// 1-based.
    pub repetition: usize,
    pub seed: u64,
    pub stage: Stage,
    pub accuracy: f64,
    pub n_components: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    pub stage: Stage,
    pub repetitions: usize,
    pub mean: f64,
    /// Population standard deviation over repetitions.
    pub sd: f64,
    pub mean_components: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub classes: Vec<String>,
    /// Confusion matrices summed over repetitions, `[true][predicted]`.
    pub confusion: Vec<(Stage, Vec<Vec<usize>>)>,
    pub config: Option<ExperimentConfig>,
}

impl ExperimentReport {
    pub fn from_outcomes<'a>(
        cfg: &ExperimentConfig,
        seeds: &[u64],
        classes: &[String],
        outcomes: impl IntoIterator<Item = &'a SplitOutcome>,
    ) -> Self {
        let k = classes.len();
        let mut rows = Vec::new();
        let mut confusion: Vec<(Stage, Vec<Vec<usize>>)> = cfg
            .ordered_stages()
            .into_iter()
            .map(|s| (s, vec![vec![0; k]; k]))
            .collect();
        for (rep, outcome) in outcomes.into_iter().enumerate() {
            for s in &outcome.stages {
                rows.push(ReportRow {
                    repetition: rep + 1,
                    seed: seeds[rep],
                    stage: s.stage,
                    accuracy: s.accuracy,
                    n_components: s.n_components,
                });
                if let Some((_, m)) = confusion.iter_mut().find(|(st, _)| *st == s.stage) {
                    for (acc, row) in m.iter_mut().zip(&s.confusion) {
                        acc.iter_mut().zip(row).for_each(|(a, b)| *a += b);
                    }
                }
            }
        }
        Self {
            rows,
            classes: classes.to_vec(),
            confusion,
            config: Some(cfg.clone()),
        }
    }

    pub fn stages(&self) -> Vec<Stage> {
        let mut s: Vec<Stage> = self.rows.iter().map(|r| r.stage).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn accuracies(&self, stage: Stage) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.stage == stage)
            .map(|r| r.accuracy)
            .collect()
    }

    pub fn summary(&self, stage: Stage) -> Option<StageSummary> {
        let rows: Vec<&ReportRow> = self.rows.iter().filter(|r| r.stage == stage).collect();
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        let mean = rows.iter().map(|r| r.accuracy).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r.accuracy - mean).powi(2)).sum::<f64>() / n;
        Some(StageSummary {
            stage,
            repetitions: rows.len(),
            mean,
            sd: var.sqrt(),
            mean_components: rows.iter().map(|r| r.n_components as f64).sum::<f64>() / n,
        })
    }

    pub fn summaries(&self) -> Vec<StageSummary> {
        self.stages().into_iter().filter_map(|s| self.summary(s)).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::format("report.csv", e);
        w.write_record(["repetition", "seed", "stage", "accuracy", "n_components"])
            .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.repetition.to_string(),
                r.seed.to_string(),
                r.stage.to_string(),
                format_value(r.accuracy),
                r.n_components.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("report.csv", e))
    }

    /// Reads the rows of a `report.csv`; confusion matrices and the config
    /// echo are not part of that file.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let bad = |reason: String| Error::format("report.csv", reason);
        let mut r = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if rec.len() != 5 {
                return Err(bad(format!("row {} has {} fields", i + 1, rec.len())));
            }
            let field = |j: usize| rec[j].trim().to_string();
            let parse_err = |j: usize| bad(format!("row {}: bad field {:?}", i + 1, &rec[j]));
            rows.push(ReportRow {
                repetition: field(0).parse().map_err(|_| parse_err(0))?,
                seed: field(1).parse().map_err(|_| parse_err(1))?,
                stage: field(2).parse().map_err(|_| parse_err(2))?,
                accuracy: field(3).parse().map_err(|_| parse_err(3))?,
                n_components: field(4).parse().map_err(|_| parse_err(4))?,
            });
        }
        Ok(Self {
            rows,
            classes: Vec::new(),
            confusion: Vec::new(),
            config: None,
        })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<26} {:>5} {:>10} {:>10} {:>11}",
            "stage", "reps", "mean", "sd", "components"
        );
        for st in self.summaries() {
            let _ = writeln!(
                s,
                "{:<26} {:>5} {:>10.4} {:>10.4} {:>11.1}",
                st.stage.as_str(),
                st.repetitions,
                st.mean,
                st.sd,
                st.mean_components
            );
        }
        let width = self.classes.iter().map(String::len).max().unwrap_or(0).max(6);
        for (stage, m) in &self.confusion {
            let reps = self.rows.iter().filter(|r| r.stage == *stage).count();
            let _ = writeln!(
                s,
                "\nconfusion {stage} (rows: true class, summed over {reps} repetitions)"
            );
            let _ = write!(s, "{:<width$}", "");
            for c in &self.classes {
                let _ = write!(s, " {c:>width$}");
            }
            s.push('\n');
            for (c, row) in self.classes.iter().zip(m) {
                let _ = write!(s, "{c:<width$}");
                for v in row {
                    let _ = write!(s, " {v:>width$}");
                }
                s.push('\n');
            }
        }
        s
    }

    /// Writes `report.csv`, `summary.txt` and, if known, `config.toml`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        let csv_path = dir.join("report.csv");
        let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        self.write_csv(std::io::BufWriter::new(file))?;
        write_file(&dir.join("summary.txt"), self.summary_text().as_bytes())?;
        if let Some(cfg) = &self.config {
            write_file(&dir.join("config.toml"), cfg.to_toml()?.as_bytes())?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Persists everything one repetition trained and predicted.
pub fn write_artifacts(
    dir: &Path,
    data: &LabeledDataset,
    train: &[usize],
    test: &[usize],
    outcome: &SplitOutcome,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut split = String::from("track_id,label,partition\n");
    let mut rows: Vec<(usize, &str)> = train.iter().map(|&i| (i, "train")).collect();
    rows.extend(test.iter().map(|&i| (i, "test")));
    rows.sort_unstable();
    for (i, part) in rows {
        let _ = writeln!(split, "{},{},{part}", data.track_ids[i], data.classes[data.labels[i]]);
    }
    write_file(&dir.join("split.csv"), split.as_bytes())?;

    let art = &outcome.artifacts;
    if let Some(sel) = &art.selection {
        sel.save_csv(dir.join("selection.csv"))?;
    }
    if let Some(ae) = &art.autoencoder {
        ae.save(dir.join("autoencoder.json"))?;
    }
    for (stage, scaler) in &art.scalers {
        let json = serde_json::to_string_pretty(scaler).map_err(|e| Error::Invariant(e.to_string()))?;
        write_file(&dir.join(format!("scaling_{stage}.json")), json.as_bytes())?;
    }
    for (stage, cv) in &art.cv {
        cv.save_csv(dir.join(format!("cv_{stage}.csv")))?;
    }
    for (stage, model) in &art.models {
        model.save(dir.join(format!("svm_{stage}.json")))?;
    }
    for s in &outcome.stages {
        let mut text = String::from("track_id,true,predicted\n");
        for (&i, &p) in test.iter().zip(&s.predictions) {
            let _ = writeln!(
                text,
                "{},{},{}",
                data.track_ids[i], data.classes[data.labels[i]], data.classes[p]
            );
        }
        write_file(&dir.join(format!("predictions_{}.csv", s.stage)), text.as_bytes())?;
    }
    Ok(())
}
