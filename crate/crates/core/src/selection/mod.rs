//! Information-gain feature selection through a random forest.

pub mod entropy;
pub mod forest;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use entropy::{best_threshold_split, entropy, split_information_gain, ThresholdSplit};
pub use forest::{fit_forest, DecisionTree, ForestConfig, IgWeighting, RandomForest};

use crate::dataset::{format_value, LabeledDataset};
use crate::error::{Error, Result};
use crate::schema::{FeatureSchema, FeatureVector};

/// Cumulative information gain per component and the retained mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub component_names: Vec<String>,
    /// Bits, summed over every split of every tree.
    pub cumulative_ig: Vec<f64>,
    pub retained: Vec<bool>,
}

impl SelectionReport {
    pub fn from_gains(component_names: Vec<String>, cumulative_ig: Vec<f64>) -> Self {
        let retained = cumulative_ig.iter().map(|&g| g > 0.0).collect();
        Self {
            component_names,
            cumulative_ig,
            retained,
        }
    }

    pub fn retained_count(&self) -> usize {
        self.retained.iter().filter(|&&r| r).count()
    }

    pub fn len(&self) -> usize {
        self.retained.len()
    }

    pub fn is_empty(&self) -> bool {
        self.retained.is_empty()
    }

    fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        if schema.names() != self.component_names {
            return Err(Error::SchemaMismatch(format!(
                "report covers {} components that do not match the {}-component schema",
                self.component_names.len(),
                schema.len()
            )));
        }
        Ok(())
    }

    pub fn projected_schema(&self, schema: &FeatureSchema) -> Result<FeatureSchema> {
        self.check_schema(schema)?;
        schema.project(&self.retained)
    }

    pub fn project_values(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.retained)
            .filter(|(_, &r)| r)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Projects every row of `data` onto the retained components.
    pub fn apply_to_dataset(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        let schema = self.projected_schema(&data.schema)?;
        let features = data.features.iter().map(|r| self.project_values(r)).collect();
        data.with_features(schema, features)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::format("<selection report>", e);
        w.write_record(["component_name", "cumulative_ig", "retained"])
            .map_err(csv_err)?;
        for ((name, ig), keep) in self.component_names.iter().zip(&self.cumulative_ig).zip(&self.retained) {
            w.write_record([name.as_str(), &format_value(*ig), if *keep { "true" } else { "false" }])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<selection report>", e))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let bad = |reason: String| Error::format("<selection report>", reason);
        let mut r = csv::Reader::from_reader(reader);
        let mut names = Vec::new();
        let mut gains = Vec::new();
        let mut retained = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            if record.len() != 3 {
                return Err(bad(format!("expected 3 fields, got {}", record.len())));
            }
            names.push(record[0].to_string());
            let ig: f64 = record[1]
                .parse()
                .map_err(|_| bad(format!("bad gain {:?}", &record[1])))?;
            gains.push(ig);
            retained.push(match &record[2] {
                "true" => true,
                "false" => false,
                other => return Err(bad(format!("bad flag {other:?}"))),
            });
        }
        let report = Self {
            component_names: names,
            cumulative_ig: gains,
            retained,
        };
        if report
            .cumulative_ig
            .iter()
            .zip(&report.retained)
            .any(|(&g, &r)| (g > 0.0) != r)
        {
            return Err(bad("retained flags disagree with gains".into()));
        }
        Ok(report)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }
}

/// Trains the selection forest on `data` and reports which components carry
/// positive cumulative information gain.
pub fn train_forest(data: &LabeledDataset, cfg: &ForestConfig) -> Result<(RandomForest, SelectionReport)> {
    let (forest, gains) = fit_forest(&data.features, &data.labels, data.n_classes(), cfg)?;
    Ok((forest, SelectionReport::from_gains(data.schema.names(), gains)))
}

/// Keeps only the retained components of `vec`, order preserved.
pub fn apply_selection(vec: &FeatureVector, schema: &FeatureSchema, report: &SelectionReport) -> Result<FeatureVector> {
    report.check_schema(schema)?;
    if vec.values.len() != schema.len() {
        return Err(Error::SchemaMismatch(format!(
            "vector has {} values, schema has {}",
            vec.values.len(),
            schema.len()
        )));
    }
    Ok(FeatureVector {
        values: report.project_values(&vec.values),
        ..vec.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema3() -> FeatureSchema {
        FeatureSchema::from_names(&["a.M.0", "b.M.0", "c.M.0"]).unwrap()
    }

    fn vector(values: Vec<f64>) -> FeatureVector {
        FeatureVector {
            values,
            track_id: "t".into(),
            label: None,
        }
    }

    #[test]
    fn all_true_mask_is_identity() {
        let report = SelectionReport::from_gains(schema3().names(), vec![1.0, 2.0, 0.5]);
        let v = vector(vec![1.0, 2.0, 3.0]);
        assert_eq!(apply_selection(&v, &schema3(), &report).unwrap(), v);
    }

    #[test]
    fn mask_keeps_first_and_third() {
        let report = SelectionReport::from_gains(schema3().names(), vec![1.0, 0.0, 0.5]);
        let out = apply_selection(&vector(vec![1.0, 2.0, 3.0]), &schema3(), &report).unwrap();
        assert_eq!(out.values, [1.0, 3.0]);
        assert_eq!(report.retained_count(), 2);
    }

    #[test]
    fn schema_mismatch() {
        let report = SelectionReport::from_gains(vec!["x.M.0".into()], vec![1.0]);
        assert!(matches!(
            apply_selection(&vector(vec![1.0, 2.0, 3.0]), &schema3(), &report),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn report_csv_round_trip() {
        let report = SelectionReport::from_gains(schema3().names(), vec![0.125, 0.0, 3.5e-7]);
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("component_name,cumulative_ig,retained\n"));
        assert_eq!(SelectionReport::read_csv(buf.as_slice()).unwrap(), report);
    }
}
