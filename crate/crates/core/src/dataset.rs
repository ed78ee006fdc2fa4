//! Labeled feature matrices and the feature CSV format.
//!
//! CSV layout: a header of schema component names followed by `track_id`
//! and `label`, then one row per track. Values are written in scientific
//! notation with 17 significant digits so they round-trip exactly.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::schema::{FeatureSchema, FeatureVector};

pub const TRACK_ID_COLUMN: &str = "track_id";
pub const LABEL_COLUMN: &str = "label";

/// Feature rows with integer labels indexing `classes` (sorted names).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub schema: FeatureSchema,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
    pub track_ids: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        schema: FeatureSchema,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        classes: Vec<String>,
        track_ids: Vec<String>,
    ) -> Result<Self> {
        let ds = Self {
            schema,
            features,
            labels,
            classes,
            track_ids,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Builds a dataset from labeled vectors; class indices follow the
    /// lexicographic order of the label names.
    pub fn from_vectors(schema: FeatureSchema, vectors: Vec<FeatureVector>) -> Result<Self> {
        let classes: Vec<String> = vectors
            .iter()
            .map(|v| {
                v.label
                    .clone()
                    .ok_or_else(|| Error::DegenerateDataset(format!("track {} has no label", v.track_id)))
            })
            .collect::<Result<BTreeSet<_>>>()?
            .into_iter()
            .collect();
        let mut features = Vec::with_capacity(vectors.len());
        let mut labels = Vec::with_capacity(vectors.len());
        let mut track_ids = Vec::with_capacity(vectors.len());
        for v in vectors {
            let label = v.label.as_deref().unwrap_or_default();
            labels.push(classes.iter().position(|c| c == label).expect("class present"));
            features.push(v.values);
            track_ids.push(v.track_id);
        }
        Self::new(schema, features, labels, classes, track_ids)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.features.len();
        if self.labels.len() != n || self.track_ids.len() != n {
            return Err(Error::DegenerateDataset(format!(
                "{} rows, {} labels, {} track ids",
                n,
                self.labels.len(),
                self.track_ids.len()
            )));
        }
        if let Some((i, row)) = self
            .features
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != self.schema.len())
        {
            return Err(Error::SchemaMismatch(format!(
                "row {i} has {} values, schema has {}",
                row.len(),
                self.schema.len()
            )));
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.classes.len()) {
            return Err(Error::DegenerateDataset(format!("label index {bad} out of range")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.schema.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            track_ids: indices.iter().map(|&i| self.track_ids[i].clone()).collect(),
        }
    }

    /// Same rows with new feature values and schema.
    pub fn with_features(&self, schema: FeatureSchema, features: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            schema,
            features,
            self.labels.clone(),
            self.classes.clone(),
            self.track_ids.clone(),
        )
    }

    pub fn vectors(&self) -> Vec<FeatureVector> {
        self.features
            .iter()
            .zip(&self.labels)
            .zip(&self.track_ids)
            .map(|((f, &l), id)| FeatureVector {
                values: f.clone(),
                track_id: id.clone(),
                label: Some(self.classes[l].clone()),
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_feature_csv(writer, &self.schema, &self.vectors())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let (schema, vectors) = read_feature_csv(file).map_err(|e| match e {
            Error::Format { reason, .. } => Error::format(path, reason),
            other => other,
        })?;
        Self::from_vectors(schema, vectors)
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_feature_csv<W: Write>(writer: W, schema: &FeatureSchema, vectors: &[FeatureVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::format("<feature csv>", e);
    let mut header = schema.names();
    header.push(TRACK_ID_COLUMN.into());
    header.push(LABEL_COLUMN.into());
    w.write_record(&header).map_err(csv_err)?;
    for v in vectors {
        if v.values.len() != schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "track {} has {} values, schema has {}",
                v.track_id,
                v.values.len(),
                schema.len()
            )));
        }
        let mut record: Vec<String> = v.values.iter().map(|&x| format_value(x)).collect();
        record.push(v.track_id.clone());
        record.push(v.label.clone().unwrap_or_default());
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<feature csv>", e))
}

pub fn read_feature_csv<R: Read>(reader: R) -> Result<(FeatureSchema, Vec<FeatureVector>)> {
    let bad = |reason: String| Error::format("<feature csv>", reason);
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let n = header.len();
    if n < 2 || &header[n - 2] != TRACK_ID_COLUMN || &header[n - 1] != LABEL_COLUMN {
        return Err(bad("header must end with track_id,label".into()));
    }
    let names: Vec<&str> = header.iter().take(n - 2).collect();
    let schema = FeatureSchema::from_names(&names)?;
    let mut vectors = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != n {
            return Err(bad(format!(
                "row {} has {} fields, expected {n}",
                line + 1,
                record.len()
            )));
        }
        let values = record
            .iter()
            .take(n - 2)
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("row {}: bad value {s:?}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        let label = &record[n - 1];
        vectors.push(FeatureVector {
            values,
            track_id: record[n - 2].to_string(),
            label: (!label.is_empty()).then(|| label.to_string()),
        });
    }
    Ok((schema, vectors))
}
