//! Dataset, schema and generator files.
//!
//! A schema file is a JSON object:
//!
//! ```json
//! {
//!   "label": "survived",
//!   "features": [
//!     {"name": "Age", "kind": "numerical", "controllable": false, "unit": "years"},
//!     {"name": "M Best", "kind": "categorical", "categories": ["0", "1", "1a", "1b"]}
//!   ]
//! }
//! ```
//!
//! `categories` is required for categorical features and lists labels in
//! code order; `controllable` defaults to false; `unit` is optional.
//!
//! Datasets are comma-separated with a header row. Every schema feature and
//! the label column must appear exactly once, in any order. Categorical cells
//! hold category labels, numerical cells decimal numbers, labels `0` or `1`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use peerinf_core::data::validate_schema;
use peerinf_core::{Dataset, Error, FeatureSchema, GeneratorConfig};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaFile {
    pub label: String,
    pub features: Vec<FeatureSchema>,
}

impl SchemaFile {
    pub fn new(label: impl Into<String>, features: Vec<FeatureSchema>) -> Self {
        Self {
            label: label.into(),
            features,
        }
    }

    pub fn validate(&self) -> peerinf_core::Result<()> {
        validate_schema(&self.features)?;
        if self.features.iter().any(|f| f.name == self.label) {
            return Err(Error::Schema(format!(
                "label column `{}` is also a feature",
                self.label
            )));
        }
        Ok(())
    }
}

pub fn read_text(path: &Path) -> AppResult<String> {
    fs::read_to_string(path).map_err(|e| AppError::read(path, e))
}

pub fn write_text(path: &Path, text: &str) -> AppResult<()> {
    fs::write(path, text).map_err(|e| AppError::write(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| AppError::malformed(path, e))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable document");
    text.push('\n');
    text
}

pub fn load_schema(path: &Path) -> AppResult<SchemaFile> {
    let schema: SchemaFile = read_json(path)?;
    schema.validate().map_err(|source| AppError::InFile {
        path: path.into(),
        source,
    })?;
    Ok(schema)
}

pub fn save_schema(path: &Path, schema: &SchemaFile) -> AppResult<()> {
    write_text(path, &to_json_pretty(schema))
}

pub fn load_generator_config(path: &Path) -> AppResult<GeneratorConfig> {
    read_json(path)
}

/// Parses CSV text from `reader`. Rows in errors are 1-based data rows (the
/// header is not counted).
pub fn parse_csv<R: Read>(
    reader: R,
    schema: &[FeatureSchema],
    label_column: &str,
) -> peerinf_core::Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {}", e)))?
        .clone();
    let position = |name: &str| -> peerinf_core::Result<usize> {
        let mut hits = header.iter().enumerate().filter(|(_, h)| *h == name);
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Ok(i),
            (None, _) => Err(Error::Schema(format!("missing column `{}`", name))),
            (Some(_), Some(_)) => Err(Error::Schema(format!("duplicate column `{}`", name))),
        }
    };
    let columns = schema
        .iter()
        .map(|f| position(&f.name))
        .collect::<peerinf_core::Result<Vec<_>>>()?;
    let label_at = position(label_column)?;
    if let Some(extra) = header
        .iter()
        .find(|h| *h != label_column && schema.iter().all(|f| f.name != *h))
    {
        return Err(Error::Schema(format!("unexpected column `{}`", extra)));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Schema(format!("row {}: {}", row, e)))?;
        for (f, &c) in schema.iter().zip(&columns) {
            let raw = &record[c];
            let v = f.encode(raw).map_err(|e| match e {
                Error::Parse { column, value, .. } => Error::Parse { row, column, value },
                other => other,
            })?;
            values.push(v);
        }
        labels.push(match &record[label_at] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Parse {
                    row,
                    column: label_column.to_string(),
                    value: other.to_string(),
                })
            }
        });
    }
    if labels.is_empty() {
        return Err(Error::Schema("no data rows".into()));
    }
    Dataset::from_row_major(schema.to_vec(), values, labels)
}

pub fn load_csv(path: &Path, schema: &[FeatureSchema], label_column: &str) -> AppResult<Dataset> {
    let file = fs::File::open(path).map_err(|e| AppError::read(path, e))?;
    parse_csv(std::io::BufReader::new(file), schema, label_column).map_err(|source| {
        AppError::InFile {
            path: path.into(),
            source,
        }
    })
}

/// Renders `d` as CSV; features in schema order, then the label column.
/// Numbers use the shortest decimal form that reads back to the same value.
pub fn format_csv(d: &Dataset, label_column: &str) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = d.feature_names();
    header.push(label_column.to_string());
    wtr.write_record(&header).expect("in-memory write");
    for (row, &y) in d.rows().zip(d.labels()) {
        let mut cells: Vec<String> = d
            .schema()
            .iter()
            .zip(row)
            .map(|(f, &v)| f.decode(v))
            .collect();
        cells.push(y.to_string());
        wtr.write_record(&cells).expect("in-memory write");
    }
    let mut bytes = wtr.into_inner().expect("in-memory flush");
    bytes.flush().expect("in-memory flush");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

pub fn write_csv(path: &Path, d: &Dataset, label_column: &str) -> AppResult<()> {
    write_text(path, &format_csv(d, label_column))
}
