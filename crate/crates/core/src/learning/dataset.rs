use std::collections::BTreeMap;
use std::fs::File;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LearningError;
use crate::network::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// How one column is turned into categorical states.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Rule {
    /// `low` when ≤ the column median, `high` otherwise.
    MedianThreshold,
    /// `labels[i]` for values in (cuts[i-1], cuts[i]]; one more label than cuts.
    Thresholds { cuts: Vec<f64>, labels: Vec<String> },
    /// Relabels raw values; every observed value must be mapped.
    LabelMap {
        map: BTreeMap<String, String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        states: Option<Vec<String>>,
    },
    #[default]
    Passthrough,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    /// Header name in the source file.
    pub name: String,
    pub kind: ColumnKind,
    /// Name used after ingestion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rename: Option<String>,
    #[serde(default)]
    pub rule: Rule,
    /// Substitute for empty cells; rows with empty cells are dropped otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill_missing: Option<String>,
}

impl ColumnSpec {
    pub fn output_name(&self) -> &str {
        self.rename.as_deref().unwrap_or(&self.name)
    }
}

/// Columns to read from a CSV and how to discretize them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub format_version: u32,
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn from_json(text: &str) -> Result<Self, LearningError> {
        let schema: Schema = serde_json::from_str(text).map_err(|e| LearningError::Parse(e.to_string()))?;
        if schema.format_version != FORMAT_VERSION {
            return Err(LearningError::Parse(format!("unsupported format_version {}", schema.format_version)));
        }
        Ok(schema)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Every named column read as categorical, untransformed.
    pub fn categorical<S: AsRef<str>>(names: &[S]) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            columns: names
                .iter()
                .map(|n| ColumnSpec {
                    name: n.as_ref().to_string(),
                    kind: ColumnKind::Categorical,
                    rename: None,
                    rule: Rule::Passthrough,
                    fill_missing: None,
                })
                .collect(),
        }
    }

    /// Rules keyed by post-ingestion column name.
    pub fn policy(&self) -> DiscretizationPolicy {
        DiscretizationPolicy {
            rules: self.columns.iter().map(|c| (c.output_name().to_string(), c.rule.clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiscretizationPolicy {
    pub rules: BTreeMap<String, Rule>,
}

/// One step applied to the data, kept for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Transform {
    Filled { column: String, value: String, cells: usize },
    Median { column: String, median: f64, low: usize, high: usize },
    Thresholds { column: String, cuts: Vec<f64> },
    LabelMap { column: String },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub transforms: Vec<Transform>,
    pub warnings: Vec<String>,
}

/// Rows of string cells under named, typed columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    records: Vec<Vec<String>>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, records: Vec<Vec<String>>) -> Self {
        assert!(records.iter().all(|r| r.len() == columns.len()), "ragged records");
        let rows_read = records.len();
        Self { columns, records, provenance: Provenance { rows_read, ..Provenance::default() } }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn records(&self) -> &[Vec<String>] {
        &self.records
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column_values(&self, name: &str) -> Option<impl Iterator<Item = &str>> {
        let i = self.column_index(name)?;
        Some(self.records.iter().map(move |r| r[i].as_str()))
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<Column>, &mut Vec<Vec<String>>, &mut Provenance) {
        (&mut self.columns, &mut self.records, &mut self.provenance)
    }

    /// Writes a header row and one line per record.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for r in &self.records {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes `data` as CSV to `path`.
pub fn export_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<(), LearningError> {
    let file = File::create(path.as_ref()).map_err(|e| LearningError::Io(e.to_string()))?;
    let mut out = io::BufWriter::new(file);
    data.write_csv(&mut out).map_err(|e| LearningError::Io(e.to_string()))?;
    io::Write::flush(&mut out).map_err(|e| LearningError::Io(e.to_string()))
}

pub fn ingest_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset, LearningError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LearningError::Io(format!("{}: {e}", path.display())))?;
    let mut data = ingest_reader(file, schema)?;
    data.provenance.source = Some(path.display().to_string());
    Ok(data)
}

/// Reads the schema's columns from CSV text, in schema order. Empty cells
/// are filled when the schema says so; rows still holding an empty cell
/// are dropped and counted.
pub fn ingest_reader<R: io::Read>(reader: R, schema: &Schema) -> Result<Dataset, LearningError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| LearningError::Io(e.to_string()))?.clone();
    if header.is_empty() {
        return Err(LearningError::EmptyDataset);
    }
    let positions: Vec<usize> = schema
        .columns
        .iter()
        .map(|c| header.iter().position(|h| h == c.name).ok_or_else(|| LearningError::MissingColumn(c.name.clone())))
        .collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    let mut provenance = Provenance::default();
    let mut filled = vec![0usize; schema.columns.len()];
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| LearningError::Io(e.to_string()))?;
        provenance.rows_read += 1;
        let mut cells = Vec::with_capacity(positions.len());
        let mut missing = false;
        for (k, (&p, spec)) in positions.iter().zip(&schema.columns).enumerate() {
            let mut cell = row.get(p).unwrap_or("").to_string();
            if cell.is_empty() {
                match &spec.fill_missing {
                    Some(v) => {
                        cell = v.clone();
                        filled[k] += 1;
                    }
                    None => missing = true,
                }
            }
            if !missing && spec.kind == ColumnKind::Numeric && cell.parse::<f64>().is_err() {
                return Err(LearningError::UnparseableValue { row: i + 1, column: spec.name.clone(), value: cell });
            }
            cells.push(cell);
        }
        if missing {
            provenance.rows_dropped += 1;
        } else {
            records.push(cells);
        }
    }
    for (spec, n) in schema.columns.iter().zip(filled) {
        if n > 0 {
            provenance.transforms.push(Transform::Filled {
                column: spec.output_name().to_string(),
                value: spec.fill_missing.clone().unwrap_or_default(),
                cells: n,
            });
        }
    }
    let columns = schema
        .columns
        .iter()
        .map(|c| Column { name: c.output_name().to_string(), kind: c.kind })
        .collect();
    Ok(Dataset { columns, records, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::from_json(
            r#"{"format_version": 1, "columns": [
                {"name": "gender", "kind": "categorical", "rename": "Gender"},
                {"name": "salary", "kind": "numeric"}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn empty_input_is_an_empty_dataset() {
        assert!(matches!(ingest_reader(&b""[..], &schema()), Err(LearningError::EmptyDataset)));
    }

    #[test]
    fn reads_selected_columns_and_drops_missing() {
        let csv = "id,gender,salary\n1,M,100\n2,F,\n3,F,250\n";
        let d = ingest_reader(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(d.columns()[0].name, "Gender");
        assert_eq!(d.records(), &[vec!["M".to_string(), "100".into()], vec!["F".into(), "250".into()]]);
        assert_eq!(d.provenance().rows_dropped, 1);
        assert_eq!(d.provenance().rows_read, 3);
    }

    #[test]
    fn header_only_file_is_empty() {
        let d = ingest_reader("gender,salary\n".as_bytes(), &schema()).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn missing_column() {
        let err = ingest_reader("salary\n1\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, LearningError::MissingColumn(ref c) if c == "gender"));
    }

    #[test]
    fn unparseable_numeric() {
        let err = ingest_reader("gender,salary\nM,lots\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, LearningError::UnparseableValue { row: 1, .. }));
    }

    #[test]
    fn fill_missing_keeps_rows() {
        let mut s = schema();
        s.columns[1].fill_missing = Some("0".into());
        let d = ingest_reader("gender,salary\nM,\nF,3\n".as_bytes(), &s).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.records()[0][1], "0");
        assert!(matches!(d.provenance().transforms[0], Transform::Filled { cells: 1, .. }));
    }

    #[test]
    fn csv_round_trip() {
        let d = Dataset::new(
            vec![Column { name: "A".into(), kind: ColumnKind::Categorical }, Column { name: "B".into(), kind: ColumnKind::Categorical }],
            vec![vec!["x".into(), "y".into()], vec!["z".into(), "w".into()], vec!["x".into(), "w".into()]],
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        export_csv(&d, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);
        let back = ingest_csv(&path, &Schema::categorical(&["A", "B"])).unwrap();
        assert_eq!(back.columns(), d.columns());
        assert_eq!(back.records(), d.records());
    }
}
