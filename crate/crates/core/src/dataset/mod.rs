//! Task records: schema, line-delimited persistence, difficulty
//! tagging, and mixture selection for building training/eval splits.

mod mixture;
mod tagging;

pub use mixture::{select_mixture, MixtureSpec, ShortfallWarning};
pub use tagging::{run_tagging, tag_difficulty, AttemptAudit, TaggingOutcome};

use crate::error::DataError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Opaque record identifier, unique within a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuestionId(pub String);

impl QuestionId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for QuestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Task family a record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    CrossPageQa,
    OpenRiddle,
    WikiRiddle,
    Other,
}

impl Category {
    pub fn as_str(&self) -> &'static str {
        match self {
            Category::CrossPageQa => "cross_page_qa",
            Category::OpenRiddle => "open_riddle",
            Category::WikiRiddle => "wiki_riddle",
            Category::Other => "other",
        }
    }
}

/// Difficulty tag derived from the number of correct answers over four
/// scripted attempts: 4 correct is easy, 2-3 medium, 1 hard, and 0
/// marks the record an outlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
    Outlier,
}

impl Difficulty {
    pub fn as_str(&self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
            Difficulty::Outlier => "outlier",
        }
    }
}

/// One task: a question, its reference answer, grading checklist, and
/// bookkeeping tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QARecord {
    pub id: QuestionId,
    pub question: String,
    pub solution: String,
    #[serde(default)]
    pub checklist: Vec<String>,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    #[serde(default = "default_language")]
    pub language: String,
}

fn default_language() -> String {
    "zh".to_string()
}

impl QARecord {
    /// Checks the record-level invariants; returns a message naming the
    /// offending field on failure.
    pub fn validate(&self) -> Result<(), String> {
        if self.id.as_str().is_empty() {
            return Err("id: must be non-empty".into());
        }
        if self.question.is_empty() {
            return Err(format!("question: must be non-empty (record {})", self.id));
        }
        if self.solution.is_empty() {
            return Err(format!("solution: must be non-empty (record {})", self.id));
        }
        Ok(())
    }
}

/// Reads records from a line-delimited JSON file, validating each one.
pub fn read_records(path: &Path) -> Result<Vec<QARecord>, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: QARecord = serde_json::from_str(&line).map_err(|e| DataError::BadRecord {
            line: i + 1,
            message: e.to_string(),
        })?;
        record.validate().map_err(|message| DataError::BadRecord {
            line: i + 1,
            message,
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(DataError::BadRecord {
                line: i + 1,
                message: format!("duplicate record id {}", record.id),
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Writes records as line-delimited JSON, one record per line.
pub fn write_records(path: &Path, records: &[QARecord]) -> Result<(), DataError> {
    let mut out = Vec::new();
    for record in records {
        serde_json::to_writer(&mut out, record).expect("record serialization is infallible");
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Serializes any iterator of values as line-delimited JSON.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), DataError> {
    let file = std::fs::File::create(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = std::io::BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).expect("serialization is infallible");
        w.write_all(b"\n").map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    w.flush().map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads line-delimited JSON into a vector of values.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(
            serde_json::from_str(&line).map_err(|e| DataError::BadRecord {
                line: i + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> QARecord {
        QARecord {
            id: QuestionId::new("r1"),
            question: "问题".into(),
            solution: "答案".into(),
            checklist: vec!["别名".into()],
            category: Category::CrossPageQa,
            difficulty: Some(Difficulty::Medium),
            language: "zh".into(),
        }
    }

    #[test]
    fn record_field_names_are_stable() {
        let json = serde_json::to_value(sample_record()).unwrap();
        let obj = json.as_object().unwrap();
        for key in ["id", "question", "solution", "checklist", "category", "difficulty", "language"] {
            assert!(obj.contains_key(key), "missing field {key}");
        }
        assert_eq!(obj["category"], "cross_page_qa");
        assert_eq!(obj["difficulty"], "medium");
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let records = vec![sample_record()];
        write_records(&path, &records).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        write_records(&path, &[sample_record(), sample_record()]).unwrap();
        assert!(read_records(&path).is_err());
    }

    #[test]
    fn empty_question_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let mut bad = sample_record();
        bad.question.clear();
        write_records(&path, &[bad]).unwrap();
        assert!(read_records(&path).is_err());
    }
}
