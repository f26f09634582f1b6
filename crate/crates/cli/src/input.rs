//! Distribution documents: JSON `{"weights":[...]}`, JSON
//! `{"dims":[...],"cells":[...]}`, or CSV with one weight per line.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use qentropy::dist::ProbDist;
use qentropy::joint::JointDist;

use crate::CliError;

/// A parsed input file, not yet validated as a distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Weights(Vec<f64>),
    Joint { dims: Vec<usize>, cells: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default)]
    #[allow(dead_code)]
    schema: Option<String>,
    weights: Option<Vec<f64>>,
    dims: Option<Vec<usize>>,
    cells: Option<Vec<f64>>,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn read_document(path: &Path) -> Result<Document, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: display(path),
        source,
    })?;
    parse_document(&text, &display(path))
}

/// Parses `text`; `name` is used in error messages.
pub fn parse_document(text: &str, name: &str) -> Result<Document, CliError> {
    if text.trim_start().starts_with('{') {
        parse_json(text, name)
    } else {
        parse_csv(text, name)
    }
}

fn parse_json(text: &str, name: &str) -> Result<Document, CliError> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| CliError::Input {
        path: name.to_string(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let malformed = |message: &str| CliError::Input {
        path: name.to_string(),
        line: 1,
        message: message.to_string(),
    };
    match raw {
        RawDocument {
            weights: Some(w),
            dims: None,
            cells: None,
            ..
        } => Ok(Document::Weights(w)),
        RawDocument {
            weights: None,
            dims: Some(dims),
            cells: Some(cells),
            ..
        } => Ok(Document::Joint { dims, cells }),
        _ => Err(malformed(
            "expected either \"weights\" or both \"dims\" and \"cells\"",
        )),
    }
}

fn parse_csv(text: &str, name: &str) -> Result<Document, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut weights = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input {
            path: name.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| CliError::Input {
            path: name.to_string(),
            line,
            message,
        };
        if record.len() != 1 {
            return Err(bad(format!(
                "expected one weight per line, found {} fields",
                record.len()
            )));
        }
        let field = &record[0];
        if i == 0 && field.eq_ignore_ascii_case("weight") {
            continue;
        }
        let w: f64 = field
            .parse()
            .map_err(|_| bad(format!("not a number: {field:?}")))?;
        weights.push(w);
    }
    Ok(Document::Weights(weights))
}

/// A probability vector; joint documents are rejected.
pub fn read_dist(path: &Path) -> Result<ProbDist, CliError> {
    match read_document(path)? {
        Document::Weights(w) => ProbDist::new(w).map_err(|source| CliError::Invalid {
            path: display(path),
            source,
        }),
        Document::Joint { .. } => Err(CliError::Usage(format!(
            "{}: expected a weight vector, found a joint distribution",
            display(path)
        ))),
    }
}

/// A joint distribution; a weight vector is read as a single-axis joint.
pub fn read_joint(path: &Path) -> Result<JointDist, CliError> {
    let (dims, cells) = match read_document(path)? {
        Document::Weights(w) => (vec![w.len()], w),
        Document::Joint { dims, cells } => (dims, cells),
    };
    JointDist::new(dims, cells).map_err(|source| CliError::Invalid {
        path: display(path),
        source,
    })
}
