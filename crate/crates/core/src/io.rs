//! File formats.
//!
//! Model documents are JSON objects
//! `{"d": 2, "mu": [..], "alpha": [[..], ..], "beta": [..], "meta": {..}}`.
//!
//! Event files are CSV with a `time,mark` header and one-based marks. Comment
//! lines starting with `#` may precede the header; `# horizon=<float>` sets
//! the observation window (default: last event time) and `# dim=<int>` the
//! dimension (default: largest mark, or the caller's hint). Times are written
//! with 17 significant digits so that reading back is exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{HawkesError, Result};
use crate::events::EventSequence;
use crate::model::HawkesModel;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub model: HawkesModel,
    pub meta: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct RawDocument {
    d: usize,
    mu: Vec<f64>,
    alpha: Vec<Vec<f64>>,
    beta: Vec<f64>,
    #[serde(default)]
    meta: Map<String, Value>,
}

impl ModelDocument {
    pub fn new(model: HawkesModel) -> Self {
        ModelDocument {
            model,
            meta: Map::new(),
        }
    }

    pub fn with_meta(model: HawkesModel, meta: Map<String, Value>) -> Self {
        ModelDocument { model, meta }
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = RawDocument {
            d: self.model.dim(),
            mu: self.model.mu().to_vec(),
            alpha: self.model.alpha_rows(),
            beta: self.model.beta().to_vec(),
            meta: self.meta.clone(),
        };
        serde_json::to_string_pretty(&raw).map_err(|e| HawkesError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDocument = serde_json::from_str(text).map_err(|e| HawkesError::Format(e.to_string()))?;
        if raw.mu.len() != raw.d {
            return Err(HawkesError::Format(format!(
                "field d = {} but mu has {} entries",
                raw.d,
                raw.mu.len()
            )));
        }
        let model = HawkesModel::new(raw.mu, raw.alpha, raw.beta)?;
        Ok(ModelDocument { model, meta: raw.meta })
    }
}

fn io_err(path: &Path, source: std::io::Error) -> HawkesError {
    HawkesError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn read_model(path: &Path) -> Result<ModelDocument> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    ModelDocument::from_json(&text)
}

pub fn write_model(path: &Path, doc: &ModelDocument) -> Result<()> {
    write_atomic(path, doc.to_json()?.as_bytes())
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| HawkesError::domain(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

#[derive(Deserialize)]
struct EventRow {
    time: f64,
    mark: usize,
}

/// Parses an event file. `dim_hint` is used when the file has no `# dim=`
/// line; marks larger than the resulting dimension are an error.
pub fn parse_events(text: &str, dim_hint: Option<usize>) -> Result<EventSequence> {
    let mut horizon = None;
    let mut dim = None;
    let mut body_start = 0;
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            for part in comment.split(',') {
                if let Some((key, value)) = part.split_once('=') {
                    let value = value.trim();
                    match key.trim() {
                        "horizon" => {
                            horizon = Some(
                                value
                                    .parse::<f64>()
                                    .map_err(|_| HawkesError::data(format!("bad horizon value '{value}'")))?,
                            )
                        }
                        "dim" => {
                            dim = Some(
                                value
                                    .parse::<usize>()
                                    .map_err(|_| HawkesError::data(format!("bad dim value '{value}'")))?,
                            )
                        }
                        _ => {}
                    }
                }
            }
            body_start += line.len() + 1;
        } else if trimmed.is_empty() {
            body_start += line.len() + 1;
        } else {
            break;
        }
    }
    let body = text.get(body_start.min(text.len())..).unwrap_or("");
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| HawkesError::data(format!("unreadable header: {e}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != "time" || &headers[1] != "mark" {
        return Err(HawkesError::data(format!(
            "expected header 'time,mark', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times = Vec::new();
    let mut marks = Vec::new();
    for (row, record) in reader.deserialize::<EventRow>().enumerate() {
        let record = record.map_err(|e| HawkesError::data(format!("row {}: {e}", row + 1)))?;
        if record.mark == 0 {
            return Err(HawkesError::data(format!("row {}: marks are 1-based", row + 1)));
        }
        times.push(record.time);
        marks.push(record.mark - 1);
    }
    if times.is_empty() {
        return Err(HawkesError::data("event file contains no events"));
    }
    let max_mark = marks.iter().max().map_or(0, |m| m + 1);
    let dim = dim.or(dim_hint).unwrap_or(max_mark);
    let horizon = horizon.unwrap_or(*times.last().expect("nonempty"));
    EventSequence::new(times, marks, dim, horizon)
}

pub fn read_events(path: &Path, dim_hint: Option<usize>) -> Result<EventSequence> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_events(&text, dim_hint).map_err(|e| match e {
        HawkesError::Data(msg) => HawkesError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn format_events(seq: &EventSequence) -> String {
    let mut out = String::with_capacity(32 * (seq.len() + 3));
    out.push_str(&format!("# horizon={:.16e}\n", seq.horizon()));
    out.push_str(&format!("# dim={}\n", seq.dim()));
    out.push_str("time,mark\n");
    for (t, m) in seq.iter() {
        out.push_str(&format!("{t:.16e},{}\n", m + 1));
    }
    out
}

pub fn write_events(path: &Path, seq: &EventSequence) -> Result<()> {
    write_atomic(path, format_events(seq).as_bytes())
}
