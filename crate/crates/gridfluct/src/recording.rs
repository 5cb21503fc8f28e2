//! Frequency recordings: plain-text or CSV files with `f` or `t,f` columns.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_F_REF: f64 = 50.0;
pub const DEFAULT_CADENCE: f64 = 1.0;

#[derive(Debug, Error)]
pub enum RecordingError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("non-numeric rows at lines {}", join(.0))]
    NonNumeric(Vec<usize>),
    #[error("line {line}: expected {expected} columns, found {found}")]
    Columns {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {0}: time does not increase")]
    NonMonotonic(usize),
    #[error("unrecognized header {0:?}; expected `f` or `t,f`")]
    Header(String),
    #[error("recording contains no samples")]
    Empty,
    #[error("cadence must be positive, got {0}")]
    Cadence(f64),
}

fn join(lines: &[usize]) -> String {
    let shown: Vec<String> = lines.iter().take(20).map(|l| l.to_string()).collect();
    let more = if lines.len() > 20 {
        format!(" (+{} more)", lines.len() - 20)
    } else {
        String::new()
    };
    format!("{}{more}", shown.join(", "))
}

/// A run of missing samples between two recorded times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gap {
    /// Line of the sample after the gap.
    pub line: usize,
    pub t_before: f64,
    pub t_after: f64,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyRecording {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub f_ref: f64,
    /// `2π(f − f_ref)`
    pub omega: Vec<f64>,
    pub cadence: f64,
    pub gaps: Vec<Gap>,
}

impl FrequencyRecording {
    pub fn from_frequency(t: Vec<f64>, f: Vec<f64>, f_ref: f64, cadence: f64) -> Self {
        let omega = f.iter().map(|x| 2.0 * PI * (x - f_ref)).collect();
        let gaps = find_gaps(&t, cadence, None);
        FrequencyRecording {
            t,
            f,
            f_ref,
            omega,
            cadence,
            gaps,
        }
    }

    /// Builds from angular velocities sampled every `cadence` seconds starting at 0.
    pub fn from_omega(omega: &[f64], f_ref: f64, cadence: f64) -> Self {
        let t = (0..omega.len()).map(|i| i as f64 * cadence).collect();
        let f = omega.iter().map(|w| f_ref + w / (2.0 * PI)).collect();
        Self::from_frequency(t, f, f_ref, cadence)
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// `t,f` CSV with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,f\n");
        for (t, f) in self.t.iter().zip(&self.f) {
            writeln!(s, "{t},{f}").unwrap();
        }
        s
    }
}

fn find_gaps(t: &[f64], cadence: f64, lines: Option<&[usize]>) -> Vec<Gap> {
    t.windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let steps = ((w[1] - w[0]) / cadence).round() as usize;
            (steps > 1).then(|| Gap {
                line: lines.map_or(i + 2, |l| l[i + 1]),
                t_before: w[0],
                t_after: w[1],
                missing: steps - 1,
            })
        })
        .collect()
}

fn split(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect()
}

fn is_header(fields: &[&str]) -> bool {
    fields
        .iter()
        .all(|f| f.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && f.parse::<f64>().is_err())
}

/// Parses recording text. Without a time column, samples are `cadence` apart from t = 0.
pub fn parse_recording(text: &str, f_ref: f64, cadence: f64) -> Result<FrequencyRecording, RecordingError> {
    if !(cadence > 0.0) {
        return Err(RecordingError::Cadence(cadence));
    }
    let mut rows: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, split(l)))
        .collect();

    let mut columns = None;
    if let Some((_, first)) = rows.first() {
        if is_header(first) {
            let names: Vec<String> = first.iter().map(|s| s.to_ascii_lowercase()).collect();
            columns = Some(match names.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
                ["f"] | ["freq"] | ["frequency"] => 1,
                ["t", "f"] | ["time", "f"] | ["time", "freq"] | ["time", "frequency"] | ["t", "frequency"] => 2,
                _ => return Err(RecordingError::Header(first.join(","))),
            });
            rows.remove(0);
        }
    }
    let columns = match (columns, rows.first()) {
        (Some(c), _) => c,
        (None, Some((_, r))) if r.len() == 1 || r.len() == 2 => r.len(),
        (None, Some((line, r))) => {
            return Err(RecordingError::Columns {
                line: *line,
                expected: 2,
                found: r.len(),
            })
        }
        (None, None) => return Err(RecordingError::Empty),
    };

    let mut bad = Vec::new();
    let mut t = Vec::with_capacity(rows.len());
    let mut f = Vec::with_capacity(rows.len());
    let mut lines = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        if fields.len() != columns {
            return Err(RecordingError::Columns {
                line: *line,
                expected: columns,
                found: fields.len(),
            });
        }
        let parsed: Option<Vec<f64>> = fields
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        match parsed {
            Some(v) => {
                let (ti, fi) = if columns == 2 {
                    (v[0], v[1])
                } else {
                    (f.len() as f64 * cadence, v[0])
                };
                t.push(ti);
                f.push(fi);
                lines.push(*line);
            }
            None => bad.push(*line),
        }
    }
    if !bad.is_empty() {
        return Err(RecordingError::NonNumeric(bad));
    }
    if f.is_empty() {
        return Err(RecordingError::Empty);
    }
    if let Some(i) = t.windows(2).position(|w| w[1] <= w[0]) {
        return Err(RecordingError::NonMonotonic(lines[i + 1]));
    }
    let gaps = find_gaps(&t, cadence, Some(&lines));
    let mut rec = FrequencyRecording::from_frequency(t, f, f_ref, cadence);
    rec.gaps = gaps;
    Ok(rec)
}

pub fn ingest_recording(path: &Path, f_ref: f64, cadence: f64) -> Result<FrequencyRecording, RecordingError> {
    let text = fs::read_to_string(path).map_err(|source| RecordingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_recording(&text, f_ref, cadence)
}
