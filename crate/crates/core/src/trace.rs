//! Observation types and the append-only trace log.
//!
//! Trace files are line-delimited text. Each record is one line, fields are
//! separated by a single tab, and the record kind comes first:
//!
//! ```text
//! T <dim> <option> <start_0> .. <start_{d-1}> <end_0> .. <end_{d-1}>
//! A <dim> <state_0> .. <state_{d-1}> <option>*
//! ```
//!
//! Reals are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every `f64` bit for bit.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OptionId(pub usize);

impl fmt::Display for OptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionObservation {
    pub start: StateVector,
    pub option: OptionId,
    pub end: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityObservation {
    pub state: StateVector,
    pub available: BTreeSet<OptionId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Transition(TransitionObservation),
    Availability(AvailabilityObservation),
}

impl From<TransitionObservation> for Observation {
    fn from(t: TransitionObservation) -> Self {
        Observation::Transition(t)
    }
}

impl From<AvailabilityObservation> for Observation {
    fn from(a: AvailabilityObservation) -> Self {
        Observation::Availability(a)
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("dimension mismatch: log has dimension {expected}, observation has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("transition start has dimension {start} but end has {end}")]
    EndpointMismatch { start: usize, end: usize },
    #[error("observation contains a non-finite value")]
    NonFinite,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Append-only record of everything the agent observed during a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceLog {
    dim: Option<usize>,
    pub transitions: Vec<TransitionObservation>,
    pub availabilities: Vec<AvailabilityObservation>,
}

impl TraceLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty() && self.availabilities.is_empty()
    }

    pub fn len(&self) -> usize {
        self.transitions.len() + self.availabilities.len()
    }

    fn check_dim(&mut self, d: usize) -> Result<(), TraceError> {
        match self.dim {
            Some(expected) if expected != d => {
                Err(TraceError::DimensionMismatch { expected, found: d })
            }
            _ => {
                self.dim = Some(d);
                Ok(())
            }
        }
    }

    pub fn append(&mut self, obs: impl Into<Observation>) -> Result<(), TraceError> {
        match obs.into() {
            Observation::Transition(t) => self.push_transition(t),
            Observation::Availability(a) => self.push_availability(a),
        }
    }

    pub fn push_transition(&mut self, t: TransitionObservation) -> Result<(), TraceError> {
        if t.start.dim() != t.end.dim() {
            return Err(TraceError::EndpointMismatch {
                start: t.start.dim(),
                end: t.end.dim(),
            });
        }
        if !t.start.is_finite() || !t.end.is_finite() {
            return Err(TraceError::NonFinite);
        }
        self.check_dim(t.start.dim())?;
        self.transitions.push(t);
        Ok(())
    }

    pub fn push_availability(&mut self, a: AvailabilityObservation) -> Result<(), TraceError> {
        if !a.state.is_finite() {
            return Err(TraceError::NonFinite);
        }
        self.check_dim(a.state.dim())?;
        self.availabilities.push(a);
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for t in &self.transitions {
            write!(w, "T\t{}\t{}", t.start.dim(), t.option.0)?;
            for v in t.start.values().iter().chain(t.end.values()) {
                write!(w, "\t{v}")?;
            }
            writeln!(w)?;
        }
        for a in &self.availabilities {
            write!(w, "A\t{}", a.state.dim())?;
            for v in a.state.values() {
                write!(w, "\t{v}")?;
            }
            for o in &a.available {
                write!(w, "\t{}", o.0)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, TraceError> {
        let mut log = TraceLog::new();
        for (i, line) in r.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let obs = parse_record(&line).map_err(|message| TraceError::Parse {
                line: line_no,
                message,
            })?;
            log.append(obs).map_err(|e| TraceError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(log)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TraceError> {
        let file = fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TraceError> {
        let file = fs::File::open(path)?;
        Self::read_from(BufReader::new(file))
    }
}

fn parse_record(line: &str) -> Result<Observation, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let kind = fields[0];
    let dim: usize = fields
        .get(1)
        .ok_or("missing dimension field")?
        .parse()
        .map_err(|e| format!("bad dimension: {e}"))?;
    let real = |idx: usize| -> Result<f64, String> {
        let s = fields.get(idx).ok_or_else(|| format!("missing field {idx}"))?;
        let v: f64 = s.parse().map_err(|e| format!("bad real {s:?}: {e}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite real {s:?}"))
        }
    };
    let option = |s: &str| -> Result<OptionId, String> {
        s.parse()
            .map(OptionId)
            .map_err(|e| format!("bad option id {s:?}: {e}"))
    };
    match kind {
        "T" => {
            let expected = 3 + 2 * dim;
            if fields.len() != expected {
                return Err(format!(
                    "transition record needs {expected} fields, found {}",
                    fields.len()
                ));
            }
            let o = option(fields[2])?;
            let start = (0..dim).map(|k| real(3 + k)).collect::<Result<Vec<_>, _>>()?;
            let end = (0..dim)
                .map(|k| real(3 + dim + k))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Observation::Transition(TransitionObservation {
                start: StateVector(start),
                option: o,
                end: StateVector(end),
            }))
        }
        "A" => {
            if fields.len() < 2 + dim {
                return Err(format!(
                    "availability record needs at least {} fields, found {}",
                    2 + dim,
                    fields.len()
                ));
            }
            let state = (0..dim).map(|k| real(2 + k)).collect::<Result<Vec<_>, _>>()?;
            let available = fields[2 + dim..]
                .iter()
                .map(|s| option(s))
                .collect::<Result<BTreeSet<_>, _>>()?;
            Ok(Observation::Availability(AvailabilityObservation {
                state: StateVector(state),
                available,
            }))
        }
        other => Err(format!("unknown record kind {other:?}")),
    }
}
