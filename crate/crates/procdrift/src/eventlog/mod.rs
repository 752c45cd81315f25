//! Event log types plus CSV and XES readers/writers.
//!
//! A log is a sequence of traces ordered by last-event timestamp; a trace is
//! the timestamp-ordered events of one case; a trace's behavior is its
//! activity-name sequence. Parsing canonicalizes ordering so downstream code
//! never re-sorts.

mod csv_io;
mod xes;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime, TimeZone, Utc};

use crate::Result;

/// One recorded activity execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub activity: String,
    pub timestamp: DateTime<Utc>,
    pub case_id: String,
    /// Extra columns/attributes; carried through but never consulted by
    /// detection, which is control-flow only.
    pub attributes: BTreeMap<String, String>,
}

/// All events of one case, sorted ascending by timestamp.
///
/// Ties keep input order (stable sort): real data has equal timestamps and
/// determinism matters more than an arbitrary tie rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
}

impl Trace {
    /// The activity-name sequence of this trace.
    pub fn behavior(&self) -> Vec<String> {
        self.events.iter().map(|e| e.activity.clone()).collect()
    }

    /// Borrowed view of the activity names, in order.
    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.activity.as_str())
    }

    fn last_timestamp(&self) -> Option<DateTime<Utc>> {
        self.events.last().map(|e| e.timestamp)
    }
}

/// Traces ordered by the timestamp of their last event.
///
/// Traces completing at the same instant keep their input-order relative
/// position, so parsing is invariant to row order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventLog {
    pub traces: Vec<Trace>,
}

impl EventLog {
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    /// The set of distinct trace behaviors observed in the log.
    pub fn behavior_set(&self) -> BTreeSet<Vec<String>> {
        self.traces.iter().map(|t| t.behavior()).collect()
    }

    /// Distinct activity names across all events.
    pub fn activity_set(&self) -> BTreeSet<&str> {
        self.traces
            .iter()
            .flat_map(|t| t.activities())
            .collect()
    }

    /// Builds a log from bare activity sequences, synthesizing sequential
    /// case ids and timestamps that advance one minute per event.
    ///
    /// Trace order equals input order (timestamps strictly increase).
    pub fn from_behaviors<B, S>(behaviors: impl IntoIterator<Item = B>) -> EventLog
    where
        B: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let start = synthetic_epoch();
        let mut minute = 0i64;
        let traces = behaviors
            .into_iter()
            .enumerate()
            .map(|(i, behavior)| {
                let case_id = format!("c{}", i + 1);
                let events = behavior
                    .into_iter()
                    .map(|activity| {
                        let ev = Event {
                            activity: activity.into(),
                            timestamp: start + Duration::minutes(minute),
                            case_id: case_id.clone(),
                            attributes: BTreeMap::new(),
                        };
                        minute += 1;
                        ev
                    })
                    .collect();
                Trace { case_id, events }
            })
            .collect();
        EventLog { traces }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<EventLog> {
        csv_io::read(reader)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        csv_io::write(self, writer)
    }

    pub fn read_xes<R: Read>(reader: R) -> Result<EventLog> {
        xes::read(reader)
    }

    pub fn write_xes<W: Write>(&self, writer: W) -> Result<()> {
        xes::write(self, writer)
    }

    /// Reads a log file, picking the format by extension (`.xes` for XES,
    /// anything else is treated as CSV).
    pub fn read_path(path: impl AsRef<Path>) -> Result<EventLog> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path)?);
        if has_xes_extension(path) {
            Self::read_xes(reader)
        } else {
            Self::read_csv(reader)
        }
    }

    /// Writes a log file, picking the format by extension like [`read_path`].
    ///
    /// [`read_path`]: EventLog::read_path
    pub fn write_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let writer = BufWriter::new(File::create(path)?);
        if has_xes_extension(path) {
            self.write_xes(writer)
        } else {
            self.write_csv(writer)
        }
    }
}

fn has_xes_extension(path: &Path) -> bool {
    path.extension()
        .map(|e| e.eq_ignore_ascii_case("xes"))
        .unwrap_or(false)
}

/// Base instant for synthetic timestamps.
pub(crate) fn synthetic_epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2021, 10, 1, 8, 0, 0).unwrap()
}

/// Groups events into traces: case order by first appearance, events sorted
/// (stably) by timestamp, traces sorted (stably) by last-event timestamp.
pub(crate) fn assemble(events: Vec<Event>) -> Vec<Trace> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut traces: Vec<Trace> = Vec::new();
    for event in events {
        let slot = *index.entry(event.case_id.clone()).or_insert_with(|| {
            traces.push(Trace {
                case_id: event.case_id.clone(),
                events: Vec::new(),
            });
            traces.len() - 1
        });
        traces[slot].events.push(event);
    }
    for trace in &mut traces {
        trace.events.sort_by_key(|e| e.timestamp);
    }
    traces.retain(|t| !t.events.is_empty());
    traces.sort_by_key(|t| t.last_timestamp());
    traces
}

/// Accepts RFC 3339 (offset normalized to UTC) and a few naive ISO-8601
/// shapes, which are read as UTC.
pub(crate) fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.with_timezone(&Utc));
    }
    const NAIVE_FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    for fmt in NAIVE_FORMATS {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(Utc.from_utc_datetime(&naive));
        }
    }
    None
}
