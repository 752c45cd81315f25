//! CSV event log format: header `case,timestamp,activity[,key...]`, RFC 4180
//! quoting, ISO-8601 timestamps. Extra columns round-trip as attributes.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use chrono::SecondsFormat;

use super::{assemble, parse_timestamp, Event, EventLog};
use crate::{Error, Result};

const REQUIRED: [&str; 3] = ["case", "timestamp", "activity"];

pub fn read<R: Read>(reader: R) -> Result<EventLog> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut required = [0usize; 3];
    for (slot, name) in required.iter_mut().zip(REQUIRED) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let [case_col, ts_col, act_col] = required;
    let extra: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !required.contains(i))
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut events = Vec::new();
    for (offset, record) in rdr.records().enumerate() {
        let record = record?;
        let row = offset + 2; // 1-based, counting the header line
        let field = |col: usize| record.get(col).unwrap_or("");
        let case_id = field(case_col);
        if case_id.is_empty() {
            return Err(Error::EmptyField { row, column: "case".into() });
        }
        let activity = field(act_col);
        if activity.is_empty() {
            return Err(Error::EmptyField { row, column: "activity".into() });
        }
        let raw_ts = field(ts_col);
        let timestamp = parse_timestamp(raw_ts).ok_or_else(|| Error::BadTimestamp {
            row,
            column: "timestamp".into(),
            value: raw_ts.into(),
        })?;
        let attributes = extra
            .iter()
            .map(|(col, key)| (key.clone(), field(*col).to_string()))
            .filter(|(_, v)| !v.is_empty())
            .collect();
        events.push(Event {
            activity: activity.to_string(),
            timestamp,
            case_id: case_id.to_string(),
            attributes,
        });
    }
    if events.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(EventLog { traces: assemble(events) })
}

pub fn write<W: Write>(log: &EventLog, writer: W) -> Result<()> {
    let keys: BTreeSet<&str> = log
        .traces
        .iter()
        .flat_map(|t| &t.events)
        .flat_map(|e| e.attributes.keys())
        .map(String::as_str)
        .collect();

    let mut wtr = csv::Writer::from_writer(writer);
    let header: Vec<&str> = REQUIRED.iter().copied().chain(keys.iter().copied()).collect();
    wtr.write_record(&header)?;
    for trace in &log.traces {
        for event in &trace.events {
            let ts = event.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true);
            let mut record = vec![
                event.case_id.clone(),
                ts,
                event.activity.clone(),
            ];
            for key in &keys {
                record.push(event.attributes.get(*key).cloned().unwrap_or_default());
            }
            wtr.write_record(&record)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
