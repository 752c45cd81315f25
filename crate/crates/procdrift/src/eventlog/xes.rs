//! XES subset: `<trace>` elements holding `<event>` elements, each event
//! carrying `concept:name` and `time:timestamp`, plus arbitrary string
//! attributes. No lifecycle transitions, nested attributes, or extensions
//! beyond declaring concept/time on output.

use std::collections::BTreeMap;
use std::io::{BufReader, Read, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, Event as XmlEvent};
use quick_xml::{Reader, Writer};

use super::{assemble, parse_timestamp, Event, EventLog};
use crate::{Error, Result};

fn xml_err(e: impl std::fmt::Display) -> Error {
    Error::Xes(e.to_string())
}

#[derive(Default)]
struct PendingEvent {
    activity: Option<String>,
    timestamp: Option<DateTime<Utc>>,
    attributes: BTreeMap<String, String>,
}

pub fn read<R: Read>(reader: R) -> Result<EventLog> {
    let mut xml = Reader::from_reader(BufReader::new(reader));
    let mut buf = Vec::new();

    let mut in_trace = false;
    let mut in_event = false;
    let mut trace_case: Option<String> = None;
    let mut trace_raw: Vec<PendingEvent> = Vec::new();
    let mut pending = PendingEvent::default();
    let mut events: Vec<Event> = Vec::new();
    let mut trace_counter = 0usize;

    loop {
        let step = xml
            .read_event_into(&mut buf)
            .map_err(|e| xml_err(format!("{e} at byte {}", xml.buffer_position())))?;
        match step {
            XmlEvent::Eof => break,
            XmlEvent::Start(ref e) | XmlEvent::Empty(ref e) => {
                let is_empty = matches!(step, XmlEvent::Empty(_));
                match e.local_name().as_ref() {
                    b"trace" if !is_empty => {
                        in_trace = true;
                        trace_case = None;
                        trace_raw.clear();
                    }
                    b"event" => {
                        if is_empty {
                            return Err(Error::MissingEventAttribute("concept:name"));
                        }
                        in_event = true;
                        pending = PendingEvent::default();
                    }
                    b"string" | b"date" | b"int" | b"float" | b"boolean" => {
                        let key = attr_value(e, b"key")?;
                        let value = attr_value(e, b"value")?;
                        let (Some(key), Some(value)) = (key, value) else {
                            continue;
                        };
                        if in_event {
                            match key.as_str() {
                                "concept:name" => pending.activity = Some(value),
                                "time:timestamp" => {
                                    let ts = parse_timestamp(&value).ok_or_else(|| {
                                        xml_err(format!("unparseable time:timestamp {value:?}"))
                                    })?;
                                    pending.timestamp = Some(ts);
                                }
                                _ => {
                                    pending.attributes.insert(key, value);
                                }
                            }
                        } else if in_trace && key == "concept:name" {
                            trace_case = Some(value);
                        }
                    }
                    _ => {}
                }
            }
            XmlEvent::End(ref e) => match e.local_name().as_ref() {
                b"event" => {
                    in_event = false;
                    if pending.activity.is_none() {
                        return Err(Error::MissingEventAttribute("concept:name"));
                    }
                    if pending.timestamp.is_none() {
                        return Err(Error::MissingEventAttribute("time:timestamp"));
                    }
                    trace_raw.push(std::mem::take(&mut pending));
                }
                b"trace" => {
                    in_trace = false;
                    trace_counter += 1;
                    let case_id = trace_case
                        .take()
                        .unwrap_or_else(|| format!("case-{trace_counter}"));
                    events.extend(trace_raw.drain(..).map(|raw| Event {
                        activity: raw.activity.unwrap(),
                        timestamp: raw.timestamp.unwrap(),
                        case_id: case_id.clone(),
                        attributes: raw.attributes,
                    }));
                }
                _ => {}
            },
            _ => {}
        }
        buf.clear();
    }

    if events.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(EventLog { traces: assemble(events) })
}

fn attr_value(e: &BytesStart, name: &[u8]) -> Result<Option<String>> {
    for attr in e.attributes() {
        let attr = attr.map_err(xml_err)?;
        if attr.key.as_ref() == name {
            let value = attr.unescape_value().map_err(xml_err)?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn kv<'a>(tag: &'a str, key: &'a str, value: &'a str) -> BytesStart<'a> {
    let mut e = BytesStart::new(tag);
    e.push_attribute(("key", key));
    e.push_attribute(("value", value));
    e
}

pub fn write<W: Write>(log: &EventLog, writer: W) -> Result<()> {
    let mut w = Writer::new_with_indent(writer, b' ', 2);
    w.write_event(XmlEvent::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))
        .map_err(xml_err)?;
    let mut root = BytesStart::new("log");
    root.push_attribute(("xes.version", "1849-2016"));
    w.write_event(XmlEvent::Start(root)).map_err(xml_err)?;
    for (name, prefix, uri) in [
        ("Concept", "concept", "http://www.xes-standard.org/concept.xesext"),
        ("Time", "time", "http://www.xes-standard.org/time.xesext"),
    ] {
        let mut ext = BytesStart::new("extension");
        ext.push_attribute(("name", name));
        ext.push_attribute(("prefix", prefix));
        ext.push_attribute(("uri", uri));
        w.write_event(XmlEvent::Empty(ext)).map_err(xml_err)?;
    }
    for trace in &log.traces {
        w.write_event(XmlEvent::Start(BytesStart::new("trace")))
            .map_err(xml_err)?;
        w.write_event(XmlEvent::Empty(kv("string", "concept:name", &trace.case_id)))
            .map_err(xml_err)?;
        for event in &trace.events {
            w.write_event(XmlEvent::Start(BytesStart::new("event")))
                .map_err(xml_err)?;
            w.write_event(XmlEvent::Empty(kv("string", "concept:name", &event.activity)))
                .map_err(xml_err)?;
            let ts = event.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true);
            w.write_event(XmlEvent::Empty(kv("date", "time:timestamp", &ts)))
                .map_err(xml_err)?;
            for (key, value) in &event.attributes {
                w.write_event(XmlEvent::Empty(kv("string", key, value)))
                    .map_err(xml_err)?;
            }
            w.write_event(XmlEvent::End(BytesEnd::new("event")))
                .map_err(xml_err)?;
        }
        w.write_event(XmlEvent::End(BytesEnd::new("trace")))
            .map_err(xml_err)?;
    }
    w.write_event(XmlEvent::End(BytesEnd::new("log")))
        .map_err(xml_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1849-2016">
  <global scope="event">
    <string key="concept:name" value="__INVALID__"/>
  </global>
  <trace>
    <string key="concept:name" value="order-7"/>
    <event>
      <string key="concept:name" value="Receive"/>
      <date key="time:timestamp" value="2021-10-01T08:00:00Z"/>
      <string key="resource" value="Gunther"/>
    </event>
    <event>
      <string key="concept:name" value="Ship"/>
      <date key="time:timestamp" value="2021-10-01T09:00:00Z"/>
    </event>
  </trace>
</log>
"#;

    #[test]
    fn minimal_document_parses() {
        let log = read(MINIMAL.as_bytes()).unwrap();
        assert_eq!(log.len(), 1);
        let trace = &log.traces[0];
        assert_eq!(trace.case_id, "order-7");
        assert_eq!(trace.behavior(), ["Receive", "Ship"]);
        assert_eq!(trace.events[0].attributes.get("resource").unwrap(), "Gunther");
    }

    #[test]
    fn empty_log_element_is_rejected() {
        assert!(matches!(read("<log/>".as_bytes()).unwrap_err(), Error::EmptyLog));
    }

    #[test]
    fn event_without_timestamp_is_rejected() {
        let doc = r#"<log><trace><event>
            <string key="concept:name" value="A"/>
        </event></trace></log>"#;
        assert!(matches!(
            read(doc.as_bytes()).unwrap_err(),
            Error::MissingEventAttribute("time:timestamp")
        ));
    }

    #[test]
    fn event_without_name_is_rejected() {
        let doc = r#"<log><trace><event>
            <date key="time:timestamp" value="2021-10-01T08:00:00Z"/>
        </event></trace></log>"#;
        assert!(matches!(
            read(doc.as_bytes()).unwrap_err(),
            Error::MissingEventAttribute("concept:name")
        ));
    }

    #[test]
    fn malformed_xml_is_reported() {
        let doc = "<log><trace></log>";
        assert!(matches!(read(doc.as_bytes()).unwrap_err(), Error::Xes(_)));
    }

    #[test]
    fn escaped_names_round_trip() {
        let log = EventLog::from_behaviors([vec!["Check <&> \"quote\""]]);
        let mut buf = Vec::new();
        write(&log, &mut buf).unwrap();
        let relog = read(buf.as_slice()).unwrap();
        assert_eq!(relog.traces[0].behavior(), ["Check <&> \"quote\""]);
    }
}
