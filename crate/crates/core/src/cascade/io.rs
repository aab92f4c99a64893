use std::fmt::Write as _;
use std::path::Path;

use super::{Cascade, Event, TimeUnit, Timestamp};
use crate::error::{Error, Result};
use crate::netgen::NodeId;

/// Contents of a cascade file: an optional `# time_unit=` header and one
/// cascade per line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CascadeSet {
    pub time_unit: Option<TimeUnit>,
    pub cascades: Vec<Cascade>,
}

const UNIT_HEADER: &str = "# time_unit=";

/// Formats cascades as
/// `<id>\t<origin>\t<origin_time>\t<event_count>\t<parent>/<node>:<time> ...`.
pub fn serialize_cascades(set: &CascadeSet) -> String {
    let mut out = String::new();
    if let Some(unit) = set.time_unit {
        let _ = writeln!(out, "{UNIT_HEADER}{unit}");
    }
    for c in &set.cascades {
        let origin = &c.events[0];
        let _ = write!(out, "{}\t{}\t{}\t{}\t", c.id, origin.node, origin.time, c.events.len());
        for (i, ev) in c.events[1..].iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let parent = ev.parent.expect("non-origin events have parents");
            let _ = write!(out, "{parent}/{}:{}", ev.node, ev.time);
        }
        out.push('\n');
    }
    out
}

pub fn parse_cascades(text: &str) -> Result<CascadeSet> {
    let mut set = CascadeSet::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if i == 0 {
            if let Some(unit) = line.strip_prefix(UNIT_HEADER) {
                set.time_unit = Some(unit.parse().map_err(|e: Error| at(line_no, e))?);
                continue;
            }
        }
        set.cascades.push(parse_line(line).map_err(|e| at(line_no, e))?);
    }
    Ok(set)
}

fn at(line: usize, err: Error) -> Error {
    match err {
        Error::InvalidInput(message) | Error::Parse { message, .. } => Error::Parse { line, message },
        other => Error::Parse { line, message: other.to_string() },
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Parse { line: 0, message: msg.into() }
}

fn parse_node(s: &str) -> Result<NodeId> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
        return Err(malformed(format!("malformed node id `{s}`")));
    }
    s.parse().map_err(|_| malformed(format!("node id `{s}` out of range")))
}

fn parse_line(line: &str) -> Result<Cascade> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(malformed(format!("expected 5 tab-separated fields, found {}", fields.len())));
    }
    let origin = parse_node(fields[1])?;
    let origin_time: Timestamp = fields[2].parse()?;
    if !origin_time.is_zero() {
        return Err(malformed("origin time must be 0"));
    }
    let count: usize = fields[3].parse().map_err(|_| malformed(format!("bad event count `{}`", fields[3])))?;
    let mut events = Vec::with_capacity(count);
    events.push(Event { node: origin, parent: None, time: origin_time });
    if !fields[4].is_empty() {
        for tok in fields[4].split(' ') {
            let (edge, time) = tok.split_once(':').ok_or_else(|| malformed(format!("malformed token `{tok}`")))?;
            let (parent, node) = edge.split_once('/').ok_or_else(|| malformed(format!("malformed token `{tok}`")))?;
            events.push(Event { node: parse_node(node)?, parent: Some(parse_node(parent)?), time: time.parse()? });
        }
    }
    if events.len() != count {
        return Err(malformed(format!("event_count {count} but {} events listed", events.len())));
    }
    Cascade::new(fields[0], events)
}

pub fn read_cascades(path: &Path) -> Result<CascadeSet> {
    parse_cascades(&std::fs::read_to_string(path)?)
}

pub fn write_cascades(set: &CascadeSet, path: &Path) -> Result<()> {
    std::fs::write(path, serialize_cascades(set))?;
    Ok(())
}

/// Label sidecar: CSV with header `cascade_id,class_name`.
pub fn write_labels<'a>(rows: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut out = String::from("cascade_id,class_name\n");
    for (id, class) in rows {
        let _ = writeln!(out, "{id},{class}");
    }
    out
}

pub fn parse_labels(text: &str) -> Result<Vec<(String, String)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "cascade_id,class_name")) => {}
        _ => return Err(Error::Parse { line: 1, message: "expected header `cascade_id,class_name`".into() }),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let (id, class) = l
                .split_once(',')
                .filter(|(id, class)| !id.is_empty() && !class.is_empty() && !class.contains(','))
                .ok_or_else(|| Error::Parse { line: i + 1, message: format!("expected `cascade_id,class_name`, got `{l}`") })?;
            Ok((id.to_string(), class.to_string()))
        })
        .collect()
}

pub fn read_labels(path: &Path) -> Result<Vec<(String, String)>> {
    parse_labels(&std::fs::read_to_string(path)?)
}
