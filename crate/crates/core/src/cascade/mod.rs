//! Cascades, windowed cascade graphs and their on-disk formats.

mod graph;
mod io;
mod time;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::netgen::NodeId;

pub use graph::{build_graph, window_cascade, CascadeGraph};
pub use io::{
    parse_cascades, parse_labels, read_cascades, read_labels, serialize_cascades, write_cascades, write_labels,
    CascadeSet,
};
pub use time::Timestamp;

/// One activation: `node` adopted at `time`, influenced by `parent`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub node: NodeId,
    pub parent: Option<NodeId>,
    pub time: Timestamp,
}

impl Event {
    pub fn origin(node: NodeId) -> Self {
        Event { node, parent: None, time: Timestamp::ZERO }
    }

    pub fn new(node: NodeId, parent: NodeId, time: Timestamp) -> Self {
        Event { node, parent: Some(parent), time }
    }
}

/// Time-ordered activation events rooted at an origin posted at time 0.
///
/// Invariants (checked by [`Cascade::new`]): the first event is the origin
/// with no parent at time 0; times never decrease; every other event names a
/// parent that appears earlier and is not later in time; no node repeats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cascade {
    id: String,
    events: Vec<Event>,
}

impl Cascade {
    pub fn new(id: impl Into<String>, events: Vec<Event>) -> Result<Self> {
        let id = id.into();
        validate_id(&id)?;
        validate_events(&events)?;
        Ok(Cascade { id, events })
    }

    pub(crate) fn new_unchecked(id: String, events: Vec<Event>) -> Self {
        debug_assert!(validate_events(&events).is_ok());
        Cascade { id, events }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        validate_id(&id)?;
        self.id = id;
        Ok(self)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn origin(&self) -> NodeId {
        self.events[0].node
    }

    /// Number of activation events, origin included.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Keeps the first `max` events. A time-ordered prefix is closed under
    /// parents, so the result is still a valid cascade.
    pub fn truncate(&mut self, max: usize) {
        self.events.truncate(max.max(1));
    }
}

fn validate_id(id: &str) -> Result<()> {
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        return Err(invalid_input(format!("cascade id `{id}` must be non-empty without whitespace")));
    }
    Ok(())
}

pub(crate) fn validate_events(events: &[Event]) -> Result<()> {
    let first = events.first().ok_or_else(|| invalid_input("cascade has no events"))?;
    if first.parent.is_some() || !first.time.is_zero() {
        return Err(invalid_input("first event must be the origin at time 0"));
    }
    let mut seen: HashSet<NodeId> = HashSet::with_capacity(events.len());
    let mut times: std::collections::HashMap<NodeId, Timestamp> = std::collections::HashMap::with_capacity(events.len());
    seen.insert(first.node);
    times.insert(first.node, first.time);
    let mut last = first.time;
    for ev in &events[1..] {
        let parent = ev.parent.ok_or_else(|| invalid_input(format!("node {} has no parent", ev.node)))?;
        if parent == ev.node {
            return Err(invalid_input(format!("node {} is its own parent", ev.node)));
        }
        if ev.time < last {
            return Err(invalid_input(format!("time regression at node {}", ev.node)));
        }
        let parent_time =
            *times.get(&parent).ok_or_else(|| invalid_input(format!("unknown parent {parent} of node {}", ev.node)))?;
        if parent_time > ev.time {
            return Err(invalid_input(format!("node {} precedes its parent {parent}", ev.node)));
        }
        if !seen.insert(ev.node) {
            return Err(invalid_input(format!("duplicate node {}", ev.node)));
        }
        times.insert(ev.node, ev.time);
        last = ev.time;
    }
    Ok(())
}

/// Unit of a cascade file's timestamps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Steps,
    Seconds,
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeUnit::Steps => "steps",
            TimeUnit::Seconds => "seconds",
        })
    }
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steps" => Ok(TimeUnit::Steps),
            "seconds" => Ok(TimeUnit::Seconds),
            other => Err(invalid_input(format!("unknown time unit `{other}`"))),
        }
    }
}

pub const ONE_YEAR_SECONDS: u64 = 31_536_000;

/// Observation cutoff: the first `max_steps` diffusion rounds or `max_time`
/// seconds from the origin, whichever comes first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservationWindow {
    pub max_steps: u64,
    pub max_time: Timestamp,
}

impl Default for ObservationWindow {
    fn default() -> Self {
        ObservationWindow { max_steps: 100, max_time: Timestamp::from_int(ONE_YEAR_SECONDS) }
    }
}

impl ObservationWindow {
    pub fn new(max_steps: u64, max_time: Timestamp) -> Result<Self> {
        if max_steps == 0 || max_time.is_zero() {
            return Err(invalid_config("observation window bounds must be positive"));
        }
        Ok(ObservationWindow { max_steps, max_time })
    }

    /// Inclusive time bound for cascades measured in `unit`. Without a
    /// declared unit both thresholds apply.
    pub fn bound(&self, unit: Option<TimeUnit>) -> Timestamp {
        let steps = Timestamp::from_int(self.max_steps);
        match unit {
            Some(TimeUnit::Steps) => steps,
            Some(TimeUnit::Seconds) => self.max_time,
            None => steps.min(self.max_time),
        }
    }
}

/// Source-dataset label of a cascade within a group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub class_index: usize,
    pub class_name: String,
}
