use std::collections::{HashMap, HashSet};

use super::{Cascade, Label, ObservationWindow, TimeUnit};
use crate::error::{invalid_input, Result};
use crate::netgen::NodeId;
use crate::scalar::{cast, Scalar};
use crate::Real;

/// Windowed cascade graph: a directed tree of diffusion paths rooted at the
/// origin, with per-node activation times.
///
/// Nodes are kept in activation order (root at index 0) and every parent
/// index is smaller than its child's, which makes the tree property cheap to
/// check and lets passes run in a single forward sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeGraph<T = Real> {
    id: String,
    nodes: Vec<NodeId>,
    parents: Vec<Option<usize>>,
    times: Vec<T>,
    time_unit: Option<TimeUnit>,
    label: Option<Label>,
}

impl<T: Scalar> CascadeGraph<T> {
    pub fn from_parts(
        id: impl Into<String>,
        nodes: Vec<NodeId>,
        parents: Vec<Option<usize>>,
        times: Vec<T>,
        time_unit: Option<TimeUnit>,
    ) -> Result<Self> {
        let g = CascadeGraph { id: id.into(), nodes, parents, times, time_unit, label: None };
        g.validate()?;
        Ok(g)
    }

    /// Tree and temporal invariants. Step-unit graphs additionally require
    /// parents to be strictly earlier than children.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(invalid_input("cascade graph has no nodes"));
        }
        if self.parents.len() != n || self.times.len() != n {
            return Err(invalid_input("cascade graph column lengths differ"));
        }
        if self.parents[0].is_some() {
            return Err(invalid_input("root must not have a parent"));
        }
        let mut seen = HashSet::with_capacity(n);
        for i in 0..n {
            if !seen.insert(self.nodes[i]) {
                return Err(invalid_input(format!("duplicate node {}", self.nodes[i])));
            }
            if !self.times[i].is_finite() || self.times[i] < T::zero() {
                return Err(invalid_input(format!("bad time at node {}", self.nodes[i])));
            }
            if i == 0 {
                continue;
            }
            let p = self.parents[i].ok_or_else(|| invalid_input(format!("node {} has no parent", self.nodes[i])))?;
            if p >= i {
                return Err(invalid_input(format!("parent of node {} is not earlier", self.nodes[i])));
            }
            let strict = self.time_unit == Some(TimeUnit::Steps);
            let (tp, tc) = (self.times[p], self.times[i]);
            if tp > tc || (strict && tp >= tc) {
                return Err(invalid_input(format!("node {} activates before its parent", self.nodes[i])));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Parent of each node as a local index (`None` for the root).
    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn time_unit(&self) -> Option<TimeUnit> {
        self.time_unit
    }

    pub fn label(&self) -> Option<&Label> {
        self.label.as_ref()
    }

    pub fn set_label(&mut self, label: Option<Label>) {
        self.label = label;
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Directed diffusion paths `(parent, child)` in original node ids.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.parents.iter().enumerate().filter_map(|(i, p)| p.map(|p| (self.nodes[p], self.nodes[i])))
    }

    /// Undirected adjacency over local indices, neighbors in index order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for (i, p) in self.parents.iter().enumerate() {
            if let Some(p) = *p {
                adj[p].push(i);
                adj[i].push(p);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Prefix of `cascade` that falls inside the observation window.
pub fn window_cascade(cascade: &Cascade, window: &ObservationWindow, unit: Option<TimeUnit>) -> Cascade {
    let bound = window.bound(unit);
    let keep = cascade.events.iter().take_while(|e| e.time <= bound).count().max(1);
    Cascade::new_unchecked(cascade.id.clone(), cascade.events[..keep].to_vec())
}

/// Builds the windowed cascade graph. Times are kept in the cascade's unit.
pub fn build_graph<T: Scalar>(
    cascade: &Cascade,
    window: &ObservationWindow,
    unit: Option<TimeUnit>,
) -> Result<CascadeGraph<T>> {
    if cascade.is_empty() {
        return Err(invalid_input("cannot build a graph from an empty cascade"));
    }
    let windowed = window_cascade(cascade, window, unit);
    let n = windowed.len();
    let mut index: HashMap<NodeId, usize> = HashMap::with_capacity(n);
    let mut nodes = Vec::with_capacity(n);
    let mut parents = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    for (i, ev) in windowed.events.iter().enumerate() {
        index.insert(ev.node, i);
        nodes.push(ev.node);
        parents.push(ev.parent.map(|p| index[&p]));
        times.push(cast::<T>(ev.time.to_f64()));
    }
    Ok(CascadeGraph { id: windowed.id, nodes, parents, times, time_unit: unit, label: None })
}
