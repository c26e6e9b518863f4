//! Symbolic execution graphs: construction, loop closure and rendering.

mod dot;
mod loops;
mod policy;

use std::collections::BTreeMap;
use std::fmt;

pub use dot::export_dot;
pub use loops::{close_loop, detect_leak, evaluated_variables, find_stuck_revisit, is_subsequence};
pub use policy::{choices, pick, Choice, Policy, UnknownPolicy};

use crate::model::equivalence::Prepared;
use crate::model::{Name, Network, ProcessRenaming, TransitionLabel};
use crate::semantics::{enabled_network_transitions, NetworkState};
use crate::syntax::print_network;

pub const DEFAULT_NODE_BUDGET: usize = 100_000;
pub const DEFAULT_PROCESS_CAP: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Then,
    Else,
}

#[derive(Clone, Debug)]
pub struct SegNode {
    pub id: usize,
    pub state: NetworkState,
    pub reset_count: usize,
    pub choice_path: Vec<Branch>,
    pub(crate) prepared: Prepared,
}

impl SegNode {
    pub fn new(id: usize, state: NetworkState, reset_count: usize, choice_path: Vec<Branch>) -> Self {
        let prepared = Prepared::new(&state.network, Some(&state.gamma));
        SegNode { id, state, reset_count, choice_path, prepared }
    }

    pub fn markings(&self) -> BTreeMap<Name, bool> {
        self.state.network.markings()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegEdge {
    pub from: usize,
    pub to: usize,
    pub label: TransitionLabel,
    /// Present exactly on edges that close a loop.
    pub loop_mapping: Option<ProcessRenaming>,
}

#[derive(Clone, Debug)]
pub struct Seg {
    pub nodes: Vec<SegNode>,
    pub edges: Vec<SegEdge>,
    pub root: usize,
}

impl Seg {
    pub fn outgoing(&self, id: usize) -> impl Iterator<Item = &SegEdge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    pub fn incoming(&self, id: usize) -> impl Iterator<Item = &SegEdge> {
        self.edges.iter().filter(move |e| e.to == id)
    }

    pub fn loop_edges(&self) -> impl Iterator<Item = &SegEdge> {
        self.edges.iter().filter(|e| e.loop_mapping.is_some())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FailureKind {
    Deadlock,
    ResourceLeak,
    NoValidLoop,
    BudgetExhausted,
    /// The network uses a name that is neither a process nor bound.
    Semantic,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::Deadlock => "deadlock",
            FailureKind::ResourceLeak => "resource leak",
            FailureKind::NoValidLoop => "no valid loop",
            FailureKind::BudgetExhausted => "node budget exhausted",
            FailureKind::Semantic => "semantic error",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at node {node}: {diagnostic}")]
pub struct ExtractionFailure {
    pub kind: FailureKind,
    pub node: usize,
    pub diagnostic: String,
    /// Collapsing mapping for leaks, the repeating mapping for stuck loops.
    pub witness: Option<ProcessRenaming>,
    /// Node ids of the offending branch segment.
    pub cycle: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub policy: Policy,
    pub node_budget: usize,
    pub process_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { policy: Policy::default(), node_budget: DEFAULT_NODE_BUDGET, process_cap: DEFAULT_PROCESS_CAP }
    }
}

/// Builds the graph for `n` with the given connections (complete when `None`).
pub fn build_seg(n: &Network, initial_connections: Option<&[(Name, Name)]>) -> Result<Seg, ExtractionFailure> {
    let state = match initial_connections {
        Some(c) => NetworkState::with_connections(n.clone(), c.iter().cloned()),
        None => NetworkState::initial(n.clone()),
    };
    build_seg_from(state, &BuildOptions::default())
}

/// Depth-first construction from an arbitrary start state.
pub fn build_seg_from(start: NetworkState, opts: &BuildOptions) -> Result<Seg, ExtractionFailure> {
    let mut start = start;
    start.network.clear_markings();
    let mut seg = Seg { nodes: vec![SegNode::new(0, start, 0, Vec::new())], edges: Vec::new(), root: 0 };
    let mut path: Vec<usize> = Vec::new();
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    while let Some((id, depth)) = stack.pop() {
        path.truncate(depth);
        path.push(id);
        let node = &seg.nodes[id];
        if node.state.network.is_terminated() {
            continue;
        }
        let transitions = enabled_network_transitions(&node.state).map_err(|e| ExtractionFailure {
            kind: FailureKind::Semantic,
            node: id,
            diagnostic: e.to_string(),
            witness: None,
            cycle: Vec::new(),
        })?;
        if transitions.is_empty() {
            return Err(ExtractionFailure {
                kind: FailureKind::Deadlock,
                node: id,
                diagnostic: format!("no transition is enabled in\n{}", print_network(&node.state.network)),
                witness: None,
                cycle: Vec::new(),
            });
        }
        let options = choices(transitions);
        let chosen = options[pick(opts.policy, &options, &node.state.network)].clone();
        let mut new_children = Vec::new();
        for (label, next) in chosen {
            let candidate = successor(&seg.nodes[id], seg.nodes.len(), &label, next);
            let ancestors: Vec<&SegNode> = path.iter().map(|&i| &seg.nodes[i]).collect();
            if let Some((target, m)) = close_loop(&candidate, &ancestors) {
                seg.edges.push(SegEdge { from: id, to: target, label, loop_mapping: Some(m) });
                continue;
            }
            if !candidate.state.network.is_terminated() {
                check_failures(&candidate, &ancestors, &path, id, opts)?;
            }
            if seg.nodes.len() >= opts.node_budget {
                return Err(ExtractionFailure {
                    kind: FailureKind::BudgetExhausted,
                    node: id,
                    diagnostic: format!("more than {} nodes", opts.node_budget),
                    witness: None,
                    cycle: Vec::new(),
                });
            }
            let cid = candidate.id;
            seg.nodes.push(candidate);
            seg.edges.push(SegEdge { from: id, to: cid, label, loop_mapping: None });
            new_children.push(cid);
        }
        // The then-branch is explored first.
        for cid in new_children.into_iter().rev() {
            stack.push((cid, depth + 1));
        }
    }
    Ok(seg)
}

fn check_failures(candidate: &SegNode, ancestors: &[&SegNode], path: &[usize], parent: usize, opts: &BuildOptions) -> Result<(), ExtractionFailure> {
    if let Some((target, m)) = detect_leak(candidate, ancestors) {
        let collapsed: Vec<String> = m
            .iter()
            .map(|(_, b)| b)
            .filter(|b| m.preimage(b).len() > 1)
            .map(|b| format!("{} -> {b}", m.preimage(b).iter().map(|n| n.as_str()).collect::<Vec<_>>().join(", ")))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        return Err(ExtractionFailure {
            kind: FailureKind::ResourceLeak,
            node: parent,
            diagnostic: format!("processes collapse onto node {target}: {}", collapsed.join("; ")),
            witness: Some(m),
            cycle: segment(path, target),
        });
    }
    if let Some((target, m)) = find_stuck_revisit(candidate, ancestors) {
        return Err(ExtractionFailure {
            kind: FailureKind::NoValidLoop,
            node: parent,
            diagnostic: format!("node {target} recurs without every live process acting in between"),
            witness: Some(m),
            cycle: segment(path, target),
        });
    }
    let live = candidate.state.network.live_count();
    if live > opts.process_cap {
        return Err(ExtractionFailure {
            kind: FailureKind::NoValidLoop,
            node: parent,
            diagnostic: format!("{live} live processes and no state to loop back to"),
            witness: None,
            cycle: path.to_vec(),
        });
    }
    Ok(())
}

fn segment(path: &[usize], from: usize) -> Vec<usize> {
    let start = path.iter().position(|&i| i == from).unwrap_or(0);
    path[start..].to_vec()
}

// Applies marking bookkeeping to a raw successor state.
fn successor(parent: &SegNode, id: usize, label: &TransitionLabel, mut next: NetworkState) -> SegNode {
    for n in label.names() {
        if let Some(p) = next.network.get_mut(n) {
            p.marked = true;
        }
    }
    let finished: Vec<Name> = next.network.processes().filter(|p| p.is_terminated()).map(|p| p.name.clone()).collect();
    for n in finished {
        next.network.get_mut(&n).expect("listed").marked = false;
    }
    let mut reset_count = parent.reset_count;
    if next.network.all_live_marked() {
        next.network.clear_markings();
        reset_count += 1;
    }
    let mut choice_path = parent.choice_path.clone();
    match label {
        TransitionLabel::Then { .. } => choice_path.push(Branch::Then),
        TransitionLabel::Else { .. } => choice_path.push(Branch::Else),
        _ => {}
    }
    SegNode::new(id, next, reset_count, choice_path)
}

#[cfg(test)]
mod tests;
