use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::model::{ChorBody, ChorProcedureDef, Choreography, Name, TransitionLabel};

/// A running choreography: remaining body, the processes that exist and the
/// pairs of them that are connected.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChorState {
    pub body: ChorBody,
    pub procedures: Arc<BTreeMap<String, ChorProcedureDef>>,
    pub connections: BTreeSet<(Name, Name)>,
    pub live: BTreeSet<Name>,
}

fn edge(a: &Name, b: &Name) -> (Name, Name) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl ChorState {
    /// Processes free in the choreography, all connected to each other.
    pub fn initial(c: &Choreography) -> Self {
        let live = c.initial_processes();
        let mut connections = BTreeSet::new();
        for a in &live {
            for b in &live {
                if a < b {
                    connections.insert((a.clone(), b.clone()));
                }
            }
        }
        ChorState { body: c.main.clone(), procedures: Arc::new(c.procedure_map()), connections, live }
    }

    pub fn with_connections(c: &Choreography, pairs: impl IntoIterator<Item = (Name, Name)>) -> Self {
        let mut s = Self::initial(c);
        s.connections = pairs.into_iter().map(|(a, b)| edge(&a, &b)).collect();
        s
    }

    pub fn connected(&self, a: &Name, b: &Name) -> bool {
        self.connections.contains(&edge(a, b))
    }
}

const UNFOLD_FUEL: usize = 16;

struct Search<'a> {
    procedures: &'a BTreeMap<String, ChorProcedureDef>,
    fuel: usize,
    visited: BTreeSet<(String, Vec<Name>)>,
}

impl Search<'_> {
    // Actions that can be brought to the front of `b` without touching `blocked`,
    // each with the body that remains once it has happened.
    fn heads(&mut self, b: &ChorBody, blocked: &BTreeSet<Name>) -> Vec<(TransitionLabel, ChorBody)> {
        let mut out = Vec::new();
        match b {
            ChorBody::Terminated => {}
            ChorBody::Call { procedure, args } => {
                if self.fuel == 0 || !self.visited.insert((procedure.clone(), args.clone())) {
                    return out;
                }
                self.fuel -= 1;
                if let Some(def) = self.procedures.get(procedure) {
                    let map: BTreeMap<Name, Name> = def.params.iter().cloned().zip(args.iter().cloned()).collect();
                    let unfolded = def.body.substitute(&map);
                    out = self.heads(&unfolded, blocked);
                }
            }
            ChorBody::Com { sender, expr, receiver, cont } => {
                let l = TransitionLabel::Com { sender: sender.clone(), expr: expr.clone(), receiver: receiver.clone() };
                self.prefix(&mut out, l, &[sender, receiver], blocked, cont, |r| ChorBody::Com {
                    sender: sender.clone(),
                    expr: expr.clone(),
                    receiver: receiver.clone(),
                    cont: Box::new(r),
                });
            }
            ChorBody::Sel { sender, receiver, label, cont } => {
                let l = TransitionLabel::Sel { sender: sender.clone(), receiver: receiver.clone(), label: label.clone() };
                self.prefix(&mut out, l, &[sender, receiver], blocked, cont, |r| ChorBody::Sel {
                    sender: sender.clone(),
                    receiver: receiver.clone(),
                    label: label.clone(),
                    cont: Box::new(r),
                });
            }
            ChorBody::Intro { introducer, left, right, cont } => {
                let l = TransitionLabel::Intro { introducer: introducer.clone(), left: left.clone(), right: right.clone() };
                self.prefix(&mut out, l, &[introducer, left, right], blocked, cont, |r| ChorBody::Intro {
                    introducer: introducer.clone(),
                    left: left.clone(),
                    right: right.clone(),
                    cont: Box::new(r),
                });
            }
            ChorBody::Spawn { parent, child, cont } => {
                let l = TransitionLabel::Spawned { parent: parent.clone(), child: child.clone() };
                self.prefix(&mut out, l, &[parent, child], blocked, cont, |r| ChorBody::Spawn {
                    parent: parent.clone(),
                    child: child.clone(),
                    cont: Box::new(r),
                });
            }
            ChorBody::Cond { process, expr, then, otherwise } => {
                if !blocked.contains(process) {
                    out.push((TransitionLabel::Then { process: process.clone(), expr: expr.clone() }, (**then).clone()));
                    out.push((TransitionLabel::Else { process: process.clone(), expr: expr.clone() }, (**otherwise).clone()));
                }
                // An action both branches start with can move above the conditional.
                let mut inner = blocked.clone();
                inner.insert(process.clone());
                let left = self.heads(then, &inner);
                let right = self.heads(otherwise, &inner);
                for (l, rt) in left {
                    if let Some((_, re)) = right.iter().find(|(m, _)| *m == l) {
                        let residual = ChorBody::Cond {
                            process: process.clone(),
                            expr: expr.clone(),
                            then: Box::new(rt),
                            otherwise: Box::new(re.clone()),
                        };
                        out.push((l, residual));
                    }
                }
            }
        }
        out
    }

    fn prefix(
        &mut self,
        out: &mut Vec<(TransitionLabel, ChorBody)>,
        label: TransitionLabel,
        names: &[&Name],
        blocked: &BTreeSet<Name>,
        cont: &ChorBody,
        rebuild: impl Fn(ChorBody) -> ChorBody,
    ) {
        if names.iter().all(|n| !blocked.contains(*n)) {
            out.push((label, cont.clone()));
        }
        let mut inner = blocked.clone();
        inner.extend(names.iter().map(|n| (*n).clone()));
        for (l, r) in self.heads(cont, &inner) {
            out.push((l, rebuild(r)));
        }
    }
}

/// Every action reachable at the head of the body, checked against the connections.
pub fn enabled_chor_transitions(s: &ChorState) -> Vec<(TransitionLabel, ChorState)> {
    let mut search = Search { procedures: &s.procedures, fuel: UNFOLD_FUEL, visited: BTreeSet::new() };
    let candidates = search.heads(&s.body, &BTreeSet::new());
    let mut out: Vec<(TransitionLabel, ChorState)> = Vec::new();
    for (label, residual) in candidates {
        let Some(next) = perform(s, &label, residual) else { continue };
        if !out.iter().any(|(l, n)| *l == next.0 && *n == next.1) {
            out.push(next);
        }
    }
    out.sort_by(|(a, _), (b, _)| {
        let ka = a.names().into_iter().min().cloned();
        let kb = b.names().into_iter().min().cloned();
        (ka, a).cmp(&(kb, b))
    });
    out
}

fn perform(s: &ChorState, label: &TransitionLabel, residual: ChorBody) -> Option<(TransitionLabel, ChorState)> {
    let mut next = ChorState { body: residual, procedures: s.procedures.clone(), connections: s.connections.clone(), live: s.live.clone() };
    match label {
        TransitionLabel::Com { sender, receiver, .. } | TransitionLabel::Sel { sender, receiver, .. } => {
            if !s.connected(sender, receiver) {
                return None;
            }
        }
        TransitionLabel::Then { process, .. } | TransitionLabel::Else { process, .. } => {
            if !s.live.contains(process) {
                return None;
            }
        }
        TransitionLabel::Intro { introducer, left, right } => {
            if left == right || !s.connected(introducer, left) || !s.connected(introducer, right) {
                return None;
            }
            next.connections.insert(edge(left, right));
        }
        TransitionLabel::Spawned { parent, child } => {
            if !s.live.contains(parent) {
                return None;
            }
            let actual = if s.live.contains(child) { fresh_name(&s.live, parent, child) } else { child.clone() };
            if actual != *child {
                next.body = next.body.substitute(&BTreeMap::from([(child.clone(), actual.clone())]));
            }
            next.live.insert(actual.clone());
            next.connections.insert(edge(parent, &actual));
            return Some((TransitionLabel::Spawned { parent: parent.clone(), child: actual }, next));
        }
    }
    Some((label.clone(), next))
}

fn fresh_name(live: &BTreeSet<Name>, parent: &Name, child: &Name) -> Name {
    let base = child.as_str().rsplit('/').next().unwrap_or(child.as_str());
    let base = base.trim_end_matches(|c: char| c.is_ascii_digit());
    (0usize..).map(|k| Name::new(format!("{parent}/{base}{k}"))).find(|n| !live.contains(n)).expect("unbounded counter")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_choreography;

    fn labels(s: &ChorState) -> Vec<String> {
        enabled_chor_transitions(s).iter().map(|(l, _)| l.to_string()).collect()
    }

    #[test]
    fn online_store_choreography_starts_with_item() {
        let c = parse_choreography(include_str!("../../data/onlinestore.chor")).unwrap();
        assert_eq!(labels(&ChorState::initial(&c)), ["customer.item -> store"]);
    }

    #[test]
    fn independent_communications_commute() {
        let c = parse_choreography("main { a.x -> b; c.y -> d; 0 }").unwrap();
        assert_eq!(labels(&ChorState::initial(&c)), ["a.x -> b", "c.y -> d"]);
    }

    #[test]
    fn dependent_communications_do_not_commute() {
        let c = parse_choreography("main { a.x -> b; b.y -> d; 0 }").unwrap();
        assert_eq!(labels(&ChorState::initial(&c)), ["a.x -> b"]);
    }

    #[test]
    fn empty_body_has_no_transitions() {
        let c = parse_choreography("main { 0 }").unwrap();
        assert!(labels(&ChorState::initial(&c)).is_empty());
    }

    #[test]
    fn action_common_to_both_branches_moves_up() {
        let c = parse_choreography("main { if a.e then { b.x -> c; 0 } else { b.x -> c; a.y -> b; 0 } }").unwrap();
        assert_eq!(labels(&ChorState::initial(&c)), ["a.e then", "a.e else", "b.x -> c"]);
    }

    #[test]
    fn spawn_connects_child_and_intro_connects_pair() {
        let c = parse_choreography(include_str!("../../data/serverless.chor")).unwrap();
        let s = ChorState::initial(&c);
        let (_, s) = enabled_chor_transitions(&s).remove(0);
        let v = enabled_chor_transitions(&s);
        assert_eq!(v[0].0.to_string(), "entry spawns entry/worker0");
        let s = v[0].1.clone();
        assert!(s.connected(&"entry".into(), &"entry/worker0".into()));
        assert!(!s.connected(&"client".into(), &"entry/worker0".into()));
        let (l, s) = enabled_chor_transitions(&s).remove(0);
        assert_eq!(l.to_string(), "entry.entry/worker0 <-> client");
        assert!(s.connected(&"client".into(), &"entry/worker0".into()));
    }

    #[test]
    fn communication_needs_a_connection() {
        let c = parse_choreography("main { a.x -> b; 0 }").unwrap();
        let s = ChorState::with_connections(&c, []);
        assert!(labels(&s).is_empty());
    }
}
