use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Behaviour, Name, Network, Process, TransitionLabel, VariableMapping};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("process `{process}` uses `{variable}`, which names no process and is not bound")]
    UnboundVariable { process: Name, variable: Name },
}

/// A network together with the variable mapping that replaces its connections.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NetworkState {
    pub network: Network,
    pub gamma: VariableMapping,
}

impl NetworkState {
    /// Every process connected to every other.
    pub fn initial(network: Network) -> Self {
        let names: Vec<Name> = network.names().cloned().collect();
        let gamma = VariableMapping::complete(names.iter());
        NetworkState { network, gamma }
    }

    /// Only the listed pairs are connected.
    pub fn with_connections(network: Network, connections: impl IntoIterator<Item = (Name, Name)>) -> Self {
        let names: Vec<Name> = network.names().cloned().collect();
        let gamma = VariableMapping::from_connections(names.iter(), connections);
        NetworkState { network, gamma }
    }
}

/// Unfolds tail calls at the top of `b` until an action appears.
/// Returns `None` when unfolding does not reach an action.
pub fn unfold_head(p: &Process, b: &Behaviour) -> Option<Behaviour> {
    let mut current = b.clone();
    let mut fuel = p.procedures.len() + 1;
    while let Behaviour::Call { procedure, args } = &current {
        if fuel == 0 {
            return None;
        }
        fuel -= 1;
        let def = p.procedures.get(procedure)?;
        let map: BTreeMap<Name, Name> = def.params.iter().cloned().zip(args.iter().cloned()).collect();
        current = def.body.substitute(&map, true);
    }
    Some(current)
}

/// Name of the `k`-th child spawned by `parent` through `binder`.
pub fn fresh_child_name(network: &Network, parent: &Name, binder: &Name) -> Name {
    let base = binder_base(binder);
    (0usize..)
        .map(|k| Name::new(format!("{parent}/{base}{k}")))
        .find(|n| !network.contains(n))
        .expect("unbounded counter")
}

// Binders renamed apart carry a `_k` suffix; spawned names use the original.
fn binder_base(binder: &Name) -> &str {
    let s = binder.as_str();
    match s.rfind('_') {
        Some(i) if i > 0 && i + 1 < s.len() && s[i + 1..].bytes().all(|c| c.is_ascii_digit()) => &s[..i],
        _ => s,
    }
}

struct Heads<'a> {
    state: &'a NetworkState,
    heads: BTreeMap<Name, Behaviour>,
}

impl<'a> Heads<'a> {
    fn new(state: &'a NetworkState) -> Self {
        let mut heads = BTreeMap::new();
        for p in state.network.processes() {
            if p.is_terminated() {
                continue;
            }
            if let Some(h) = unfold_head(p, &p.main) {
                heads.insert(p.name.clone(), h);
            }
        }
        Heads { state, heads }
    }

    fn resolve(&self, owner: &Name, var: &Name) -> Result<Option<&'a Name>, SemanticsError> {
        match self.state.gamma.resolve(owner, var) {
            Some(t) => Ok(Some(t)),
            None if self.state.network.contains(var) => Ok(None),
            None => Err(SemanticsError::UnboundVariable { process: owner.clone(), variable: var.clone() }),
        }
    }
}

/// All transitions enabled in `s`, ordered by the least process name involved.
pub fn enabled_network_transitions(s: &NetworkState) -> Result<Vec<(TransitionLabel, NetworkState)>, SemanticsError> {
    let h = Heads::new(s);
    let mut out = Vec::new();
    for (p, head) in &h.heads {
        match head {
            Behaviour::Send { to, expr, cont } => {
                let Some(q) = h.resolve(p, to)? else { continue };
                if let Some(Behaviour::Receive { from, cont: qcont }) = h.heads.get(q) {
                    if h.resolve(q, from)? == Some(p) {
                        let label = TransitionLabel::Com { sender: p.clone(), expr: expr.clone(), receiver: q.clone() };
                        let next = step(s, &[(p, cont), (q, qcont)]);
                        out.push((label, next));
                    }
                }
            }
            Behaviour::Select { to, label, cont } => {
                let Some(q) = h.resolve(p, to)? else { continue };
                if let Some(Behaviour::Offer { from, branches }) = h.heads.get(q) {
                    if h.resolve(q, from)? != Some(p) {
                        continue;
                    }
                    if let Some((_, branch)) = branches.iter().find(|(l, _)| l == label) {
                        let l = TransitionLabel::Sel { sender: p.clone(), receiver: q.clone(), label: label.clone() };
                        out.push((l, step(s, &[(p, cont), (q, branch)])));
                    }
                }
            }
            Behaviour::Conditional { expr, then, otherwise } => {
                out.push((TransitionLabel::Then { process: p.clone(), expr: expr.clone() }, step(s, &[(p, then)])));
                out.push((TransitionLabel::Else { process: p.clone(), expr: expr.clone() }, step(s, &[(p, otherwise)])));
            }
            Behaviour::Introduce { left, right, cont } => {
                let (Some(q), Some(r)) = (h.resolve(p, left)?, h.resolve(p, right)?) else { continue };
                if q == r || q == p || r == p {
                    continue;
                }
                let (Some(Behaviour::ReceiveIntro { from: fq, binder: w, cont: qcont }), Some(Behaviour::ReceiveIntro { from: fr, binder: x, cont: rcont })) =
                    (h.heads.get(q), h.heads.get(r))
                else {
                    continue;
                };
                if h.resolve(q, fq)? != Some(p) || h.resolve(r, fr)? != Some(p) {
                    continue;
                }
                let mut next = step(s, &[(p, cont), (q, qcont), (r, rcont)]);
                next.gamma.set(q.clone(), w.clone(), r.clone());
                next.gamma.set(r.clone(), x.clone(), q.clone());
                let label = TransitionLabel::Intro { introducer: p.clone(), left: q.clone(), right: r.clone() };
                out.push((label, next));
            }
            Behaviour::Spawn { binder, child, cont } => {
                let parent = s.network.get(p).expect("head of a process");
                let c = fresh_child_name(&s.network, p, binder);
                // The child body is written in the parent's terms: resolve it now.
                let row = s.gamma.row(p);
                let body = child.substitute(&row, true);
                let mut next = step(s, &[(p, cont)]);
                next.network.insert(Process { name: c.clone(), procedures: parent.procedures.clone(), main: body, marked: false });
                next.gamma.set(p.clone(), binder.clone(), c.clone());
                next.gamma.set(c.clone(), c.clone(), c.clone());
                next.gamma.set(c.clone(), p.clone(), p.clone());
                next.gamma.set(c.clone(), binder.clone(), c.clone());
                out.push((TransitionLabel::Spawned { parent: p.clone(), child: c }, next));
            }
            Behaviour::Receive { .. } | Behaviour::Offer { .. } | Behaviour::ReceiveIntro { .. } => {}
            Behaviour::Terminated | Behaviour::Call { .. } => {}
        }
    }
    out.sort_by(|(a, _), (b, _)| sort_key(a).cmp(&sort_key(b)));
    Ok(out)
}

fn sort_key(l: &TransitionLabel) -> (Name, &TransitionLabel) {
    let least = l.names().into_iter().min().expect("labels name a process").clone();
    (least, l)
}

// Successor where the listed processes continue as given.
fn step(s: &NetworkState, moves: &[(&Name, &Behaviour)]) -> NetworkState {
    let mut next = s.clone();
    for (p, b) in moves {
        next.network.get_mut(p).expect("moving process exists").main = (*b).clone();
    }
    next
}

/// Processes with an action available after unfolding.
pub fn heads(s: &NetworkState) -> BTreeMap<Name, Behaviour> {
    Heads::new(s).heads
}

/// Live processes whose calls never reach an action.
pub fn divergent_processes(s: &NetworkState) -> BTreeSet<Name> {
    let h = heads(s);
    s.network.live_names().into_iter().filter(|n| !h.contains_key(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_network;

    fn labels(s: &NetworkState) -> Vec<String> {
        enabled_network_transitions(s).unwrap().iter().map(|(l, _)| l.to_string()).collect()
    }

    fn run(s: &NetworkState, pick: &str) -> NetworkState {
        enabled_network_transitions(s).unwrap().into_iter().find(|(l, _)| l.to_string() == pick).unwrap().1
    }

    #[test]
    fn online_store_starts_with_item() {
        let s = NetworkState::initial(parse_network(include_str!("../../data/onlinestore.net")).unwrap());
        assert_eq!(labels(&s), ["customer.item -> store"]);
    }

    #[test]
    fn store_conditional_has_both_branches() {
        let mut s = NetworkState::initial(parse_network(include_str!("../../data/onlinestore.net")).unwrap());
        for l in ["customer.item -> store", "customer.checkout then", "customer -> store[buy]", "customer.payment -> store"] {
            s = run(&s, l);
        }
        assert_eq!(labels(&s), ["store.accepted then", "store.accepted else"]);
    }

    #[test]
    fn terminated_network_has_no_transitions() {
        let s = NetworkState::initial(parse_network("p { main { 0 } } | q { main { stop } }").unwrap());
        assert!(labels(&s).is_empty());
    }

    #[test]
    fn serverless_spawn_updates_gamma() {
        let s = NetworkState::initial(parse_network(include_str!("../../data/serverless.net")).unwrap());
        let s = run(&s, "client.req -> entry");
        assert_eq!(labels(&s), ["entry spawns entry/worker0"]);
        let s = run(&s, "entry spawns entry/worker0");
        let (entry, worker, child) = (Name::from("entry"), Name::from("worker"), Name::from("entry/worker0"));
        assert_eq!(s.gamma.resolve(&entry, &worker), Some(&child));
        assert_eq!(s.gamma.resolve(&child, &entry), Some(&entry));
        assert_eq!(labels(&s), ["entry.entry/worker0 <-> client"]);
        let s = run(&s, "entry.entry/worker0 <-> client");
        assert_eq!(s.gamma.resolve(&"client".into(), &"w".into()), Some(&child));
        assert_eq!(labels(&s), ["entry/worker0.res -> client"]);
    }

    #[test]
    fn second_generation_is_named_after_the_binder() {
        let mut s = NetworkState::initial(parse_network(include_str!("../../data/serverless.net")).unwrap());
        for l in [
            "client.req -> entry",
            "entry spawns entry/worker0",
            "entry.entry/worker0 <-> client",
            "entry/worker0.res -> client",
            "client.more then",
            "client -> entry/worker0[next]",
        ] {
            s = run(&s, l);
        }
        assert_eq!(labels(&s), ["entry/worker0 spawns entry/worker0/worker0"]);
        let s = run(&s, "entry/worker0 spawns entry/worker0/worker0");
        assert_eq!(labels(&s), ["entry/worker0.entry/worker0/worker0 <-> client"]);
    }

    #[test]
    fn unmatched_send_is_not_enabled() {
        let s = NetworkState::initial(parse_network(include_str!("../../data/deadlock.net")).unwrap());
        assert!(labels(&s).is_empty());
    }

    #[test]
    fn missing_connection_blocks_communication() {
        let n = parse_network("p { main { q!m; 0 } } | q { main { p?; 0 } }").unwrap();
        let s = NetworkState::with_connections(n, []);
        assert!(labels(&s).is_empty());
    }

    #[test]
    fn binder_suffix_is_dropped_from_child_names() {
        assert_eq!(binder_base(&"worker_1".into()), "worker");
        assert_eq!(binder_base(&"q".into()), "q");
        assert_eq!(binder_base(&"a_b".into()), "a_b");
    }
}
