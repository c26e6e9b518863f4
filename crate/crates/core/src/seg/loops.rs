use std::collections::BTreeSet;

use super::{Branch, SegNode};
use crate::model::equivalence::{deferred_variables, find_mapping, MappingMode, Side};
use crate::model::{Name, ProcessRenaming};
use crate::semantics::NetworkState;

fn side(n: &SegNode) -> Side<'_> {
    Side { network: &n.state.network, prepared: &n.prepared, gamma: Some(&n.state.gamma) }
}

/// True when `short` can be obtained from `long` by deleting entries.
pub fn is_subsequence(short: &[Branch], long: &[Branch]) -> bool {
    let mut it = long.iter();
    short.iter().all(|b| it.any(|c| c == b))
}

/// First node on `path` (root first) that `candidate` may loop back to, with
/// the bijection from the candidate's live processes onto the node's.
pub fn close_loop(candidate: &SegNode, path: &[&SegNode]) -> Option<(usize, ProcessRenaming)> {
    path.iter().find_map(|a| {
        if candidate.reset_count <= a.reset_count || !is_subsequence(&a.choice_path, &candidate.choice_path) {
            return None;
        }
        find_mapping(side(candidate), side(a), MappingMode::Bijective, true).map(|m| (a.id, m))
    })
}

/// A node on `path` onto which the candidate collapses several processes.
pub fn detect_leak(candidate: &SegNode, path: &[&SegNode]) -> Option<(usize, ProcessRenaming)> {
    path.iter().find_map(|a| {
        if a.prepared.live().len() >= candidate.prepared.live().len() {
            return None;
        }
        find_mapping(side(candidate), side(a), MappingMode::Collapsing, false).map(|m| (a.id, m))
    })
}

/// A node on `path` the candidate repeats exactly, markings included, without
/// any reset in between: the branch would repeat forever.
pub fn find_stuck_revisit(candidate: &SegNode, path: &[&SegNode]) -> Option<(usize, ProcessRenaming)> {
    path.iter().find_map(|a| {
        if candidate.reset_count != a.reset_count {
            return None;
        }
        find_mapping(side(candidate), side(a), MappingMode::Bijective, true).map(|m| (a.id, m))
    })
}

/// (owner, variable) pairs that a future reduction may resolve through the
/// mapping: names free in each live main plus the free non-parameter names of
/// every procedure reachable from it.
pub fn evaluated_variables(s: &NetworkState) -> BTreeSet<(Name, Name)> {
    let mut out = BTreeSet::new();
    for p in s.network.processes().filter(|p| !p.is_terminated()) {
        for v in p.main.free_names().into_iter().chain(deferred_variables(p)) {
            out.insert((p.name.clone(), v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_network;

    #[test]
    fn subsequence_rule() {
        use Branch::*;
        assert!(is_subsequence(&[], &[Then]));
        assert!(is_subsequence(&[Then, Else], &[Then, Then, Else]));
        assert!(!is_subsequence(&[Else, Then], &[Then, Else]));
    }

    #[test]
    fn evaluated_variables_of_plain_send() {
        let n = parse_network("p { main { q!e; 0 } } | q { main { p?; 0 } }").unwrap();
        let s = NetworkState::initial(n);
        let vars = evaluated_variables(&s);
        assert!(vars.contains(&("p".into(), "q".into())));
        assert!(vars.contains(&("q".into(), "p".into())));
        assert_eq!(vars.len(), 2);
    }

    #[test]
    fn terminated_process_has_no_evaluated_variables() {
        let s = NetworkState::initial(parse_network("p { main { 0 } }").unwrap());
        assert!(evaluated_variables(&s).is_empty());
    }

    #[test]
    fn evaluated_variables_follow_calls() {
        let n = parse_network(
            "client { def X(s) { s?w; w?; if more then { w+next; X(w) } else { w+end; 0 } } main { X(entry) } } | entry { main { 0 } }",
        )
        .unwrap();
        let vars = evaluated_variables(&NetworkState::initial(n));
        // The binder-bound `w` and the parameter `s` are not looked up.
        assert_eq!(vars, BTreeSet::from([("client".into(), "entry".into())]));
    }
}
