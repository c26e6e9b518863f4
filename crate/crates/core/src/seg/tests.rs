use super::*;
use crate::syntax::parse_network;

fn build(src: &str, policy: Policy) -> Result<Seg, ExtractionFailure> {
    let n = parse_network(src).unwrap();
    build_seg_from(NetworkState::initial(n), &BuildOptions { policy, ..BuildOptions::default() })
}

const STORE: &str = include_str!("../../data/onlinestore.net");
const SERVERLESS: &str = include_str!("../../data/serverless.net");
const LEAK1: &str = include_str!("../../data/leak1.net");
const LEAK2: &str = include_str!("../../data/leak2.net");
const CHAIN: &str = include_str!("../../data/chain.net");
const DEADLOCK: &str = include_str!("../../data/deadlock.net");

#[test]
fn online_store_has_two_loops_and_one_leaf() {
    let seg = build(STORE, Policy::LexMin).unwrap();
    assert_eq!(seg.loop_edges().count(), 2);
    let leaves = seg.nodes.iter().filter(|n| n.state.network.is_terminated()).count();
    assert_eq!(leaves, 1);
    assert!(seg.loop_edges().all(|e| e.loop_mapping.as_ref().unwrap().is_identity()));
}

#[test]
fn serverless_loop_renames_worker_to_entry() {
    let seg = build(SERVERLESS, Policy::LexMin).unwrap();
    let loops: Vec<_> = seg.loop_edges().collect();
    assert_eq!(loops.len(), 1);
    let m = loops[0].loop_mapping.as_ref().unwrap().non_identity();
    assert_eq!(m, ProcessRenaming::from_pairs([("entry/worker0", "entry")]));
    assert_eq!(loops[0].to, 1);
}

#[test]
fn self_cloning_leaks_two_to_one() {
    let err = build(LEAK1, Policy::LexMin).unwrap_err();
    assert_eq!(err.kind, FailureKind::ResourceLeak);
    let m = err.witness.unwrap();
    assert!(!m.is_injective());
    assert_eq!(m.preimage(&"p".into()).len(), 2);
}

#[test]
fn leaks_are_found_under_every_policy() {
    for policy in Policy::ALL {
        for src in [LEAK1, LEAK2] {
            let err = build(src, policy).unwrap_err();
            assert_eq!(err.kind, FailureKind::ResourceLeak, "{policy}: {err}");
        }
    }
}

#[test]
fn spawn_chain_has_no_valid_loop() {
    for policy in Policy::ALL {
        let err = build(CHAIN, policy).unwrap_err();
        assert_eq!(err.kind, FailureKind::NoValidLoop, "{policy}: {err}");
    }
}

#[test]
fn unmatched_send_deadlocks() {
    let err = build(DEADLOCK, Policy::LexMin).unwrap_err();
    assert_eq!(err.kind, FailureKind::Deadlock);
    assert!(err.diagnostic.contains("q!m"));
}

#[test]
fn starved_process_is_reported_as_no_valid_loop() {
    let src = "p { def X() { q!m; X() } main { X() } } | q { def Y() { p?; Y() } main { Y() } } | r { main { p?; 0 } }";
    let err = build(src, Policy::LexMin).unwrap_err();
    assert_eq!(err.kind, FailureKind::NoValidLoop);
}

#[test]
fn terminated_network_is_a_single_node() {
    let seg = build("p { main { 0 } }", Policy::LexMin).unwrap();
    assert_eq!(seg.nodes.len(), 1);
    assert!(seg.edges.is_empty());
}

#[test]
fn budget_exhaustion_is_its_own_kind() {
    let n = parse_network(STORE).unwrap();
    let opts = BuildOptions { node_budget: 2, ..BuildOptions::default() };
    let err = build_seg_from(NetworkState::initial(n), &opts).unwrap_err();
    assert_eq!(err.kind, FailureKind::BudgetExhausted);
}

#[test]
fn dot_marks_the_loop_mapping() {
    let seg = build(SERVERLESS, Policy::LexMin).unwrap();
    let dot = export_dot(&seg);
    assert!(dot.contains("entry/worker0 -> entry"));
    assert!(dot.starts_with("digraph seg {"));
}

#[test]
fn close_loop_needs_a_reset() {
    let seg = build(STORE, Policy::LexMin).unwrap();
    let root = &seg.nodes[0];
    let same = SegNode::new(99, root.state.clone(), root.reset_count, Vec::new());
    assert!(close_loop(&same, &[root]).is_none());
    let later = SegNode::new(99, root.state.clone(), root.reset_count + 1, Vec::new());
    assert_eq!(close_loop(&later, &[root]).map(|(id, m)| (id, m.is_identity())), Some((0, true)));
}

