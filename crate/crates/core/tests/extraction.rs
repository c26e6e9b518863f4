mod common;

use std::time::{Duration, Instant};

use chorex::corpus::{generated_choreography, project, DEFAULT_SEED};
use chorex::equiv::{check as check_lts, ChorLts, NetworkLts, Verdict};
use chorex::model::{Name, ProcessRenaming};
use chorex::pipeline::{extract, initial_chor_state, initial_network_state, ExtractOptions, PipelineError};
use chorex::seg::{export_dot, BuildOptions, FailureKind, Policy};
use chorex::syntax::{parse_choreography, parse_network};
use common::*;

fn with_policy(policy: Policy) -> ExtractOptions {
    ExtractOptions { build: BuildOptions { policy, ..Default::default() }, topology: None }
}

fn failure(file: &str, policy: Policy) -> chorex::seg::ExtractionFailure {
    let n = parse_network(&data(file)).unwrap();
    match extract(&n, &with_policy(policy)) {
        Err(PipelineError::Extraction(f)) => f,
        other => panic!("{file}: expected an extraction failure, got {:?}", other.map(|e| e.choreography)),
    }
}

#[test]
fn online_store_matches_up_to_procedure_names() {
    let n = parse_network(&data("onlinestore.net")).unwrap();
    let t = Instant::now();
    let e = extract(&n, &ExtractOptions::default()).unwrap();
    assert!(t.elapsed() < Duration::from_secs(1));
    let want = parse_choreography(&data("onlinestore.chor")).unwrap();
    assert_eq!(e.choreography.with_canonical_procedure_names(), want.with_canonical_procedure_names());
    assert_eq!(e.choreography.procedures.iter().map(|p| p.name.as_str()).collect::<Vec<_>>(), ["X1", "X2"]);
}

#[test]
fn serverless_loop_renames_the_worker_to_the_entry() {
    let n = parse_network(&data("serverless.net")).unwrap();
    let e = extract(&n, &ExtractOptions::default()).unwrap();
    let loops: Vec<_> = e.seg.loop_edges().collect();
    assert_eq!(loops.len(), 1);
    let m = loops[0].loop_mapping.as_ref().unwrap();
    assert_eq!(m.non_identity(), ProcessRenaming::from_pairs([("entry/worker0", "entry")]));
    let x1 = &e.choreography.procedures[0];
    assert_eq!(x1.params, [Name::new("entry")]);
}

#[test]
fn leaks_are_reported_under_every_policy() {
    for file in ["leak1.net", "leak2.net"] {
        for p in Policy::ALL {
            let t = Instant::now();
            let f = failure(file, p);
            assert!(t.elapsed() < Duration::from_secs(10));
            assert_eq!(f.kind, FailureKind::ResourceLeak, "{file} {p}");
            let w = f.witness.unwrap();
            assert!(!w.is_injective(), "{file} {p}: {w}");
        }
    }
    let w = failure("leak1.net", Policy::LexMin).witness.unwrap();
    assert_eq!(w, ProcessRenaming::from_pairs([("p", "p"), ("p/q0", "p")]));
}

#[test]
fn spawn_chain_has_no_valid_loop() {
    for p in Policy::ALL {
        assert_eq!(failure("chain.net", p).kind, FailureKind::NoValidLoop, "{p}");
    }
}

#[test]
fn deadlock_is_reported_at_the_root() {
    let f = failure("deadlock.net", Policy::LexMin);
    assert_eq!((f.kind, f.node), (FailureKind::Deadlock, 0));
}

#[test]
fn dot_marks_the_loop_edge() {
    let n = parse_network(&data("serverless.net")).unwrap();
    let dot = export_dot(&extract(&n, &ExtractOptions::default()).unwrap().seg);
    assert!(dot.contains("style=dashed"), "{dot}");
    assert!(dot.contains("entry/worker0 -> entry"), "{dot}");
}

#[test]
fn every_graph_in_the_corpus_is_well_formed() {
    for (name, n) in corpus() {
        for p in Policy::ALL {
            if let Ok(e) = extract(&n, &with_policy(p)) {
                check_seg(&e.seg).unwrap_or_else(|m| panic!("{name} {p}: {m}"));
            }
        }
    }
}

#[test]
fn generated_networks_are_bisimilar_to_their_sources_and_extractions() {
    for i in 0..GENERATED as u64 {
        let source = generated_choreography(DEFAULT_SEED + i);
        let n = project(&source).unwrap();
        let ns = initial_network_state(&n, None);
        let v = check_lts(&NetworkLts, &ns, &ChorLts, &initial_chor_state(&source, None), 12);
        assert_eq!(v, Verdict::Bisimilar(12), "projection {i}");
        let e = extract(&n, &ExtractOptions::default()).unwrap();
        let v = check_lts(&ChorLts, &initial_chor_state(&source, None), &ChorLts, &initial_chor_state(&e.choreography, None), 12);
        assert_eq!(v, Verdict::Bisimilar(12), "extraction {i}");
    }
}

#[test]
fn bisimilarity_is_monotone_in_depth() {
    let n = parse_network(&data("serverless.net")).unwrap();
    let c = parse_choreography(&data("serverless.chor")).unwrap();
    for d in 0..=12 {
        assert_eq!(chorex::pipeline::check(&n, &c, None, d), Verdict::Bisimilar(d));
    }
}

#[test]
fn counterexamples_survive_swapping_roles() {
    let n = parse_network(&data("onlinestore.net")).unwrap();
    let c = parse_choreography(&data("onlinestore.chor").replace("store.accepted", "customer.accepted")).unwrap();
    let (ns, cs) = (initial_network_state(&n, None), initial_chor_state(&c, None));
    let a = check_lts(&NetworkLts, &ns, &ChorLts, &cs, 12);
    let b = check_lts(&ChorLts, &cs, &NetworkLts, &ns, 12);
    assert!(!a.is_bisimilar() && !b.is_bisimilar(), "{a} / {b}");
}
