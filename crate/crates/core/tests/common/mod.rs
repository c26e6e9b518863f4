#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use chorex::corpus::{generated_corpus, DEFAULT_SEED, EXAMPLES};
use chorex::model::{Network, TransitionLabel};
use chorex::seg::Seg;
use chorex::syntax::parse_network_named;

pub const GENERATED: usize = 24;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn data(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap()
}

/// Bundled examples followed by the generated networks.
pub fn corpus() -> Vec<(String, Network)> {
    let mut out: Vec<(String, Network)> =
        EXAMPLES.iter().map(|(name, src)| (name.to_string(), parse_network_named(src, name).unwrap())).collect();
    out.extend(generated_corpus(GENERATED, DEFAULT_SEED));
    out
}

pub fn chorex(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chorex"));
    cmd.args(args).env_remove("CHOREX_NODE_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

/// Every elementary cycle of the graph, each listed from its least node id.
/// Works on the edge list alone, without the builder's loop bookkeeping.
pub fn simple_cycles(seg: &Seg) -> Vec<Vec<usize>> {
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in &seg.edges {
        succ.entry(e.from).or_default().push(e.to);
    }
    let mut out = Vec::new();
    for start in 0..seg.nodes.len() {
        let mut path = vec![start];
        let mut iters = vec![0usize];
        while let Some(&top) = path.last() {
            let i = *iters.last().unwrap();
            let next = succ.get(&top).and_then(|v| v.get(i)).copied();
            *iters.last_mut().unwrap() += 1;
            match next {
                None => {
                    path.pop();
                    iters.pop();
                }
                Some(n) if n == start => out.push(path.clone()),
                Some(n) if n > start && !path.contains(&n) => {
                    path.push(n);
                    iters.push(0);
                }
                Some(_) => {}
            }
        }
    }
    out
}

/// Cycles pass through a node where no live process is marked, and every
/// node fires one interaction or both arms of one conditional.
pub fn check_seg(seg: &Seg) -> Result<usize, String> {
    let cycles = simple_cycles(seg);
    for c in &cycles {
        let clean = c.iter().any(|&id| seg.nodes[id].state.network.processes().all(|p| p.is_terminated() || !p.marked));
        if !clean {
            return Err(format!("cycle {c:?} has no node with every process unmarked"));
        }
    }
    for node in &seg.nodes {
        let out: Vec<&TransitionLabel> = seg.outgoing(node.id).map(|e| &e.label).collect();
        let ok = match out.as_slice() {
            [] => node.state.network.is_terminated(),
            [l] => !l.is_branch(),
            [TransitionLabel::Then { process: p, expr: e }, TransitionLabel::Else { process: q, expr: f }] => p == q && e == f,
            _ => false,
        };
        if !ok {
            return Err(format!("node {} has outgoing labels {out:?}", node.id));
        }
    }
    Ok(cycles.len())
}
