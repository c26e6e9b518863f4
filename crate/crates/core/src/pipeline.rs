//! Parse, build, synthesize and check in one place.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::equiv::{check_bisimulation, Verdict};
use crate::model::{Choreography, Name, Network};
use crate::semantics::{ChorState, NetworkState};
use crate::seg::{build_seg_from, BuildOptions, ExtractionFailure, FailureKind, Seg};
use crate::synth::{synthesize, SynthError};
use crate::syntax::{parse_network_named, ParseError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("extraction failed: {0}")]
    Extraction(#[from] ExtractionFailure),
    #[error("synthesis failed: {0}")]
    Synth(#[from] SynthError),
}

impl PipelineError {
    pub fn failure_kind(&self) -> Option<FailureKind> {
        match self {
            PipelineError::Extraction(f) => Some(f.kind),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExtractOptions {
    pub build: BuildOptions,
    /// Initial connections; every pair of processes when `None`.
    pub topology: Option<Vec<(Name, Name)>>,
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub seg: Seg,
    pub choreography: Choreography,
}

pub fn initial_network_state(n: &Network, topology: Option<&[(Name, Name)]>) -> NetworkState {
    match topology {
        Some(t) => NetworkState::with_connections(n.clone(), t.iter().cloned()),
        None => NetworkState::initial(n.clone()),
    }
}

pub fn initial_chor_state(c: &Choreography, topology: Option<&[(Name, Name)]>) -> ChorState {
    match topology {
        Some(t) => ChorState::with_connections(c, t.iter().cloned()),
        None => ChorState::initial(c),
    }
}

pub fn extract(n: &Network, opts: &ExtractOptions) -> Result<Extraction, PipelineError> {
    let seg = build_seg_from(initial_network_state(n, opts.topology.as_deref()), &opts.build)?;
    let choreography = synthesize(&seg)?;
    Ok(Extraction { seg, choreography })
}

pub fn extract_source(src: &str, file: &str, opts: &ExtractOptions) -> Result<Extraction, PipelineError> {
    extract(&parse_network_named(src, file)?, opts)
}

/// Bounded bisimulation between a network and a choreography started from
/// the same connections.
pub fn check(n: &Network, c: &Choreography, topology: Option<&[(Name, Name)]>, depth: usize) -> Verdict {
    check_bisimulation(&initial_network_state(n, topology), &initial_chor_state(c, topology), depth)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("line {line}: expected `p -- q`, found `{text}`")]
    Malformed { line: usize, text: String },
}

/// One `p -- q` pair per line; blank lines and `//` comments are skipped.
pub fn parse_topology(src: &str) -> Result<Vec<(Name, Name)>, TopologyError> {
    let mut out = BTreeSet::new();
    for (i, raw) in src.lines().enumerate() {
        let text = raw.split("//").next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let bad = || TopologyError::Malformed { line: i + 1, text: text.to_string() };
        let (a, b) = text.split_once("--").ok_or_else(bad)?;
        let (a, b) = (a.trim(), b.trim());
        let ok = |s: &str| !s.is_empty() && s.chars().all(Name::is_name_char);
        if !ok(a) || !ok(b) || a == b {
            return Err(bad());
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        out.insert((Name::new(a), Name::new(b)));
    }
    Ok(out.into_iter().collect())
}
