//! Batch extraction over many networks. With the `parallel` feature the
//! items are spread over a rayon pool; without it they run in order. Both
//! return results in input order.

use crate::equiv::Verdict;
use crate::model::Network;
use crate::pipeline::{check, extract, ExtractOptions, Extraction, PipelineError};

#[cfg(feature = "parallel")]
pub fn map_items<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_items<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    map_items_sequential(items, f)
}

pub fn map_items_sequential<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

pub type Outcome = Result<(Extraction, Verdict), PipelineError>;

fn extract_and_check(n: &Network, opts: &ExtractOptions, depth: usize) -> Outcome {
    let e = extract(n, opts)?;
    let v = check(n, &e.choreography, opts.topology.as_deref(), depth);
    Ok((e, v))
}

/// Extracts every network and checks each result against its source.
pub fn extract_and_check_all(nets: &[Network], opts: &ExtractOptions, depth: usize) -> Vec<Outcome> {
    map_items(nets, |n| extract_and_check(n, opts, depth))
}

pub fn extract_and_check_all_sequential(nets: &[Network], opts: &ExtractOptions, depth: usize) -> Vec<Outcome> {
    map_items_sequential(nets, |n| extract_and_check(n, opts, depth))
}
