//! Reading a choreography off a symbolic execution graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{ChorBody, ChorProcedureDef, Choreography, Name, TransitionLabel};
use crate::seg::Seg;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("parameter `{param}` of {procedure} has {count} preimages under the mapping on edge {edge}")]
    AmbiguousArgument { procedure: String, param: Name, edge: usize, count: usize },
    #[error("node {0} is stuck but not terminated")]
    StuckNode(usize),
    #[error("node {0} has outgoing edges that are neither one interaction nor a conditional pair")]
    MalformedNode(usize),
}

/// A procedure body as a tree over graph nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeNode {
    Terminated { node: usize },
    /// Leaves that call the procedure rooted at `target` through edge `edge`.
    Exit { edge: usize, target: usize },
    Step { node: usize, children: Vec<(usize, TreeNode)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcedureTree {
    /// `None` for the tree read as the main body.
    pub name: Option<String>,
    pub root: usize,
    pub params: Vec<Name>,
    pub body: TreeNode,
}

/// Nodes that become procedure entries.
pub fn loop_nodes(seg: &Seg) -> BTreeSet<usize> {
    let mut incoming: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &seg.edges {
        *incoming.entry(e.to).or_default() += 1;
    }
    incoming
        .into_iter()
        .filter(|&(n, k)| k >= 2 || (n == seg.root && k >= 1))
        .map(|(n, _)| n)
        .collect()
}

/// Splits every loop node into entry and exit, giving one tree per entry
/// plus the main tree when the root is not itself an entry.
pub fn unroll(seg: &Seg) -> Result<Vec<ProcedureTree>, SynthError> {
    let entries = loop_nodes(seg);
    let mut trees = Vec::new();
    if !entries.contains(&seg.root) {
        trees.push(ProcedureTree { name: None, root: seg.root, params: Vec::new(), body: grow(seg, seg.root, &entries)? });
    }
    for (i, &root) in entries.iter().enumerate() {
        let name = format!("X{}", i + 1);
        trees.push(ProcedureTree { name: Some(name), root, params: Vec::new(), body: grow(seg, root, &entries)? });
    }
    Ok(trees)
}

fn grow(seg: &Seg, node: usize, entries: &BTreeSet<usize>) -> Result<TreeNode, SynthError> {
    let out: Vec<usize> = (0..seg.edges.len()).filter(|&i| seg.edges[i].from == node).collect();
    if out.is_empty() {
        if seg.nodes[node].state.network.is_terminated() {
            return Ok(TreeNode::Terminated { node });
        }
        return Err(SynthError::StuckNode(node));
    }
    let well_formed = match out.as_slice() {
        [_] => !seg.edges[out[0]].label.is_branch(),
        [a, b] => matches!(
            (&seg.edges[*a].label, &seg.edges[*b].label),
            (TransitionLabel::Then { process: p, expr: e }, TransitionLabel::Else { process: q, expr: f }) if p == q && e == f
        ),
        _ => false,
    };
    if !well_formed {
        return Err(SynthError::MalformedNode(node));
    }
    let mut children = Vec::new();
    for i in out {
        let e = &seg.edges[i];
        let child = if e.loop_mapping.is_some() || entries.contains(&e.to) {
            TreeNode::Exit { edge: i, target: e.to }
        } else {
            grow(seg, e.to, entries)?
        };
        children.push((i, child));
    }
    Ok(TreeNode::Step { node, children })
}

/// Call arguments for each loop edge, by edge index.
pub type EdgeArguments = BTreeMap<usize, Vec<Name>>;

/// Parameters of the procedure entered at `entry`, and the arguments each
/// incoming edge passes.
///
/// Parameters are the names some loop mapping into the entry moves another
/// name onto, sorted; arguments are their preimages (identity on tree edges).
pub fn infer_parameters(seg: &Seg, entry: usize, procedure: &str) -> Result<(Vec<Name>, EdgeArguments), SynthError> {
    let incoming: Vec<usize> = (0..seg.edges.len()).filter(|&i| seg.edges[i].to == entry).collect();
    let mut params: BTreeSet<Name> = BTreeSet::new();
    for &i in &incoming {
        if let Some(m) = &seg.edges[i].loop_mapping {
            params.extend(m.iter().filter(|(a, b)| a != b).map(|(_, b)| b.clone()));
        }
    }
    let params: Vec<Name> = params.into_iter().collect();
    let mut args = BTreeMap::new();
    for &i in &incoming {
        let a = match &seg.edges[i].loop_mapping {
            None => params.clone(),
            Some(m) => params
                .iter()
                .map(|p| {
                    let pre = m.preimage(p);
                    match pre.as_slice() {
                        [one] => Ok(one.clone()),
                        _ => Err(SynthError::AmbiguousArgument { procedure: procedure.to_string(), param: p.clone(), edge: i, count: pre.len() }),
                    }
                })
                .collect::<Result<_, _>>()?,
        };
        args.insert(i, a);
    }
    Ok((params, args))
}

/// Turns the trees into a choreography; calls carry inferred arguments.
pub fn emit(seg: &Seg, trees: &[ProcedureTree], args: &BTreeMap<usize, Vec<Name>>) -> Choreography {
    let names: BTreeMap<usize, &str> = trees.iter().filter_map(|t| t.name.as_deref().map(|n| (t.root, n))).collect();
    let mut procedures = Vec::new();
    let mut main = None;
    for t in trees {
        let body = read(seg, &t.body, &names, args);
        match &t.name {
            Some(n) => procedures.push(ChorProcedureDef { name: n.clone(), params: t.params.clone(), body }),
            None => main = Some(body),
        }
    }
    let main = main.unwrap_or_else(|| {
        let root = trees.iter().find(|t| t.root == seg.root).expect("root has a tree");
        ChorBody::Call { procedure: root.name.clone().expect("entry tree is named"), args: root.params.clone() }
    });
    Choreography { procedures, main }
}

fn read(seg: &Seg, t: &TreeNode, names: &BTreeMap<usize, &str>, args: &BTreeMap<usize, Vec<Name>>) -> ChorBody {
    match t {
        TreeNode::Terminated { .. } => ChorBody::Terminated,
        TreeNode::Exit { edge, target } => {
            ChorBody::Call { procedure: names[target].to_string(), args: args.get(edge).cloned().unwrap_or_default() }
        }
        TreeNode::Step { children, .. } => {
            let label = &seg.edges[children[0].0].label;
            let first = read(seg, &children[0].1, names, args);
            match label {
                TransitionLabel::Then { process, expr } => {
                    let otherwise = read(seg, &children[1].1, names, args);
                    ChorBody::Cond { process: process.clone(), expr: expr.clone(), then: Box::new(first), otherwise: Box::new(otherwise) }
                }
                TransitionLabel::Else { .. } => unreachable!("else arm always follows a then arm"),
                TransitionLabel::Com { sender, expr, receiver } => {
                    ChorBody::Com { sender: sender.clone(), expr: expr.clone(), receiver: receiver.clone(), cont: Box::new(first) }
                }
                TransitionLabel::Sel { sender, receiver, label } => {
                    ChorBody::Sel { sender: sender.clone(), receiver: receiver.clone(), label: label.clone(), cont: Box::new(first) }
                }
                TransitionLabel::Intro { introducer, left, right } => ChorBody::Intro {
                    introducer: introducer.clone(),
                    left: left.clone(),
                    right: right.clone(),
                    cont: Box::new(first),
                },
                TransitionLabel::Spawned { parent, child } => {
                    ChorBody::Spawn { parent: parent.clone(), child: child.clone(), cont: Box::new(first) }
                }
            }
        }
    }
}

/// Unroll, infer parameters and emit in one go.
pub fn synthesize(seg: &Seg) -> Result<Choreography, SynthError> {
    let mut trees = unroll(seg)?;
    let mut args = BTreeMap::new();
    for t in &mut trees {
        if let Some(name) = &t.name {
            let (params, a) = infer_parameters(seg, t.root, name)?;
            t.params = params;
            args.extend(a);
        }
    }
    Ok(emit(seg, &trees, &args))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seg::build_seg;
    use crate::syntax::{parse_choreography, parse_network, print_choreography};

    fn extract(src: &str) -> Choreography {
        synthesize(&build_seg(&parse_network(src).unwrap(), None).unwrap()).unwrap()
    }

    #[test]
    fn online_store_yields_two_procedures() {
        let c = extract(include_str!("../data/onlinestore.net"));
        let expected = parse_choreography(
            "def X1() { customer.item -> store; if customer.checkout then { customer -> store[buy]; X2() } else { customer -> store[more]; X1() } }
             def X2() { customer.payment -> store; if store.accepted then { store -> customer[accept]; 0 } else { store -> customer[reject]; X2() } }
             main { X1() }",
        )
        .unwrap();
        assert_eq!(c, expected, "{}", print_choreography(&c));
    }

    #[test]
    fn serverless_matches_the_reference_listing() {
        let c = extract(include_str!("../data/serverless.net"));
        let expected = parse_choreography(include_str!("../data/serverless.chor")).unwrap();
        assert_eq!(c, expected, "{}", print_choreography(&c));
    }

    #[test]
    fn loop_free_network_has_only_main() {
        let c = extract("p { main { q!m; 0 } } | q { main { p?; 0 } }");
        assert!(c.procedures.is_empty());
        assert_eq!(print_choreography(&c), "main {\n    p.m -> q;\n    0\n}\n");
    }

    #[test]
    fn terminated_network_reads_as_zero() {
        let c = extract("p { main { 0 } }");
        assert_eq!(c.main, ChorBody::Terminated);
    }
}
