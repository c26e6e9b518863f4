//! Bounded strong bisimulation between networks and choreographies.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;

use crate::model::{Name, TransitionLabel};
use crate::semantics::{enabled_chor_transitions, enabled_network_transitions, ChorState, NetworkState};

pub const DEFAULT_DEPTH: usize = 12;

/// A labelled transition system the checker can explore.
pub trait Lts {
    type State: Clone + Eq + Hash;
    fn transitions(&self, s: &Self::State) -> Vec<(TransitionLabel, Self::State)>;
}

pub struct NetworkLts;

impl Lts for NetworkLts {
    type State = NetworkState;
    fn transitions(&self, s: &NetworkState) -> Vec<(TransitionLabel, NetworkState)> {
        // A name that resolves nowhere leaves the network without moves.
        enabled_network_transitions(s).unwrap_or_default()
    }
}

pub struct ChorLts;

impl Lts for ChorLts {
    type State = ChorState;
    fn transitions(&self, s: &ChorState) -> Vec<(TransitionLabel, ChorState)> {
        enabled_chor_transitions(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The first system given to the checker (the network, normally).
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Bisimilar(usize),
    /// `trace` leads to a state where the last label is possible on `side` only.
    CounterexampleFound { trace: Vec<TransitionLabel>, side: Side },
}

impl Verdict {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, Verdict::Bisimilar(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Bisimilar(d) => write!(f, "Bisimilar({d})"),
            Verdict::CounterexampleFound { trace, side } => {
                let who = match side {
                    Side::Left => "network",
                    Side::Right => "choreography",
                };
                writeln!(f, "counterexample: only the {who} can do the last step")?;
                for l in trace {
                    writeln!(f, "    {l}")?;
                }
                Ok(())
            }
        }
    }
}

/// Network against choreography, both starting fully connected as given.
pub fn check_bisimulation(n: &NetworkState, c: &ChorState, depth: usize) -> Verdict {
    check(&NetworkLts, n, &ChorLts, c, depth)
}

/// Renames processes created by spawning to `s0`, `s1`, … in order of first
/// appearance; other names are kept.
pub fn canonicalize_spawned_names(trace: &[TransitionLabel]) -> Vec<TransitionLabel> {
    let mut seen: BTreeMap<Name, Name> = BTreeMap::new();
    trace
        .iter()
        .map(|l| {
            l.map_names(|n| {
                if !n.is_spawned() {
                    return n.clone();
                }
                let k = seen.len();
                seen.entry(n.clone()).or_insert_with(|| Name::new(format!("s{k}"))).clone()
            })
        })
        .collect()
}

type Theta = Vec<(Name, Name)>;

struct Checker<'a, L: Lts, R: Lts> {
    left: &'a L,
    right: &'a R,
    verified: HashMap<(L::State, R::State, Theta), usize>,
}

/// Generic bounded check; θ relates names spawned on the left to names
/// spawned on the right.
pub fn check<L: Lts, R: Lts>(left: &L, ls: &L::State, right: &R, rs: &R::State, depth: usize) -> Verdict {
    let mut c = Checker { left, right, verified: HashMap::new() };
    let mut trace = Vec::new();
    match c.explore(ls, rs, &BTreeMap::new(), depth, &mut trace) {
        Ok(()) => Verdict::Bisimilar(depth),
        Err((trace, side)) => Verdict::CounterexampleFound { trace, side },
    }
}

// Label with the spawned child blanked out, for matching.
fn shape(l: &TransitionLabel, rename: impl Fn(&Name) -> Name) -> TransitionLabel {
    match l {
        TransitionLabel::Spawned { parent, .. } => TransitionLabel::Spawned { parent: rename(parent), child: Name::new("*") },
        other => other.map_names(rename),
    }
}

type Failure = (Vec<TransitionLabel>, Side);

impl<L: Lts, R: Lts> Checker<'_, L, R> {
    fn explore(
        &mut self,
        ls: &L::State,
        rs: &R::State,
        theta: &BTreeMap<Name, Name>,
        depth: usize,
        trace: &mut Vec<TransitionLabel>,
    ) -> Result<(), Failure> {
        if depth == 0 {
            return Ok(());
        }
        let key = (ls.clone(), rs.clone(), theta.iter().map(|(a, b)| (a.clone(), b.clone())).collect::<Theta>());
        if self.verified.get(&key).is_some_and(|&d| d >= depth) {
            return Ok(());
        }
        let through = |n: &Name| theta.get(n).cloned().unwrap_or_else(|| n.clone());
        let lt = self.left.transitions(ls);
        let rt = self.right.transitions(rs);
        let lshapes: Vec<TransitionLabel> = lt.iter().map(|(l, _)| shape(l, through)).collect();
        let rshapes: Vec<TransitionLabel> = rt.iter().map(|(l, _)| shape(l, Name::clone)).collect();
        for (i, s) in lshapes.iter().enumerate() {
            if !rshapes.contains(s) {
                return Err(self.divergence(trace, &lt[i].0, Side::Left));
            }
        }
        for (i, s) in rshapes.iter().enumerate() {
            if !lshapes.contains(s) {
                return Err(self.divergence(trace, &rt[i].0, Side::Right));
            }
        }
        // Each left move needs a right move with the same label and related successors.
        for (i, (l, ls2)) in lt.iter().enumerate() {
            let mut first_failure = None;
            let mut matched = false;
            for (j, (r, rs2)) in rt.iter().enumerate() {
                if rshapes[j] != lshapes[i] {
                    continue;
                }
                let mut theta2 = theta.clone();
                if let (TransitionLabel::Spawned { child: a, .. }, TransitionLabel::Spawned { child: b, .. }) = (l, r) {
                    theta2.insert(a.clone(), b.clone());
                }
                trace.push(l.clone());
                let res = self.explore(ls2, rs2, &theta2, depth - 1, trace);
                trace.pop();
                match res {
                    Ok(()) => {
                        matched = true;
                        break;
                    }
                    Err(f) => {
                        first_failure.get_or_insert(f);
                    }
                }
            }
            if !matched {
                return Err(first_failure.expect("shapes matched, so some move was tried"));
            }
        }
        // Right moves with labels the left also has were covered above unless a
        // label occurs several times on the right.
        for (j, (r, rs2)) in rt.iter().enumerate() {
            if rshapes.iter().filter(|s| **s == rshapes[j]).count() < 2 {
                continue;
            }
            let mut first_failure = None;
            let mut matched = false;
            for (i, (l, ls2)) in lt.iter().enumerate() {
                if lshapes[i] != rshapes[j] {
                    continue;
                }
                let mut theta2 = theta.clone();
                if let (TransitionLabel::Spawned { child: a, .. }, TransitionLabel::Spawned { child: b, .. }) = (l, r) {
                    theta2.insert(a.clone(), b.clone());
                }
                trace.push(l.clone());
                let res = self.explore(ls2, rs2, &theta2, depth - 1, trace);
                trace.pop();
                match res {
                    Ok(()) => {
                        matched = true;
                        break;
                    }
                    Err(f) => {
                        first_failure.get_or_insert(f);
                    }
                }
            }
            if !matched {
                return Err(first_failure.expect("shapes matched, so some move was tried"));
            }
        }
        self.verified.insert(key, depth);
        Ok(())
    }

    fn divergence(&self, trace: &[TransitionLabel], label: &TransitionLabel, side: Side) -> Failure {
        let mut t = trace.to_vec();
        t.push(label.clone());
        (canonicalize_spawned_names(&t), side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_choreography, parse_network};

    fn states(net: &str, chor: &str) -> (NetworkState, ChorState) {
        let n = NetworkState::initial(parse_network(net).unwrap());
        let c = ChorState::initial(&parse_choreography(chor).unwrap());
        (n, c)
    }

    const STORE: &str = include_str!("../data/onlinestore.net");
    const STORE_CHOR: &str = include_str!("../data/onlinestore.chor");
    const SERVERLESS: &str = include_str!("../data/serverless.net");
    const SERVERLESS_CHOR: &str = include_str!("../data/serverless.chor");

    #[test]
    fn online_store_is_bisimilar_to_its_choreography() {
        let (n, c) = states(STORE, STORE_CHOR);
        assert_eq!(check_bisimulation(&n, &c, 12), Verdict::Bisimilar(12));
    }

    #[test]
    fn serverless_is_bisimilar_to_its_choreography() {
        let (n, c) = states(SERVERLESS, SERVERLESS_CHOR);
        assert_eq!(check_bisimulation(&n, &c, 12), Verdict::Bisimilar(12));
    }

    #[test]
    fn swapped_selections_are_caught_at_a_selection() {
        let mutated = STORE_CHOR.replace("[accept]", "[tmp]").replace("[reject]", "[accept]").replace("[tmp]", "[reject]");
        let (n, c) = states(STORE, &mutated);
        match check_bisimulation(&n, &c, 12) {
            Verdict::CounterexampleFound { trace, .. } => {
                assert!(matches!(trace.last(), Some(TransitionLabel::Sel { .. })), "{trace:?}");
            }
            v => panic!("expected a counterexample, got {v}"),
        }
    }

    #[test]
    fn roles_can_be_swapped() {
        let (n, c) = states(SERVERLESS, SERVERLESS_CHOR);
        assert!(check(&ChorLts, &c, &NetworkLts, &n, 12).is_bisimilar());
        let mutated = STORE_CHOR.replace("[more]", "[again]");
        let (n, c) = states(STORE, &mutated);
        assert!(!check(&NetworkLts, &n, &ChorLts, &c, 12).is_bisimilar());
        assert!(!check(&ChorLts, &c, &NetworkLts, &n, 12).is_bisimilar());
    }

    #[test]
    fn canonical_names_follow_first_appearance() {
        let trace = vec![
            TransitionLabel::Spawned { parent: "entry".into(), child: "entry/worker0".into() },
            TransitionLabel::Spawned { parent: "entry/worker0".into(), child: "entry/worker0/worker0".into() },
        ];
        let out: Vec<String> = canonicalize_spawned_names(&trace).iter().map(|l| l.to_string()).collect();
        assert_eq!(out, ["entry spawns s0", "s0 spawns s1"]);
        assert_eq!(canonicalize_spawned_names(&canonicalize_spawned_names(&trace)), canonicalize_spawned_names(&trace));
        let plain = vec![TransitionLabel::Then { process: "p".into(), expr: "e".into() }];
        assert_eq!(canonicalize_spawned_names(&plain), plain);
    }
}
