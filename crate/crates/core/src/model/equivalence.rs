use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::behaviour::Behaviour;
use super::gamma::VariableMapping;
use super::name::Name;
use super::network::{Network, Process};
use super::renaming::ProcessRenaming;

/// How a mapping between two states must behave on processes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MappingMode {
    /// A bijection between live processes (loop closure).
    Bijective,
    /// Onto, and collapsing at least two processes (leak witness).
    Collapsing,
}

/// Per-state data reused across many mapping searches.
#[derive(Clone, Debug)]
pub struct Prepared {
    live: Vec<Name>,
    live_set: BTreeSet<Name>,
    resolved: BTreeMap<Name, Behaviour>,
    shapes: BTreeMap<Name, u64>,
    shape_bag: Vec<u64>,
    marked_bag: Vec<(u64, bool)>,
    deferred: BTreeMap<Name, BTreeSet<Name>>,
}

impl Prepared {
    /// With a mapping, each main has its free names resolved through the
    /// owner's row; without one, mains are taken literally.
    pub fn new(network: &Network, gamma: Option<&VariableMapping>) -> Self {
        let live: Vec<Name> = network.live_names().into_iter().collect();
        let live_set: BTreeSet<Name> = live.iter().cloned().collect();
        let mut resolved = BTreeMap::new();
        let mut shapes = BTreeMap::new();
        let mut deferred = BTreeMap::new();
        for n in &live {
            let p = network.get(n).expect("live name belongs to network");
            let main = match gamma {
                Some(g) => p.main.substitute(&g.row(n), false),
                None => p.main.clone(),
            };
            shapes.insert(n.clone(), main.shape_hash());
            deferred.insert(n.clone(), deferred_variables(p));
            resolved.insert(n.clone(), main);
        }
        let mut shape_bag: Vec<u64> = shapes.values().copied().collect();
        shape_bag.sort_unstable();
        let mut marked_bag: Vec<(u64, bool)> = shapes.iter().map(|(n, h)| (*h, network.get(n).is_some_and(|p| p.marked))).collect();
        marked_bag.sort_unstable();
        Prepared { live, live_set, resolved, shapes, shape_bag, marked_bag, deferred }
    }

    pub fn live(&self) -> &[Name] {
        &self.live
    }
}

/// Free non-parameter names of every procedure reachable from the process's
/// main: the variables that later unfoldings will resolve through the mapping.
pub fn deferred_variables(p: &Process) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for def in reachable_procedures(p) {
        let def = &p.procedures[&def];
        out.extend(def.body.free_names().into_iter().filter(|n| !def.params.contains(n)));
    }
    out
}

pub(crate) fn reachable_procedures(p: &Process) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut work: Vec<String> = p.main.called_procedures().into_iter().map(|(n, _)| n.to_string()).collect();
    while let Some(x) = work.pop() {
        if !seen.insert(x.clone()) {
            continue;
        }
        if let Some(def) = p.procedures.get(&x) {
            work.extend(def.body.called_procedures().into_iter().map(|(n, _)| n.to_string()));
        }
    }
    seen
}

/// Equivalence of two networks taken literally: a bijection between live
/// processes under which mains and procedures coincide.
pub fn find_equivalence_mapping(n1: &Network, n2: &Network) -> Option<ProcessRenaming> {
    let a = Prepared::new(n1, None);
    let b = Prepared::new(n2, None);
    let side = |network, prepared| Side { network, prepared, gamma: None };
    find_mapping(side(n1, &a), side(n2, &b), MappingMode::Bijective, false)
}

/// One side of a mapping search.
#[derive(Clone, Copy)]
pub struct Side<'a> {
    pub network: &'a Network,
    pub prepared: &'a Prepared,
    pub gamma: Option<&'a VariableMapping>,
}

/// Searches for a mapping from the processes of `from` to those of `to`.
///
/// Candidates are paired in lexicographic order with backtracking. When both
/// mappings are given, deferred variables must also agree through them. With
/// `respect_marks`, paired processes must carry the same marking.
pub fn find_mapping(from: Side<'_>, to: Side<'_>, mode: MappingMode, respect_marks: bool) -> Option<ProcessRenaming> {
    let (from_prep, to_prep) = (from.prepared, to.prepared);
    match mode {
        MappingMode::Bijective => {
            if from_prep.shape_bag != to_prep.shape_bag {
                return None;
            }
            if respect_marks && from_prep.marked_bag != to_prep.marked_bag {
                return None;
            }
        }
        MappingMode::Collapsing => {
            if from_prep.live.len() <= to_prep.live.len() {
                return None;
            }
            let a: BTreeSet<u64> = from_prep.shape_bag.iter().copied().collect();
            let b: BTreeSet<u64> = to_prep.shape_bag.iter().copied().collect();
            if a != b {
                return None;
            }
        }
    }
    let mut search = Search {
        from: from.network,
        from_prep,
        from_gamma: from.gamma,
        to: to.network,
        to_prep,
        to_gamma: to.gamma,
        injective: mode == MappingMode::Bijective,
        respect_marks,
        budget: SEARCH_BUDGET,
        proc_cache: BTreeMap::new(),
    };
    let start = Unifier::new(search.injective);
    search.assign(0, start).map(|u| {
        ProcessRenaming::from_map(
            from_prep.live.iter().map(|n| (n.clone(), u.map[n].clone())).collect(),
        )
    })
}

const SEARCH_BUDGET: usize = 200_000;

// Both procedure tables (by address) and the correspondence on their free names.
type ProcKey = (usize, usize, Vec<(Name, Name)>);

struct Search<'a> {
    from: &'a Network,
    from_prep: &'a Prepared,
    from_gamma: Option<&'a VariableMapping>,
    to: &'a Network,
    to_prep: &'a Prepared,
    to_gamma: Option<&'a VariableMapping>,
    injective: bool,
    respect_marks: bool,
    budget: usize,
    proc_cache: BTreeMap<ProcKey, bool>,
}

impl<'a> Search<'a> {
    fn assign(&mut self, i: usize, u: Unifier) -> Option<Unifier> {
        if i == self.from_prep.live.len() {
            return self.finish(u);
        }
        let p = &self.from_prep.live[i];
        let shape = self.from_prep.shapes[p];
        let fixed = u.map.get(p).cloned();
        for q in &self.to_prep.live {
            if self.budget == 0 {
                return None;
            }
            if self.to_prep.shapes[q] != shape {
                continue;
            }
            if self.respect_marks && self.marked(self.from, p) != self.marked(self.to, q) {
                continue;
            }
            if let Some(f) = &fixed {
                if f != q {
                    continue;
                }
            }
            self.budget -= 1;
            let mut trial = u.clone();
            if !trial.pair(p, q, &[], &self.from_prep.live_set, &self.to_prep.live_set) {
                continue;
            }
            if !trial.behaviour(&self.from_prep.resolved[p], &self.to_prep.resolved[q], &mut Vec::new(), &self.from_prep.live_set, &self.to_prep.live_set) {
                continue;
            }
            if !self.procedures_agree(p, q, &trial) {
                continue;
            }
            if let Some(done) = self.assign(i + 1, trial) {
                return Some(done);
            }
        }
        None
    }

    fn marked(&self, n: &Network, p: &Name) -> bool {
        n.get(p).is_some_and(|p| p.marked)
    }

    fn finish(&mut self, u: Unifier) -> Option<Unifier> {
        // Surjectivity onto the live processes of the target.
        let image: BTreeSet<&Name> = self.from_prep.live.iter().map(|n| &u.map[n]).collect();
        if image.len() != self.to_prep.live.len() {
            return None;
        }
        // Procedures of processes fixed only by later unification steps.
        for p in &self.from_prep.live {
            if !self.procedures_agree(p, &u.map[p], &u) {
                return None;
            }
        }
        if let (Some(ga), Some(gb)) = (self.from_gamma, self.to_gamma) {
            for p in &self.from_prep.live {
                let q = &u.map[p];
                let vars: BTreeSet<&Name> = self.from_prep.deferred[p].iter().chain(self.to_prep.deferred[q].iter()).collect();
                for a in vars {
                    match (ga.resolve(p, a), gb.resolve(q, a)) {
                        (None, None) => {}
                        (Some(b), Some(c)) => {
                            if !u.image_is(b, c, &self.from_prep.live_set, &self.to_prep.live_set) {
                                return None;
                            }
                        }
                        _ => return None,
                    }
                }
            }
        }
        Some(u)
    }

    fn procedures_agree(&mut self, p: &Name, q: &Name, u: &Unifier) -> bool {
        let pa = self.from.get(p).expect("live process");
        let pb = self.to.get(q).expect("live process");
        if pa.procedures.len() != pb.procedures.len() {
            return false;
        }
        // Free names of the bodies must map consistently; only those matter for caching.
        let mut relevant: Vec<(Name, Name)> = Vec::new();
        for def in pa.procedures.values() {
            for n in def.body.free_names() {
                if !def.params.contains(&n) {
                    match u.map.get(&n) {
                        Some(m) => relevant.push((n, m.clone())),
                        // Not decided yet; `finish` checks again with the full mapping.
                        None if self.from_prep.live_set.contains(&n) => return true,
                        None => relevant.push((n.clone(), n)),
                    }
                }
            }
        }
        relevant.sort();
        relevant.dedup();
        let key = (Arc::as_ptr(&pa.procedures) as usize, Arc::as_ptr(&pb.procedures) as usize, relevant.clone());
        if let Some(&ok) = self.proc_cache.get(&key) {
            return ok;
        }
        let ok = pa.procedures.iter().all(|(name, da)| match pb.procedures.get(name) {
            Some(db) if da.params == db.params => {
                let mut fixed = Unifier::fixed(&relevant, &da.params);
                fixed.behaviour(&da.body, &db.body, &mut Vec::new(), &BTreeSet::new(), &BTreeSet::new())
            }
            _ => false,
        });
        self.proc_cache.insert(key, ok);
        ok
    }
}

/// Incrementally built name correspondence, aware of bound names.
#[derive(Clone, Debug)]
struct Unifier {
    map: BTreeMap<Name, Name>,
    rev: BTreeMap<Name, Name>,
    injective: bool,
    frozen: bool,
}

impl Unifier {
    fn new(injective: bool) -> Self {
        Unifier { map: BTreeMap::new(), rev: BTreeMap::new(), injective, frozen: false }
    }

    // A closed correspondence for procedure bodies: parameters stay fixed.
    fn fixed(pairs: &[(Name, Name)], params: &[Name]) -> Self {
        let mut map: BTreeMap<Name, Name> = pairs.iter().cloned().collect();
        for p in params {
            map.insert(p.clone(), p.clone());
        }
        Unifier { map, rev: BTreeMap::new(), injective: false, frozen: true }
    }

    fn image_is(&self, b: &Name, c: &Name, from_live: &BTreeSet<Name>, to_live: &BTreeSet<Name>) -> bool {
        match self.map.get(b) {
            Some(m) => m == c,
            None => b == c && !from_live.contains(b) && !to_live.contains(c),
        }
    }

    fn pair(&mut self, a: &Name, b: &Name, env: &[(Name, Name)], from_live: &BTreeSet<Name>, to_live: &BTreeSet<Name>) -> bool {
        for (x, y) in env.iter().rev() {
            if x == a || y == b {
                return x == a && y == b;
            }
        }
        if let Some(m) = self.map.get(a) {
            return m == b;
        }
        if self.frozen || !from_live.contains(a) {
            return a == b && !to_live.contains(b);
        }
        if !to_live.contains(b) {
            return false;
        }
        if self.injective {
            if let Some(back) = self.rev.get(b) {
                if back != a {
                    return false;
                }
            }
            self.rev.insert(b.clone(), a.clone());
        }
        self.map.insert(a.clone(), b.clone());
        true
    }

    fn behaviour(&mut self, x: &Behaviour, y: &Behaviour, env: &mut Vec<(Name, Name)>, fl: &BTreeSet<Name>, tl: &BTreeSet<Name>) -> bool {
        use Behaviour as B;
        match (x, y) {
            (B::Terminated, B::Terminated) => true,
            (B::Call { procedure: p1, args: a1 }, B::Call { procedure: p2, args: a2 }) => {
                p1 == p2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(a, b)| self.pair(a, b, env, fl, tl))
            }
            (B::Send { to: t1, expr: e1, cont: c1 }, B::Send { to: t2, expr: e2, cont: c2 }) => {
                e1 == e2 && self.pair(t1, t2, env, fl, tl) && self.behaviour(c1, c2, env, fl, tl)
            }
            (B::Receive { from: f1, cont: c1 }, B::Receive { from: f2, cont: c2 }) => {
                self.pair(f1, f2, env, fl, tl) && self.behaviour(c1, c2, env, fl, tl)
            }
            (B::Select { to: t1, label: l1, cont: c1 }, B::Select { to: t2, label: l2, cont: c2 }) => {
                l1 == l2 && self.pair(t1, t2, env, fl, tl) && self.behaviour(c1, c2, env, fl, tl)
            }
            (B::Offer { from: f1, branches: b1 }, B::Offer { from: f2, branches: b2 }) => {
                b1.len() == b2.len()
                    && self.pair(f1, f2, env, fl, tl)
                    && b1.iter().zip(b2).all(|((l1, x1), (l2, y1))| l1 == l2 && self.behaviour(x1, y1, env, fl, tl))
            }
            (B::Introduce { left: l1, right: r1, cont: c1 }, B::Introduce { left: l2, right: r2, cont: c2 }) => {
                self.pair(l1, l2, env, fl, tl) && self.pair(r1, r2, env, fl, tl) && self.behaviour(c1, c2, env, fl, tl)
            }
            (B::ReceiveIntro { from: f1, binder: b1, cont: c1 }, B::ReceiveIntro { from: f2, binder: b2, cont: c2 }) => {
                if !self.pair(f1, f2, env, fl, tl) {
                    return false;
                }
                env.push((b1.clone(), b2.clone()));
                let ok = self.behaviour(c1, c2, env, fl, tl);
                env.pop();
                ok
            }
            (B::Conditional { expr: e1, then: t1, otherwise: o1 }, B::Conditional { expr: e2, then: t2, otherwise: o2 }) => {
                e1 == e2 && self.behaviour(t1, t2, env, fl, tl) && self.behaviour(o1, o2, env, fl, tl)
            }
            (B::Spawn { binder: b1, child: k1, cont: c1 }, B::Spawn { binder: b2, child: k2, cont: c2 }) => {
                env.push((b1.clone(), b2.clone()));
                let ok = self.behaviour(k1, k2, env, fl, tl) && self.behaviour(c1, c2, env, fl, tl);
                env.pop();
                ok
            }
            _ => false,
        }
    }
}

/// α-equivalence of two behaviours (equality up to renaming of bound names).
pub fn alpha_equivalent(x: &Behaviour, y: &Behaviour) -> bool {
    Unifier::fixed(&[], &[]).behaviour(x, y, &mut Vec::new(), &BTreeSet::new(), &BTreeSet::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::name::Expr;
    use crate::model::network::ProcedureDef;

    fn n(s: &str) -> Name {
        Name::from(s)
    }

    fn call(p: &str, args: &[&str]) -> Behaviour {
        Behaviour::Call { procedure: p.into(), args: args.iter().map(|a| n(a)).collect() }
    }

    fn proc_with(name: &str, defs: Vec<ProcedureDef>, main: Behaviour) -> Process {
        Process::new(n(name), defs, main)
    }

    fn ping(to: &str) -> Behaviour {
        Behaviour::Send { to: n(to), expr: Expr::from("m"), cont: Box::new(Behaviour::Terminated) }
    }

    #[test]
    fn reflexive_mapping_is_identity() {
        let net = Network::new([
            proc_with("a", vec![], ping("b")),
            proc_with("b", vec![], Behaviour::Receive { from: n("a"), cont: Box::new(Behaviour::Terminated) }),
        ])
        .unwrap();
        let m = find_equivalence_mapping(&net, &net).unwrap();
        assert!(m.is_identity());
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn terminated_processes_leave_the_bijection() {
        let x = ProcedureDef { name: "X".into(), params: vec![n("s")], body: ping("s") };
        let before = Network::new([
            proc_with("client", vec![x.clone()], call("X", &["entry"])),
            proc_with("entry", vec![], Behaviour::Receive { from: n("client"), cont: Box::new(Behaviour::Terminated) }),
        ])
        .unwrap();
        let after = Network::new([
            proc_with("client", vec![x], call("X", &["entry/worker0"])),
            proc_with("entry", vec![], Behaviour::Terminated),
            proc_with("entry/worker0", vec![], Behaviour::Receive { from: n("client"), cont: Box::new(Behaviour::Terminated) }),
        ])
        .unwrap();
        let m = find_equivalence_mapping(&after, &before).unwrap();
        assert_eq!(m, ProcessRenaming::from_pairs([("client", "client"), ("entry/worker0", "entry")]));
        let back = find_equivalence_mapping(&before, &after).unwrap();
        assert_eq!(back, m.inverse().unwrap());
    }

    #[test]
    fn different_live_counts_have_no_mapping() {
        let one = Network::new([proc_with("a", vec![], ping("a"))]).unwrap();
        let two = Network::new([proc_with("a", vec![], ping("b")), proc_with("b", vec![], ping("a"))]).unwrap();
        assert!(find_equivalence_mapping(&one, &two).is_none());
        assert!(find_equivalence_mapping(&two, &one).is_none());
    }

    #[test]
    fn collapsing_mode_needs_more_processes_on_the_source() {
        let leaf = Behaviour::Spawn { binder: n("q"), child: Box::new(call("X", &[])), cont: Box::new(call("X", &[])) };
        let def = ProcedureDef { name: "X".into(), params: vec![], body: leaf };
        let p = proc_with("p", vec![def], call("X", &[]));
        let mut c = p.clone();
        c.name = n("p/q0");
        let one = Network::new([p.clone()]).unwrap();
        let two = Network::new([p, c]).unwrap();
        let (a, b) = (Prepared::new(&two, None), Prepared::new(&one, None));
        let (sa, sb) = (Side { network: &two, prepared: &a, gamma: None }, Side { network: &one, prepared: &b, gamma: None });
        let m = find_mapping(sa, sb, MappingMode::Collapsing, false).unwrap();
        assert!(!m.is_injective());
        assert!(find_mapping(sb, sa, MappingMode::Collapsing, false).is_none());
    }

    #[test]
    fn alpha_equivalence_ignores_binder_names() {
        let x = Behaviour::ReceiveIntro { from: n("s"), binder: n("w"), cont: Box::new(ping("w")) };
        let y = Behaviour::ReceiveIntro { from: n("s"), binder: n("v"), cont: Box::new(ping("v")) };
        let z = Behaviour::ReceiveIntro { from: n("s"), binder: n("v"), cont: Box::new(ping("w")) };
        assert!(alpha_equivalent(&x, &y));
        assert!(!alpha_equivalent(&x, &z));
    }
}
