use std::collections::{BTreeMap, BTreeSet};

use super::name::{fresh_variant, Expr, Name};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ChorBody {
    Terminated,
    Call { procedure: String, args: Vec<Name> },
    Com { sender: Name, expr: Expr, receiver: Name, cont: Box<ChorBody> },
    Sel { sender: Name, receiver: Name, label: String, cont: Box<ChorBody> },
    Cond { process: Name, expr: Expr, then: Box<ChorBody>, otherwise: Box<ChorBody> },
    /// `parent spawns child; cont`; `child` is bound in `cont`.
    Spawn { parent: Name, child: Name, cont: Box<ChorBody> },
    Intro { introducer: Name, left: Name, right: Name, cont: Box<ChorBody> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChorProcedureDef {
    pub name: String,
    pub params: Vec<Name>,
    pub body: ChorBody,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Choreography {
    pub procedures: Vec<ChorProcedureDef>,
    pub main: ChorBody,
}

impl Choreography {
    pub fn procedure(&self, name: &str) -> Option<&ChorProcedureDef> {
        self.procedures.iter().find(|p| p.name == name)
    }

    pub fn procedure_map(&self) -> BTreeMap<String, ChorProcedureDef> {
        self.procedures.iter().map(|p| (p.name.clone(), p.clone())).collect()
    }

    /// Names free in `main`: the processes present at the start.
    pub fn initial_processes(&self) -> BTreeSet<Name> {
        let mut out = self.main.free_names();
        let mut seen = BTreeSet::new();
        let mut work: Vec<(String, Vec<Name>)> = Vec::new();
        self.main.visit_calls(&mut |p, args| work.push((p.to_string(), args.to_vec())));
        // Names a procedure uses without taking them as parameters are also initial.
        while let Some((p, _)) = work.pop() {
            if !seen.insert(p.clone()) {
                continue;
            }
            if let Some(def) = self.procedure(&p) {
                for n in def.body.free_names() {
                    // Spawned names reach a procedure from an earlier spawn, not from the start.
                    if !def.params.contains(&n) && !n.is_spawned() {
                        out.insert(n);
                    }
                }
                def.body.visit_calls(&mut |q, args| work.push((q.to_string(), args.to_vec())));
            }
        }
        out
    }

    /// The same program with procedures renamed `P1`, `P2`, … in order of
    /// first call from `main`, listed in that order. Two choreographies that
    /// differ only in procedure names and listing order become equal.
    pub fn with_canonical_procedure_names(&self) -> Choreography {
        let mut order: Vec<String> = Vec::new();
        let mut next = 0;
        let note = |body: &ChorBody, order: &mut Vec<String>| {
            body.visit_calls(&mut |p, _| {
                if !order.iter().any(|o| o == p) {
                    order.push(p.to_string());
                }
            })
        };
        note(&self.main, &mut order);
        while next < order.len() {
            if let Some(def) = self.procedure(&order[next]) {
                note(&def.body, &mut order);
            }
            next += 1;
        }
        for p in &self.procedures {
            if !order.contains(&p.name) {
                order.push(p.name.clone());
            }
        }
        let names: BTreeMap<String, String> = order.iter().enumerate().map(|(i, p)| (p.clone(), format!("P{}", i + 1))).collect();
        let procedures = order
            .iter()
            .filter_map(|p| self.procedure(p))
            .map(|d| ChorProcedureDef { name: names[&d.name].clone(), params: d.params.clone(), body: d.body.rename_calls(&names) })
            .collect();
        Choreography { procedures, main: self.main.rename_calls(&names) }
    }
}

impl ChorBody {
    pub fn rename_calls(&self, names: &BTreeMap<String, String>) -> ChorBody {
        let go = |b: &ChorBody| Box::new(b.rename_calls(names));
        match self {
            ChorBody::Terminated => ChorBody::Terminated,
            ChorBody::Call { procedure, args } => ChorBody::Call {
                procedure: names.get(procedure).cloned().unwrap_or_else(|| procedure.clone()),
                args: args.clone(),
            },
            ChorBody::Com { sender, expr, receiver, cont } => {
                ChorBody::Com { sender: sender.clone(), expr: expr.clone(), receiver: receiver.clone(), cont: go(cont) }
            }
            ChorBody::Sel { sender, receiver, label, cont } => {
                ChorBody::Sel { sender: sender.clone(), receiver: receiver.clone(), label: label.clone(), cont: go(cont) }
            }
            ChorBody::Cond { process, expr, then, otherwise } => {
                ChorBody::Cond { process: process.clone(), expr: expr.clone(), then: go(then), otherwise: go(otherwise) }
            }
            ChorBody::Spawn { parent, child, cont } => ChorBody::Spawn { parent: parent.clone(), child: child.clone(), cont: go(cont) },
            ChorBody::Intro { introducer, left, right, cont } => {
                ChorBody::Intro { introducer: introducer.clone(), left: left.clone(), right: right.clone(), cont: go(cont) }
            }
        }
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let note = |n: &Name, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        };
        match self {
            ChorBody::Terminated => {}
            ChorBody::Call { args, .. } => args.iter().for_each(|a| note(a, bound, out)),
            ChorBody::Com { sender, receiver, cont, .. } | ChorBody::Sel { sender, receiver, cont, .. } => {
                note(sender, bound, out);
                note(receiver, bound, out);
                cont.collect_free(bound, out);
            }
            ChorBody::Cond { process, then, otherwise, .. } => {
                note(process, bound, out);
                then.collect_free(bound, out);
                otherwise.collect_free(bound, out);
            }
            ChorBody::Spawn { parent, child, cont } => {
                note(parent, bound, out);
                bound.push(child.clone());
                cont.collect_free(bound, out);
                bound.pop();
            }
            ChorBody::Intro { introducer, left, right, cont } => {
                note(introducer, bound, out);
                note(left, bound, out);
                note(right, bound, out);
                cont.collect_free(bound, out);
            }
        }
    }

    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |b| match b {
            ChorBody::Terminated => {}
            ChorBody::Call { args, .. } => out.extend(args.iter().cloned()),
            ChorBody::Com { sender, receiver, .. } | ChorBody::Sel { sender, receiver, .. } => {
                out.insert(sender.clone());
                out.insert(receiver.clone());
            }
            ChorBody::Cond { process, .. } => {
                out.insert(process.clone());
            }
            ChorBody::Spawn { parent, child, .. } => {
                out.insert(parent.clone());
                out.insert(child.clone());
            }
            ChorBody::Intro { introducer, left, right, .. } => {
                out.insert(introducer.clone());
                out.insert(left.clone());
                out.insert(right.clone());
            }
        });
        out
    }

    /// Pre-order traversal of every sub-body.
    pub fn visit(&self, f: &mut impl FnMut(&ChorBody)) {
        f(self);
        match self {
            ChorBody::Terminated | ChorBody::Call { .. } => {}
            ChorBody::Com { cont, .. } | ChorBody::Sel { cont, .. } | ChorBody::Spawn { cont, .. } | ChorBody::Intro { cont, .. } => {
                cont.visit(f)
            }
            ChorBody::Cond { then, otherwise, .. } => {
                then.visit(f);
                otherwise.visit(f);
            }
        }
    }

    pub fn visit_calls(&self, f: &mut impl FnMut(&str, &[Name])) {
        self.visit(&mut |b| {
            if let ChorBody::Call { procedure, args } = b {
                f(procedure, args);
            }
        });
    }

    /// Capture-avoiding simultaneous substitution of free names.
    pub fn substitute(&self, map: &BTreeMap<Name, Name>) -> ChorBody {
        if map.is_empty() {
            return self.clone();
        }
        let s = |n: &Name| map.get(n).cloned().unwrap_or_else(|| n.clone());
        match self {
            ChorBody::Terminated => ChorBody::Terminated,
            ChorBody::Call { procedure, args } => ChorBody::Call { procedure: procedure.clone(), args: args.iter().map(s).collect() },
            ChorBody::Com { sender, expr, receiver, cont } => ChorBody::Com {
                sender: s(sender),
                expr: expr.clone(),
                receiver: s(receiver),
                cont: Box::new(cont.substitute(map)),
            },
            ChorBody::Sel { sender, receiver, label, cont } => ChorBody::Sel {
                sender: s(sender),
                receiver: s(receiver),
                label: label.clone(),
                cont: Box::new(cont.substitute(map)),
            },
            ChorBody::Cond { process, expr, then, otherwise } => ChorBody::Cond {
                process: s(process),
                expr: expr.clone(),
                then: Box::new(then.substitute(map)),
                otherwise: Box::new(otherwise.substitute(map)),
            },
            ChorBody::Intro { introducer, left, right, cont } => ChorBody::Intro {
                introducer: s(introducer),
                left: s(left),
                right: s(right),
                cont: Box::new(cont.substitute(map)),
            },
            ChorBody::Spawn { parent, child, cont } => {
                let mut inner = map.clone();
                inner.remove(child);
                let free = cont.free_names();
                let captures = inner.iter().any(|(k, v)| v == child && free.contains(k) && k != child);
                if captures {
                    let mut used = cont.all_names();
                    used.extend(inner.keys().cloned());
                    used.extend(inner.values().cloned());
                    let fresh = fresh_variant(child, |n| used.contains(n));
                    let renamed = cont.substitute(&BTreeMap::from([(child.clone(), fresh.clone())]));
                    ChorBody::Spawn { parent: s(parent), child: fresh, cont: Box::new(renamed.substitute(&inner)) }
                } else {
                    ChorBody::Spawn { parent: s(parent), child: child.clone(), cont: Box::new(cont.substitute(&inner)) }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spawn_binds_child_in_continuation() {
        let b = ChorBody::Spawn {
            parent: "p".into(),
            child: "w".into(),
            cont: Box::new(ChorBody::Com { sender: "w".into(), expr: "m".into(), receiver: "q".into(), cont: Box::new(ChorBody::Terminated) }),
        };
        assert_eq!(b.free_names(), BTreeSet::from([Name::from("p"), Name::from("q")]));
        let out = b.substitute(&BTreeMap::from([(Name::from("w"), Name::from("z"))]));
        assert_eq!(out, b);
    }

    #[test]
    fn substitution_renames_capturing_spawn_binder() {
        let b = ChorBody::Spawn {
            parent: "p".into(),
            child: "w".into(),
            cont: Box::new(ChorBody::Com { sender: "q".into(), expr: "m".into(), receiver: "w".into(), cont: Box::new(ChorBody::Terminated) }),
        };
        let out = b.substitute(&BTreeMap::from([(Name::from("q"), Name::from("w"))]));
        match out {
            ChorBody::Spawn { child, cont, .. } => {
                assert_ne!(child, Name::from("w"));
                match *cont {
                    ChorBody::Com { sender, receiver, .. } => {
                        assert_eq!(sender, Name::from("w"));
                        assert_eq!(receiver, child);
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
