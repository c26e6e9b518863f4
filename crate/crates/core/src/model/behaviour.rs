use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use super::name::{fresh_variant, Expr, Name};
use super::renaming::ProcessRenaming;
use super::ModelError;

/// The local program of a single process.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Behaviour {
    Terminated,
    /// Tail call; there is deliberately no continuation.
    Call { procedure: String, args: Vec<Name> },
    Send { to: Name, expr: Expr, cont: Box<Behaviour> },
    Receive { from: Name, cont: Box<Behaviour> },
    Select { to: Name, label: String, cont: Box<Behaviour> },
    Offer { from: Name, branches: Vec<(String, Behaviour)> },
    /// `left <-> right; cont`: the executing process introduces two others.
    Introduce { left: Name, right: Name, cont: Box<Behaviour> },
    /// `from ? binder; cont`: receive a process name, bound to `binder` in `cont`.
    ReceiveIntro { from: Name, binder: Name, cont: Box<Behaviour> },
    Conditional { expr: Expr, then: Box<Behaviour>, otherwise: Box<Behaviour> },
    /// `spawn binder with { child } continue { cont }`; `binder` scopes over both.
    Spawn { binder: Name, child: Box<Behaviour>, cont: Box<Behaviour> },
}

impl Behaviour {
    pub fn is_terminated(&self) -> bool {
        matches!(self, Behaviour::Terminated)
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let mut note = |n: &Name, bound: &Vec<Name>| {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        };
        match self {
            Behaviour::Terminated => {}
            Behaviour::Call { args, .. } => args.iter().for_each(|a| note(a, bound)),
            Behaviour::Send { to, cont, .. } | Behaviour::Select { to, cont, .. } => {
                note(to, bound);
                cont.collect_free(bound, out);
            }
            Behaviour::Receive { from, cont } => {
                note(from, bound);
                cont.collect_free(bound, out);
            }
            Behaviour::Offer { from, branches } => {
                note(from, bound);
                for (_, b) in branches {
                    b.collect_free(bound, out);
                }
            }
            Behaviour::Introduce { left, right, cont } => {
                note(left, bound);
                note(right, bound);
                cont.collect_free(bound, out);
            }
            Behaviour::ReceiveIntro { from, binder, cont } => {
                note(from, bound);
                bound.push(binder.clone());
                cont.collect_free(bound, out);
                bound.pop();
            }
            Behaviour::Conditional { then, otherwise, .. } => {
                then.collect_free(bound, out);
                otherwise.collect_free(bound, out);
            }
            Behaviour::Spawn { binder, child, cont } => {
                bound.push(binder.clone());
                child.collect_free(bound, out);
                cont.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every name occurring anywhere, binders included.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit_names(&mut |n| {
            out.insert(n.clone());
        });
        out
    }

    fn visit_names(&self, f: &mut impl FnMut(&Name)) {
        match self {
            Behaviour::Terminated => {}
            Behaviour::Call { args, .. } => args.iter().for_each(&mut *f),
            Behaviour::Send { to, cont, .. } | Behaviour::Select { to, cont, .. } => {
                f(to);
                cont.visit_names(f);
            }
            Behaviour::Receive { from, cont } => {
                f(from);
                cont.visit_names(f);
            }
            Behaviour::Offer { from, branches } => {
                f(from);
                branches.iter().for_each(|(_, b)| b.visit_names(f));
            }
            Behaviour::Introduce { left, right, cont } => {
                f(left);
                f(right);
                cont.visit_names(f);
            }
            Behaviour::ReceiveIntro { from, binder, cont } => {
                f(from);
                f(binder);
                cont.visit_names(f);
            }
            Behaviour::Conditional { then, otherwise, .. } => {
                then.visit_names(f);
                otherwise.visit_names(f);
            }
            Behaviour::Spawn { binder, child, cont } => {
                f(binder);
                child.visit_names(f);
                cont.visit_names(f);
            }
        }
    }

    /// Names of all procedures called anywhere in the term.
    pub fn called_procedures(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        self.visit_calls(&mut |p, n| out.push((p, n)));
        out
    }

    fn visit_calls<'a>(&'a self, f: &mut impl FnMut(&'a str, usize)) {
        match self {
            Behaviour::Terminated => {}
            Behaviour::Call { procedure, args } => f(procedure, args.len()),
            Behaviour::Send { cont, .. }
            | Behaviour::Select { cont, .. }
            | Behaviour::Receive { cont, .. }
            | Behaviour::Introduce { cont, .. }
            | Behaviour::ReceiveIntro { cont, .. } => cont.visit_calls(f),
            Behaviour::Offer { branches, .. } => branches.iter().for_each(|(_, b)| b.visit_calls(f)),
            Behaviour::Conditional { then, otherwise, .. } => {
                then.visit_calls(f);
                otherwise.visit_calls(f);
            }
            Behaviour::Spawn { child, cont, .. } => {
                child.visit_calls(f);
                cont.visit_calls(f);
            }
        }
    }

    /// Capture-avoiding simultaneous substitution of free names.
    ///
    /// When `into_children` is false the bodies of `spawn` children are left
    /// untouched (they are resolved by the child, not by the current owner).
    pub fn substitute(&self, map: &BTreeMap<Name, Name>, into_children: bool) -> Behaviour {
        if map.is_empty() {
            return self.clone();
        }
        let sub = |n: &Name| map.get(n).cloned().unwrap_or_else(|| n.clone());
        match self {
            Behaviour::Terminated => Behaviour::Terminated,
            Behaviour::Call { procedure, args } => Behaviour::Call {
                procedure: procedure.clone(),
                args: args.iter().map(sub).collect(),
            },
            Behaviour::Send { to, expr, cont } => Behaviour::Send {
                to: sub(to),
                expr: expr.clone(),
                cont: Box::new(cont.substitute(map, into_children)),
            },
            Behaviour::Receive { from, cont } => Behaviour::Receive {
                from: sub(from),
                cont: Box::new(cont.substitute(map, into_children)),
            },
            Behaviour::Select { to, label, cont } => Behaviour::Select {
                to: sub(to),
                label: label.clone(),
                cont: Box::new(cont.substitute(map, into_children)),
            },
            Behaviour::Offer { from, branches } => Behaviour::Offer {
                from: sub(from),
                branches: branches
                    .iter()
                    .map(|(l, b)| (l.clone(), b.substitute(map, into_children)))
                    .collect(),
            },
            Behaviour::Introduce { left, right, cont } => Behaviour::Introduce {
                left: sub(left),
                right: sub(right),
                cont: Box::new(cont.substitute(map, into_children)),
            },
            Behaviour::ReceiveIntro { from, binder, cont } => {
                let (binder, scope) = enter_binder(map, binder, &[cont.as_ref()]);
                let cont = match scope {
                    Scope::Unchanged => (**cont).clone(),
                    Scope::Rebound(inner, renamed) => {
                        renamed[0].substitute(&inner, into_children)
                    }
                };
                Behaviour::ReceiveIntro {
                    from: sub(from),
                    binder,
                    cont: Box::new(cont),
                }
            }
            Behaviour::Conditional { expr, then, otherwise } => Behaviour::Conditional {
                expr: expr.clone(),
                then: Box::new(then.substitute(map, into_children)),
                otherwise: Box::new(otherwise.substitute(map, into_children)),
            },
            Behaviour::Spawn { binder, child, cont } => {
                if !into_children {
                    // The child keeps its text, so the binder must keep its name too.
                    let inner = without(map, binder);
                    return Behaviour::Spawn {
                        binder: binder.clone(),
                        child: child.clone(),
                        cont: Box::new(cont.substitute_checked(&inner, binder, into_children)),
                    };
                }
                let (binder, scope) = enter_binder(map, binder, &[child.as_ref(), cont.as_ref()]);
                let (child, cont) = match scope {
                    Scope::Unchanged => ((**child).clone(), (**cont).clone()),
                    Scope::Rebound(inner, renamed) => (
                        renamed[0].substitute(&inner, into_children),
                        renamed[1].substitute(&inner, into_children),
                    ),
                };
                Behaviour::Spawn {
                    binder,
                    child: Box::new(child),
                    cont: Box::new(cont),
                }
            }
        }
    }

    // Substitution under a binder that cannot be renamed: entries that would be
    // captured are dropped, leaving those names free but unresolved.
    fn substitute_checked(&self, map: &BTreeMap<Name, Name>, binder: &Name, into_children: bool) -> Behaviour {
        if map.values().any(|v| v == binder) {
            let free = self.free_names();
            let safe: BTreeMap<Name, Name> = map
                .iter()
                .filter(|(k, v)| *v != binder || !free.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            self.substitute(&safe, into_children)
        } else {
            self.substitute(map, into_children)
        }
    }

    /// Applies a process renaming to every free name (bound names are untouched).
    pub fn apply_renaming(&self, m: &ProcessRenaming) -> Behaviour {
        self.substitute(m.as_map(), true)
    }

    /// Renames the binder `old` (and everything it binds) to `fresh`.
    pub fn alpha_rename_binder(&self, old: &Name, fresh: &Name) -> Result<Behaviour, ModelError> {
        if self.all_names().contains(fresh) {
            return Err(ModelError::FreshNameClash(fresh.clone()));
        }
        Ok(self.rename_binder_unchecked(old, fresh))
    }

    fn rename_binder_unchecked(&self, old: &Name, fresh: &Name) -> Behaviour {
        let single = BTreeMap::from([(old.clone(), fresh.clone())]);
        let go = |b: &Behaviour| Box::new(b.rename_binder_unchecked(old, fresh));
        match self {
            Behaviour::Terminated | Behaviour::Call { .. } => self.clone(),
            Behaviour::Send { to, expr, cont } => Behaviour::Send { to: to.clone(), expr: expr.clone(), cont: go(cont) },
            Behaviour::Receive { from, cont } => Behaviour::Receive { from: from.clone(), cont: go(cont) },
            Behaviour::Select { to, label, cont } => Behaviour::Select { to: to.clone(), label: label.clone(), cont: go(cont) },
            Behaviour::Offer { from, branches } => Behaviour::Offer {
                from: from.clone(),
                branches: branches.iter().map(|(l, b)| (l.clone(), b.rename_binder_unchecked(old, fresh))).collect(),
            },
            Behaviour::Introduce { left, right, cont } => Behaviour::Introduce { left: left.clone(), right: right.clone(), cont: go(cont) },
            Behaviour::ReceiveIntro { from, binder, cont } if binder == old => Behaviour::ReceiveIntro {
                from: from.clone(),
                binder: fresh.clone(),
                cont: go(&cont.substitute(&single, true)),
            },
            Behaviour::ReceiveIntro { from, binder, cont } => Behaviour::ReceiveIntro { from: from.clone(), binder: binder.clone(), cont: go(cont) },
            Behaviour::Conditional { expr, then, otherwise } => Behaviour::Conditional { expr: expr.clone(), then: go(then), otherwise: go(otherwise) },
            Behaviour::Spawn { binder, child, cont } if binder == old => Behaviour::Spawn {
                binder: fresh.clone(),
                child: go(&child.substitute(&single, true)),
                cont: go(&cont.substitute(&single, true)),
            },
            Behaviour::Spawn { binder, child, cont } => Behaviour::Spawn { binder: binder.clone(), child: go(child), cont: go(cont) },
        }
    }

    /// Renames binders so that no two binders in the term share a name.
    /// `avoid` lists names the fresh binders must not collide with.
    pub fn distinct_binders(&self, avoid: &BTreeSet<Name>) -> Behaviour {
        let mut term = self.clone();
        let mut seen: BTreeSet<Name> = BTreeSet::new();
        loop {
            let Some(dup) = term.first_duplicate_binder(&mut seen.clone()) else {
                return term;
            };
            let used = term.all_names();
            let fresh = fresh_variant(&dup, |n| used.contains(n) || avoid.contains(n));
            term = term.rename_second_binder(&dup, &fresh, &mut false);
            seen.clear();
        }
    }

    fn first_duplicate_binder(&self, seen: &mut BTreeSet<Name>) -> Option<Name> {
        let mut dup = None;
        self.visit_binders(&mut |b| {
            if dup.is_none() && !seen.insert(b.clone()) {
                dup = Some(b.clone());
            }
        });
        dup
    }

    fn visit_binders(&self, f: &mut impl FnMut(&Name)) {
        match self {
            Behaviour::Terminated | Behaviour::Call { .. } => {}
            Behaviour::Send { cont, .. }
            | Behaviour::Select { cont, .. }
            | Behaviour::Receive { cont, .. }
            | Behaviour::Introduce { cont, .. } => cont.visit_binders(f),
            Behaviour::Offer { branches, .. } => branches.iter().for_each(|(_, b)| b.visit_binders(f)),
            Behaviour::ReceiveIntro { binder, cont, .. } => {
                f(binder);
                cont.visit_binders(f);
            }
            Behaviour::Conditional { then, otherwise, .. } => {
                then.visit_binders(f);
                otherwise.visit_binders(f);
            }
            Behaviour::Spawn { binder, child, cont } => {
                f(binder);
                child.visit_binders(f);
                cont.visit_binders(f);
            }
        }
    }

    // Renames the second binder occurrence of `name` in visiting order.
    fn rename_second_binder(&self, name: &Name, fresh: &Name, seen_first: &mut bool) -> Behaviour {
        let single = BTreeMap::from([(name.clone(), fresh.clone())]);
        match self {
            Behaviour::Terminated | Behaviour::Call { .. } => self.clone(),
            Behaviour::Send { to, expr, cont } => Behaviour::Send { to: to.clone(), expr: expr.clone(), cont: Box::new(cont.rename_second_binder(name, fresh, seen_first)) },
            Behaviour::Receive { from, cont } => Behaviour::Receive { from: from.clone(), cont: Box::new(cont.rename_second_binder(name, fresh, seen_first)) },
            Behaviour::Select { to, label, cont } => Behaviour::Select { to: to.clone(), label: label.clone(), cont: Box::new(cont.rename_second_binder(name, fresh, seen_first)) },
            Behaviour::Introduce { left, right, cont } => Behaviour::Introduce { left: left.clone(), right: right.clone(), cont: Box::new(cont.rename_second_binder(name, fresh, seen_first)) },
            Behaviour::Offer { from, branches } => Behaviour::Offer {
                from: from.clone(),
                branches: branches.iter().map(|(l, b)| (l.clone(), b.rename_second_binder(name, fresh, seen_first))).collect(),
            },
            Behaviour::Conditional { expr, then, otherwise } => {
                let then = then.rename_second_binder(name, fresh, seen_first);
                let otherwise = otherwise.rename_second_binder(name, fresh, seen_first);
                Behaviour::Conditional { expr: expr.clone(), then: Box::new(then), otherwise: Box::new(otherwise) }
            }
            Behaviour::ReceiveIntro { from, binder, cont } => {
                if binder == name {
                    if *seen_first {
                        return Behaviour::ReceiveIntro { from: from.clone(), binder: fresh.clone(), cont: Box::new(cont.substitute(&single, true)) };
                    }
                    *seen_first = true;
                }
                Behaviour::ReceiveIntro { from: from.clone(), binder: binder.clone(), cont: Box::new(cont.rename_second_binder(name, fresh, seen_first)) }
            }
            Behaviour::Spawn { binder, child, cont } => {
                if binder == name {
                    if *seen_first {
                        return Behaviour::Spawn {
                            binder: fresh.clone(),
                            child: Box::new(child.substitute(&single, true)),
                            cont: Box::new(cont.substitute(&single, true)),
                        };
                    }
                    *seen_first = true;
                }
                let child = child.rename_second_binder(name, fresh, seen_first);
                let cont = cont.rename_second_binder(name, fresh, seen_first);
                Behaviour::Spawn { binder: binder.clone(), child: Box::new(child), cont: Box::new(cont) }
            }
        }
    }

    /// Structural hash with every name erased; equal up to renaming implies equal shape.
    pub fn shape_hash(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.hash_shape(&mut h);
        h.finish()
    }

    pub(crate) fn hash_shape<H: Hasher>(&self, h: &mut H) {
        std::mem::discriminant(self).hash(h);
        match self {
            Behaviour::Terminated => {}
            Behaviour::Call { procedure, args } => {
                procedure.hash(h);
                args.len().hash(h);
            }
            Behaviour::Send { expr, cont, .. } => {
                expr.hash(h);
                cont.hash_shape(h);
            }
            Behaviour::Receive { cont, .. } | Behaviour::Introduce { cont, .. } | Behaviour::ReceiveIntro { cont, .. } => cont.hash_shape(h),
            Behaviour::Select { label, cont, .. } => {
                label.hash(h);
                cont.hash_shape(h);
            }
            Behaviour::Offer { branches, .. } => {
                let mut sorted: Vec<_> = branches.iter().collect();
                sorted.sort_by(|a, b| a.0.cmp(&b.0));
                for (l, b) in sorted {
                    l.hash(h);
                    b.hash_shape(h);
                }
            }
            Behaviour::Conditional { expr, then, otherwise } => {
                expr.hash(h);
                then.hash_shape(h);
                otherwise.hash_shape(h);
            }
            Behaviour::Spawn { child, cont, .. } => {
                child.hash_shape(h);
                cont.hash_shape(h);
            }
        }
    }
}

enum Scope<'a> {
    Unchanged,
    Rebound(BTreeMap<Name, Name>, Vec<std::borrow::Cow<'a, Behaviour>>),
}

fn without(map: &BTreeMap<Name, Name>, binder: &Name) -> BTreeMap<Name, Name> {
    let mut inner = map.clone();
    inner.remove(binder);
    inner
}

// Prepares substitution under `binder`: drops the binder from the map and, if a
// free name in scope would be captured, renames the binder to a fresh name.
fn enter_binder<'a>(map: &BTreeMap<Name, Name>, binder: &Name, scope: &[&'a Behaviour]) -> (Name, Scope<'a>) {
    let inner = without(map, binder);
    if inner.is_empty() {
        return (binder.clone(), Scope::Unchanged);
    }
    let mut free = BTreeSet::new();
    for s in scope {
        let mut bound = vec![binder.clone()];
        s.collect_free(&mut bound, &mut free);
    }
    let captures = inner.iter().any(|(k, v)| v == binder && free.contains(k));
    if !captures {
        let renamed = scope.iter().map(|s| std::borrow::Cow::Borrowed(*s)).collect();
        return (binder.clone(), Scope::Rebound(inner, renamed));
    }
    let mut used: BTreeSet<Name> = BTreeSet::new();
    for s in scope {
        used.extend(s.all_names());
    }
    used.extend(inner.keys().cloned());
    used.extend(inner.values().cloned());
    let fresh = fresh_variant(binder, |n| used.contains(n));
    let single = BTreeMap::from([(binder.clone(), fresh.clone())]);
    let renamed = scope
        .iter()
        .map(|s| std::borrow::Cow::Owned(s.substitute(&single, true)))
        .collect();
    (fresh, Scope::Rebound(inner, renamed))
}
