//! Example inputs: the bundled networks, networks projected from seeded
//! random choreographies, and random well-formed syntax trees.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Behaviour, ChorBody, ChorProcedureDef, Choreography, Expr, Name, Network, ProcedureDef, Process};

/// Bundled networks as (file name, source).
pub const EXAMPLES: &[(&str, &str)] = &[
    ("onlinestore.net", include_str!("../data/onlinestore.net")),
    ("serverless.net", include_str!("../data/serverless.net")),
    ("leak1.net", include_str!("../data/leak1.net")),
    ("leak2.net", include_str!("../data/leak2.net")),
    ("chain.net", include_str!("../data/chain.net")),
    ("deadlock.net", include_str!("../data/deadlock.net")),
];

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProjectionError {
    #[error("branches of a conditional cannot be merged for `{process}`")]
    Unmergeable { process: Name },
}

/// Endpoint projection onto every initial process, with offers merged
/// across conditional branches.
pub fn project(c: &Choreography) -> Result<Network, ProjectionError> {
    let mut processes = Vec::new();
    for r in c.initial_processes() {
        let defs = c
            .procedures
            .iter()
            .map(|d| Ok(ProcedureDef { name: d.name.clone(), params: d.params.clone(), body: project_body(c, &d.body, &r)? }))
            .collect::<Result<Vec<_>, ProjectionError>>()?;
        let main = project_body(c, &c.main, &r)?;
        processes.push(Process::new(r, defs, main));
    }
    Ok(Network::new(processes).expect("initial processes are distinct and non-empty"))
}

fn project_body(c: &Choreography, b: &ChorBody, r: &Name) -> Result<Behaviour, ProjectionError> {
    let next = |cont: &ChorBody| project_body(c, cont, r).map(Box::new);
    Ok(match b {
        ChorBody::Terminated => Behaviour::Terminated,
        ChorBody::Call { procedure, args } => {
            if involved(c, procedure, args).contains(r) {
                Behaviour::Call { procedure: procedure.clone(), args: args.clone() }
            } else {
                Behaviour::Terminated
            }
        }
        ChorBody::Com { sender, expr, receiver, cont } => {
            if sender == r {
                Behaviour::Send { to: receiver.clone(), expr: expr.clone(), cont: next(cont)? }
            } else if receiver == r {
                Behaviour::Receive { from: sender.clone(), cont: next(cont)? }
            } else {
                project_body(c, cont, r)?
            }
        }
        ChorBody::Sel { sender, receiver, label, cont } => {
            if sender == r {
                Behaviour::Select { to: receiver.clone(), label: label.clone(), cont: next(cont)? }
            } else if receiver == r {
                Behaviour::Offer { from: sender.clone(), branches: vec![(label.clone(), project_body(c, cont, r)?)] }
            } else {
                project_body(c, cont, r)?
            }
        }
        ChorBody::Cond { process, expr, then, otherwise } => {
            if process == r {
                Behaviour::Conditional { expr: expr.clone(), then: next(then)?, otherwise: next(otherwise)? }
            } else {
                merge(project_body(c, then, r)?, project_body(c, otherwise, r)?, r)?
            }
        }
        ChorBody::Spawn { parent, child, cont } => {
            if parent == r {
                Behaviour::Spawn { binder: child.clone(), child: Box::new(project_body(c, cont, child)?), cont: next(cont)? }
            } else {
                project_body(c, cont, r)?
            }
        }
        ChorBody::Intro { introducer, left, right, cont } => {
            if introducer == r {
                Behaviour::Introduce { left: left.clone(), right: right.clone(), cont: next(cont)? }
            } else if left == r {
                Behaviour::ReceiveIntro { from: introducer.clone(), binder: right.clone(), cont: next(cont)? }
            } else if right == r {
                Behaviour::ReceiveIntro { from: introducer.clone(), binder: left.clone(), cont: next(cont)? }
            } else {
                project_body(c, cont, r)?
            }
        }
    })
}

/// Processes that take part in a call, following further calls.
fn involved(c: &Choreography, procedure: &str, args: &[Name]) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut work = vec![(procedure.to_string(), args.to_vec())];
    while let Some((p, args)) = work.pop() {
        if !seen.insert((p.clone(), args.clone())) {
            continue;
        }
        let Some(def) = c.procedure(&p) else { continue };
        let sub: BTreeMap<Name, Name> = def.params.iter().cloned().zip(args).collect();
        let body = def.body.substitute(&sub);
        out.extend(body.free_names());
        body.visit_calls(&mut |q, a| work.push((q.to_string(), a.to_vec())));
    }
    out
}

fn merge(a: Behaviour, b: Behaviour, r: &Name) -> Result<Behaviour, ProjectionError> {
    if a == b {
        return Ok(a);
    }
    match (a, b) {
        (Behaviour::Offer { from: f1, branches: mut b1 }, Behaviour::Offer { from: f2, branches: b2 }) if f1 == f2 => {
            for (label, body) in b2 {
                match b1.iter().position(|(l, _)| *l == label) {
                    Some(i) => {
                        let old = std::mem::replace(&mut b1[i].1, Behaviour::Terminated);
                        b1[i].1 = merge(old, body, r)?;
                    }
                    None => b1.push((label, body)),
                }
            }
            Ok(Behaviour::Offer { from: f1, branches: b1 })
        }
        _ => Err(ProjectionError::Unmergeable { process: r.clone() }),
    }
}

const ROLES: &[&str] = &["buyer", "seller", "bank", "courier"];

struct ChorGen {
    rng: ChaCha8Rng,
    roles: Vec<Name>,
    fresh: usize,
}

impl ChorGen {
    fn expr(&mut self) -> Expr {
        self.fresh += 1;
        Expr::new(format!("v{}", self.fresh))
    }

    fn pair(&mut self) -> (Name, Name) {
        let mut two: Vec<Name> = self.roles.choose_multiple(&mut self.rng, 2).cloned().collect();
        let b = two.pop().expect("at least two roles");
        (two.pop().expect("at least two roles"), b)
    }

    // A few plain interactions in front of `tail`.
    fn segment(&mut self, tail: ChorBody) -> ChorBody {
        let n = self.rng.gen_range(0..=2);
        let mut body = tail;
        for _ in 0..n {
            let (p, q) = self.pair();
            body = if self.rng.gen_bool(0.75) {
                let expr = self.expr();
                ChorBody::Com { sender: p, expr, receiver: q, cont: Box::new(body) }
            } else {
                ChorBody::Sel { sender: p, receiver: q, label: "note".into(), cont: Box::new(body) }
            };
        }
        body
    }

    // `p` tells every other role which branch was taken.
    fn announce(&self, p: &Name, label: &str, tail: ChorBody) -> ChorBody {
        self.roles.iter().rev().filter(|q| *q != p).fold(tail, |body, q| ChorBody::Sel {
            sender: p.clone(),
            receiver: q.clone(),
            label: label.into(),
            cont: Box::new(body),
        })
    }

    fn cond(&mut self, then: ChorBody, otherwise: ChorBody) -> ChorBody {
        let p = self.roles.choose(&mut self.rng).expect("roles").clone();
        let then = self.segment(then);
        let then = self.announce(&p, "yes", then);
        let otherwise = self.segment(otherwise);
        let otherwise = self.announce(&p, "no", otherwise);
        let expr = self.expr();
        ChorBody::Cond { process: p, expr, then: Box::new(then), otherwise: Box::new(otherwise) }
    }

    // `p spawns w; p.w <-> q;` followed by a short exchange the child finishes.
    fn spawn_block(&mut self, binder: &str, tail: ChorBody) -> ChorBody {
        let (p, q) = self.pair();
        let w = Name::new(binder);
        let e1 = self.expr();
        let e2 = self.expr();
        let e3 = self.expr();
        let body = ChorBody::Com { sender: w.clone(), expr: e3, receiver: p.clone(), cont: Box::new(tail) };
        let body = ChorBody::Com { sender: q.clone(), expr: e2, receiver: w.clone(), cont: Box::new(body) };
        let body = ChorBody::Com { sender: w.clone(), expr: e1, receiver: q.clone(), cont: Box::new(body) };
        let body = ChorBody::Intro { introducer: p.clone(), left: w.clone(), right: q, cont: Box::new(body) };
        ChorBody::Spawn { parent: p, child: w, cont: Box::new(body) }
    }

    fn choreography(&mut self) -> Choreography {
        let n = self.rng.gen_range(2..=ROLES.len());
        self.roles = ROLES[..n].iter().map(|s| Name::new(*s)).collect();
        let mut procedures = Vec::new();
        let tail = match self.rng.gen_range(0..4) {
            0 => ChorBody::Terminated,
            1 => self.cond(ChorBody::Terminated, ChorBody::Terminated),
            _ => {
                let call = |name: &str| ChorBody::Call { procedure: name.into(), args: vec![] };
                let exit = if self.rng.gen_bool(0.4) {
                    let body = self.cond(call("Y"), ChorBody::Terminated);
                    let body = self.segment(body);
                    procedures.push(ChorProcedureDef { name: "Y".into(), params: vec![], body });
                    call("Y")
                } else {
                    ChorBody::Terminated
                };
                let body = self.cond(call("X"), exit);
                let body = self.segment(body);
                procedures.insert(0, ChorProcedureDef { name: "X".into(), params: vec![], body });
                call("X")
            }
        };
        let mut main = self.segment(tail);
        if self.rng.gen_bool(0.4) {
            main = self.spawn_block("helper", main);
        }
        // Every role takes part before anything else happens.
        for i in (1..n).rev() {
            let (a, b) = (self.roles[i - 1].clone(), self.roles[i].clone());
            let (sender, receiver) = if self.rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            let expr = self.expr();
            main = ChorBody::Com { sender, expr, receiver, cont: Box::new(main) };
        }
        Choreography { procedures, main }
    }
}

/// A random projectable choreography over two to four roles.
pub fn generated_choreography(seed: u64) -> Choreography {
    ChorGen { rng: ChaCha8Rng::seed_from_u64(seed), roles: vec![], fresh: 0 }.choreography()
}

/// `count` networks projected from generated choreographies, named `gen00.net`, ….
pub fn generated_corpus(count: usize, seed: u64) -> Vec<(String, Network)> {
    (0..count)
        .map(|i| {
            let c = generated_choreography(seed.wrapping_add(i as u64));
            let n = project(&c).expect("generated choreographies project");
            (format!("gen{i:02}.net"), n)
        })
        .collect()
}

const TEXTS: &[&str] = &["ok", "v1", "x + 1", "say \"hi\"", "a\\b", "then", "0", "n/2"];
const LABELS: &[&str] = &["left", "right", "more", "end", "two words"];

/// Random well-formed syntax trees: every name is declared and binders are
/// distinct, so they survive printing and parsing unchanged.
pub struct AstGen {
    rng: ChaCha8Rng,
    fresh: usize,
}

impl AstGen {
    pub fn new(seed: u64) -> Self {
        AstGen { rng: ChaCha8Rng::seed_from_u64(seed), fresh: 0 }
    }

    fn binder(&mut self) -> Name {
        self.fresh += 1;
        Name::new(format!("b{}", self.fresh))
    }

    fn text(&mut self) -> Expr {
        Expr::new(*TEXTS.choose(&mut self.rng).expect("texts"))
    }

    fn pick(&mut self, scope: &[Name]) -> Name {
        scope.choose(&mut self.rng).expect("non-empty scope").clone()
    }

    fn call(&mut self, procs: &[(String, usize)], scope: &[Name]) -> Option<(String, Vec<Name>)> {
        let (name, arity) = procs.choose(&mut self.rng)?.clone();
        let args = (0..arity).map(|_| self.pick(scope)).collect();
        Some((name, args))
    }

    pub fn behaviour(&mut self, depth: usize, scope: &[Name], procs: &[(String, usize)]) -> Behaviour {
        let choice = if depth == 0 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..10) };
        let sub = |g: &mut Self, s: &[Name]| Box::new(g.behaviour(depth.saturating_sub(1), s, procs));
        match choice {
            0 => Behaviour::Terminated,
            1 => match self.call(procs, scope) {
                Some((procedure, args)) => Behaviour::Call { procedure, args },
                None => Behaviour::Terminated,
            },
            2 => Behaviour::Send { to: self.pick(scope), expr: self.text(), cont: sub(self, scope) },
            3 => Behaviour::Receive { from: self.pick(scope), cont: sub(self, scope) },
            4 => {
                let label = LABELS.choose(&mut self.rng).expect("labels").to_string();
                Behaviour::Select { to: self.pick(scope), label, cont: sub(self, scope) }
            }
            5 => {
                let k = self.rng.gen_range(1..=3);
                let labels: Vec<&str> = LABELS.choose_multiple(&mut self.rng, k).copied().collect();
                let branches = labels.into_iter().map(|l| (l.to_string(), *sub(self, scope))).collect();
                Behaviour::Offer { from: self.pick(scope), branches }
            }
            6 => Behaviour::Introduce { left: self.pick(scope), right: self.pick(scope), cont: sub(self, scope) },
            7 => {
                let from = self.pick(scope);
                let binder = self.binder();
                let inner: Vec<Name> = scope.iter().cloned().chain([binder.clone()]).collect();
                Behaviour::ReceiveIntro { from, binder, cont: sub(self, &inner) }
            }
            8 => Behaviour::Conditional { expr: self.text(), then: sub(self, scope), otherwise: sub(self, scope) },
            _ => {
                let binder = self.binder();
                let inner: Vec<Name> = scope.iter().cloned().chain([binder.clone()]).collect();
                Behaviour::Spawn { binder, child: sub(self, &inner), cont: sub(self, &inner) }
            }
        }
    }

    pub fn network(&mut self) -> Network {
        let n = self.rng.gen_range(1..=3);
        let names: Vec<Name> = ["p", "q", "r"][..n].iter().map(|s| Name::new(*s)).collect();
        let mut processes = Vec::new();
        for name in &names {
            let k = self.rng.gen_range(0..=2);
            let sigs: Vec<(String, usize)> = (0..k).map(|i| (format!("P{i}"), self.rng.gen_range(0..=2))).collect();
            let defs = sigs
                .iter()
                .map(|(pname, arity)| {
                    let params: Vec<Name> = (0..*arity).map(|i| Name::new(format!("x{i}"))).collect();
                    let scope: Vec<Name> = names.iter().chain(&params).cloned().collect();
                    let body = self.behaviour(3, &scope, &sigs);
                    ProcedureDef { name: pname.clone(), params, body }
                })
                .collect();
            let main = self.behaviour(3, &names, &sigs);
            processes.push(Process::new(name.clone(), defs, main));
        }
        Network::new(processes).expect("distinct names")
    }

    pub fn chor_body(&mut self, depth: usize, scope: &[Name], procs: &[(String, usize)]) -> ChorBody {
        let choice = if depth == 0 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..7) };
        let sub = |g: &mut Self, s: &[Name]| Box::new(g.chor_body(depth.saturating_sub(1), s, procs));
        match choice {
            0 => ChorBody::Terminated,
            1 => match self.call(procs, scope) {
                Some((procedure, args)) => ChorBody::Call { procedure, args },
                None => ChorBody::Terminated,
            },
            2 => ChorBody::Com { sender: self.pick(scope), expr: self.text(), receiver: self.pick(scope), cont: sub(self, scope) },
            3 => {
                let label = LABELS.choose(&mut self.rng).expect("labels").to_string();
                ChorBody::Sel { sender: self.pick(scope), receiver: self.pick(scope), label, cont: sub(self, scope) }
            }
            4 => ChorBody::Cond { process: self.pick(scope), expr: self.text(), then: sub(self, scope), otherwise: sub(self, scope) },
            5 => {
                let parent = self.pick(scope);
                let child = self.binder();
                let inner: Vec<Name> = scope.iter().cloned().chain([child.clone()]).collect();
                ChorBody::Spawn { parent, child, cont: sub(self, &inner) }
            }
            _ => ChorBody::Intro {
                introducer: self.pick(scope),
                left: self.pick(scope),
                right: self.pick(scope),
                cont: sub(self, scope),
            },
        }
    }

    pub fn choreography(&mut self) -> Choreography {
        let names: Vec<Name> = ["p", "q", "r"].iter().map(|s| Name::new(*s)).collect();
        let k = self.rng.gen_range(0..=2);
        let sigs: Vec<(String, usize)> = (0..k).map(|i| (format!("X{}", i + 1), self.rng.gen_range(0..=2))).collect();
        let procedures = sigs
            .iter()
            .map(|(pname, arity)| {
                let params: Vec<Name> = (0..*arity).map(|i| Name::new(format!("x{i}"))).collect();
                let scope: Vec<Name> = names.iter().chain(&params).cloned().collect();
                ChorProcedureDef { name: pname.clone(), params, body: self.chor_body(4, &scope, &sigs) }
            })
            .collect();
        let main = self.chor_body(4, &names, &sigs);
        Choreography { procedures, main }
    }
}
