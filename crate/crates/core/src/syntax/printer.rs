use std::fmt::Write;

use super::lexer::is_ident_char;
use super::parser::KEYWORDS;
use crate::model::{Behaviour, ChorBody, Choreography, Name, Network, Process};

const INDENT: &str = "    ";

/// Expressions and labels print bare when they lex back as one identifier.
pub fn quote_text(s: &str) -> String {
    let bare = !s.is_empty() && s.chars().all(is_ident_char) && !s.contains("//") && !KEYWORDS.contains(&s);
    if bare {
        return s.to_string();
    }
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn names(ns: &[Name]) -> String {
    ns.iter().map(Name::as_str).collect::<Vec<_>>().join(", ")
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str(text);
    out.push('\n');
}

pub fn print_network(n: &Network) -> String {
    let mut out = String::new();
    for (i, p) in n.processes().enumerate() {
        if i > 0 {
            out.push_str("| ");
        }
        print_process(&mut out, p);
    }
    out
}

pub fn print_process(out: &mut String, p: &Process) {
    let _ = writeln!(out, "{} {{", p.name);
    for def in p.procedures.values() {
        line(out, 1, &format!("def {}({}) {{", def.name, names(&def.params)));
        behaviour(out, 2, &def.body);
        line(out, 1, "}");
    }
    line(out, 1, "main {");
    behaviour(out, 2, &p.main);
    line(out, 1, "}");
    out.push_str("}\n");
}

/// A behaviour on its own, at indentation depth zero.
pub fn print_behaviour(b: &Behaviour) -> String {
    let mut out = String::new();
    behaviour(&mut out, 0, b);
    out
}

fn behaviour(out: &mut String, d: usize, b: &Behaviour) {
    match b {
        Behaviour::Terminated => line(out, d, "0"),
        Behaviour::Call { procedure, args } => line(out, d, &format!("{procedure}({})", names(args))),
        Behaviour::Send { to, expr, cont } => {
            line(out, d, &format!("{to}!{};", quote_text(expr.as_str())));
            behaviour(out, d, cont);
        }
        Behaviour::Receive { from, cont } => {
            line(out, d, &format!("{from}?;"));
            behaviour(out, d, cont);
        }
        Behaviour::ReceiveIntro { from, binder, cont } => {
            line(out, d, &format!("{from}?{binder};"));
            behaviour(out, d, cont);
        }
        Behaviour::Select { to, label, cont } => {
            line(out, d, &format!("{to}+{};", quote_text(label)));
            behaviour(out, d, cont);
        }
        Behaviour::Offer { from, branches } => {
            line(out, d, &format!("{from}&{{"));
            for (i, (l, b)) in branches.iter().enumerate() {
                line(out, d + 1, &format!("{}:", quote_text(l)));
                behaviour(out, d + 2, b);
                if i + 1 < branches.len() {
                    // The separator sits on the last line of the branch.
                    out.pop();
                    out.push_str(",\n");
                }
            }
            line(out, d, "}");
        }
        Behaviour::Introduce { left, right, cont } => {
            line(out, d, &format!("{left} <-> {right};"));
            behaviour(out, d, cont);
        }
        Behaviour::Conditional { expr, then, otherwise } => {
            line(out, d, &format!("if {} then {{", quote_text(expr.as_str())));
            behaviour(out, d + 1, then);
            line(out, d, "} else {");
            behaviour(out, d + 1, otherwise);
            line(out, d, "}");
        }
        Behaviour::Spawn { binder, child, cont } => {
            line(out, d, &format!("spawn {binder} with {{"));
            behaviour(out, d + 1, child);
            line(out, d, "} continue {");
            behaviour(out, d + 1, cont);
            line(out, d, "}");
        }
    }
}

pub fn print_choreography(c: &Choreography) -> String {
    let mut out = String::new();
    for def in &c.procedures {
        line(&mut out, 0, &format!("def {}({}) {{", def.name, names(&def.params)));
        cbody(&mut out, 1, &def.body);
        line(&mut out, 0, "}");
    }
    line(&mut out, 0, "main {");
    cbody(&mut out, 1, &c.main);
    line(&mut out, 0, "}");
    out
}

fn cbody(out: &mut String, d: usize, b: &ChorBody) {
    match b {
        ChorBody::Terminated => line(out, d, "0"),
        ChorBody::Call { procedure, args } => line(out, d, &format!("{procedure}({})", names(args))),
        ChorBody::Com { sender, expr, receiver, cont } => {
            line(out, d, &format!("{sender}.{} -> {receiver};", quote_text(expr.as_str())));
            cbody(out, d, cont);
        }
        ChorBody::Sel { sender, receiver, label, cont } => {
            line(out, d, &format!("{sender} -> {receiver}[{}];", quote_text(label)));
            cbody(out, d, cont);
        }
        ChorBody::Spawn { parent, child, cont } => {
            line(out, d, &format!("{parent} spawns {child};"));
            cbody(out, d, cont);
        }
        ChorBody::Intro { introducer, left, right, cont } => {
            line(out, d, &format!("{introducer}.{left} <-> {right};"));
            cbody(out, d, cont);
        }
        ChorBody::Cond { process, expr, then, otherwise } => {
            line(out, d, &format!("if {process}.{} then {{", quote_text(expr.as_str())));
            cbody(out, d + 1, then);
            line(out, d, "} else {");
            cbody(out, d + 1, otherwise);
            line(out, d, "}");
        }
    }
}
