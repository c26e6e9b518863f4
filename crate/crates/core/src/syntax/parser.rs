use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::error::{ParseError, SourceSpan};
use super::lexer::{tokenize, Tok, Token};
use crate::model::{Behaviour, ChorBody, ChorProcedureDef, Choreography, Expr, Name, Network, ProcedureDef, Process};

pub const KEYWORDS: &[&str] = &["def", "main", "if", "then", "else", "spawn", "with", "continue", "stop", "spawns"];

const DEFAULT_FILE: &str = "<input>";

pub fn parse_network(src: &str) -> Result<Network, ParseError> {
    parse_network_named(src, DEFAULT_FILE)
}

pub fn parse_choreography(src: &str) -> Result<Choreography, ParseError> {
    parse_choreography_named(src, DEFAULT_FILE)
}

pub fn parse_network_named(src: &str, file: &str) -> Result<Network, ParseError> {
    let mut p = Parser::new(src, file)?;
    let n = p.network()?;
    p.expect_eof()?;
    Ok(n)
}

pub fn parse_choreography_named(src: &str, file: &str) -> Result<Choreography, ParseError> {
    let mut p = Parser::new(src, file)?;
    let c = p.choreography()?;
    p.expect_eof()?;
    Ok(c)
}

struct CallSite {
    procedure: String,
    arity: usize,
    span: SourceSpan,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    file: Arc<str>,
    calls: Vec<CallSite>,
}

impl Parser {
    fn new(src: &str, file: &str) -> Result<Self, ParseError> {
        let file: Arc<str> = Arc::from(file);
        let toks = tokenize(src, &file)?;
        Ok(Parser { toks, pos: 0, file, calls: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        let t = &self.toks[self.pos];
        SourceSpan { file: self.file.clone(), line: t.line, col: t.col }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        ParseError { span: self.span(), expected: expected.into(), found: self.peek().describe() }
    }

    fn error_at(&self, span: SourceSpan, expected: impl Into<String>, found: impl Into<String>) -> ParseError {
        ParseError { span, expected: expected.into(), found: found.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("`{kw}`")))
        }
    }

    fn is_name(s: &str) -> bool {
        !s.is_empty() && s != "0" && !KEYWORDS.contains(&s)
    }

    fn name(&mut self, what: &str) -> Result<Name, ParseError> {
        match self.peek() {
            Tok::Ident(s) if Self::is_name(s) => {
                let n = Name::new(s);
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(what)),
        }
    }

    // Identifier or quoted string; used for expressions and labels.
    fn text(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn name_list(&mut self) -> Result<Vec<Name>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                out.push(self.name("a process name")?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(out)
    }

    fn distinct_params(&self, params: &[Name], span: &SourceSpan) -> Result<(), ParseError> {
        let mut seen = BTreeSet::new();
        for p in params {
            if !seen.insert(p) {
                return Err(self.error_at(span.clone(), "distinct parameter names", format!("`{p}` twice")));
            }
        }
        Ok(())
    }

    // ---- networks ----

    fn network(&mut self) -> Result<Network, ParseError> {
        let mut raw = Vec::new();
        loop {
            raw.push(self.process()?);
            if *self.peek() == Tok::Bar {
                self.bump();
            } else {
                break;
            }
        }
        let mut names = BTreeSet::new();
        for (p, span, ..) in &raw {
            if !names.insert(p.name.clone()) {
                return Err(self.error_at(span.clone(), "a distinct process name", format!("duplicate process `{}`", p.name)));
            }
        }
        let mut processes = Vec::new();
        for (mut p, span, calls) in raw {
            check_calls(&calls, |x| p.procedures.get(x).map(|d| d.params.len()))?;
            for def in p.procedures.values() {
                for n in def.body.free_names() {
                    if !def.params.contains(&n) && !names.contains(&n) {
                        return Err(self.error_at(span.clone(), "a process name or parameter", format!("`{n}` in procedure `{}`", def.name)));
                    }
                }
            }
            for n in p.main.free_names() {
                if !names.contains(&n) {
                    return Err(self.error_at(span.clone(), "a process name", format!("`{n}` in main of `{}`", p.name)));
                }
            }
            // Parse-time α-renaming: binders within one tree become distinct.
            let mut defs: Vec<ProcedureDef> = p.procedures.values().cloned().collect();
            for def in &mut defs {
                let mut avoid = names.clone();
                avoid.extend(def.params.iter().cloned());
                def.body = def.body.distinct_binders(&avoid);
            }
            p.main = p.main.distinct_binders(&names);
            processes.push(Process::new(p.name, defs, p.main));
        }
        Network::new(processes).map_err(|e| self.error_at(self.span(), "a valid network", e.to_string()))
    }

    fn process(&mut self) -> Result<(Process, SourceSpan, Vec<CallSite>), ParseError> {
        let span = self.span();
        let name = self.name("a process name")?;
        self.expect(Tok::LBrace, "`{`")?;
        self.calls.clear();
        let mut defs: BTreeMap<String, ProcedureDef> = BTreeMap::new();
        let mut order = Vec::new();
        while self.at_keyword("def") {
            self.bump();
            let dspan = self.span();
            let pname = self.name("a procedure name")?;
            let params = self.name_list()?;
            self.distinct_params(&params, &dspan)?;
            self.expect(Tok::LBrace, "`{`")?;
            let body = self.behaviour()?;
            self.expect(Tok::RBrace, "`}`")?;
            if defs.contains_key(pname.as_str()) {
                return Err(self.error_at(dspan, "a distinct procedure name", format!("duplicate procedure `{pname}`")));
            }
            order.push(pname.to_string());
            defs.insert(pname.to_string(), ProcedureDef { name: pname.to_string(), params, body });
        }
        self.keyword("main").map_err(|_| self.error("`def` or `main`"))?;
        self.expect(Tok::LBrace, "`{`")?;
        let main = self.behaviour()?;
        self.expect(Tok::RBrace, "`}`")?;
        self.expect(Tok::RBrace, "`}`")?;
        let calls = std::mem::take(&mut self.calls);
        let defs = order.into_iter().map(|n| defs.remove(&n).expect("recorded")).collect();
        Ok((Process::new(name, defs, main), span, calls))
    }

    fn behaviour(&mut self) -> Result<Behaviour, ParseError> {
        let span = self.span();
        let head = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return Err(self.error("a behaviour")),
        };
        match head.as_str() {
            "0" | "stop" => {
                self.bump();
                Ok(Behaviour::Terminated)
            }
            "if" => {
                self.bump();
                let expr = Expr::new(self.text("an expression")?);
                self.keyword("then")?;
                let then = self.braced_behaviour()?;
                self.keyword("else")?;
                let otherwise = self.braced_behaviour()?;
                Ok(Behaviour::Conditional { expr, then: Box::new(then), otherwise: Box::new(otherwise) })
            }
            "spawn" => {
                self.bump();
                let binder = self.name("a process variable")?;
                self.keyword("with")?;
                let child = self.braced_behaviour()?;
                self.keyword("continue")?;
                let cont = self.braced_behaviour()?;
                Ok(Behaviour::Spawn { binder, child: Box::new(child), cont: Box::new(cont) })
            }
            _ => {
                let target = self.name("a behaviour")?;
                match self.peek().clone() {
                    Tok::Bang => {
                        self.bump();
                        let expr = Expr::new(self.text("an expression")?);
                        self.expect(Tok::Semi, "`;`")?;
                        let cont = self.behaviour()?;
                        Ok(Behaviour::Send { to: target, expr, cont: Box::new(cont) })
                    }
                    Tok::Question => {
                        self.bump();
                        if *self.peek() == Tok::Semi {
                            self.bump();
                            let cont = self.behaviour()?;
                            return Ok(Behaviour::Receive { from: target, cont: Box::new(cont) });
                        }
                        let binder = self.name("`;` or a process variable")?;
                        self.expect(Tok::Semi, "`;`")?;
                        let cont = self.behaviour()?;
                        Ok(Behaviour::ReceiveIntro { from: target, binder, cont: Box::new(cont) })
                    }
                    Tok::Plus => {
                        self.bump();
                        let label = self.text("a label")?;
                        self.expect(Tok::Semi, "`;`")?;
                        let cont = self.behaviour()?;
                        Ok(Behaviour::Select { to: target, label, cont: Box::new(cont) })
                    }
                    Tok::Amp => {
                        self.bump();
                        self.expect(Tok::LBrace, "`{`")?;
                        let mut branches: Vec<(String, Behaviour)> = Vec::new();
                        loop {
                            let lspan = self.span();
                            let label = self.text("a label")?;
                            if branches.iter().any(|(l, _)| *l == label) {
                                return Err(self.error_at(lspan, "a distinct label", format!("duplicate label `{label}`")));
                            }
                            self.expect(Tok::Colon, "`:`")?;
                            let b = self.behaviour()?;
                            branches.push((label, b));
                            if *self.peek() == Tok::Comma {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                        self.expect(Tok::RBrace, "`,` or `}`")?;
                        Ok(Behaviour::Offer { from: target, branches })
                    }
                    Tok::Intro => {
                        self.bump();
                        let right = self.name("a process name")?;
                        self.expect(Tok::Semi, "`;`")?;
                        let cont = self.behaviour()?;
                        Ok(Behaviour::Introduce { left: target, right, cont: Box::new(cont) })
                    }
                    Tok::LParen => {
                        let args = self.name_list()?;
                        self.calls.push(CallSite { procedure: target.to_string(), arity: args.len(), span });
                        Ok(Behaviour::Call { procedure: target.to_string(), args })
                    }
                    // A bare procedure name is a call without arguments.
                    Tok::RBrace | Tok::Comma => {
                        self.calls.push(CallSite { procedure: target.to_string(), arity: 0, span });
                        Ok(Behaviour::Call { procedure: target.to_string(), args: vec![] })
                    }
                    _ => Err(self.error("`!`, `?`, `+`, `&`, `<->` or `(`")),
                }
            }
        }
    }

    fn braced_behaviour(&mut self) -> Result<Behaviour, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let b = self.behaviour()?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(b)
    }

    // ---- choreographies ----

    fn choreography(&mut self) -> Result<Choreography, ParseError> {
        let mut procedures: Vec<ChorProcedureDef> = Vec::new();
        self.calls.clear();
        while self.at_keyword("def") {
            self.bump();
            let dspan = self.span();
            let name = self.name("a procedure name")?;
            let params = self.name_list()?;
            self.distinct_params(&params, &dspan)?;
            self.expect(Tok::LBrace, "`{`")?;
            let body = self.cbody()?;
            self.expect(Tok::RBrace, "`}`")?;
            if procedures.iter().any(|p| p.name == name.as_str()) {
                return Err(self.error_at(dspan, "a distinct procedure name", format!("duplicate procedure `{name}`")));
            }
            procedures.push(ChorProcedureDef { name: name.to_string(), params, body });
        }
        self.keyword("main").map_err(|_| self.error("`def` or `main`"))?;
        self.expect(Tok::LBrace, "`{`")?;
        let main = self.cbody()?;
        self.expect(Tok::RBrace, "`}`")?;
        let calls = std::mem::take(&mut self.calls);
        check_calls(&calls, |x| procedures.iter().find(|p| p.name == x).map(|p| p.params.len()))?;
        Ok(Choreography { procedures, main })
    }

    fn cbody(&mut self) -> Result<ChorBody, ParseError> {
        let span = self.span();
        let head = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return Err(self.error("a choreography")),
        };
        match head.as_str() {
            "0" | "stop" => {
                self.bump();
                Ok(ChorBody::Terminated)
            }
            "if" => {
                self.bump();
                let process = self.name("a process name")?;
                self.expect(Tok::Dot, "`.`")?;
                let expr = Expr::new(self.text("an expression")?);
                self.keyword("then")?;
                let then = self.braced_cbody()?;
                self.keyword("else")?;
                let otherwise = self.braced_cbody()?;
                Ok(ChorBody::Cond { process, expr, then: Box::new(then), otherwise: Box::new(otherwise) })
            }
            _ => {
                let first = self.name("a choreography")?;
                match self.peek().clone() {
                    Tok::Dot => {
                        self.bump();
                        if matches!(self.peek_at(1), Tok::Intro) {
                            let left = self.name("a process name")?;
                            self.bump();
                            let right = self.name("a process name")?;
                            self.expect(Tok::Semi, "`;`")?;
                            let cont = self.cbody()?;
                            return Ok(ChorBody::Intro { introducer: first, left, right, cont: Box::new(cont) });
                        }
                        let expr = Expr::new(self.text("an expression")?);
                        self.expect(Tok::Arrow, "`->` or `<->`")?;
                        let receiver = self.name("a process name")?;
                        self.expect(Tok::Semi, "`;`")?;
                        let cont = self.cbody()?;
                        Ok(ChorBody::Com { sender: first, expr, receiver, cont: Box::new(cont) })
                    }
                    Tok::Arrow => {
                        self.bump();
                        let receiver = self.name("a process name")?;
                        self.expect(Tok::LBracket, "`[`")?;
                        let label = self.text("a label")?;
                        self.expect(Tok::RBracket, "`]`")?;
                        self.expect(Tok::Semi, "`;`")?;
                        let cont = self.cbody()?;
                        Ok(ChorBody::Sel { sender: first, receiver, label, cont: Box::new(cont) })
                    }
                    Tok::Ident(s) if s == "spawns" => {
                        self.bump();
                        let child = self.name("a process name")?;
                        self.expect(Tok::Semi, "`;`")?;
                        let cont = self.cbody()?;
                        Ok(ChorBody::Spawn { parent: first, child, cont: Box::new(cont) })
                    }
                    Tok::LParen => {
                        let args = self.name_list()?;
                        self.calls.push(CallSite { procedure: first.to_string(), arity: args.len(), span });
                        Ok(ChorBody::Call { procedure: first.to_string(), args })
                    }
                    Tok::RBrace => {
                        self.calls.push(CallSite { procedure: first.to_string(), arity: 0, span });
                        Ok(ChorBody::Call { procedure: first.to_string(), args: vec![] })
                    }
                    _ => Err(self.error("`.`, `->`, `spawns` or `(`")),
                }
            }
        }
    }

    fn braced_cbody(&mut self) -> Result<ChorBody, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let b = self.cbody()?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(b)
    }
}

fn check_calls(calls: &[CallSite], arity_of: impl Fn(&str) -> Option<usize>) -> Result<(), ParseError> {
    for c in calls {
        match arity_of(&c.procedure) {
            None => {
                return Err(ParseError {
                    span: c.span.clone(),
                    expected: "a defined procedure".into(),
                    found: format!("`{}`", c.procedure),
                })
            }
            Some(k) if k != c.arity => {
                return Err(ParseError {
                    span: c.span.clone(),
                    expected: format!("{k} argument(s) to `{}`", c.procedure),
                    found: format!("{} argument(s)", c.arity),
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}
