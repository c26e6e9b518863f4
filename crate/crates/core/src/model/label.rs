use std::collections::BTreeSet;
use std::fmt;

use super::name::{Expr, Name};
use super::renaming::ProcessRenaming;

/// A transition label. All names are actual processes, never local variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionLabel {
    Com { sender: Name, expr: Expr, receiver: Name },
    Sel { sender: Name, receiver: Name, label: String },
    Then { process: Name, expr: Expr },
    Else { process: Name, expr: Expr },
    Intro { introducer: Name, left: Name, right: Name },
    Spawned { parent: Name, child: Name },
}

impl TransitionLabel {
    /// The processes involved in the label, in order of appearance.
    pub fn names(&self) -> Vec<&Name> {
        match self {
            TransitionLabel::Com { sender, receiver, .. } | TransitionLabel::Sel { sender, receiver, .. } => {
                vec![sender, receiver]
            }
            TransitionLabel::Then { process, .. } | TransitionLabel::Else { process, .. } => vec![process],
            TransitionLabel::Intro { introducer, left, right } => vec![introducer, left, right],
            TransitionLabel::Spawned { parent, child } => vec![parent, child],
        }
    }

    pub fn is_branch(&self) -> bool {
        matches!(self, TransitionLabel::Then { .. } | TransitionLabel::Else { .. })
    }

    pub fn rename(&self, m: &ProcessRenaming) -> TransitionLabel {
        self.map_names(|n| m.apply(n))
    }

    pub fn map_names(&self, mut f: impl FnMut(&Name) -> Name) -> TransitionLabel {
        match self {
            TransitionLabel::Com { sender, expr, receiver } => {
                TransitionLabel::Com { sender: f(sender), expr: expr.clone(), receiver: f(receiver) }
            }
            TransitionLabel::Sel { sender, receiver, label } => {
                TransitionLabel::Sel { sender: f(sender), receiver: f(receiver), label: label.clone() }
            }
            TransitionLabel::Then { process, expr } => TransitionLabel::Then { process: f(process), expr: expr.clone() },
            TransitionLabel::Else { process, expr } => TransitionLabel::Else { process: f(process), expr: expr.clone() },
            TransitionLabel::Intro { introducer, left, right } => {
                TransitionLabel::Intro { introducer: f(introducer), left: f(left), right: f(right) }
            }
            TransitionLabel::Spawned { parent, child } => TransitionLabel::Spawned { parent: f(parent), child: f(child) },
        }
    }
}

/// The set of processes a label involves.
pub fn label_process_names(l: &TransitionLabel) -> BTreeSet<Name> {
    l.names().into_iter().cloned().collect()
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Com { sender, expr, receiver } => write!(f, "{sender}.{expr} -> {receiver}"),
            TransitionLabel::Sel { sender, receiver, label } => write!(f, "{sender} -> {receiver}[{label}]"),
            TransitionLabel::Then { process, expr } => write!(f, "{process}.{expr} then"),
            TransitionLabel::Else { process, expr } => write!(f, "{process}.{expr} else"),
            TransitionLabel::Intro { introducer, left, right } => write!(f, "{introducer}.{left} <-> {right}"),
            TransitionLabel::Spawned { parent, child } => write!(f, "{parent} spawns {child}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> BTreeSet<Name> {
        names.iter().map(|n| Name::from(*n)).collect()
    }

    #[test]
    fn names_of_each_label_kind() {
        let com = TransitionLabel::Com { sender: "customer".into(), expr: "item".into(), receiver: "store".into() };
        assert_eq!(label_process_names(&com), set(&["customer", "store"]));
        let intro = TransitionLabel::Intro { introducer: "entry".into(), left: "entry/worker0".into(), right: "client".into() };
        assert_eq!(label_process_names(&intro), set(&["entry", "entry/worker0", "client"]));
        let then = TransitionLabel::Then { process: "store".into(), expr: "accepted".into() };
        assert_eq!(label_process_names(&then), set(&["store"]));
    }

    #[test]
    fn display_uses_choreography_syntax() {
        let l = TransitionLabel::Intro { introducer: "entry".into(), left: "entry/worker0".into(), right: "client".into() };
        assert_eq!(l.to_string(), "entry.entry/worker0 <-> client");
        let s = TransitionLabel::Spawned { parent: "entry".into(), child: "entry/worker0".into() };
        assert_eq!(s.to_string(), "entry spawns entry/worker0");
    }
}
