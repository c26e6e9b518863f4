use std::fmt;
use std::str::FromStr;

use crate::model::{Network, TransitionLabel};
use crate::semantics::NetworkState;

/// Which enabled transition the builder fires at each node.
///
/// Every policy first restricts to transitions that involve a live process
/// not yet marked, so that no process is starved between marking resets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Least involved process name first.
    #[default]
    LexMin,
    /// Greatest involved process name first.
    LexMax,
    /// Interactions before conditionals, then least name.
    InteractionsFirst,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::LexMin, Policy::LexMax, Policy::InteractionsFirst];

    pub fn name(self) -> &'static str {
        match self {
            Policy::LexMin => "lex-min",
            Policy::LexMax => "lex-max",
            Policy::InteractionsFirst => "interactions-first",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown policy `{0}` (expected lex-min, lex-max or interactions-first)")]
pub struct UnknownPolicy(pub String);

impl FromStr for Policy {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| UnknownPolicy(s.to_string()))
    }
}

/// One scheduling decision: a single interaction, or both arms of a conditional.
pub type Choice = Vec<(TransitionLabel, NetworkState)>;

/// Groups transitions into choices, keeping their order.
pub fn choices(transitions: Vec<(TransitionLabel, NetworkState)>) -> Vec<Choice> {
    let mut out: Vec<Choice> = Vec::new();
    for (l, s) in transitions {
        if let TransitionLabel::Else { process, .. } = &l {
            if let Some(last) = out.last_mut() {
                if matches!(&last[0].0, TransitionLabel::Then { process: p, .. } if p == process) {
                    last.push((l, s));
                    continue;
                }
            }
        }
        out.push(vec![(l, s)]);
    }
    out
}

fn involves_unmarked(c: &Choice, n: &Network) -> bool {
    c[0].0.names().into_iter().any(|p| n.get(p).is_some_and(|p| !p.marked && !p.is_terminated()))
}

/// Index of the choice the policy fires.
pub fn pick(policy: Policy, options: &[Choice], current: &Network) -> usize {
    let fair: Vec<usize> = (0..options.len()).filter(|&i| involves_unmarked(&options[i], current)).collect();
    let pool: Vec<usize> = if fair.is_empty() { (0..options.len()).collect() } else { fair };
    match policy {
        Policy::LexMin => pool[0],
        Policy::LexMax => {
            let key = |i: usize| options[i][0].0.names().into_iter().max().cloned();
            // Ties keep the earliest, so the result stays deterministic.
            let best = pool.iter().map(|&i| key(i)).max().expect("non-empty pool");
            *pool.iter().find(|&&i| key(i) == best).expect("present")
        }
        Policy::InteractionsFirst => pool.iter().copied().find(|&i| options[i].len() == 1).unwrap_or(pool[0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_parse_by_name() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert!("random".parse::<Policy>().is_err());
    }
}
