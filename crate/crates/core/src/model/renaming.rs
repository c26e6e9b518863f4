use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::name::Name;

/// A map between process names. Names outside the domain map to themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProcessRenaming {
    map: BTreeMap<Name, Name>,
}

impl ProcessRenaming {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_map(map: BTreeMap<Name, Name>) -> Self {
        ProcessRenaming { map }
    }

    pub fn from_pairs<A: Into<Name>, B: Into<Name>>(pairs: impl IntoIterator<Item = (A, B)>) -> Self {
        ProcessRenaming { map: pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect() }
    }

    pub fn as_map(&self) -> &BTreeMap<Name, Name> {
        &self.map
    }

    pub fn insert(&mut self, from: Name, to: Name) {
        self.map.insert(from, to);
    }

    pub fn get(&self, n: &Name) -> Option<&Name> {
        self.map.get(n)
    }

    /// Image of `n`; names outside the domain are fixed.
    pub fn apply(&self, n: &Name) -> Name {
        self.map.get(n).cloned().unwrap_or_else(|| n.clone())
    }

    pub fn domain(&self) -> impl Iterator<Item = &Name> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Name)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    pub fn is_injective(&self) -> bool {
        let image: BTreeSet<&Name> = self.map.values().collect();
        image.len() == self.map.len()
    }

    /// Entries that actually move a name.
    pub fn non_identity(&self) -> ProcessRenaming {
        ProcessRenaming {
            map: self.map.iter().filter(|(a, b)| a != b).map(|(a, b)| (a.clone(), b.clone())).collect(),
        }
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &ProcessRenaming) -> ProcessRenaming {
        let mut map: BTreeMap<Name, Name> = self.map.iter().map(|(a, b)| (a.clone(), other.apply(b))).collect();
        for (a, b) in &other.map {
            map.entry(a.clone()).or_insert_with(|| b.clone());
        }
        ProcessRenaming { map }
    }

    /// Inverse of an injective renaming.
    pub fn inverse(&self) -> Option<ProcessRenaming> {
        if !self.is_injective() {
            return None;
        }
        Some(ProcessRenaming { map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect() })
    }

    /// All names mapped onto `target`.
    pub fn preimage(&self, target: &Name) -> Vec<Name> {
        self.map.iter().filter(|(_, b)| *b == target).map(|(a, _)| a.clone()).collect()
    }
}

impl fmt::Display for ProcessRenaming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a} -> {b}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_applies_left_first() {
        let m1 = ProcessRenaming::from_pairs([("a", "b")]);
        let m2 = ProcessRenaming::from_pairs([("b", "c")]);
        let m = m1.then(&m2);
        assert_eq!(m.apply(&Name::from("a")), Name::from("c"));
        assert_eq!(m.apply(&Name::from("b")), Name::from("c"));
    }

    #[test]
    fn non_injective_has_no_inverse() {
        let m = ProcessRenaming::from_pairs([("p", "p"), ("p/q0", "p")]);
        assert!(!m.is_injective());
        assert!(m.inverse().is_none());
        assert_eq!(m.preimage(&Name::from("p")).len(), 2);
    }

    #[test]
    fn display_lists_pairs_in_order() {
        let m = ProcessRenaming::from_pairs([("entry/worker0", "entry"), ("client", "client")]);
        assert_eq!(m.to_string(), "{client -> client, entry/worker0 -> entry}");
        assert_eq!(m.non_identity().to_string(), "{entry/worker0 -> entry}");
    }
}
