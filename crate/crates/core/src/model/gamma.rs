use std::collections::BTreeMap;

use super::name::Name;

/// Partial map from (owner, local variable) to the actual process meant.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VariableMapping {
    entries: BTreeMap<(Name, Name), Name>,
}

impl VariableMapping {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every process knows every other by its own name.
    pub fn complete<'a>(names: impl IntoIterator<Item = &'a Name> + Clone) -> Self {
        let mut g = VariableMapping::new();
        for p in names.clone() {
            for q in names.clone() {
                g.set(p.clone(), q.clone(), q.clone());
            }
        }
        g
    }

    /// Self-entries plus both directions of each listed connection.
    pub fn from_connections<'a>(
        names: impl IntoIterator<Item = &'a Name>,
        connections: impl IntoIterator<Item = (Name, Name)>,
    ) -> Self {
        let mut g = VariableMapping::new();
        for p in names {
            g.set(p.clone(), p.clone(), p.clone());
        }
        for (p, q) in connections {
            g.set(p.clone(), q.clone(), q.clone());
            g.set(q, p.clone(), p);
        }
        g
    }

    pub fn resolve(&self, owner: &Name, var: &Name) -> Option<&Name> {
        self.entries.get(&(owner.clone(), var.clone()))
    }

    pub fn set(&mut self, owner: Name, var: Name, target: Name) {
        self.entries.insert((owner, var), target);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Name, &Name, &Name)> {
        self.entries.iter().map(|((o, v), t)| (o, v, t))
    }

    /// The variables `owner` can currently resolve.
    pub fn row(&self, owner: &Name) -> BTreeMap<Name, Name> {
        self.entries
            .range((owner.clone(), Name::new(""))..)
            .take_while(|((o, _), _)| o == owner)
            .map(|((_, v), t)| (v.clone(), t.clone()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_mapping_is_identity_per_row() {
        let names = [Name::from("a"), Name::from("b")];
        let g = VariableMapping::complete(names.iter());
        assert_eq!(g.len(), 4);
        assert_eq!(g.resolve(&names[0], &names[1]), Some(&names[1]));
    }

    #[test]
    fn row_only_returns_owner_entries() {
        let names = [Name::from("a"), Name::from("ab"), Name::from("b")];
        let g = VariableMapping::complete(names.iter());
        let row = g.row(&names[0]);
        assert_eq!(row.len(), 3);
        assert!(row.values().all(|t| names.contains(t)));
    }

    #[test]
    fn connections_are_symmetric() {
        let names = [Name::from("p"), Name::from("q"), Name::from("r")];
        let g = VariableMapping::from_connections(names.iter(), [(names[0].clone(), names[1].clone())]);
        assert_eq!(g.resolve(&names[1], &names[0]), Some(&names[0]));
        assert_eq!(g.resolve(&names[0], &names[2]), None);
        assert_eq!(g.resolve(&names[2], &names[2]), Some(&names[2]));
    }
}
