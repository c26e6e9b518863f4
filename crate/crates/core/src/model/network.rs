use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::behaviour::Behaviour;
use super::name::Name;
use super::ModelError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProcedureDef {
    pub name: String,
    pub params: Vec<Name>,
    pub body: Behaviour,
}

/// Procedure table shared between a process and everything it spawns.
pub type Procedures = Arc<BTreeMap<String, ProcedureDef>>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Process {
    pub name: Name,
    pub procedures: Procedures,
    pub main: Behaviour,
    pub marked: bool,
}

impl Process {
    pub fn new(name: Name, procedures: Vec<ProcedureDef>, main: Behaviour) -> Self {
        let procedures = procedures.into_iter().map(|p| (p.name.clone(), p)).collect();
        Process { name, procedures: Arc::new(procedures), main, marked: false }
    }

    pub fn is_terminated(&self) -> bool {
        self.main.is_terminated()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Network {
    processes: BTreeMap<Name, Process>,
}

impl Network {
    pub fn new(processes: impl IntoIterator<Item = Process>) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for p in processes {
            if map.contains_key(&p.name) {
                return Err(ModelError::DuplicateProcess(p.name));
            }
            map.insert(p.name.clone(), p);
        }
        if map.is_empty() {
            return Err(ModelError::EmptyNetwork);
        }
        Ok(Network { processes: map })
    }

    pub fn processes(&self) -> impl Iterator<Item = &Process> {
        self.processes.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.processes.keys()
    }

    pub fn get(&self, n: &Name) -> Option<&Process> {
        self.processes.get(n)
    }

    pub fn get_mut(&mut self, n: &Name) -> Option<&mut Process> {
        self.processes.get_mut(n)
    }

    pub fn contains(&self, n: &Name) -> bool {
        self.processes.contains_key(n)
    }

    pub(crate) fn insert(&mut self, p: Process) {
        self.processes.insert(p.name.clone(), p);
    }

    pub fn len(&self) -> usize {
        self.processes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }

    /// Names of processes that can still act.
    pub fn live_names(&self) -> BTreeSet<Name> {
        self.processes.values().filter(|p| !p.is_terminated()).map(|p| p.name.clone()).collect()
    }

    pub fn live_count(&self) -> usize {
        self.processes.values().filter(|p| !p.is_terminated()).count()
    }

    pub fn is_terminated(&self) -> bool {
        self.processes.values().all(Process::is_terminated)
    }

    pub fn all_live_marked(&self) -> bool {
        self.processes.values().filter(|p| !p.is_terminated()).all(|p| p.marked)
    }

    pub fn markings(&self) -> BTreeMap<Name, bool> {
        self.processes.values().map(|p| (p.name.clone(), p.marked)).collect()
    }

    pub fn clear_markings(&mut self) {
        for p in self.processes.values_mut() {
            p.marked = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_process_names_are_rejected() {
        let p = Process::new("p".into(), vec![], Behaviour::Terminated);
        assert_eq!(Network::new([p.clone(), p]), Err(ModelError::DuplicateProcess("p".into())));
    }

    #[test]
    fn empty_network_is_rejected() {
        assert_eq!(Network::new([]), Err(ModelError::EmptyNetwork));
    }
}
