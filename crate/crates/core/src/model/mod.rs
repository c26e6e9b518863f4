//! Abstract syntax for networks and choreographies, labels and renamings.

pub mod behaviour;
pub mod chor;
pub mod equivalence;
pub mod gamma;
pub mod label;
pub mod name;
pub mod network;
pub mod renaming;

pub use behaviour::Behaviour;
pub use chor::{ChorBody, ChorProcedureDef, Choreography};
pub use equivalence::{alpha_equivalent, find_equivalence_mapping};
pub use gamma::VariableMapping;
pub use label::{label_process_names, TransitionLabel};
pub use name::{Expr, Name};
pub use network::{Network, ProcedureDef, Process, Procedures};
pub use renaming::ProcessRenaming;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("fresh name `{0}` already occurs in the behaviour")]
    FreshNameClash(Name),
    #[error("duplicate process `{0}`")]
    DuplicateProcess(Name),
    #[error("a network needs at least one process")]
    EmptyNetwork,
}
