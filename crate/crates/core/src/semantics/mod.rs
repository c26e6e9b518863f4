//! Abstract transition relations of networks and choreographies.

pub mod chor;
pub mod network;

pub use chor::{enabled_chor_transitions, ChorState};
pub use network::{enabled_network_transitions, fresh_child_name, unfold_head, NetworkState, SemanticsError};
