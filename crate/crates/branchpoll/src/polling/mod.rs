//! Branching-type polling systems: the polling-to-branching correspondence
//! ([`map`]) and the physical discrete-event simulator ([`sim`]).

pub mod map;
pub mod sim;
