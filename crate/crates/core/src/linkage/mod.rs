//! Linkage topology, loop bookkeeping and closure kinematics.

mod document;
mod kinematics;
mod model;

pub use document::{parse_linkage, CycleDocument, CycleEntryDocument, JointDocument, LinkageDocument};
pub use kinematics::{ExactCycleScrews, LoopModel};
pub use model::{Coordinate, CycleEntry, CycleSpec, FundamentalCycle, Joint, JointKind, Linkage, LinkageError};
