//! Higher-order kinematic analysis of closed-loop linkages.

pub mod bundled;
pub mod classify;
pub mod cli;
pub mod cone;
pub mod hoc;
pub mod linkage;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod screw;
pub mod tracer;
pub mod verify;
