//! Linkage documents shipped with the crate.

use crate::linkage::{parse_linkage, Linkage};

pub const SIX_BAR: &str = include_str!("../data/six_bar.json");
pub const SEVEN_R: &str = include_str!("../data/seven_r.json");
pub const FOUR_BAR: &str = include_str!("../data/four_bar.json");
pub const TWO_JOINT: &str = include_str!("../data/two_joint.json");

pub fn six_bar() -> Linkage {
    parse_linkage(SIX_BAR).expect("bundled document is valid")
}

pub fn seven_r() -> Linkage {
    parse_linkage(SEVEN_R).expect("bundled document is valid")
}

pub fn four_bar() -> Linkage {
    parse_linkage(FOUR_BAR).expect("bundled document is valid")
}

pub fn two_joint() -> Linkage {
    parse_linkage(TWO_JOINT).expect("bundled document is valid")
}
