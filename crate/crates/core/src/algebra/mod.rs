//! Operations, clones and fractional polymorphisms.

pub mod bwc;
pub mod clone;
pub mod core;
pub mod fractional;
pub mod gadget;
pub mod operation;
pub mod support;
