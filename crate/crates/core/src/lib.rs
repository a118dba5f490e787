//! Exact Sherali–Adams relaxations for valued constraint satisfaction
//! problems, together with the algebraic tests (fractional polymorphisms,
//! support clones, cores, bounded width) that certify when the relaxation is
//! exact.

pub mod algebra;
pub mod error;
pub mod format;
pub mod gen;
pub mod library;
pub mod lp;
pub mod minimality;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod relaxation;
pub mod rational;
pub mod tuples;

pub use error::{Error, Result};
pub use model::{Assignment, Constraint, Domain, Instance, Language, WeightedRelation};
pub use rational::ExtRational;
