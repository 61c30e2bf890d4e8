//! Symbolic engine for sign systems and the semiotic model of the design
//! creative process.
//!
//! A [`SignSystem`] is an order-sorted signature with leveled sorts,
//! prioritized constructors, relations tagged internal or environmental,
//! and ranked axioms. On top of it the crate provides
//!
//! * bounded entailment ([`closure`], [`entails`], [`epsilon`]),
//! * semiotic morphisms with their preservation properties and exhaustive
//!   search ([`morphism`]),
//! * stochastic runs of Basic Semiotic Components with replay ([`dynamics`]),
//! * the analogical blending pipeline ([`blending`]),
//! * the emergence postulate and its classifications ([`emergence`]),
//! * a small declarative language for all of the above ([`dsl`]) and the
//!   `semiosa` command line ([`cli`]).
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod blending;
pub mod cli;
pub mod dsl;
pub mod dynamics;
pub mod emergence;
pub mod entail;
pub mod morphism;
pub mod rng;
pub mod system;

pub use entail::{closure, entails, epsilon, GroundModel};
pub use morphism::{check_properties, compose, find_morphisms, verify, Property, SemioticMorphism};
pub use system::{Atom, Axiom, AxiomForm, RelKind, SignSystem, Term};

/// Version tag carried by every JSON document the crate emits.
pub const SCHEMA: &str = "semiosa/1";
