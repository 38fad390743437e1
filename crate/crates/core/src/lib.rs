//! Counterexample-guided synthesis of recursive list programs from sketches.
//!
//! Candidates are completions of user sketches whose holes are filled with concepts drawn
//! from a typed regular tree grammar. A testing-based counterexample generator checks
//! admissibility (input contracts and termination measures) and the properties; every
//! counterexample is generalized into a blocking clause over the holes that the failing
//! execution depended on, and those clauses prune the lazily enumerated candidate space.
//! Properties with existential quantifiers are reduced to universal ones by synthesizing
//! witness functions alongside the target functions.

pub mod lang;
pub mod grammar;
pub mod sexpr;
pub mod sketch;
pub mod spec;
pub mod enumerate;
pub mod constrain;
pub mod cgen;
pub mod skolem;
pub mod driver;
pub mod bench;
