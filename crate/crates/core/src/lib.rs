//! Synthesis and verification of mediating connectors.
//!
//! Two components describe their interaction protocols as labeled transition
//! systems. Given a declared correspondence between their message
//! vocabularies, the pipeline decomposes each protocol into traces, aligns
//! every left trace with every right trace while classifying the behavioral
//! mismatches it must bridge, builds a mediator trace per compatible pair,
//! merges those into one mediator machine, and model-checks the closed
//! system `left || mediator || right`.

pub mod lts;
pub mod decompose;
pub mod semantics;
pub mod mismatch;
pub mod synthesis;
pub mod verify;
pub mod fixtures;
