//! Stream processing with monoid homomorphisms.
//!
//! Streams are elements of monoids, stream functions are maps with an
//! incremental update, and processors are homomorphisms into a state monoid.
//! The crate provides the algebra, processor combinators, a verified
//! rewriting engine for pipelines, worked examples and compact
//! representations of processor states.

pub mod algebra;
pub mod error;
pub mod examples;
pub mod sample;
pub mod pipeline;
pub mod processor;
pub mod repr;
pub mod state;
pub mod streamfn;
pub mod value;

pub use error::{Error, Result};
pub use value::{Segment, Shape, Value};
