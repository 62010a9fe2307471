//! Exact computations with piecewise-linear homeomorphisms of the real line.
//!
//! The crate builds and verifies distortion certificates: given a finite
//! sequence of PL homeomorphisms it produces a 10-element generating set and
//! explicit words of length at most `14n + 12` evaluating to the inputs,
//! together with the supporting machinery (exact factorization through
//! anchored interval unions, infinite products of conjugates with locally
//! finite supports, displacement systems with disjoint interval orbits, and
//! non-generation certificates in powers of finite groups). All arithmetic
//! is exact rational; there is no floating point anywhere.

pub mod counterexamples;
pub mod distortion;
pub mod factorization;
pub mod interval;
pub mod lazy;
pub mod orbits;
pub mod plmap;
pub mod rational;
pub mod report;

pub use interval::{IntervalUnion, Span, Window};
pub use plmap::{PLMap, PlError};
pub use rational::Rational;
