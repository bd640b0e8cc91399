//! Core algorithms for the rescue craft allocation toolkit.
//!
//! Everything in this crate is pure computation over immutable inputs:
//! the domain model and its consistency checks, tidal availability
//! derivation, great-circle geometry and zone clustering, the exact
//! branch-and-bound solver with its three model variants, full-resolution
//! evaluation, and the X3C reduction machinery used as a test oracle.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI
//! live in the companion `rcap` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod complexity;
pub mod evaluate;
pub mod geo;
pub mod model;
pub mod solver;
pub mod tides;

mod numeric;
pub mod rng;

pub use numeric::KahanSum;
