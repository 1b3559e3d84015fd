//! Exact computation with finite sites, fibred sites and internal locales.
//!
//! Everything in this crate works on explicit finite data: categories given by
//! composition tables, topologies given by their covering sieves (or by a
//! covering predicate), indexed categories given fibre by fibre. Every check
//! is exhaustive within configurable size guards and produces a
//! [`VerificationReport`] whose failures carry concrete witnesses.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line driver and report serialization live in the `relsite` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bits;
pub mod cat;
pub mod corpus;
pub mod error;
pub mod existential;
pub mod factorization;
pub mod fibred;
pub mod fixtures;
pub mod frame;
pub mod locale;
pub mod presheaf;
pub mod report;
pub mod topology;

pub use bits::Bits;
pub use cat::{ArrowId, CategoryBuilder, FinCategory, FinFunctor, LimitCone, ObjId};
pub use error::{Error, Result};
pub use report::{Check, Guards, Status, VerificationReport, Witness};
pub use topology::{GrothendieckTopology, Sieve};
