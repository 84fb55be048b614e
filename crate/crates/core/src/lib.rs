//! Exact simulation of a block-wrapped weighted shift on finitely supported
//! sequences with dyadic coefficients.
//!
//! The operator [`OperatorT`] is chaotic and reiteratively hypercyclic, yet
//! neither U-frequently hypercyclic nor distributionally chaotic. None of
//! that is decidable on a computer, but every finite inequality that drives
//! those facts is, and [`verify`] checks them in exact arithmetic.
//!
//! ```
//! use pchaos::{OperatorT, Schedule, SparseVec};
//!
//! let op = OperatorT::new(Schedule::small2(5).unwrap()).unwrap();
//! let v = op.apply_power_u64(&SparseVec::basis(1454), 4018).unwrap();
//! assert_eq!(v.to_string(), "4*e_0 - 2^-78*e_1376");
//! ```

pub mod density;
pub mod dyadic;
pub mod error;
pub mod operator;
pub mod report;
pub mod schedule;
pub mod seqspace;
pub mod suite;
pub mod verify;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use operator::OperatorT;
pub use report::{Check, Claim, Relation, WitnessReport};
pub use schedule::{Preset, Schedule};
pub use seqspace::{NormKind, SparseVec};
