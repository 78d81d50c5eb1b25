//! Shortcut-to-equilibrium control of a driven two-level system in contact
//! with an Ohmic boson bath.
//!
//! The pipeline runs [`synthesis`] (protocol reverse engineering) →
//! [`dynamics`] (non-adiabatic master equation) → [`thermo`] (work, heat,
//! entropies) and is driven end to end by [`experiments`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod propagation;
pub mod protocol;
pub mod rates;
pub mod roots;
pub mod su2;
pub mod synthesis;
pub mod thermo;

pub use error::{Result, SteError};
