//! Shadow process tomography with generalized measurements.
//!
//! Channels are mapped to Choi states, measured with product POVMs, and
//! expectation values `Tr[E(rho) X]` are recovered from least-squares
//! classical shadows with median-of-means aggregation. The sample cost is
//! governed by the squared shadow norm, which [`anneal`] minimizes over
//! qubit POVMs in Bloch form.

pub mod anneal;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod operator;
pub mod norm;
pub mod povm;

pub use error::{Error, Result};
