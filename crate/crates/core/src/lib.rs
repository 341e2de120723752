//! Hecke-algebra representations, R- and K-matrices, open spin chains and boundary
//! non-local charges for U_q(gl_n), built as dense complex matrices and checked numerically.

pub mod boundary_charges;
pub mod cli;
pub mod error;
pub mod hecke_algebra;
pub mod params;
pub mod quantum_algebra;
pub mod reflection_k;
pub mod report;
pub mod sampler;
pub mod spin_chain;
pub mod tensor_core;
pub mod yang_baxter;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use tensor_core::{Operator, C64};
pub use yang_baxter::Gauge;
