//! Numerical laboratory for elliptic quantum R-matrices.
//!
//! The crate evaluates theta functions, the Kronecker function and its
//! relatives ([`special_fn`]), builds the Baxter-Belavin, Felder, ACF and
//! Burban-Henrich R-matrices ([`rmatrices`]) together with the IRF-Vertex
//! intertwiner ([`intertwiner`]), and verifies their identities at random
//! non-singular points ([`identity_suite`]).
//!
//! Tensor legs are numbered from 1 and leg 1 is the slowest index, so
//! `embed(A, [1], 2) = A ⊗ 1`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod identity_suite;
pub mod intertwiner;
pub mod rmatrices;
pub mod special_fn;
pub mod tensor_alg;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
