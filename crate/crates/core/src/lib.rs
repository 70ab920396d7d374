//! Numerics for the sigma-form Painlevé III′ transcendent v(z; s), the
//! characteristic function built from it, joint moments F(s, h) of the
//! circular unitary ensemble, finite-N Hankel determinants and the
//! Hua-Pickrell density.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod acceptance;
pub mod charfn;
pub mod density;
pub mod error;
pub mod finite_n;
pub mod jet;
pub mod moments;
pub mod painleve;
pub mod quad;
pub mod series;
pub mod specfun;

pub use error::{Error, Result};
