//! Universally decodable matrices over finite fields.
//!
//! * [`gf`]: arithmetic in GF(p^s).
//! * [`linalg`]: dense matrices, rank and linear solves over GF(q).
//! * [`hasse`]: univariate polynomials and Hasse derivatives.
//! * [`udm`]: the Pascal-matrix construction, verification and
//!   UDM-preserving transformations.
//! * [`codec`]: encoding over parallel prefix-erasure channels.
//! * [`format`] and [`cli`]: text formats and the `udm` command.

pub mod cli;
pub mod codec;
pub mod format;
pub mod gf;
pub mod hasse;
pub mod linalg;
pub mod udm;

pub use gf::{Elem, Field};
pub use linalg::{FieldMatrix, FieldVector};
pub use udm::{construct, verify, ErasureTuple, UdmFamily};
