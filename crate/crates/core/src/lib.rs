//! Exact construction and verification of the Buekenhout-Tits unital in
//! `PG(2, q^2)`, `q = 2^(2e+1)`.
//!
//! The crate is organized bottom-up: [`field`] arithmetic, the projective
//! [`plane`], the [`unital`] itself, the André/Bruck-Bose model in [`abb`],
//! semilinear [`collineation`]s with the exhaustive [`stabilizer`] search, and
//! the [`feet`] analysis.

pub mod abb;
pub mod collineation;
pub mod error;
pub mod feet;
pub mod field;
pub mod plane;
pub mod stabilizer;
pub mod unital;

pub use error::{Error, Result};
pub use field::{Felt, FieldCtx};
pub use plane::{ProjLine, ProjPoint};
pub use unital::{build_bt_unital, UnitalSet};
