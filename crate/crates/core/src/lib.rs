//! Search and certification of Galois specializations with prescribed
//! reduced-discriminant residues.

pub mod error;
pub mod binforms;
pub mod exactalg;
pub mod modcurves;
pub mod specialize;
pub mod pipeline;

pub use error::{Error, Result};
