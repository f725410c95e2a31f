//! Exact integer and polynomial arithmetic.

pub mod bipoly;
pub mod fp;
pub mod integer;
pub mod resultant;
pub mod unipoly;

pub use bipoly::BiPoly;
pub use fp::{factor_mod_p, FpPoly, ModPolyFactorization};
pub use integer::{factor_integer, squarefree_integer, FactorBudget, SquareWitness, SquarefreeVerdict};
pub use resultant::{discriminant_in_x, discriminant_z, gcd_z, resultant, resultant_z, squarefree_part};
pub use unipoly::{UniPoly, Var};
