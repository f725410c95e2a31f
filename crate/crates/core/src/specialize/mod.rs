//! From a family f(X; T) to branch data, bad primes, specializations and
//! their local and global invariants.

pub mod certificate;
pub mod discriminant;
pub mod family;
pub mod local;
pub mod maximal;

pub use certificate::{group_certificate, GroupCertificate, Witness};
pub use discriminant::{
    polynomial_reduced_discriminant, reduced_discriminant, DiscMode, PrimeSource, PrimeStatus, ReducedDisc,
};
pub use family::{bad_primes, branch_form, specialize_at, BadPrimes, BranchData, CertificateTarget, Family, InfinityBranch, S0Reason};
pub use local::{frobenius_cycle_type, ramification_oracle, tame_disc_exponent, FrobeniusType, Ramification};
