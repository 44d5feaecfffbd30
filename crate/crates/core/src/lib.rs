//! Exotic sequence-space norms and numerical certificates for the geometry
//! of their Szlenk derivations.
//!
//! * [`tsirelson`], [`schlumprecht`]: implicitly defined norms, evaluated by
//!   an interval dynamic program and checked by an exhaustive oracle.
//! * [`baernstein`]: the Baernstein norm, with an exact branch and bound and
//!   an uncapped exact window program.
//! * [`orlicz`]: the Orlicz norm for `At⁴ + Bt²`, its Luxemburg oracle and
//!   the constrained minimization behind the comparison functions `U`, `V`.
//! * [`szlenk`]: membership certificates, radial scaling and radius curves.
//! * [`report`]: the verification suites and curve emitters behind the CLI.

pub mod baernstein;
pub mod error;
mod implicit;
pub mod numeric;
pub mod orlicz;
pub mod report;
pub mod sampling;
pub mod schlumprecht;
pub mod szlenk;
pub mod tsirelson;
pub mod vecspace;

pub use error::{Error, Result};
pub use implicit::{family_weight, NormResult, Witness};
pub use szlenk::{DerivationCertificate, PerturbationPair, RadiusCurve, Space};
pub use vecspace::{BlockFamily, FamilyKind, IndexSet, Rational, SparseVec};
