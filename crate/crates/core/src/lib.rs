//! Illumination of convex polytopes on the sphere `S^d` and in `E^d`.
//!
//! Spherical polytopes contained in an open hemisphere admit `d + 1` lights on
//! a greatsphere that illuminate every boundary point. The crate builds such
//! witnesses, verifies them with margins, transfers them to Euclidean
//! polytopes by gnomonic projection, and realizes 3-polytopes with an ideal
//! midsphere-style circle pattern so that four directions suffice.

pub mod bridge;
mod cone;
pub mod cover;
pub mod error;
pub mod euclidean;
pub mod fixtures;
pub mod illumination;
pub mod io;
pub mod koebe;
pub mod lattice;
mod linalg;
pub mod planar;
pub mod polytope;
pub mod sphere;
pub mod witness;

pub use bridge::{combinatorial_illuminator, DirectionSet, EuclideanCertificate};
pub use error::{Error, Result};
pub use euclidean::EuclideanPolytope;
pub use illumination::{verify_witness, IlluminationCertificate, IlluminationWitness, VerifyOptions};
pub use lattice::FaceLattice;
pub use polytope::{Face, SphericalPolytope};
pub use sphere::{Tolerances, UnitPoint};
pub use witness::{construct_witness, ConstructionTrace, WitnessConfig};
