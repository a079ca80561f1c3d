//! Newton polytope data: compact faces, quasihomogeneity weights, face
//! polynomials, the weighted scaling action and the exponent lattice.

mod diagram;
mod lattice;
mod tangent;
mod weights;

pub use diagram::{check_singular_germ, face_polynomial, newton_diagram, NewtonDiagram, NewtonFace};
pub use lattice::{exponent_lattice, semigroup_lattice, ExponentLattice};
pub use tangent::{tangent_cone_check, TangentConeReport};
pub use weights::{euler_apply, phi_gamma, scaling_apply, BrieskornFunction, WeightVector};
