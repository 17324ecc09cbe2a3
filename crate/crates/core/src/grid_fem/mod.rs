//! P1 finite elements on structured rectangle triangulations: mesh
//! construction, assembly of the coupled `(u, axl A)` block, and a sparse SPD
//! solver.

mod assemble;
mod mesh;
mod sparse;

pub use assemble::{
    assemble_coupled, harmonic_extension, interleave, solve_spd, solve_spd_with_guess,
    CoupledOperator, FieldVec,
};
pub use mesh::{build_mesh, gradient_at_elements, Mesh};
pub use sparse::{pcg, rayleigh_quotient, solve_reduced, Csr, SparseSystem};
