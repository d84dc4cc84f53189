//! Clifford algebras of `(n, 2)` lattices and boundary weight filtrations.
//!
//! `Cl(V)` is stored on the monomial basis `e_S`, `S` a subset of the basis
//! of `V` written as a bitmask (bit `i` is `e_{i+1}`). The basis of `V` need
//! not be orthogonal; products are normal-ordered with the full Gram matrix.

mod algebra;
mod filtration;
mod lattice;
mod subspace;

pub use algebra::{CliffordElement, Parity};
pub use filtration::{
    cocharacter_check, cocharacter_table, filtration_type2, filtration_type3, find_isotropic_pair,
    find_isotropic_vector, graded_splitting, kuga_satake_dimension, left_ideal_image, CocharacterCheck, Containment,
    FiltrationType, GradedSplitting, IPiece, WeightFiltration, MAX_SEARCH_HEIGHT,
};
pub use lattice::{signature, GramLattice, MAX_N};
pub use subspace::Subspace;
