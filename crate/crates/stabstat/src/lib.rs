//! Exact-arithmetic workbench for Pauli stabilizer models of higher-form
//! gauge theories on lattices.
//!
//! The crate builds finite cell complexes (cubical tori, simplex boundaries,
//! Kuhn-triangulated tori), equips them with higher cup products that satisfy
//! an exact Leibniz-type reordering identity over the integers, and uses those
//! to assemble generalized Pauli stabilizer groups: toric codes, their
//! condensed descendants with emergent fermionic or semionic excitations, and
//! multilayer twisted variants. Statistics of extended excitations (particles,
//! loops, membranes, volumes) are evaluated as exact roots of unity from
//! commutator phases of hopping operators along mesoscopic skeletons, and the
//! abstract statistics groups of excitation patterns are computed by exact
//! integer and modular linear algebra.
//!
//! No floating point is used anywhere: phases are rationals mod 1, lattice
//! algebra is over `Z` and `Z/M`.

pub mod classifier;
pub mod complex;
pub mod cup;
pub mod embed;
pub mod linalg;
pub mod models;
pub mod par;
pub mod pauli;
pub mod statistics;
