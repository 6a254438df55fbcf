//! Finite abelian groups and integer lattices.

pub mod group;
pub mod lattice;

pub use group::{
    abelian_groups_of_order, all_subgroups, group_product, quotient_map, quotient_with_conjugation,
    subgroup_from_generators, FiniteAbelianGroup, Group, GroupHom, PresentedGroup, Subgroup,
};
pub use lattice::{hnf, kernel_lattice, lattice_index, rank, Index, IntegerMatrix};
