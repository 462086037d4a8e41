//! Finite groups from explicit multiplication tables: the affine groups
//! over finite fields, admissible generator sets with brute-force
//! certificates, Cayley graphs and exact character tables.

mod cayley;
mod characters;
mod field;
mod generators;
mod gqm;
mod group;

pub use cayley::{cayley_graph, delete_generator_pair, CayleyGraph};
pub use characters::{character_table, min_nontrivial_dim, CharacterTable, ConjugacyClass, TableCheck};
pub use field::{field_polynomial, is_irreducible, is_primitive, FiniteField};
pub use generators::{check_admissible_set, check_sequence_admissible, GeneratorSet, LevelCertificate, SequenceCertificate};
pub use gqm::{build_gqm, nested_flag, standard_generators, GqmGroup, GqmSpec, SubgroupFlag};
pub use group::FiniteGroup;

use crate::error::Result;
use serde::Serialize;

/// Pretty JSON for any group-theory artifact.
pub fn write_json<T: Serialize, W: std::io::Write>(value: &T, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}
