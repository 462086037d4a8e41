//! Symmetric graph manifolds: copies of a building block indexed by a finite
//! group, glued along a Cayley graph through necks with tunable couplings, and
//! the multiplicities forced by the group action on the low spectrum.

mod analysis;
mod assemble;
mod template;

pub use analysis::{
    disconnection_census, eigenvalue_continuity_sweep, isotypic_multiplicities, linear_path, multiplicity_experiment,
    spectrum_multiplicities, trivial_character, CensusRow, GqmSetup, IsotypeShare, IsotypicDecomposition, LevelRow,
    MultiplicityReport, MultiplicityRow, MultiplicitySweep, ZERO_EIGENVALUE,
};
pub use assemble::{assemble, equivariance_check, AssembledOperator, Dof, GluingData};
pub use template::{BlockTemplate, NeckChain, NeckTemplate};
