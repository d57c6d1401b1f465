//! Collective bases and the operators acting on them.
//!
//! Two representations are supported. The symmetric mode stores the
//! occupation number of every level, which is exact for permutation-symmetric
//! dynamics and scales to large ensembles. The pair-resolved mode stores the
//! level of each individual atom and is used as a brute-force reference for a
//! handful of atoms.

mod basis;
mod operator;
mod terms;

pub use basis::{
    symmetric_isometry, Basis, BasisMode, BasisSpec, LevelId, DEFAULT_MAX_DIM,
    DEFAULT_PAIR_RESOLVED_LIMIT,
};
pub use operator::Operator;
pub use terms::{
    collective_op, dephasing_term, dipole_term, drive_term, number_op, DipoleCoupling,
    SplittingConvention,
};
