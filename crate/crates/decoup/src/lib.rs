//! A verification laboratory for decoupling inequalities of generalized
//! U-statistics and quadratic forms.
//!
//! The crate computes coupled and decoupled U-statistic sums over ordered
//! tuples of pairwise-distinct indices, implements the sign-coupling
//! constructions and algebraic identities behind the tail-probability
//! comparison between them, and checks every inequality two ways:
//!
//! - **exact**: exhaustive enumeration over finite product spaces with
//!   rational probability arithmetic, so a verdict is a theorem about the
//!   instance, not a sampling statement;
//! - **Monte Carlo**: seeded, worker-count-independent replicate streams with
//!   exact binomial (Clopper-Pearson) confidence bounds, for scales beyond
//!   enumeration.
//!
//! Module map:
//!
//! | module    | contents |
//! |-----------|----------|
//! | [`model`] | values, norms, kernels, distributions, sign vectors |
//! | [`ustat`] | tuple enumeration, coupled/decoupled/polarized sums |
//! | [`coupling`] | sign-coupling, the 4-term identities, tail decompositions |
//! | [`chaos`] | Rademacher chaos moments, hypercontractivity, anti-concentration |
//! | [`problab`] | exact tails, MC tails, empirical decoupling constants |
//! | [`graph`] | the pairwise-distance clustering demonstration |
//! | [`corpus`] | seeded random-instance sweeps used by the check suite |
//! | [`suite`] | config-driven check runner producing a report bundle |

pub mod chaos;
pub mod corpus;
pub mod coupling;
pub mod error;
pub mod graph;
pub mod model;
pub mod problab;
pub mod report;
pub mod suite;
pub mod ustat;

pub use error::{Error, Result};
pub use model::{
    check_kernel_symmetry, norm_of, Atom, DistributionSpec, KernelFamily, KernelSpec, NormSpec,
    Point, SampleBlock, SignVector, SymmetryVerdict, VectorValue,
};
