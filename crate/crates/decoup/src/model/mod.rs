//! Domain types shared by every check: values, norms, kernels, laws, signs.

pub mod dist;
pub mod kernel;
pub mod norm;
pub mod value;

pub use dist::{Atom, DistributionSpec, FiniteSupport, SampleBlock};
pub use kernel::{
    check_kernel_symmetry, KernelFamily, KernelKindSpec, KernelSpec, LookupTable, SymmetryVerdict,
};
pub use norm::{norm_ge_norm, norm_ge_threshold, norm_of, NormSpec};
pub use value::{values_close, Point, SignVector, VectorValue};
