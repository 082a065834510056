//! Operator-valued conditionally free probability over matrix base algebras.
//!
//! The base algebra is `B = M_d(C)` with a distinguished subalgebra `D`
//! (all of `B`, the diagonal, or the scalars). On top of it the crate
//! provides:
//!
//! * [`mfs`]: truncated multilinear function series with formal sum,
//!   product, composition and both inverses;
//! * [`transforms`]: the R- and cR-transforms, by recurrence and in
//!   closed form;
//! * [`moments`]: an executable c-free product (moment oracle) for words
//!   in elements from different algebras;
//! * [`partitions`], [`clt`]: non-crossing pairings and the central limit
//!   machinery;
//! * [`fock`]: the truncated full Fock bimodule over `BξB`;
//! * [`experiment`]: seeded verification suites producing JSON reports.

pub mod algebra;
pub mod clt;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod mfs;
pub mod moments;
pub mod partitions;
pub mod random;
pub mod transforms;

mod tensor;

pub use algebra::{AlgebraContext, AlgebraElement, BlockMatrix, PsdReport, PsdVerdict, SubalgebraKind};
pub use error::{CfreeError, Result};
pub use mfs::MultilinearSeries;
pub use moments::{CFreeProduct, MomentSpec, Word};
pub use num_complex::Complex64 as C64;
pub use partitions::NonCrossingPartition;
