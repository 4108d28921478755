//! Exact verification of syzygy vanishing for complete and noncomplete
//! embeddings of rational surfaces.
//!
//! The crate models the projective plane and the Hirzebruch surfaces with
//! monomial section bases, builds subsystems V of the sections of a very
//! ample class, and decides Property N^S_p of the embedding by computing
//! graded Betti numbers of the section module over Sym V by exact linear
//! algebra over a prime field. On top of that sit splitting types of
//! kernel bundles restricted to rational curves, k-normality defects,
//! Castelnuovo-Mumford regularity, and seeded verification campaigns
//! that exercise the implemented criteria at scale.

pub mod binforms;
pub mod bundles;
pub mod error;
pub mod field;
pub mod harness;
pub mod invariants;
pub mod koszul;
pub mod matrix;
pub mod models;
pub mod subsystems;

pub use error::Error;
pub use field::{PrimeField, DEFAULT_PRIME};
pub use matrix::Matrix;
pub use models::{BundleClass, RationalCurve, SurfaceModel};
pub use subsystems::{make_subsystem, Subsystem, SubsystemSpec};
