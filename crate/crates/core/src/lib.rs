//! Exact small-lattice analysis of the heat-bath (Gibbs) sampler for the
//! free-boundary two-dimensional Ising model.
//!
//! For side length `n <= 3` every quantity is computed by enumeration: the
//! Gibbs measure, the single-site kernel, canonical-path edge loads and the
//! geometric constant `kappa`, the full spectrum, and total-variation decay.
//! These are then compared against closed-form eigenvalue bounds.
//!
//! Runnable examples live in `examples/`:
//! `kernel`, `paths`, `kappa`, `spectrum`, `tv_decay`, `class_bounds`, `compare`.

pub mod bounds;
pub mod error;
pub mod identities;
pub mod kernel;
pub mod lattice;
pub mod paths;
pub mod report;
pub mod spectral;
pub mod sum;

pub use error::{Error, Result};
pub use kernel::{DirectedEdge, TransitionKernel};
pub use lattice::{
    IsingMeasure, LatticeSize, SiteClass, SiteIndex, SpinConfiguration, Temperature,
};
pub use paths::{canonical_path, CanonicalPath, EdgeLoadTable};
pub use spectral::{exact_spectrum, Spectrum};
