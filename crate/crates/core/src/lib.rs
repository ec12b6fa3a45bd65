//! Spectral geometry of cyclic covers of closed hyperbolic surfaces.
//!
//! The crate builds a genus-2 hyperbolic surface from Fenchel–Nielsen data,
//! forms cyclic covers along a non-separating geodesic, discretizes the
//! Laplacian with P1 finite elements, and evaluates the Rayleigh-quotient
//! certificates that bound the low eigenvalues of the cover.

pub mod bound;
pub mod cover;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod hypgeom;
pub mod hypmesh;
pub mod sparse;
pub mod surface;
mod unionfind;

pub use bound::{
    bound_report, build_test_functions, collar_width, compute_h_general, distance_to_curves, minimax_certificate,
    rayleigh, BoundReport, CollarData, MinimaxCertificate, TestFunctionVariant,
};
pub use cover::{cyclic_cover, cyclic_cover_of_degree, verify_deck_symmetry, CoverSurface, DeckCertificate};
pub use eigen::{dense_oracle, solve_smallest, solve_smallest_with, SolverOptions, SpectrumResult};
pub use error::{Error, Result};
pub use fem::{assemble, assemble_with, refine, refine_curve, refine_levels, MassKind, SparsePencil};
pub use hypgeom::{HyperboloidPoint, TriangleLengths};
pub use sparse::{CsrMatrix, EnvelopeCholesky};
pub use surface::{
    build_surface, cut_along, BuiltSurface, CutSurface, FenchelNielsenSpec, MeshCurve, SideRef,
    TriangulatedSurface,
};
