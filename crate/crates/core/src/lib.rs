//! Exact computations for distinction problems on p-adic Galois symmetric
//! pairs attached to symplectic, orthogonal and unitary groups.

pub mod distinction;
pub mod forms;
pub mod invgraph;
pub mod linalg;
pub mod localfield;
pub mod models;
pub mod numfield;
pub mod prasad;
pub mod symspace;
pub mod weyl;

pub use distinction::{decide, gl_product_check, necessary_condition, CuspidalDatum, DistinctionError, Verdict, Witness};
pub use forms::{diagonalize, gram_invariants, invariants, orbit_count, Case, DiagForm, FormError, FormInvariants};
pub use invgraph::{cone_contains, descend, Descent, InvGraphError, RestrictedRoots, Vertex};
pub use linalg::{Matrix, QMatrix};
pub use localfield::{hilbert, hilbert_oracle, hilbert_rat, LocalFieldError, Prime, QuadExtension, SquareClass};
pub use numfield::{BiquadElement, BiquadField, BiquadMatrix, NumFieldError};
pub use prasad::{opposition_group, prasad_character, spinor_norm, wsn, CharacterFormula, GroupDescriptor, PrasadError};
pub use symspace::{classify_x, orbit_count_x, ClassicalPair, SymSpaceError, XComponent, XOrbitInvariant};
pub use weyl::{
    admissible_orbit_count, build_tw, build_xw, enumerate_involutions, Composition, SignedInvolution, SignedPerm,
    WeylError,
};
