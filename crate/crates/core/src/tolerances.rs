//! Global numerical tolerances.

/// Orthonormality and determinant tolerance of stored rotations.
pub const ROTATION_TOL: f64 = 1e-12;
/// Drift above which a rotation is re-projected onto SO(3).
pub const REORTHONORMALIZE_TOL: f64 = 1e-10;
/// Largest defect accepted (and repaired) when building a rotation from user input.
pub const ROTATION_INPUT_TOL: f64 = 1e-6;
/// Distance of the rotation angle from pi below which the logarithm is rejected.
pub const CUT_LOCUS_TOL: f64 = 1e-9;
/// Below this angle Rodrigues coefficients use their series forms.
pub const RODRIGUES_SERIES_THRESHOLD: f64 = 1e-6;
/// Below this angle `f(q)` uses its series form (truncated after q¹⁰, error
/// below 1e-16; the closed form loses digits to cancellation under it).
pub const F_SERIES_THRESHOLD: f64 = 0.25;
/// Legality / reductivity threshold.
pub const LEGALITY_TOL: f64 = 1e-10;
/// Membership of the sub-Riemannian distribution.
pub const HORIZONTAL_TOL: f64 = 1e-12;
/// Degeneracy of a fiber (orientation within this of +-e_z).
pub const FIBER_DEGENERACY_TOL: f64 = 1e-10;
/// Hamiltonian drift (relative to max(1, h0)) above which integration is refused.
pub const HAMILTONIAN_BUDGET: f64 = 1e-6;
