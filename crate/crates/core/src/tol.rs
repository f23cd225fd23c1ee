//! Shared numeric tolerances.

/// Closed-form identities (distances, exact midpoints).
pub const CLOSED_FORM: f64 = 1e-9;

/// Quantities produced by iterative solvers.
pub const ITERATIVE: f64 = 1e-6;

/// Parameter accuracy of the golden-section projection search.
pub const PROJECTION_PARAM: f64 = 1e-10;

/// Boundary slack for membership in the truncated complex.
pub const MEMBERSHIP: f64 = 1e-9;

/// Two hull samples closer than this are merged.
pub const DEDUP: f64 = 1e-9;

/// Interior tree parameters this close to a vertex snap onto it.
pub const SNAP: f64 = 1e-12;
