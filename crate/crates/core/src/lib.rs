//! Splayed divisor arrangements and crepant resolutions of double covers.
//!
//! The crate works with projective hyperplane arrangements over `Q`:
//!
//! * [`exactla`] exact rational linear algebra and canonical subspaces;
//! * [`arrangement`] arrangements, flats and the intersection lattice;
//! * [`classify`] splayed / near-pencil / admissible verdicts;
//! * [`blowup`] the blowup state machine with canonical-class bookkeeping;
//! * [`chartmodel`] one-blowup chart computations and tangent-space checks;
//! * [`groebner`] polynomials, Buchberger, ideal operations and
//!   decomposition certificates for Jacobian ideals;
//! * [`cli`] the `splay` command-line front end.

pub mod arrangement;
pub mod blowup;
pub mod chartmodel;
pub mod classify;
pub mod cli;
pub mod exactla;
pub mod groebner;
