//! Exact construction of the Sklyanin-algebra matrix realization, discovery of
//! the Racah-Wigner extension over it, and machine checks of the identities
//! involved (Poisson Jacobi, formal Jacobi, degree-3 confluence).

pub mod classical;
pub mod discovery;
pub mod exact;
pub mod ncpoly;
pub mod pipeline;
pub mod realization;
pub mod sampling;
pub mod schema;
