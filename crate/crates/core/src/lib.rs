//! Symbolic Noether currents and structure-preserving space-time finite
//! elements for shallow water in Lagrangian (particle-label) coordinates.
//!
//! The crate is split into a symbolic layer ([`symexpr`], [`noether`],
//! [`swmodels`]) that derives Euler-Lagrange equations, invariance criteria and
//! conservation laws, and a numerical layer ([`mesh`], [`fem`]) that discretises
//! the same Lagrangians with continuous finite elements over time slabs and
//! evaluates the discrete Noether identities. [`cli`] glues both together.

pub mod cli;
pub mod fem;
pub mod mesh;
pub mod noether;
pub mod swmodels;
pub mod symexpr;

pub use symexpr::{Atom, Expr, JetSpace, JetVar, PointBinding, SymError};
