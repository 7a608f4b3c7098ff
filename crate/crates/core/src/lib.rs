//! Diffuse-interface ADER discontinuous Galerkin solver for linear elastic
//! waves on statically refined Cartesian grids.
//!
//! The solid region is described by a volume fraction α carried inside the
//! state vector; free surfaces of arbitrary shape arise from α dropping to
//! zero and require no boundary-fitted mesh.

pub mod amr;
pub mod basis;
pub mod dg;
pub mod dtm;
pub mod elastic;
pub mod error;
pub mod geometry;
pub mod limiter;
pub mod riemann;
pub mod sim;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
