//! Shear-type coordinates on fat graphs, with values in the algebras R_Λ
//! (split-complex, dual, complex numbers) for Λ = -1, 0, 1.
//!
//! The crate covers holonomies, the Weil–Petersson, gravitational and
//! cotangent Poisson bivectors, Whitehead moves in all coordinate systems,
//! and a battery of numerical checks of the identities relating them.

pub mod acceptance;
pub mod coords;
mod error;
pub mod fatgraph;
pub mod holonomy;
pub mod json;
pub mod moves;
pub mod poisson;
pub mod ralgebra;
pub mod rmatrix;
pub mod shipped;

pub use coords::{ConstraintMap, Coords, CotangentVector, GenShearVector, LamVector, ShearVector, Space};
pub use error::{Error, Result};
pub use fatgraph::{EdgePath, FatGraph, Frame, Turn};
pub use moves::{Move, MoveRecord, Point};
pub use ralgebra::{Lambda, RNum};
pub use rmatrix::{LieVec, Mat2};
