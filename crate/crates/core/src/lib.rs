//! P1 finite-element solver for the a,b,c,d family of Boussinesq systems on
//! rectangles, with explicit RK2 time stepping and adaptive bisection meshes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod assembly;
pub mod commands;
pub mod config;
pub mod error;
pub mod mesh;
pub mod model;
pub mod quadrature;
pub mod stepper;
pub mod verify;
pub mod vtk;

pub use error::{Error, Result};
