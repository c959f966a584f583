//! Clifford-analysis toolkit for generalized Lamé–Navier systems.
//!
//! The crate has three layers:
//! - exact symbolic: [`clifford`], [`structural`], [`poly`] — rational
//!   multivector arithmetic, structural sets, polynomial fields, and the
//!   differential operators whose identities are checked exactly;
//! - numeric kernels and quadrature: [`dense`], [`kernels`], [`geometry`],
//!   [`transforms`] — fundamental solutions, meshes/grids, and the full
//!   Cauchy/Teodorescu transform family with weak-singularity handling;
//! - solvers and verification: [`jump`] for Borel–Pompeiu assembly and the
//!   jump (transmission) problem on smooth and fractal boundaries, with
//!   [`fd`] supplying independent finite-difference oracles.

pub mod cli;
pub mod clifford;
pub mod dense;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod jump;
pub mod kernels;
pub mod poly;
pub mod structural;
pub mod transforms;

pub use error::{Error, Result};
