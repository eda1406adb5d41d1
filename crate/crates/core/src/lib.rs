//! Compatibility of planar and curved austenite–martensite interfaces.
//!
//! The crate covers twinning and habit-plane equations, explicit hull tests
//! for two wells, the Mallard averaging pipeline behind the cubic interior
//! criterion, and the construction and numerical verification of curved
//! interfaces.

pub mod case_study;
pub mod cli;
pub mod hulls;
pub mod interior;
pub mod mat3;
pub mod surface;
pub mod symmetry;
pub mod twinning;

pub use mat3::{Mat3, MatError, SymEigen, Vec3};
pub use symmetry::{cubic_group, variants, Rotation, Stretch};
