//! Bergman kernels and random zeros on towers of flat tori.

pub mod currents;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod lattice;
pub mod quadrature;
pub mod quotient;
pub mod rng;
pub mod sections;
pub mod zeros;

pub use error::{Error, Result};
pub use fock::{fock_kernel, BundleParams, KernelValue};
pub use lattice::{make_product_tower, Lattice, Tower, TowerLevel};
pub use quotient::{LevelKernel, TruncationPolicy};
pub use sections::{CoherentFrame, Section};
