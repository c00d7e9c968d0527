//! Random walks on free products of lattices: Green functions, spectral degeneracy,
//! Martin and ratio-limit kernels.

pub mod ancona;
pub mod arena;
pub mod boundary_lab;
pub mod error;
pub mod extrapolate;
pub mod factor_green;
pub mod group;
pub mod jet;
pub mod measures;
mod par;
pub mod product_green;
pub mod roots;
pub mod serde_ext;

pub use error::{Error, Result};
