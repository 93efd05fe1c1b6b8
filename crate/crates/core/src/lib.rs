//! Intrinsic square functions, their BMO commutators, Muckenhoupt weights,
//! Orlicz norms and Morrey-type norms on uniform one- and two-dimensional grids.
//!
//! Everything is generic over [`Real`]; the aliases at the crate root fix the
//! scalar to `f64` (plain names) or `f32` (`F32` suffix).

pub mod bmo;
pub mod czdecomp;
pub mod error;
pub mod grid;
pub mod operators;
pub mod orlicz;
pub mod scalar;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
pub use orlicz::YoungFunction;
pub use scalar::Real;
pub use spaces::GrowthFunction;

pub type Grid = grid::Grid<f64>;
pub type GridFunction = grid::GridFunction<f64>;
pub type VectorGridFunction = grid::VectorGridFunction<f64>;
pub type Region = grid::Region<f64>;
pub type BallFamily = grid::BallFamily<f64>;
pub type BallPolicy = grid::BallPolicy<f64>;
pub type Weight = weights::Weight<f64>;
pub type AdmissibleFamily = operators::AdmissibleFamily<f64>;
pub type ConeQuadrature = operators::ConeQuadrature<f64>;
pub type CzDecomposition = czdecomp::CzDecomposition<f64>;
pub type BmoFunction = bmo::BmoFunction<f64>;

pub type GridF32 = grid::Grid<f32>;
pub type GridFunctionF32 = grid::GridFunction<f32>;
pub type VectorGridFunctionF32 = grid::VectorGridFunction<f32>;
pub type BallFamilyF32 = grid::BallFamily<f32>;
pub type WeightF32 = weights::Weight<f32>;
pub type AdmissibleFamilyF32 = operators::AdmissibleFamily<f32>;
pub type ConeQuadratureF32 = operators::ConeQuadrature<f32>;
