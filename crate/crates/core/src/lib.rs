//! Numerical workbench for variance-based sum uncertainty relations, their
//! reverse counterparts, a reverse quantum speed limit for Lindblad dynamics
//! and a fidelity-estimation protocol built on the uncertainty matrix.
//!
//! Every routine is generic over the real scalar type ([`Real`], implemented
//! for `f32` and `f64`); the `*F64` / `*F32` aliases below fix the scalar.

pub mod audit;
pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod matops;
pub mod multiobs;
pub mod operators;
pub mod protocol;
pub mod qubitgeo;
pub mod reverse;
pub mod scalar;
pub mod states;

pub use error::{Error, Result};
pub use operators::Observable;
pub use scalar::{CMatrix, CVector, Real};
pub use states::{BlochVector, DensityMatrix, StateVector};

pub type DensityMatrixF64 = DensityMatrix<f64>;
pub type DensityMatrixF32 = DensityMatrix<f32>;
pub type StateVectorF64 = StateVector<f64>;
pub type StateVectorF32 = StateVector<f32>;
pub type ObservableF64 = Observable<f64>;
pub type ObservableF32 = Observable<f32>;
pub type BlochVectorF64 = BlochVector<f64>;
pub type BlochVectorF32 = BlochVector<f32>;
pub type BoundReportF64 = bounds::BoundReport<f64>;
pub type BoundReportF32 = bounds::BoundReport<f32>;
pub type UncertaintyMatrixF64 = bounds::UncertaintyMatrix<f64>;
pub type UncertaintyMatrixF32 = bounds::UncertaintyMatrix<f32>;
pub type TrajectoryF64 = dynamics::Trajectory<f64>;
pub type TrajectoryF32 = dynamics::Trajectory<f32>;
