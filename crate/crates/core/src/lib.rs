//! Exact deformation theory for finite-dimensional differential graded Lie
//! algebras over the Gaussian rationals.
//!
//! The pipeline is: describe a dgLa ([`dgla`]), choose a Hermitian metric and
//! build the Hodge operators ([`hodge`]), solve the Maurer–Cartan equation
//! order by order in harmonic gauge ([`kuranishi`]), and check that a group
//! action descends to the resulting family ([`equivariance`]).

pub mod builders;
pub mod dgla;
pub mod equivariance;
pub mod error;
pub mod hodge;
pub mod io;
pub mod kuranishi;
pub mod linalg;
pub mod scalar;
pub mod series;

pub use dgla::{BasisRef, DgLa, GradedElement, GradedMap, GradedSpace, Shape};
pub use error::{Error, Result};
pub use hodge::{HodgeData, MetricData};
pub use kuranishi::KuranishiFamily;
pub use linalg::Matrix;
pub use scalar::Scalar;
pub use series::{GradedSeries, Monomial, Polynomial};
