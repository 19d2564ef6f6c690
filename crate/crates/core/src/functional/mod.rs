//! Discrete spaces, forms of the weak formulation and functional-inequality estimators.
//!
//! Velocity is continuous piecewise quadratic and pressure continuous piecewise linear on the
//! strip mesh. Wall impermeability is imposed by rotating wall-node coefficients into
//! `(normal, tangent)` frames and fixing the normal one.

mod dofs;
mod eigen;
mod element;
mod estimators;
mod field;
mod forms;
mod korn3d;
mod payne;
mod system;

pub use dofs::{DofMap, EndEdge, WallEdge};
pub use eigen::{lowest_eigenpair, EigenPair, EIGEN_MAX_ITER, EIGEN_TOL};
pub use element::{p2_values, Element, EDGE_MASS};
pub use estimators::{
    estimate_korn_constant, estimate_poincare_constant, inf_sup_witness, ConstantEstimate, InfSupWitness, KornEstimate,
    PoincareConstraint,
};
pub use field::{FieldVector, PointValue};
pub use forms::{assemble_forms, assemble_forms_on, assemble_scalar_forms, Convection, FormAssembly, ScalarForms};
pub use korn3d::{korn3d_counterexample_ratio, Korn3dReport};
pub use payne::{payne_identity_residual, payne_terms, PayneTerms, PolynomialField, VectorField2};
pub use system::{ConstraintRow, SaddleSolution, SaddleSystem};
