//! Maximum correntropy estimation for errors-in-variables linear models:
//! data generation, MSE/LAD/TLS/MCC estimators, the error bounds for the MCC
//! solution, and the Monte Carlo experiments built on them.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod model;
pub mod rng;

pub use bounds::{BoundFormula, BoundInputs, BoundReport};
pub use error::{Error, Result};
pub use estimators::{EstimateResult, Estimator, MccConfig, MccSolver};
pub use model::{
    CleanSet, Design, EivDataset, GaussianMixtureSpec, InputSampler, NoisePlacement, ScalarEivDataset,
    VectorEivDataset,
};
