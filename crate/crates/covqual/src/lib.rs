//! covqual — how good is a Gaussian covariance-selection approximation?
//!
//! Given an equicorrelated Toeplitz source, this crate builds the pth-order
//! star and pth-order Markov-chain model covariances in closed form,
//! cross-checks them with a general iterative-proportional-fitting solver,
//! and quantifies approximation quality through the correlation
//! approximation matrix: KL divergence in both directions and the
//! detection-theoretic AUC = Pr(L_Δ > 0), evaluated by seeded Monte Carlo
//! and by Imhof characteristic-function inversion, together with analytic
//! bounds.
//!
//! Modules:
//! - [`symmat`]: dense symmetric-matrix kernel (Cholesky, Jacobi eigen).
//! - [`models`]: Toeplitz source and the star/chain closed forms.
//! - [`covsel`]: maximal cliques and the IPF covariance-selection solver.
//! - [`detect`]: CAM, divergences, LLRT weights, ROC, AUC, bounds.

pub mod covsel;
pub mod detect;
pub mod models;
pub mod symmat;

pub use detect::{AucMethod, AucResult, Cam, LlrtWeights, RocCurve};
pub use models::{ModelSpec, ToeplitzSpec};
pub use symmat::CovarianceMatrix;
