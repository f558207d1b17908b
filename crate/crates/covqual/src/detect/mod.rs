//! Detection-theoretic core of the artifact.
//!
//! The correlation approximation matrix (CAM) Δ = Σ_X Σ_M⁻¹ carries all the
//! information needed to judge a covariance-selection model: its eigenvalues
//! determine the KL divergence in both directions, the LLRT statistic's
//! generalized chi-squared decomposition under either hypothesis, the ROC
//! curve, and the AUC = Pr(L_Δ > 0). The AUC is evaluated two independent
//! ways (seeded Monte Carlo and Imhof quadrature) plus an analytic upper
//! bound; ½ means the model is indistinguishable from the source.

mod imhof;
mod sampling;

use std::fmt;

use crate::models::{self, ModelError};
use crate::symmat::{CovarianceMatrix, SymmatError, PD_TOLERANCE};

/// Absolute accuracy target for Imhof quadrature.
pub const QUAD_TOL: f64 = 1e-9;

/// Chi-squared components with |weight| below this are dropped before
/// quadrature; they contribute nothing at `QUAD_TOL` but would stretch the
/// truncation point enormously.
pub const WEIGHT_PRUNE_TOL: f64 = 1e-14;

pub use imhof::ENVELOPE_CUTOFF;

#[derive(Debug, Clone, PartialEq)]
pub enum DetectError {
    DimensionMismatch {
        source_n: usize,
        model_n: usize,
    },
    /// κ must exceed 1 for the asymptotic KL bound.
    InvalidKappa {
        kappa: f64,
    },
    /// Adaptive refinement could not reach `QUAD_TOL`.
    QuadratureFailure {
        evaluations: usize,
        error_estimate: f64,
    },
    Numeric(SymmatError),
}

impl fmt::Display for DetectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectError::DimensionMismatch { source_n, model_n } => {
                write!(f, "source is {source_n}x{source_n} but model is {model_n}x{model_n}")
            }
            DetectError::InvalidKappa { kappa } => {
                write!(f, "kappa = {kappa} must be greater than 1")
            }
            DetectError::QuadratureFailure { evaluations, error_estimate } => write!(
                f,
                "quadrature failed to reach tolerance after {evaluations} evaluations (error {error_estimate:e})"
            ),
            DetectError::Numeric(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for DetectError {}

impl From<SymmatError> for DetectError {
    fn from(e: SymmatError) -> Self {
        DetectError::Numeric(e)
    }
}

/// Correlation approximation matrix Δ = Σ_X Σ_M⁻¹, stored by what downstream
/// consumers need: its spectrum, trace, and log-determinant.
///
/// The trace and log-determinant are computed by direct Cholesky routes
/// rather than from the spectrum, so the two agree only up to round-off;
/// tests exploit that as a consistency check.
#[derive(Debug, Clone, PartialEq)]
pub struct Cam {
    eigenvalues: Vec<f64>,
    trace: f64,
    log_det: f64,
}

impl Cam {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues of Δ, ascending, all positive.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// tr(Δ); equals n for any model satisfying the covariance-selection
    /// rules.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// log|Δ|; nonpositive for covariance-selection models.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }
}

/// Computes the CAM of a model against its source.
///
/// The spectrum comes from the symmetric similar form
/// Σ_M^{-1/2} Σ_X Σ_M^{-1/2}, which shares Δ's eigenvalues but keeps the
/// eigenproblem symmetric. Bitwise-identical inputs short-circuit to the
/// exact identity CAM, so degenerate cases (p = n-1, ρ = 0) are exact.
pub fn cam(source: &CovarianceMatrix, model: &CovarianceMatrix) -> Result<Cam, DetectError> {
    let n = source.dim();
    if model.dim() != n {
        return Err(DetectError::DimensionMismatch { source_n: n, model_n: model.dim() });
    }
    if source == model {
        return Ok(Cam { eigenvalues: vec![1.0; n], trace: n as f64, log_det: 0.0 });
    }

    let eig_model = model.eig_sym()?;
    if let Some((i, &l)) =
        eig_model.eigenvalues.iter().enumerate().find(|&(_, &l)| l <= PD_TOLERANCE)
    {
        return Err(DetectError::Numeric(SymmatError::NotPositiveDefinite {
            pivot_index: i,
            pivot: l,
        }));
    }
    let root = eig_model.spectral_map(|l| 1.0 / l.sqrt()).to_matrix();
    let similar = CovarianceMatrix::symmetrized(&root.mul(&source.to_matrix()).mul(&root));
    let eigenvalues = similar.eig_sym()?.eigenvalues;
    if let Some((i, &l)) = eigenvalues.iter().enumerate().find(|&(_, &l)| l <= PD_TOLERANCE) {
        return Err(DetectError::Numeric(SymmatError::NotPositiveDefinite {
            pivot_index: i,
            pivot: l,
        }));
    }

    let model_chol = model.cholesky()?;
    let source_chol = source.cholesky()?;
    let model_inv = model_chol.inverse();
    let mut trace = 0.0;
    for i in 0..n {
        for j in 0..n {
            trace += source.get(i, j) * model_inv.get(j, i);
        }
    }
    let log_det = source_chol.log_det() - model_chol.log_det();

    Ok(Cam { eigenvalues, trace, log_det })
}

/// D(f_X ‖ f_M) = ½ (tr Δ − n − log|Δ|).
///
/// The general form, valid for any PD pair; for covariance-selection models
/// tr Δ = n and it reduces to −½ log|Δ|.
pub fn kl_divergence(cam: &Cam) -> f64 {
    let n = cam.dim() as f64;
    (0.5 * (cam.trace - n - cam.log_det)).max(0.0)
}

/// D(f_M ‖ f_X) = ½ (Σ λᵢ⁻¹ − n + log|Δ|), the mean of L₁.
pub fn reverse_kl(cam: &Cam) -> f64 {
    let n = cam.dim() as f64;
    let inv_sum: f64 = cam.eigenvalues.iter().map(|&l| 1.0 / l).sum();
    (0.5 * (inv_sum - n + cam.log_det)).max(0.0)
}

/// Closed-form KL divergence of the pth-order star and chain models of the
/// equicorrelated source (the two are equal):
///
///   ½ (n−p) log((pρ+1)/((p−1)ρ+1)) + ½ log(((p−1)ρ+1)/((n−1)ρ+1))
///
/// Grouped so that p = n−1 and ρ = 0 cancel to exactly zero.
pub fn kl_closed_form(n: usize, p: usize, rho: f64) -> Result<f64, ModelError> {
    models::validate_spec(&models::ToeplitzSpec::new(n, rho))?;
    if p == 0 || p > n - 1 {
        return Err(ModelError::InvalidOrder { n, p });
    }
    let log_p = (p as f64 * rho + 1.0).ln();
    let log_p_minus = ((p as f64 - 1.0) * rho + 1.0).ln();
    let log_n_minus = ((n as f64 - 1.0) * rho + 1.0).ln();
    Ok(0.5 * ((n - p) as f64 * (log_p - log_p_minus) + (log_p_minus - log_n_minus)))
}

/// LLRT decomposition: L₀ = −c + Σ w0ᵢ Wᵢ² and L₁ = −c + Σ w1ᵢ Zᵢ² with
/// W, Z standard normal vectors and c = −½ log|Δ|.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrtWeights {
    c: f64,
    w0: Vec<f64>,
    w1: Vec<f64>,
}

impl LlrtWeights {
    /// The LLRT constant c = −½ log|Δ|; equals the forward KL divergence
    /// for covariance-selection models.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Null-hypothesis weights w0ᵢ = ½ (1 − λᵢ).
    pub fn w0(&self) -> &[f64] {
        &self.w0
    }

    /// Alternative-hypothesis weights w1ᵢ = ½ (λᵢ⁻¹ − 1).
    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    /// Weight vector of L_Δ = L₁ − L₀ as one 2n-component generalized
    /// chi-squared: {w1ᵢ} ∪ {−w0ᵢ}.
    pub fn delta_weights(&self) -> Vec<f64> {
        self.w1.iter().copied().chain(self.w0.iter().map(|&w| -w)).collect()
    }
}

pub fn llrt_weights(cam: &Cam) -> LlrtWeights {
    LlrtWeights {
        c: -0.5 * cam.log_det,
        w0: cam.eigenvalues.iter().map(|&l| 0.5 * (1.0 - l)).collect(),
        w1: cam.eigenvalues.iter().map(|&l| 0.5 * (1.0 / l - 1.0)).collect(),
    }
}

fn pruned(weights: &[f64]) -> Vec<f64> {
    weights.iter().copied().filter(|w| w.abs() >= WEIGHT_PRUNE_TOL).collect()
}

/// i.i.d. draws of L_Δ = Σ w1ᵢ Zᵢ² − Σ w0ᵢ Wᵢ² (the constant c cancels).
///
/// Deterministic for a fixed (seed, count) under any worker count.
pub fn sample_l_delta(weights: &LlrtWeights, count: usize, seed: u64) -> Vec<f64> {
    sampling::sample_map(count, seed, &weights.w0, &weights.w1, |k0, k1| k1 - k0)
}

/// i.i.d. draws of L₀ = −c + Σ w0ᵢ Wᵢ², sharing the stream layout of
/// [`sample_l_delta`].
pub fn sample_l0(weights: &LlrtWeights, count: usize, seed: u64) -> Vec<f64> {
    let c = weights.c;
    sampling::sample_map(count, seed, &weights.w0, &weights.w1, move |k0, _| -c + k0)
}

/// i.i.d. draws of L₁ = −c + Σ w1ᵢ Zᵢ².
pub fn sample_l1(weights: &LlrtWeights, count: usize, seed: u64) -> Vec<f64> {
    let c = weights.c;
    sampling::sample_map(count, seed, &weights.w0, &weights.w1, move |_, k1| -c + k1)
}

/// How an AUC value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AucMethod {
    MonteCarlo,
    Quadrature,
    UpperBound,
}

impl AucMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            AucMethod::MonteCarlo => "monte_carlo",
            AucMethod::Quadrature => "quadrature",
            AucMethod::UpperBound => "upper_bound",
        }
    }
}

impl fmt::Display for AucMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An AUC estimate with its provenance and uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AucResult {
    pub value: f64,
    pub method: AucMethod,
    /// Binomial standard error for Monte Carlo; 0 for deterministic methods.
    pub std_error: f64,
    /// Sample count (Monte Carlo) or integrand evaluations (quadrature).
    pub samples_or_nodes: usize,
}

/// AUC = Pr(L_Δ > 0) by Monte Carlo.
///
/// Exact-zero samples count one half each, so the degenerate identical-model
/// case returns exactly 0.5.
pub fn auc_monte_carlo(weights: &LlrtWeights, count: usize, seed: u64) -> AucResult {
    assert!(count >= 1, "auc_monte_carlo needs at least one sample");
    let samples = sample_l_delta(weights, count, seed);
    let mut positive = 0usize;
    let mut zero = 0usize;
    for &s in &samples {
        if s > 0.0 {
            positive += 1;
        } else if s == 0.0 {
            zero += 1;
        }
    }
    let value = (positive as f64 + 0.5 * zero as f64) / count as f64;
    AucResult {
        value,
        method: AucMethod::MonteCarlo,
        std_error: (value * (1.0 - value) / count as f64).sqrt(),
        samples_or_nodes: count,
    }
}

/// AUC = Pr(L_Δ > 0) by Imhof quadrature on the combined 2n-component
/// weight vector, to absolute accuracy [`QUAD_TOL`].
///
/// If every component prunes away, the AUC is ½ by convention.
pub fn auc_quadrature(weights: &LlrtWeights) -> Result<AucResult, DetectError> {
    let combined = pruned(&weights.delta_weights());
    if combined.is_empty() {
        return Ok(AucResult {
            value: 0.5,
            method: AucMethod::Quadrature,
            std_error: 0.0,
            samples_or_nodes: 0,
        });
    }
    let tail = imhof::tail_probability(&combined, 0.0, QUAD_TOL).map_err(|e| {
        DetectError::QuadratureFailure {
            evaluations: e.evaluations,
            error_estimate: e.error_estimate,
        }
    })?;
    Ok(AucResult {
        value: tail.value,
        method: AucMethod::Quadrature,
        std_error: 0.0,
        samples_or_nodes: tail.evaluations,
    })
}

/// ROC curve sampled at given thresholds: one (false-alarm, detection) pair
/// per threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// (P₀(τ), P₁(τ)) pairs in threshold order.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Evaluates P₀(τ) = Pr(L₀ ≥ τ) and P₁(τ) = Pr(L₁ ≥ τ) per threshold via
/// the same Imhof evaluator with each hypothesis's own weight vector.
/// Thresholds must be sorted ascending.
pub fn roc_points(weights: &LlrtWeights, thresholds: &[f64]) -> Result<RocCurve, DetectError> {
    debug_assert!(
        thresholds.windows(2).all(|w| w[0] <= w[1]),
        "thresholds must be sorted ascending"
    );
    let w0 = pruned(&weights.w0);
    let w1 = pruned(&weights.w1);
    let mut points = Vec::with_capacity(thresholds.len());
    for &tau in thresholds {
        // L ≥ τ is K ≥ τ + c for K the quadratic part.
        let x = tau + weights.c;
        let p0 = degenerate_or_tail(&w0, x)?;
        let p1 = degenerate_or_tail(&w1, x)?;
        points.push((p0, p1));
    }
    Ok(RocCurve { points })
}

fn degenerate_or_tail(weights: &[f64], x: f64) -> Result<f64, DetectError> {
    if weights.is_empty() {
        // K is the zero random variable
        return Ok(if x <= 0.0 { 1.0 } else { 0.0 });
    }
    imhof::tail_probability(weights, x, QUAD_TOL).map(|t| t.value).map_err(|e| {
        DetectError::QuadratureFailure {
            evaluations: e.evaluations,
            error_estimate: e.error_estimate,
        }
    })
}

/// Analytic upper bound AUC ≤ 1 − e^{−D−1}; lands in [1 − e⁻¹, 1).
pub fn auc_upper_bound(kl: f64) -> f64 {
    debug_assert!(kl >= 0.0, "KL divergence must be nonnegative");
    1.0 - (-kl.max(0.0) - 1.0).exp()
}

/// Limit of the closed-form KL divergence when p = ⌈n/κ⌉ and n → ∞:
/// (κ−1)/2 − log(κ)/2.
pub fn asymptotic_kl_bound(kappa: f64) -> Result<f64, DetectError> {
    if kappa.is_nan() || kappa <= 1.0 {
        return Err(DetectError::InvalidKappa { kappa });
    }
    Ok(0.5 * (kappa - 1.0) - 0.5 * kappa.ln())
}
