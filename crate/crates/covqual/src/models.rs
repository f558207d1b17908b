//! Model covariance construction for the equicorrelated Toeplitz source.
//!
//! Two closed-form families are provided: the pth-order star, where every
//! node is connected to the first p hub nodes, and the pth-order Markov
//! chain, whose precision matrix is banded with bandwidth p. Both match the
//! source on their edges and diagonal and zero the precision off the graph,
//! i.e. they are the unique covariance-selection solutions for their edge
//! sets. Vertices are 0-based here; documentation and CSV output label them
//! 1-based.

use std::fmt;

use crate::symmat::{CovarianceMatrix, SymmatError};

/// Unordered vertex pair, stored as `(i, j)` with `i < j`, 0-based.
pub type Edge = (usize, usize);

/// Equicorrelated Toeplitz source: unit diagonal, `rho` everywhere else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToeplitzSpec {
    pub n: usize,
    pub rho: f64,
}

impl ToeplitzSpec {
    pub fn new(n: usize, rho: f64) -> Self {
        Self { n, rho }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// `rho` outside the open positive-definiteness interval
    /// `(-1/(n-1), 1)`, or `n < 2`.
    InvalidRho { n: usize, rho: f64 },
    /// Model order outside `1 ..= n-1`.
    InvalidOrder { n: usize, p: usize },
    /// A custom edge references a vertex outside `0 .. n`.
    InvalidEdge { edge: Edge, n: usize },
    /// A constructed matrix unexpectedly failed a kernel operation.
    Numeric(SymmatError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidRho { n, rho } => write!(
                f,
                "rho = {rho} is outside the positive-definite interval (-1/{}, 1) for n = {n}",
                n.saturating_sub(1)
            ),
            ModelError::InvalidOrder { n, p } => {
                write!(
                    f,
                    "model order p = {p} must satisfy 1 <= p <= n-1 = {}",
                    n.saturating_sub(1)
                )
            }
            ModelError::InvalidEdge { edge, n } => {
                write!(f, "edge ({}, {}) references a vertex outside 0..{n}", edge.0, edge.1)
            }
            ModelError::Numeric(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for ModelError {}

impl From<SymmatError> for ModelError {
    fn from(e: SymmatError) -> Self {
        ModelError::Numeric(e)
    }
}

/// Which approximation family a model belongs to, with the data needed to
/// reproduce its edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    PthStar { p: usize },
    PthChain { p: usize },
    Custom { edges: Vec<Edge> },
}

impl ModelSpec {
    /// The order p for the two parametric families; `None` for custom sets.
    pub fn order(&self) -> Option<usize> {
        match self {
            ModelSpec::PthStar { p } | ModelSpec::PthChain { p } => Some(*p),
            ModelSpec::Custom { .. } => None,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::PthStar { .. } => "star",
            ModelSpec::PthChain { .. } => "chain",
            ModelSpec::Custom { .. } => "custom",
        }
    }

    /// The model's edge set over `n` vertices, lexicographically ordered.
    ///
    /// Star: all pairs inside the hub set `{0..p}` plus every hub-leaf pair
    /// (leaves are conditionally independent given the hubs, so no
    /// leaf-leaf edges). Chain: all pairs at distance at most p.
    pub fn edges(&self, n: usize) -> Result<Vec<Edge>, ModelError> {
        match self {
            ModelSpec::PthStar { p } => {
                validate_order(n, *p)?;
                let p = *p;
                let mut edges = Vec::with_capacity(p * (p - 1) / 2 + p * (n - p));
                for i in 0..n {
                    for j in (i + 1)..n {
                        if i < p {
                            edges.push((i, j));
                        }
                    }
                }
                Ok(edges)
            }
            ModelSpec::PthChain { p } => {
                validate_order(n, *p)?;
                let p = *p;
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n.min(i + p + 1) {
                        edges.push((i, j));
                    }
                }
                Ok(edges)
            }
            ModelSpec::Custom { edges } => {
                let mut out = Vec::with_capacity(edges.len());
                for &(a, b) in edges {
                    if a >= n || b >= n || a == b {
                        return Err(ModelError::InvalidEdge { edge: (a, b), n });
                    }
                    out.push((a.min(b), a.max(b)));
                }
                out.sort_unstable();
                out.dedup();
                Ok(out)
            }
        }
    }
}

pub(crate) fn validate_spec(spec: &ToeplitzSpec) -> Result<(), ModelError> {
    let ToeplitzSpec { n, rho } = *spec;
    if n < 2 || !rho.is_finite() || rho <= -1.0 / (n as f64 - 1.0) || rho >= 1.0 {
        return Err(ModelError::InvalidRho { n, rho });
    }
    Ok(())
}

fn validate_order(n: usize, p: usize) -> Result<(), ModelError> {
    if p == 0 || p > n.saturating_sub(1) {
        return Err(ModelError::InvalidOrder { n, p });
    }
    Ok(())
}

/// The source covariance: ones on the diagonal, `rho` everywhere else.
pub fn toeplitz_source(spec: &ToeplitzSpec) -> Result<CovarianceMatrix, ModelError> {
    validate_spec(spec)?;
    let rho = spec.rho;
    Ok(CovarianceMatrix::from_fn_sym(spec.n, |i, j| if i == j { 1.0 } else { rho }))
}

/// Leaf-leaf correlation of the pth-order star: `ρ₁ = p ρ² / ((p-1) ρ + 1)`.
pub fn star_leaf_correlation(p: usize, rho: f64) -> f64 {
    p as f64 * rho * rho / ((p as f64 - 1.0) * rho + 1.0)
}

/// The pth-order star model covariance.
///
/// Any pair touching a hub (index < p) keeps the source correlation `rho`;
/// leaf-leaf pairs carry `ρ₁`.
pub fn star_model(spec: &ToeplitzSpec, p: usize) -> Result<CovarianceMatrix, ModelError> {
    validate_spec(spec)?;
    validate_order(spec.n, p)?;
    let rho = spec.rho;
    let rho1 = star_leaf_correlation(p, rho);
    let m = CovarianceMatrix::from_fn_sym(spec.n, |i, j| {
        if i == j {
            1.0
        } else if j < p {
            // from_fn_sym visits i >= j, so j is the smaller index
            rho
        } else {
            rho1
        }
    });
    m.cholesky()?;
    Ok(m)
}

/// The pth-order Markov chain model covariance.
///
/// Entries at distance d <= p keep `rho`; beyond the band the correlations
/// follow the recursion `ρ_i = (sum of the p most recent terms) · ρ / ((p-1) ρ + 1)`
/// on the extended sequence `[ρ, ..., ρ (p copies), ρ₁, ρ₂, ...]`, tracked
/// with a running window sum.
pub fn chain_model(spec: &ToeplitzSpec, p: usize) -> Result<CovarianceMatrix, ModelError> {
    validate_spec(spec)?;
    validate_order(spec.n, p)?;
    let n = spec.n;
    let rho = spec.rho;
    let denom = (p as f64 - 1.0) * rho + 1.0;

    // ext[d - 1] is the model correlation at distance d.
    let mut ext = vec![rho; p];
    let mut window_sum = p as f64 * rho;
    for idx in p..n.saturating_sub(1) {
        let next = window_sum * rho / denom;
        ext.push(next);
        window_sum += next - ext[idx - p];
    }

    let m = CovarianceMatrix::from_fn_sym(n, |i, j| if i == j { 1.0 } else { ext[i - j - 1] });
    m.cholesky()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_zero_rho_is_identity() {
        let m = toeplitz_source(&ToeplitzSpec::new(3, 0.0)).unwrap();
        assert_eq!(m, CovarianceMatrix::identity(3));
    }

    #[test]
    fn toeplitz_entries() {
        let m = toeplitz_source(&ToeplitzSpec::new(3, 0.5)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.5 };
                assert_eq!(m.get(i, j), expect);
            }
        }
    }

    #[test]
    fn toeplitz_rejects_rho_outside_pd_interval() {
        // -1/(n-1) = -1/2 for n = 3
        let err = toeplitz_source(&ToeplitzSpec::new(3, -0.6)).unwrap_err();
        assert!(matches!(err, ModelError::InvalidRho { .. }));
        assert!(toeplitz_source(&ToeplitzSpec::new(3, -0.49)).is_ok());
        assert!(toeplitz_source(&ToeplitzSpec::new(3, 1.0)).is_err());
    }

    #[test]
    fn star_leaf_leaf_entry() {
        // p = 2, ρ = 0.5: ρ₁ = 2·0.25 / 1.5 = 1/3
        let m = star_model(&ToeplitzSpec::new(4, 0.5), 2).unwrap();
        assert!((m.get(2, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.get(0, 3), 0.5);
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(1, 2), 0.5);
    }

    #[test]
    fn star_full_order_equals_source() {
        let spec = ToeplitzSpec::new(5, 0.7);
        let m = star_model(&spec, 4).unwrap();
        assert_eq!(m, toeplitz_source(&spec).unwrap());
    }

    #[test]
    fn star_independence_at_zero_rho() {
        let m = star_model(&ToeplitzSpec::new(5, 0.0), 2).unwrap();
        assert_eq!(m, CovarianceMatrix::identity(5));
    }

    #[test]
    fn chain_first_order_is_geometric() {
        // p = 1 collapses to ρ_i = ρ_{i-1}·ρ, the AR(1)-style closed form.
        let m = chain_model(&ToeplitzSpec::new(4, 0.5), 1).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = 0.5_f64.powi((i as i32 - j as i32).abs());
                assert!((m.get(i, j) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn chain_second_order_first_recursion_step() {
        // ρ₁ = (ρ + ρ)·ρ / (ρ + 1) = 1/3 at ρ = 0.5
        let m = chain_model(&ToeplitzSpec::new(4, 0.5), 2).unwrap();
        assert!((m.get(0, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.get(0, 2), 0.5);
        assert_eq!(m.get(0, 1), 0.5);
    }

    #[test]
    fn chain_full_order_equals_source() {
        let spec = ToeplitzSpec::new(6, 0.3);
        let m = chain_model(&spec, 5).unwrap();
        assert_eq!(m, toeplitz_source(&spec).unwrap());
    }

    #[test]
    fn invalid_order_rejected() {
        let spec = ToeplitzSpec::new(4, 0.5);
        assert!(matches!(star_model(&spec, 0), Err(ModelError::InvalidOrder { .. })));
        assert!(matches!(star_model(&spec, 4), Err(ModelError::InvalidOrder { .. })));
        assert!(matches!(chain_model(&spec, 9), Err(ModelError::InvalidOrder { .. })));
    }

    #[test]
    fn edges_chain_p1() {
        let e = ModelSpec::PthChain { p: 1 }.edges(3).unwrap();
        assert_eq!(e, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn edges_star_p1() {
        let e = ModelSpec::PthStar { p: 1 }.edges(4).unwrap();
        assert_eq!(e, vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn edges_star_p2() {
        let e = ModelSpec::PthStar { p: 2 }.edges(4).unwrap();
        assert_eq!(e, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
    }

    #[test]
    fn edge_counts_match_formulas() {
        for n in 2..=12 {
            for p in 1..n {
                let star = ModelSpec::PthStar { p }.edges(n).unwrap();
                assert_eq!(star.len(), p * (p - 1) / 2 + p * (n - p));
                let chain = ModelSpec::PthChain { p }.edges(n).unwrap();
                let expect: usize = (1..=p).map(|k| n - k).sum();
                assert_eq!(chain.len(), expect);
            }
        }
    }

    #[test]
    fn edges_nest_monotonically_in_p() {
        for n in [5, 9, 14] {
            for p in 1..(n - 1) {
                for spec in [
                    (ModelSpec::PthStar { p }, ModelSpec::PthStar { p: p + 1 }),
                    (ModelSpec::PthChain { p }, ModelSpec::PthChain { p: p + 1 }),
                ] {
                    let small = spec.0.edges(n).unwrap();
                    let big = spec.1.edges(n).unwrap();
                    assert!(small.iter().all(|e| big.contains(e)));
                    assert!(small.len() < big.len());
                }
            }
        }
    }

    #[test]
    fn full_order_edge_sets_are_complete() {
        let n = 5;
        let complete: Vec<Edge> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        assert_eq!(ModelSpec::PthStar { p: n - 1 }.edges(n).unwrap(), complete);
        assert_eq!(ModelSpec::PthChain { p: n - 1 }.edges(n).unwrap(), complete);
    }

    #[test]
    fn custom_edges_normalized() {
        let spec = ModelSpec::Custom { edges: vec![(2, 0), (0, 2), (1, 0)] };
        assert_eq!(spec.edges(3).unwrap(), vec![(0, 1), (0, 2)]);
        assert!(matches!(spec.edges(2), Err(ModelError::InvalidEdge { .. })));
    }
}
