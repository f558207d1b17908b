//! General covariance selection by iterative proportional fitting.
//!
//! Given any positive-definite source and any edge set, `ipf_select` finds
//! the unique model covariance that matches the source on the diagonal and
//! on every edge while zeroing the precision matrix off the graph. It is the
//! independent oracle against which the closed-form star/chain constructions
//! in [`crate::models`] are validated.

use std::fmt;

use crate::models::Edge;
use crate::symmat::{CovarianceMatrix, SymmatError};

#[derive(Debug, Clone, PartialEq)]
pub enum CovselError {
    /// Sweep residual still above tolerance after the iteration budget.
    NoConvergence { iterations: usize, residual: f64 },
    /// An intermediate update produced a non-PD matrix; usually an invalid
    /// clique cover or a non-PD source.
    NotPositiveDefinite(SymmatError),
    /// A clique references a vertex outside `0..n`.
    CliqueOutOfRange { vertex: usize, n: usize },
    /// A model edge is not contained in any clique of the cover.
    EdgeNotCovered { edge: Edge },
    /// A clique is not a complete subgraph of the model.
    CliqueNotComplete { clique: Vec<usize>, missing: Edge },
}

impl fmt::Display for CovselError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovselError::NoConvergence { iterations, residual } => {
                write!(f, "IPF did not converge after {iterations} sweeps (residual {residual:e})")
            }
            CovselError::NotPositiveDefinite(e) => {
                write!(f, "IPF intermediate lost positive definiteness: {e}")
            }
            CovselError::CliqueOutOfRange { vertex, n } => {
                write!(f, "clique vertex {vertex} outside 0..{n}")
            }
            CovselError::EdgeNotCovered { edge } => {
                write!(f, "edge ({}, {}) not covered by any clique", edge.0, edge.1)
            }
            CovselError::CliqueNotComplete { clique, missing } => write!(
                f,
                "clique {clique:?} is not complete: edge ({}, {}) missing from the model",
                missing.0, missing.1
            ),
        }
    }
}

impl std::error::Error for CovselError {}

impl From<SymmatError> for CovselError {
    fn from(e: SymmatError) -> Self {
        CovselError::NotPositiveDefinite(e)
    }
}

/// IPF solver settings plus the clique cover driving the marginal updates.
#[derive(Debug, Clone)]
pub struct IpfConfig {
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub clique_cover: Vec<Vec<usize>>,
}

impl IpfConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 500;
    pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-10;

    /// Default configuration with the maximal cliques of the given graph.
    pub fn for_edges(edges: &[Edge], n: usize) -> Self {
        Self {
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            convergence_tol: Self::DEFAULT_CONVERGENCE_TOL,
            clique_cover: maximal_cliques(edges, n),
        }
    }
}

/// All maximal cliques of the graph on vertices `0..n`, via Bron-Kerbosch
/// with pivoting. Isolated vertices yield singleton cliques, so the cover
/// always spans every vertex. Output is deterministic: each clique sorted
/// ascending, cliques in lexicographic order.
pub fn maximal_cliques(edges: &[Edge], n: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        if a < n && b < n && a != b {
            adj[a][b] = true;
            adj[b][a] = true;
        }
    }
    let mut cliques = Vec::new();
    let mut r = Vec::new();
    let p: Vec<usize> = (0..n).collect();
    bron_kerbosch(&adj, &mut r, p, Vec::new(), &mut cliques);
    for c in &mut cliques {
        c.sort_unstable();
    }
    cliques.sort();
    cliques
}

fn bron_kerbosch(
    adj: &[Vec<bool>],
    r: &mut Vec<usize>,
    p: Vec<usize>,
    x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r.clone());
        return;
    }
    // Pivot on the vertex with the most candidate neighbours; first match
    // wins ties so the recursion is deterministic.
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count())
        .expect("p or x nonempty");
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();

    let mut p = p;
    let mut x = x;
    for v in candidates {
        let next_p: Vec<usize> = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let next_x: Vec<usize> = x.iter().copied().filter(|&u| adj[v][u]).collect();
        r.push(v);
        bron_kerbosch(adj, r, next_p, next_x, out);
        r.pop();
        p.retain(|&u| u != v);
        x.push(v);
    }
}

/// Covariance selection for an arbitrary edge set.
///
/// Iterates marginal-matching updates over the clique cover in precision
/// form: `K[C,C] += source[C,C]⁻¹ − model_marginal[C,C]⁻¹`. The update keeps
/// the precision exactly zero off the graph, and at the fixed point every
/// clique marginal of the model equals the source's.
pub fn ipf_select(
    source: &CovarianceMatrix,
    edges: &[Edge],
    cfg: &IpfConfig,
) -> Result<CovarianceMatrix, CovselError> {
    let n = source.dim();
    validate_cover(edges, &cfg.clique_cover, n)?;

    // Source clique marginals are fixed; invert them once.
    let source_block_invs: Vec<CovarianceMatrix> = cfg
        .clique_cover
        .iter()
        .map(|c| extract_block(source, c).inverse())
        .collect::<Result<_, _>>()?;

    let mut precision = CovarianceMatrix::identity(n);
    let mut model = CovarianceMatrix::identity(n);
    let mut residual = f64::INFINITY;

    for iteration in 1..=cfg.max_iterations {
        let previous = model.clone();
        for (clique, source_inv) in cfg.clique_cover.iter().zip(&source_block_invs) {
            let marginal_inv = extract_block(&model, clique).inverse()?;
            let mut slot = vec![usize::MAX; n];
            for (a, &v) in clique.iter().enumerate() {
                slot[v] = a;
            }
            precision = CovarianceMatrix::from_fn_sym(n, |i, j| {
                let base = precision.get(i, j);
                let (a, b) = (slot[i], slot[j]);
                if a == usize::MAX || b == usize::MAX {
                    base
                } else {
                    base + source_inv.get(a, b) - marginal_inv.get(a, b)
                }
            });
            model = precision.inverse()?;
        }
        residual = model.max_abs_diff(&previous);
        if residual <= cfg.convergence_tol {
            return Ok(model);
        }
        if iteration == cfg.max_iterations {
            return Err(CovselError::NoConvergence { iterations: iteration, residual });
        }
    }
    Err(CovselError::NoConvergence { iterations: cfg.max_iterations, residual })
}

fn extract_block(m: &CovarianceMatrix, idx: &[usize]) -> CovarianceMatrix {
    CovarianceMatrix::from_fn_sym(idx.len(), |i, j| m.get(idx[i], idx[j]))
}

fn validate_cover(edges: &[Edge], cover: &[Vec<usize>], n: usize) -> Result<(), CovselError> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        if a >= n {
            return Err(CovselError::CliqueOutOfRange { vertex: a, n });
        }
        if b >= n {
            return Err(CovselError::CliqueOutOfRange { vertex: b, n });
        }
        adj[a][b] = true;
        adj[b][a] = true;
    }
    for clique in cover {
        for (i, &a) in clique.iter().enumerate() {
            if a >= n {
                return Err(CovselError::CliqueOutOfRange { vertex: a, n });
            }
            for &b in &clique[i + 1..] {
                if !adj[a][b] {
                    return Err(CovselError::CliqueNotComplete {
                        clique: clique.clone(),
                        missing: (a.min(b), a.max(b)),
                    });
                }
            }
        }
    }
    for &(a, b) in edges {
        let covered = cover.iter().any(|c| c.contains(&a) && c.contains(&b));
        if !covered {
            return Err(CovselError::EdgeNotCovered { edge: (a, b) });
        }
    }
    Ok(())
}
