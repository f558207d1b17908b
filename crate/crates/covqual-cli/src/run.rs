//! Grid construction, per-point analysis, and CSV rendering for the
//! experiment commands.
//!
//! Grid points are computed in a worker pool; output rows are collected in
//! deterministic grid order regardless of which worker finished first, so a
//! fixed config and seed always produce identical bytes.

use rayon::prelude::*;

use covqual::detect::{
    auc_monte_carlo, auc_quadrature, auc_upper_bound, cam, kl_divergence, llrt_weights, reverse_kl,
    AucResult,
};
use covqual::models::{chain_model, star_model, toeplitz_source, ToeplitzSpec};

use crate::csvout::{fmt_sig12, CSV_HEADER, CSV_HEADER_PROPORTIONAL};
use crate::CliError;

/// Largest dimension the auto method still sends to quadrature; beyond it
/// the component count makes Monte Carlo the default.
pub const AUTO_QUADRATURE_MAX_N: usize = 64;

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 42;
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Star,
    Chain,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Star => "star",
            Family::Chain => "chain",
        }
    }
}

/// Which families a sweep covers, in output order.
pub fn parse_families(s: &str) -> Result<Vec<Family>, CliError> {
    match s {
        "star" => Ok(vec![Family::Star]),
        "chain" => Ok(vec![Family::Chain]),
        "both" => Ok(vec![Family::Star, Family::Chain]),
        other => {
            Err(CliError::Invalid(format!("family must be star, chain, or both; got '{other}'")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodChoice {
    Auto,
    MonteCarlo,
    Quadrature,
}

impl MethodChoice {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "mc" | "monte-carlo" | "monte_carlo" => Ok(MethodChoice::MonteCarlo),
            "quadrature" | "quad" => Ok(MethodChoice::Quadrature),
            other => Err(CliError::Invalid(format!(
                "auc-method must be auto, mc, or quadrature; got '{other}'"
            ))),
        }
    }
}

/// Fully resolved AUC evaluation plan for one grid point.
#[derive(Debug, Clone, Copy)]
pub struct AucPlan {
    pub method: MethodChoice,
    pub samples: usize,
    pub seed: u64,
}

impl AucPlan {
    fn evaluate(&self, weights: &covqual::LlrtWeights, n: usize) -> Result<AucResult, CliError> {
        let use_quadrature = match self.method {
            MethodChoice::Quadrature => true,
            MethodChoice::MonteCarlo => false,
            MethodChoice::Auto => n <= AUTO_QUADRATURE_MAX_N,
        };
        if use_quadrature {
            Ok(auc_quadrature(weights)?)
        } else {
            Ok(auc_monte_carlo(weights, self.samples, self.seed))
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GridPoint {
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub point: GridPoint,
    pub kl: f64,
    pub reverse_kl: f64,
    pub auc: AucResult,
    pub upper_bound: f64,
}

fn compute_row(point: &GridPoint, plan: &AucPlan) -> Result<Row, CliError> {
    let spec = ToeplitzSpec::new(point.n, point.rho);
    let source = toeplitz_source(&spec)?;
    let model = match point.family {
        Family::Star => star_model(&spec, point.p)?,
        Family::Chain => chain_model(&spec, point.p)?,
    };
    let c = cam(&source, &model)?;
    let kl = kl_divergence(&c);
    let weights = llrt_weights(&c);
    let auc = plan.evaluate(&weights, point.n)?;
    Ok(Row { point: *point, kl, reverse_kl: reverse_kl(&c), auc, upper_bound: auc_upper_bound(kl) })
}

fn render_row(row: &Row, asymptotic_bound: Option<f64>) -> String {
    let mut line = format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        row.point.family.name(),
        row.point.n,
        row.point.p,
        fmt_sig12(row.point.rho),
        fmt_sig12(row.kl),
        fmt_sig12(row.reverse_kl),
        fmt_sig12(row.auc.value),
        fmt_sig12(row.auc.std_error),
        row.auc.method.as_str(),
        fmt_sig12(row.upper_bound),
        fmt_sig12(1.0 - row.auc.value),
    );
    if let Some(bound) = asymptotic_bound {
        line.push(',');
        line.push_str(&fmt_sig12(bound));
    }
    line.push('\n');
    line
}

/// Runs every grid point in the pool and renders rows in grid order.
pub fn render_sweep(
    points: &[GridPoint],
    plan: &AucPlan,
    asymptotic_bound: Option<f64>,
) -> Result<String, CliError> {
    warn_on_negative_rho(points.iter().map(|pt| pt.rho));
    let header = if asymptotic_bound.is_some() { CSV_HEADER_PROPORTIONAL } else { CSV_HEADER };
    let results: Vec<Result<Row, CliError>> =
        points.par_iter().map(|pt| compute_row(pt, plan)).collect();
    let mut csv = String::with_capacity(results.len() * 160 + header.len() + 1);
    csv.push_str(header);
    csv.push('\n');
    for result in results {
        csv.push_str(&render_row(&result?, asymptotic_bound));
    }
    Ok(csv)
}

fn warn_on_negative_rho(rhos: impl IntoIterator<Item = f64>) {
    if rhos.into_iter().any(|r| r < 0.0) {
        eprintln!(
            "WARNING: negative rho is outside the validated regime; results are computed but unexercised by the reference experiments"
        );
    }
}

/// Grid for `sweep-order`: rows ordered by (family, p, n, rho).
pub fn order_grid(
    families: &[Family],
    n_values: &[usize],
    p_values: &[usize],
    rho_values: &[f64],
) -> Result<Vec<GridPoint>, CliError> {
    if let (Some(&max_p), Some(&min_n)) = (p_values.iter().max(), n_values.iter().min()) {
        if max_p >= min_n {
            return Err(CliError::Invalid(format!(
                "fixed order p = {max_p} must be below every n (min n = {min_n})"
            )));
        }
    }
    let mut points = Vec::new();
    for &family in families {
        for &p in p_values {
            for &n in n_values {
                for &rho in rho_values {
                    points.push(GridPoint { family, n, p, rho });
                }
            }
        }
    }
    Ok(points)
}

/// Grid for `sweep-proportional`: p = ceil(n/kappa), ordered by
/// (family, rho, n).
pub fn proportional_grid(
    families: &[Family],
    n_values: &[usize],
    rho_values: &[f64],
    kappa: f64,
) -> Result<Vec<GridPoint>, CliError> {
    if kappa.is_nan() || kappa <= 1.0 {
        return Err(CliError::Invalid(format!("kappa = {kappa} must be greater than 1")));
    }
    let mut points = Vec::new();
    for &family in families {
        for &rho in rho_values {
            for &n in n_values {
                let p = (n as f64 / kappa).ceil() as usize;
                let p = p.max(1);
                if p > n.saturating_sub(1) {
                    return Err(CliError::Invalid(format!(
                        "ceil(n/kappa) = {p} exceeds n-1 = {} at n = {n}; kappa too close to 1",
                        n.saturating_sub(1)
                    )));
                }
                points.push(GridPoint { family, n, p, rho });
            }
        }
    }
    Ok(points)
}

/// Grid for `divergence-map`: one n and rho, several orders; ordered by
/// (family, p).
pub fn divergence_grid(
    families: &[Family],
    n: usize,
    p_values: &[usize],
    rho: f64,
) -> Result<Vec<GridPoint>, CliError> {
    if let Some(&bad) = p_values.iter().find(|&&p| p >= n) {
        return Err(CliError::Invalid(format!("order p = {bad} must be below n = {n}")));
    }
    let mut points = Vec::new();
    for &family in families {
        for &p in p_values {
            points.push(GridPoint { family, n, p, rho });
        }
    }
    Ok(points)
}

/// Single-shot analysis report: one `key: value` line per quantity.
pub fn render_analyze(
    family: Family,
    n: usize,
    p: usize,
    rho: f64,
    samples: usize,
    seed: u64,
) -> Result<String, CliError> {
    warn_on_negative_rho([rho]);
    let spec = ToeplitzSpec::new(n, rho);
    let source = toeplitz_source(&spec)?;
    let model = match family {
        Family::Star => star_model(&spec, p)?,
        Family::Chain => chain_model(&spec, p)?,
    };
    let c = cam(&source, &model)?;
    let kl = kl_divergence(&c);
    let weights = llrt_weights(&c);
    let mc = auc_monte_carlo(&weights, samples, seed);
    let quad = auc_quadrature(&weights)?;
    let mut report = String::new();
    for (key, value) in [
        ("family", family.name().to_string()),
        ("n", n.to_string()),
        ("p", p.to_string()),
        ("rho", fmt_sig12(rho)),
        ("kl", fmt_sig12(kl)),
        ("reverse_kl", fmt_sig12(reverse_kl(&c))),
        ("cam_trace", fmt_sig12(c.trace())),
        ("cam_log_det", fmt_sig12(c.log_det())),
        ("auc_monte_carlo", fmt_sig12(mc.value)),
        ("auc_mc_std_error", fmt_sig12(mc.std_error)),
        ("auc_mc_samples", mc.samples_or_nodes.to_string()),
        ("auc_mc_seed", seed.to_string()),
        ("auc_quadrature", fmt_sig12(quad.value)),
        ("auc_upper_bound", fmt_sig12(auc_upper_bound(kl))),
    ] {
        report.push_str(key);
        report.push_str(": ");
        report.push_str(&value);
        report.push('\n');
    }
    Ok(report)
}

/// Comma lists plus `lo:hi[:step]` ranges; an empty string is an empty list.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.contains(':') {
            let fields: Vec<&str> = part.split(':').collect();
            if fields.len() > 3 {
                return Err(CliError::Invalid(format!("bad range '{part}'")));
            }
            let lo: usize = parse_int(fields[0])?;
            let hi: usize = parse_int(fields[1])?;
            let step: usize = if fields.len() == 3 { parse_int(fields[2])? } else { 1 };
            if step == 0 || hi < lo {
                return Err(CliError::Invalid(format!("bad range '{part}'")));
            }
            out.extend((lo..=hi).step_by(step));
        } else {
            out.push(parse_int(part)?);
        }
    }
    Ok(out)
}

fn parse_int(s: &str) -> Result<usize, CliError> {
    s.trim().parse().map_err(|_| CliError::Invalid(format!("expected an integer, got '{s}'")))
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| CliError::Invalid(format!("expected a number, got '{part}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrature_plan() -> AucPlan {
        AucPlan { method: MethodChoice::Quadrature, samples: DEFAULT_SAMPLES, seed: DEFAULT_SEED }
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_usize_list("1,3,5").unwrap(), vec![1, 3, 5]);
        assert_eq!(parse_usize_list("10:20:5").unwrap(), vec![10, 15, 20]);
        assert_eq!(parse_usize_list("2:4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_usize_list("").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_usize_list("5,8:10").unwrap(), vec![5, 8, 9, 10]);
        assert!(parse_usize_list("5:1").is_err());
        assert!(parse_usize_list("x").is_err());
        assert_eq!(parse_f64_list("0.1,0.9").unwrap(), vec![0.1, 0.9]);
    }

    #[test]
    fn empty_grid_renders_header_only() {
        let points = order_grid(&[Family::Star], &[], &[1], &[0.9]).unwrap();
        let csv = render_sweep(&points, &quadrature_plan(), None).unwrap();
        assert_eq!(csv, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn order_grid_rejects_large_p() {
        assert!(order_grid(&[Family::Star], &[5, 10], &[1, 5], &[0.9]).is_err());
    }

    #[test]
    fn sweep_rows_in_grid_order_and_schema() {
        let points = order_grid(&[Family::Star, Family::Chain], &[4, 6], &[1, 2], &[0.5]).unwrap();
        let csv = render_sweep(&points, &quadrature_plan(), None).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 8);
        assert!(lines[1].starts_with("star,4,1,0.5,"));
        assert!(lines[2].starts_with("star,6,1,0.5,"));
        assert!(lines[3].starts_with("star,4,2,0.5,"));
        assert!(lines[8].starts_with("chain,6,2,0.5,"));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 11);
            assert!(line.contains(",quadrature,"));
        }
    }

    #[test]
    fn proportional_grid_orders_and_caps() {
        let points = proportional_grid(&[Family::Star], &[10, 25], &[0.1, 0.9], 10.0).unwrap();
        let expect: Vec<(usize, usize, f64)> =
            vec![(10, 1, 0.1), (25, 3, 0.1), (10, 1, 0.9), (25, 3, 0.9)];
        let got: Vec<(usize, usize, f64)> = points.iter().map(|pt| (pt.n, pt.p, pt.rho)).collect();
        assert_eq!(got, expect);
        assert!(proportional_grid(&[Family::Star], &[10], &[0.9], 1.0).is_err());
        assert!(proportional_grid(&[Family::Star], &[2], &[0.9], 1.01).is_err());
    }

    #[test]
    fn proportional_rows_carry_bound_column() {
        let points = proportional_grid(&[Family::Chain], &[10], &[0.9], 10.0).unwrap();
        let bound = covqual::detect::asymptotic_kl_bound(10.0).unwrap();
        let csv = render_sweep(&points, &quadrature_plan(), Some(bound)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER_PROPORTIONAL);
        assert_eq!(lines[1].split(',').count(), 12);
        assert!(lines[1].ends_with(&fmt_sig12(bound)));
    }

    #[test]
    fn divergence_grid_shares_kl_across_families() {
        let points = divergence_grid(&[Family::Star, Family::Chain], 15, &[1, 3], 0.9).unwrap();
        let csv = render_sweep(&points, &quadrature_plan(), None).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        // star p=1, star p=3, chain p=1, chain p=3
        let kl = |line: &str| line.split(',').nth(4).unwrap().to_string();
        assert_eq!(kl(lines[1]), kl(lines[3]));
        assert_eq!(kl(lines[2]), kl(lines[4]));
        // higher order approximates better: smaller AUC
        let auc = |line: &str| line.split(',').nth(6).unwrap().parse::<f64>().unwrap();
        assert!(auc(lines[2]) < auc(lines[1]));
        assert!(auc(lines[4]) < auc(lines[3]));
    }

    #[test]
    fn degenerate_analyze_report() {
        let report = render_analyze(Family::Star, 3, 2, 0.5, 2000, 42).unwrap();
        assert!(report.contains("kl: 0\n"));
        assert!(report.contains("auc_quadrature: 0.5\n"));
        assert!(report.contains("auc_monte_carlo: 0.5\n"));
        assert!(report.contains("cam_trace: 3\n"));
    }

    #[test]
    fn analyze_matches_closed_form_kl() {
        let report = render_analyze(Family::Star, 3, 1, 0.5, 2000, 42).unwrap();
        // log(1.5) + half log(1/2) = 0.05889151782819...
        assert!(report.contains("kl: 0.0588915178282\n"), "report was:\n{report}");
    }

    #[test]
    fn auto_plan_switches_on_dimension() {
        let plan = AucPlan { method: MethodChoice::Auto, samples: 2000, seed: 42 };
        let spec = ToeplitzSpec::new(10, 0.9);
        let source = toeplitz_source(&spec).unwrap();
        let model = star_model(&spec, 1).unwrap();
        let w = llrt_weights(&cam(&source, &model).unwrap());
        let small = plan.evaluate(&w, 10).unwrap();
        assert_eq!(small.method, covqual::AucMethod::Quadrature);
        let big = plan.evaluate(&w, 65).unwrap();
        assert_eq!(big.method, covqual::AucMethod::MonteCarlo);
    }
}
