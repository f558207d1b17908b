//! CSV schema and number formatting for sweep output.
//!
//! All real-valued columns carry 12 significant digits in a %g-style
//! rendering, so output bytes are deterministic for a fixed config and seed.

pub const CSV_HEADER: &str =
    "family,n,p,rho,kl,reverse_kl,auc,auc_stderr,auc_method,auc_upper_bound,one_minus_auc";

/// Proportional sweeps append the asymptotic KL bound for the chosen kappa.
pub const CSV_HEADER_PROPORTIONAL: &str =
    "family,n,p,rho,kl,reverse_kl,auc,auc_stderr,auc_method,auc_upper_bound,one_minus_auc,kl_asymptotic_bound";

/// Formats with 12 significant digits: fixed notation for moderate
/// exponents, scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("{:e} always carries an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_values() {
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(-0.0), "0");
        assert_eq!(fmt_sig12(1.0), "1");
        assert_eq!(fmt_sig12(0.9), "0.9");
        assert_eq!(fmt_sig12(-2.5), "-2.5");
        assert_eq!(fmt_sig12(42.0), "42");
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig12(0.058891486898421), "0.0588914868984");
        assert_eq!(fmt_sig12(0.1 + 0.2), "0.3");
        assert_eq!(fmt_sig12(2.0 / 3.0), "0.666666666667");
    }

    #[test]
    fn scientific_for_extreme_exponents() {
        assert_eq!(fmt_sig12(1e-5), "1e-5");
        assert_eq!(fmt_sig12(1.23456789012345e14), "1.23456789012e14");
        assert_eq!(fmt_sig12(-3.5e-9), "-3.5e-9");
        assert_eq!(fmt_sig12(1e12), "1e12");
    }

    #[test]
    fn fixed_notation_boundaries() {
        assert_eq!(fmt_sig12(1e-4), "0.0001");
        assert_eq!(fmt_sig12(999999999999.0), "999999999999");
        assert_eq!(fmt_sig12(0.5), "0.5");
    }

    #[test]
    fn header_column_counts_differ_by_one() {
        assert_eq!(CSV_HEADER.split(',').count(), 11);
        assert_eq!(CSV_HEADER_PROPORTIONAL.split(',').count(), 12);
        assert!(CSV_HEADER_PROPORTIONAL.starts_with(CSV_HEADER));
    }
}
