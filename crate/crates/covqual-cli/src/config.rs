//! Flat key=value config files with command-line override.
//!
//! Keys mirror the long flag names. Blank lines and `#` comments are
//! ignored; unknown keys are rejected so typos fail loudly.

use std::path::Path;

use crate::CliError;

/// Raw option strings from flags or config, before per-command parsing.
/// `None` means "not given"; flag values win over config values.
#[derive(Debug, Default, Clone)]
pub struct RawOpts {
    pub family: Option<String>,
    pub n: Option<String>,
    pub p: Option<String>,
    pub rho: Option<String>,
    pub kappa: Option<String>,
    pub auc_method: Option<String>,
    pub samples: Option<String>,
    pub seed: Option<String>,
    pub out: Option<String>,
}

impl RawOpts {
    /// Fills unset slots from a parsed config file.
    pub fn fill_from(&mut self, other: RawOpts) {
        fn fill(slot: &mut Option<String>, value: Option<String>) {
            if slot.is_none() {
                *slot = value;
            }
        }
        fill(&mut self.family, other.family);
        fill(&mut self.n, other.n);
        fill(&mut self.p, other.p);
        fill(&mut self.rho, other.rho);
        fill(&mut self.kappa, other.kappa);
        fill(&mut self.auc_method, other.auc_method);
        fill(&mut self.samples, other.samples);
        fill(&mut self.seed, other.seed);
        fill(&mut self.out, other.out);
    }
}

pub fn load_config(path: &Path) -> Result<RawOpts, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RawOpts, CliError> {
    let mut opts = RawOpts::default();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Invalid(format!("config line {}: expected key=value", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim().to_string();
        let slot = match key {
            "family" => &mut opts.family,
            "n" => &mut opts.n,
            "p" => &mut opts.p,
            "rho" => &mut opts.rho,
            "kappa" => &mut opts.kappa,
            "auc-method" | "auc_method" => &mut opts.auc_method,
            "samples" => &mut opts.samples,
            "seed" => &mut opts.seed,
            "out" => &mut opts.out,
            _ => {
                return Err(CliError::Invalid(format!(
                    "config line {}: unknown key '{key}'",
                    lineno + 1
                )))
            }
        };
        *slot = Some(value);
    }
    Ok(opts)
}
