//! Run configuration: defaults, `key = value` config files and flags.

use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use ybx_core::identity_suite::{CaseTag, ReportFormat, SamplePlan};

/// A configuration error, reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Settings that may come from a config file or from flags. `None` leaves
/// the lower-precedence value in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub check: Option<Vec<String>>,
    pub n: Option<Vec<usize>>,
    pub case: Option<Vec<CaseTag>>,
    pub tau: Option<Vec<C64>>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub report: Option<PathBuf>,
    pub format: Option<ReportFormat>,
}

impl Overrides {
    /// Fields of `other` that are set replace those of `self`.
    pub fn merge(self, other: Overrides) -> Overrides {
        Overrides {
            check: other.check.or(self.check),
            n: other.n.or(self.n),
            case: other.case.or(self.case),
            tau: other.tau.or(self.tau),
            seed: other.seed.or(self.seed),
            samples: other.samples.or(self.samples),
            tol: other.tol.or(self.tol),
            report: other.report.or(self.report),
            format: other.format.or(self.format),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        match key {
            "check" => self.check = Some(split(value).map(str::to_string).collect()),
            "n" => self.n = Some(list(value, "n")?),
            "case" => self.case = Some(list(value, "case")?),
            "tau" => self.tau = Some(split(value).map(parse_tau).collect::<Result<_, _>>()?),
            "seed" => self.seed = Some(scalar(value, "seed")?),
            "samples" => self.samples = Some(scalar(value, "samples")?),
            "tol" => self.tol = Some(parse_tol(value)?),
            "report" => self.report = Some(PathBuf::from(value)),
            "format" => self.format = Some(scalar(value, "format")?),
            other => return Err(UsageError(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn from_config_text(text: &str) -> Result<Overrides, UsageError> {
        let mut out = Overrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected key = value", i + 1)))?;
            out.set(key.trim(), value.trim())
                .map_err(|e| UsageError(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(out)
    }
}

fn split(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn scalar<T: FromStr>(value: &str, key: &str) -> Result<T, UsageError> {
    value.trim().parse().map_err(|_| UsageError(format!("invalid value {value:?} for {key}")))
}

fn list<T: FromStr>(value: &str, key: &str) -> Result<Vec<T>, UsageError> {
    split(value).map(|v| scalar(v, key)).collect()
}

fn parse_tol(value: &str) -> Result<f64, UsageError> {
    let t: f64 = scalar(value, "tol")?;
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(UsageError(format!("tolerance must be positive, got {value}")))
    }
}

/// Parses a modulus written as `re+imi` or `re-imi`, for example `0.3+0.8i`.
pub fn parse_tau(s: &str) -> Result<C64, UsageError> {
    let bad = || UsageError(format!("invalid tau {s:?}: expected re+imi, e.g. 0.3+0.8i"));
    let body = s.strip_suffix('i').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].trim_start_matches('+').parse().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub checks: Vec<String>,
    pub plan: SamplePlan,
    pub tol: Option<f64>,
    pub report: Option<PathBuf>,
    pub format: ReportFormat,
}

impl RunConfig {
    pub fn resolve(o: Overrides) -> Result<RunConfig, UsageError> {
        let mut plan = SamplePlan::default();
        if let Some(n) = o.n {
            plan.ns = n;
        }
        if let Some(c) = o.case {
            plan.cases = c;
        }
        if let Some(t) = o.tau {
            plan.taus = t;
        }
        if let Some(s) = o.seed {
            plan.seed = s;
        }
        if let Some(s) = o.samples {
            plan.count = s;
        }
        plan.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(RunConfig {
            checks: o.check.unwrap_or_default(),
            plan,
            tol: o.tol,
            report: o.report,
            format: o.format.unwrap_or(ReportFormat::Json),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_parsing_is_strict() {
        assert_eq!(parse_tau("0+1i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_tau("0.3+0.8i").unwrap(), C64::new(0.3, 0.8));
        assert_eq!(parse_tau("-0.5-2e-1i").unwrap(), C64::new(-0.5, -0.2));
        assert_eq!(parse_tau("1e-1+1E+0i").unwrap(), C64::new(0.1, 1.0));
        for bad in ["i", "1i", "0.3+0.8", "0.3+0.8j", "a+bi", "0.3++0.8i", "0.3+-0.8i", " 0+1i", "0+1i "] {
            assert!(parse_tau(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_text_and_precedence() {
        let file = Overrides::from_config_text("# run\nseed = 5\nsamples = 7\nn = 2, 3\ntau = 0+1i\ncase = elliptic\n").unwrap();
        let flags = Overrides { seed: Some(9), ..Overrides::default() };
        let cfg = RunConfig::resolve(file.merge(flags)).unwrap();
        assert_eq!(cfg.plan.seed, 9);
        assert_eq!(cfg.plan.count, 7);
        assert_eq!(cfg.plan.ns, vec![2, 3]);
        assert_eq!(cfg.plan.cases, vec![CaseTag::Elliptic]);
        assert_eq!(cfg.format, ReportFormat::Json);
    }

    #[test]
    fn config_errors_name_the_line() {
        let e = Overrides::from_config_text("seed = 1\nbogus = 2\n").unwrap_err();
        assert!(e.0.contains("line 2"));
        assert!(Overrides::from_config_text("seed 1").is_err());
        assert!(Overrides::from_config_text("tol = -1").is_err());
        assert!(RunConfig::resolve(Overrides { samples: Some(0), ..Overrides::default() }).is_err());
    }
}
