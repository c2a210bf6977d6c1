//! Run configuration: key=value bindings from config files and command-line
//! overrides, with all rates expressed in units of the total cavity decay
//! rate (`kappa = 1`).

use std::collections::BTreeMap;
use std::fmt;

use dpa_feedback::classical::ClassicalParams;
use dpa_feedback::params::SystemParams;

/// Configuration failure: exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(message.into()))
}

/// Ordered key=value bindings; insertion source is irrelevant once merged,
/// the map keeps keys sorted for deterministic echoes.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    bindings: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parse a config file: one `key=value` per line, `#` comments, blank
    /// lines ignored. Duplicate keys within one source conflict.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        for (index, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return config_err(format!(
                    "line {}: expected key=value, got `{raw_line}`",
                    index + 1
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return config_err(format!("line {}: empty key or value", index + 1));
            }
            if config.bindings.contains_key(key) {
                return config_err(format!("line {}: duplicate key `{key}`", index + 1));
            }
            config.bindings.insert(key.to_string(), value.to_string());
        }
        Ok(config)
    }

    /// Apply command-line `key=value` overrides (these shadow file values;
    /// repeating a key among the overrides themselves is a conflict).
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), ConfigError> {
        let mut seen = Vec::new();
        for token in overrides {
            let Some((key, value)) = token.split_once('=') else {
                return config_err(format!("expected key=value argument, got `{token}`"));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return config_err(format!("empty key or value in `{token}`"));
            }
            if seen.contains(&key.to_string()) {
                return config_err(format!("duplicate key `{key}` on the command line"));
            }
            seen.push(key.to_string());
            self.bindings.insert(key.to_string(), value.to_string());
        }
        Ok(())
    }

    /// Reject keys outside the allowed set of the chosen subcommand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for key in self.bindings.keys() {
            if !allowed.contains(&key.as_str()) {
                return config_err(format!(
                    "unknown key `{key}` (allowed: {})",
                    allowed.join(", ")
                ));
            }
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.bindings.get(key).map(String::as_str)
    }

    /// Bind or replace one key (used by sweeps to substitute grid values).
    pub fn set(&mut self, key: &str, value: String) {
        self.bindings.insert(key.to_string(), value);
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Numeric value; a `pi` suffix multiplies by pi (`-0.3pi`, `pi`).
    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(text) => parse_f64(text)
                .map(Some)
                .map_err(|e| ConfigError(format!("key `{key}`: {e}"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?
            .map_or_else(|| config_err(format!("missing required key `{key}`")), Ok)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(text) => text
                .parse()
                .map_err(|_| ConfigError(format!("key `{key}`: expected an integer"))),
        }
    }

    /// `start:stop:count` grid specification.
    pub fn grid(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(text) => parse_grid(text)
                .map(Some)
                .map_err(|e| ConfigError(format!("key `{key}`: {e}"))),
        }
    }

    /// `lo:hi` pair.
    pub fn range(&self, key: &str) -> Result<Option<(f64, f64)>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(text) => {
                let parts: Vec<&str> = text.split(':').collect();
                if parts.len() != 2 {
                    return config_err(format!("key `{key}`: expected lo:hi"));
                }
                let lo =
                    parse_f64(parts[0]).map_err(|e| ConfigError(format!("key `{key}`: {e}")))?;
                let hi =
                    parse_f64(parts[1]).map_err(|e| ConfigError(format!("key `{key}`: {e}")))?;
                Ok(Some((lo, hi)))
            }
        }
    }

    /// Mirror rates in kappa = 1 units. `kappa_b`/`kappa_c` must sum to one
    /// (the missing one is filled in); `k0` instead requests the lossless
    /// coupling 2 sqrt(kappa_b kappa_c), resolved to the nearly-one-sided
    /// split with kappa_b >= kappa_c.
    pub fn mirror_rates(&self) -> Result<(f64, f64), ConfigError> {
        let kappa_b = self.f64("kappa_b")?;
        let kappa_c = self.f64("kappa_c")?;
        let k0 = self.f64("k0")?;
        if k0.is_some() && (kappa_b.is_some() || kappa_c.is_some()) {
            return config_err("give either k0 or kappa_b/kappa_c, not both");
        }
        if let Some(k0) = k0 {
            if !(0.0..=1.0).contains(&k0) {
                return config_err(format!("k0 = {k0} outside [0, 1]"));
            }
            let disc = (0.25 - k0 * k0 / 4.0).max(0.0).sqrt();
            return Ok((0.5 + disc, 0.5 - disc));
        }
        match (kappa_b, kappa_c) {
            (None, None) => Ok((0.5, 0.5)),
            (Some(b), None) => {
                if !(0.0..=1.0).contains(&b) {
                    return config_err(format!("kappa_b = {b} outside [0, 1] (kappa = 1 units)"));
                }
                Ok((b, 1.0 - b))
            }
            (None, Some(c)) => {
                if !(0.0..=1.0).contains(&c) {
                    return config_err(format!("kappa_c = {c} outside [0, 1] (kappa = 1 units)"));
                }
                Ok((1.0 - c, c))
            }
            (Some(b), Some(c)) => {
                if (b + c - 1.0).abs() > 1e-9 {
                    return config_err(format!(
                        "kappa_b + kappa_c = {} but the front end works in units of the \
                         total decay rate (sum must be 1)",
                        b + c
                    ));
                }
                Ok((b, c))
            }
        }
    }

    /// Linear-model parameters from the bindings.
    pub fn system_params(&self) -> Result<SystemParams, ConfigError> {
        let (kappa_b, kappa_c) = self.mirror_rates()?;
        SystemParams::builder()
            .kappa_b(kappa_b)
            .kappa_c(kappa_c)
            .loss(self.f64_or("loss", 0.0)?)
            .phi(self.f64_or("phi", 0.0)?)
            .tau(self.f64_or("tau", 0.0)?)
            .delta(self.f64_or("delta", 0.0)?)
            .eps_mag(self.f64_or("eps", 0.0)?)
            .eps_phase(self.f64_or("theta", 0.0)?)
            .build()
            .map_err(|e| ConfigError(e.to_string()))
    }

    /// Classical-model parameters from the bindings.
    pub fn classical_params(&self) -> Result<ClassicalParams, ConfigError> {
        let (kappa_b, kappa_c) = self.mirror_rates()?;
        ClassicalParams::builder()
            .kappa_b(kappa_b)
            .kappa_c(kappa_c)
            .loss(self.f64_or("loss", 0.0)?)
            .phi(self.f64_or("phi", 0.0)?)
            .tau(self.f64_or("tau", 0.0)?)
            .kappa_p(self.f64_or("kappa_p", 1.0)?)
            .x(self.f64_or("x", 0.0)?)
            .build()
            .map_err(|e| ConfigError(e.to_string()))
    }
}

/// Parse a float, allowing a trailing `pi` multiplier.
pub fn parse_f64(text: &str) -> Result<f64, String> {
    let trimmed = text.trim();
    if let Some(prefix) = trimmed.strip_suffix("pi") {
        let factor = match prefix.trim() {
            "" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| format!("`{text}` is not a number"))?,
        };
        return Ok(factor * std::f64::consts::PI);
    }
    trimmed
        .parse::<f64>()
        .map_err(|_| format!("`{text}` is not a number"))
}

/// Parse a `start:stop:count` grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("`{text}` is not a start:stop:count grid"));
    }
    let start = parse_f64(parts[0])?;
    let stop = parse_f64(parts[1])?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| format!("`{}` is not a point count", parts[2]))?;
    if count == 0 {
        return Err("grid needs at least one point".into());
    }
    if count > 1 && stop <= start {
        return Err(format!("grid `{text}` must be increasing"));
    }
    Ok(dpa_feedback::grid::linspace(start, stop, count))
}

/// Whether a raw binding denotes a swept grid.
pub fn is_grid(value: &str) -> bool {
    value.matches(':').count() == 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let config =
            RunConfig::parse("eps=0.75\n# comment\nphi = 0\ntau=1.8833 # inline\n").unwrap();
        assert_eq!(config.raw("eps"), Some("0.75"));
        assert_eq!(config.f64("tau").unwrap(), Some(1.8833));
        assert_eq!(config.f64("phi").unwrap(), Some(0.0));
    }

    #[test]
    fn duplicate_keys_conflict() {
        let err = RunConfig::parse("eps=0.75\neps=0.5\n").unwrap_err();
        assert!(err.0.contains("line 2"), "{}", err.0);
        assert!(err.0.contains("duplicate"), "{}", err.0);
    }

    #[test]
    fn empty_file_plus_overrides() {
        let mut config = RunConfig::parse("").unwrap();
        config
            .apply_overrides(&["eps=0.5".into(), "phi=-0.3pi".into()])
            .unwrap();
        assert_eq!(config.f64("eps").unwrap(), Some(0.5));
        assert!((config.f64("phi").unwrap().unwrap() + 0.3 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn overrides_shadow_file_values() {
        let mut config = RunConfig::parse("eps=0.75\n").unwrap();
        config.apply_overrides(&["eps=0.5".into()]).unwrap();
        assert_eq!(config.f64("eps").unwrap(), Some(0.5));
        let err = RunConfig::parse("")
            .unwrap()
            .apply_overrides(&["a=1".into(), "a=2".into()])
            .unwrap_err();
        assert!(err.0.contains("duplicate"));
    }

    #[test]
    fn malformed_lines_are_located() {
        let err = RunConfig::parse("eps=0.75\nnot a binding\n").unwrap_err();
        assert!(err.0.contains("line 2"), "{}", err.0);
    }

    #[test]
    fn pi_suffix_values() {
        assert_eq!(parse_f64("pi").unwrap(), std::f64::consts::PI);
        assert_eq!(parse_f64("-pi").unwrap(), -std::f64::consts::PI);
        assert!((parse_f64("0.95pi").unwrap() - 0.95 * std::f64::consts::PI).abs() < 1e-15);
        assert!(parse_f64("pie").is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:5:1").unwrap(), vec![2.0]);
        assert!(parse_grid("1:0:5").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(is_grid("0:1:101"));
        assert!(!is_grid("0.5"));
    }

    #[test]
    fn mirror_rate_rules() {
        let config = RunConfig::parse("kappa_b=0.3\n").unwrap();
        assert_eq!(config.mirror_rates().unwrap(), (0.3, 0.7));

        let config = RunConfig::parse("k0=0.5\n").unwrap();
        let (b, c) = config.mirror_rates().unwrap();
        assert!((2.0 * (b * c).sqrt() - 0.5).abs() < 1e-12);
        assert!(b > c);

        let config = RunConfig::parse("k0=0.5\nkappa_b=0.3\n").unwrap();
        assert!(config.mirror_rates().is_err());

        let config = RunConfig::parse("kappa_b=0.6\nkappa_c=0.6\n").unwrap();
        assert!(config.mirror_rates().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let config = RunConfig::parse("epsilon=0.5\n").unwrap();
        assert!(config.check_keys(&["eps"]).is_err());
    }
}
