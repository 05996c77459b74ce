use std::fmt;

use thiserror::Error;

/// When DPLL(MAPF) checks partial assignments: fractions of assigned
/// variables in `(0, 1]`, strictly increasing. A check at the total
/// assignment always happens in addition.
#[derive(Debug, Clone, PartialEq)]
pub struct DpllConfig {
    pub name: String,
    pub check_points: Vec<f64>,
}

impl Eq for DpllConfig {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("`{0}` is not a fraction")]
    BadFraction(String),
    #[error("check point {0} is outside (0, 1]")]
    OutOfRange(String),
    #[error("check points must be strictly increasing")]
    NotIncreasing,
}

impl DpllConfig {
    /// Presets compared in the benchmark: `1/2 3/4`, `1/3 2/3` and `2/3`.
    pub fn standard_presets() -> Vec<DpllConfig> {
        ["1/2 3/4", "1/3 2/3", "2/3"]
            .iter()
            .map(|s| DpllConfig::parse(s).expect("preset parses"))
            .collect()
    }

    /// Standard presets plus `1/2 2/3`.
    pub fn all_presets() -> Vec<DpllConfig> {
        let mut v = DpllConfig::standard_presets();
        v.insert(1, DpllConfig::parse("1/2 2/3").expect("preset parses"));
        v
    }

    /// Check only at the total assignment.
    pub fn final_only() -> Self {
        DpllConfig {
            name: "final".into(),
            check_points: Vec::new(),
        }
    }

    /// Parses fractions separated by commas or whitespace, each either `p/q`
    /// or a decimal. `final` (or an empty string) means no partial checks.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let tokens: Vec<&str> = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() || tokens == ["final"] {
            return Ok(DpllConfig::final_only());
        }
        let mut points = Vec::with_capacity(tokens.len());
        for tok in &tokens {
            let value = match tok.split_once('/') {
                Some((p, q)) => {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| ConfigError::BadFraction(tok.to_string()))?;
                    let q: f64 = q
                        .parse()
                        .map_err(|_| ConfigError::BadFraction(tok.to_string()))?;
                    p / q
                }
                None => tok
                    .parse()
                    .map_err(|_| ConfigError::BadFraction(tok.to_string()))?,
            };
            if !(value > 0.0 && value <= 1.0) {
                return Err(ConfigError::OutOfRange(tok.to_string()));
            }
            points.push(value);
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::NotIncreasing);
        }
        Ok(DpllConfig {
            name: tokens.join(" "),
            check_points: points,
        })
    }
}

impl fmt::Display for DpllConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let p = DpllConfig::standard_presets();
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].check_points, vec![0.5, 0.75]);
        assert_eq!(p[1].name, "1/3 2/3");
        assert_eq!(p[2].check_points, vec![2.0 / 3.0]);
        assert_eq!(DpllConfig::all_presets()[1].name, "1/2 2/3");
    }

    #[test]
    fn parsing() {
        assert_eq!(DpllConfig::parse("1/2,3/4").unwrap().name, "1/2 3/4");
        assert_eq!(DpllConfig::parse("0.25").unwrap().check_points, vec![0.25]);
        assert_eq!(DpllConfig::parse("").unwrap(), DpllConfig::final_only());
        assert_eq!(
            DpllConfig::parse("3/4 1/2"),
            Err(ConfigError::NotIncreasing)
        );
        assert!(matches!(
            DpllConfig::parse("3/2"),
            Err(ConfigError::OutOfRange(_))
        ));
        assert!(matches!(
            DpllConfig::parse("x"),
            Err(ConfigError::BadFraction(_))
        ));
    }
}
