//! Run configuration. A JSON file supplies defaults and command-line flags
//! override it field by field.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use tfm_core::{AuditConfig, BidVector, Gamma, Mechanism, Money, Property, ScenarioSpace, Verdict};

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mechanism: Option<Mechanism>,
    #[serde(default)]
    pub properties: Vec<Property>,
    pub gamma: Option<Gamma>,
    pub c: Option<usize>,
    pub bids: Option<Vec<Money>>,
    pub scenario_space: Option<ScenarioSpace>,
    /// Overrides for the audit search.
    pub audit: Option<AuditConfig>,
    /// Expected verdicts, one per property or a single one for all.
    #[serde(default)]
    pub expect: Vec<String>,
    pub report: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n: Option<u64>,
    #[serde(default)]
    pub only: Vec<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        parse_json(&text, &format!("config {}", path.display()))
    }

    pub fn bid_vector(&self) -> Result<Option<BidVector>, CliError> {
        self.bids
            .clone()
            .map(|b| BidVector::new(b).map_err(|e| CliError::Config(format!("bids: {e}"))))
            .transpose()
    }

    pub fn require_mechanism(&self) -> Result<&Mechanism, CliError> {
        self.mechanism
            .as_ref()
            .ok_or_else(|| CliError::Config("mechanism: required (pass --mechanism)".into()))
    }

    /// Bid vectors to run over: the single `bids` vector if given, otherwise
    /// the scenario space, otherwise the default acceptance grid.
    pub fn vectors(&self) -> Result<Vec<BidVector>, CliError> {
        if let Some(v) = self.bid_vector()? {
            return Ok(vec![v]);
        }
        let space = self.scenario_space.clone().unwrap_or_else(ScenarioSpace::acceptance);
        space.vectors().map_err(|e| CliError::Config(format!("scenario_space: {e}")))
    }

    pub fn audit_config(&self) -> Result<AuditConfig, CliError> {
        let mut cfg = self.audit.clone().unwrap_or_default();
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        cfg.validate().map_err(|e| CliError::Config(format!("audit: {e}")))?;
        Ok(cfg)
    }

    /// Expected verdicts aligned with `properties`.
    pub fn expected_verdicts(&self) -> Result<Vec<Option<Verdict>>, CliError> {
        let n = self.properties.len();
        let parsed = self
            .expect
            .iter()
            .map(|s| parse_verdict(s))
            .collect::<Result<Vec<_>, _>>()?;
        match parsed.len() {
            0 => Ok(vec![None; n]),
            1 => Ok(vec![Some(parsed[0]); n]),
            k if k == n => Ok(parsed.into_iter().map(Some).collect()),
            k => Err(CliError::Config(format!("expect: {k} verdicts for {n} properties"))),
        }
    }
}

pub fn parse_verdict(s: &str) -> Result<Verdict, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "pass" | "pass_on_grid" => Ok(Verdict::PassOnGrid),
        "fail" => Ok(Verdict::Fail),
        other => Err(CliError::Config(format!("expect: unknown verdict {other:?} (use pass or fail)"))),
    }
}

/// `--mechanism` takes either a path to a JSON file or the JSON itself.
pub fn load_mechanism(arg: &str) -> Result<Mechanism, CliError> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        parse_json(arg, "mechanism")
    } else {
        let text = read(Path::new(arg))?;
        parse_json(&text, &format!("mechanism {arg}"))
    }
}

pub fn load_scenario_space(path: &Path) -> Result<ScenarioSpace, CliError> {
    let text = read(path)?;
    parse_json(&text, &format!("scenario space {}", path.display()))
}

pub fn parse_csv<T: std::str::FromStr>(s: &str, field: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|e| CliError::Config(format!("{field}: {p:?}: {e}")))
        })
        .collect()
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses JSON and names the path of the offending field on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(format!("{what}: {inner}"))
        } else {
            CliError::Config(format!("{what}: field `{path}`: {inner}"))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_mechanism() {
        let m = load_mechanism(r#"{"kind":"posted_price_no_burn","reserve":"3"}"#).unwrap();
        assert_eq!(m, Mechanism::posted_price_no_burn(Money::from_units(3)).unwrap());
    }

    #[test]
    fn bad_mechanism_names_the_field() {
        let err = load_mechanism(r#"{"kind":"first_price","blocksize":3}"#).unwrap_err();
        assert!(err.to_string().contains("blocksize"), "{err}");
        let err = load_mechanism(r#"{"kind":"first_price","block_size":"x"}"#).unwrap_err();
        assert!(err.to_string().contains("\"x\""), "{err}");
        let err = load_mechanism(r#"{"kind":"second_price","block_size":1}"#).unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{err}");
    }

    #[test]
    fn unknown_config_field_is_named() {
        let err = parse_json::<RunConfig>(r#"{"gama":"1/2"}"#, "config").unwrap_err();
        assert!(err.to_string().contains("gama"), "{err}");
    }

    #[test]
    fn expectations_broadcast() {
        let cfg = RunConfig {
            properties: vec![Property::Uic, Property::Mic],
            expect: vec!["pass".into()],
            ..RunConfig::default()
        };
        assert_eq!(cfg.expected_verdicts().unwrap(), vec![Some(Verdict::PassOnGrid); 2]);
        let cfg = RunConfig {
            expect: vec!["pass".into(), "fail".into(), "pass".into()],
            ..cfg
        };
        assert!(cfg.expected_verdicts().is_err());
    }

    #[test]
    fn vectors_prefer_bids() {
        let cfg = RunConfig {
            bids: Some(vec![Money::from_units(3)]),
            ..RunConfig::default()
        };
        assert_eq!(cfg.vectors().unwrap(), vec![BidVector::from_units(&[3])]);
        let cfg = RunConfig {
            bids: Some(vec![Money::from_units(-3)]),
            ..RunConfig::default()
        };
        assert!(cfg.vectors().is_err());
    }
}
