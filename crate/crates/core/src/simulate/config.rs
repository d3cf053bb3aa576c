//! Experiment specification as read from JSON config files. Unknown keys are
//! rejected so config typos fail loudly before any compute starts.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::simulate::gen::{DesignKind, DesignSpec, NoiseSpec, SignalKind, SignalSpec};
use crate::simulate::harness::{Rule, RunSpec};

pub const VALID_RULE_NAMES: [&str; 7] = [
    "tau-true-noise",
    "tau-estimated-noise",
    "two-step",
    "hdaic",
    "oracle-classical",
    "oracle-balanced",
    "lasso-cv",
];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub signal: SignalConfig,
    pub design: DesignConfig,
    pub noise: NoiseConfig,
    pub n: usize,
    pub p: usize,
    pub runs: usize,
    pub seed: u64,
    pub rules: Vec<RuleConfig>,
    #[serde(default)]
    pub m_max: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub kind: String,
    #[serde(default)]
    pub l1_target: Option<f64>,
    #[serde(default)]
    pub rescale_factor: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub kind: String,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: String,
    #[serde(default)]
    pub sigma_sq: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    pub name: String,
    #[serde(default)]
    pub params: RuleParams,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleParams {
    #[serde(default)]
    pub c_tau: Option<f64>,
    #[serde(default)]
    pub lambda0_factor: Option<f64>,
    #[serde(default)]
    pub c_aic: Option<f64>,
    #[serde(default)]
    pub c_hdaic: Option<f64>,
    #[serde(default)]
    pub m_cap: Option<usize>,
    #[serde(default)]
    pub folds: Option<usize>,
    #[serde(default)]
    pub grid_size: Option<usize>,
}

impl RuleConfig {
    pub fn to_rule(&self) -> Result<Rule> {
        let p = &self.params;
        match self.name.as_str() {
            "tau-true-noise" => Ok(Rule::TauTrueNoise {
                c_tau: p.c_tau.unwrap_or(0.0),
            }),
            "tau-estimated-noise" => Ok(Rule::TauEstimatedNoise {
                c_tau: p.c_tau.unwrap_or(0.0),
                lambda0_factor: p.lambda0_factor.unwrap_or(1.0),
            }),
            "two-step" => Ok(Rule::TwoStep {
                c_tau: p.c_tau.unwrap_or(0.0),
                lambda0_factor: p.lambda0_factor.unwrap_or(0.5),
                c_aic: p.c_aic.unwrap_or(2.0),
            }),
            "hdaic" => Ok(Rule::Hdaic {
                c_hdaic: p.c_hdaic.unwrap_or(2.0),
                m_cap: p.m_cap,
            }),
            "oracle-classical" => Ok(Rule::OracleClassical),
            "oracle-balanced" => Ok(Rule::OracleBalanced),
            "lasso-cv" => Ok(Rule::LassoCv {
                folds: p.folds.unwrap_or(5),
                grid_size: p.grid_size.unwrap_or(100),
            }),
            other => Err(Error::contract(format!(
                "unknown rule '{other}'; valid rules: {}",
                VALID_RULE_NAMES.join(", ")
            ))),
        }
    }
}

impl ExperimentConfig {
    /// Validate the config and lower it into a run specification.
    pub fn to_run_spec(&self) -> Result<RunSpec> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::contract("n and p must be positive"));
        }
        if self.runs == 0 {
            return Err(Error::contract("runs must be positive"));
        }
        if self.rules.is_empty() {
            return Err(Error::contract("at least one rule is required"));
        }

        let kind = SignalKind::parse(&self.signal.kind)?;
        let noise = match self.noise.kind.as_str() {
            "gaussian" => {
                let sigma_sq = self.noise.sigma_sq.unwrap_or(1.0);
                if sigma_sq <= 0.0 {
                    return Err(Error::contract("gaussian noise needs sigma_sq > 0"));
                }
                NoiseSpec::Gaussian { sigma_sq }
            }
            "classification" => {
                if self.noise.sigma_sq.is_some() {
                    return Err(Error::contract(
                        "sigma_sq is not a classification-noise parameter",
                    ));
                }
                NoiseSpec::Classification
            }
            other => {
                return Err(Error::contract(format!(
                    "unknown noise kind '{other}' (expected gaussian or classification)"
                )))
            }
        };

        let rescale = match (&noise, self.signal.rescale_factor) {
            (NoiseSpec::Classification, None) => Some(kind.default_classification_rescale()),
            (_, explicit) => explicit,
        };
        let signal = SignalSpec {
            kind,
            l1_target: self.signal.l1_target.unwrap_or(10.0),
            rescale_factor: rescale,
        };

        let design_kind = match self.design.kind.as_str() {
            "uncorrelated" => {
                if self.design.a.is_some() || self.design.b.is_some() {
                    return Err(Error::contract(
                        "a and b are only valid for the banded design",
                    ));
                }
                DesignKind::Uncorrelated
            }
            "banded" => DesignKind::Banded {
                a: self.design.a.unwrap_or(0.4),
                b: self.design.b.unwrap_or(0.1),
            },
            other => {
                return Err(Error::contract(format!(
                    "unknown design kind '{other}' (expected uncorrelated or banded)"
                )))
            }
        };

        let rules = self
            .rules
            .iter()
            .map(|r| r.to_rule())
            .collect::<Result<Vec<_>>>()?;

        Ok(RunSpec {
            signal,
            design: DesignSpec {
                kind: design_kind,
                n: self.n,
                p: self.p,
            },
            noise,
            rules,
            m_max: self.m_max,
            debug_asserts: false,
            keep_diagnostics: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "signal": {"kind": "g2"},
        "design": {"kind": "uncorrelated"},
        "noise": {"kind": "gaussian", "sigma_sq": 1.0},
        "n": 100, "p": 200, "runs": 3, "seed": 7,
        "rules": [
            {"name": "tau-true-noise"},
            {"name": "two-step", "params": {"lambda0_factor": 0.5, "c_aic": 2.0}}
        ]
    }"#;

    #[test]
    fn good_config_parses_and_lowers() {
        let cfg: ExperimentConfig = serde_json::from_str(GOOD).unwrap();
        let spec = cfg.to_run_spec().unwrap();
        assert_eq!(spec.rules.len(), 2);
        assert_eq!(spec.design.n, 100);
        assert!(matches!(spec.noise, NoiseSpec::Gaussian { .. }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = GOOD.replace("\"seed\": 7", "\"seed\": 7, \"extra\": 1");
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn unknown_rule_is_rejected() {
        let bad = GOOD.replace("tau-true-noise", "tau-magic");
        let cfg: ExperimentConfig = serde_json::from_str(&bad).unwrap();
        let err = cfg.to_run_spec().unwrap_err().to_string();
        assert!(err.contains("tau-magic"));
        assert!(err.contains("two-step"));
    }

    #[test]
    fn classification_defaults_the_rescale_factor() {
        let cfg_text = GOOD.replace(
            r#""noise": {"kind": "gaussian", "sigma_sq": 1.0}"#,
            r#""noise": {"kind": "classification"}"#,
        );
        let cfg: ExperimentConfig = serde_json::from_str(&cfg_text).unwrap();
        let spec = cfg.to_run_spec().unwrap();
        assert_eq!(spec.signal.rescale_factor, Some(0.03));
    }
}
