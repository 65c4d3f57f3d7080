//! Run configuration: flat `key = value` text or a flat JSON object, with keys
//! spelled like the command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nls::NlsParams;
use crate::profiles::ProfileKind;

/// Every accepted key.
pub const KEYS: [&str; 15] = [
    "scenario",
    "n",
    "rmax",
    "dt",
    "t-final",
    "output-every",
    "profile",
    "amp",
    "k",
    "lambda",
    "seed",
    "out",
    "radius",
    "profile-file",
    "inject-beta-flip",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Nls,
    Smap,
    Compare,
    Convergence,
    WeightsAudit,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Nls => "nls",
            Scenario::Smap => "smap",
            Scenario::Compare => "compare",
            Scenario::Convergence => "convergence",
            Scenario::WeightsAudit => "weights-audit",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nls" => Ok(Scenario::Nls),
            "smap" => Ok(Scenario::Smap),
            "compare" => Ok(Scenario::Compare),
            "convergence" => Ok(Scenario::Convergence),
            "weights-audit" => Ok(Scenario::WeightsAudit),
            other => Err(Error::Config(format!(
                "unknown scenario '{other}' (expected nls, smap, compare, convergence or weights-audit)"
            ))),
        }
    }
}

/// Raw key/value pairs before interpretation.
pub type ConfigPairs = BTreeMap<String, String>;

/// Parses a config file body. JSON is recognized by a leading `{`.
pub fn parse_pairs(text: &str) -> Result<ConfigPairs> {
    let trimmed = text.trim_start();
    let pairs = if trimmed.starts_with('{') {
        parse_json(trimmed)?
    } else {
        parse_lines(text)?
    };
    for key in pairs.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
    }
    Ok(pairs)
}

fn parse_lines(text: &str) -> Result<ConfigPairs> {
    let mut pairs = ConfigPairs::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let key = key.trim().to_string();
        let value = value.trim().trim_matches('"').to_string();
        if pairs.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }
    Ok(pairs)
}

fn parse_json(text: &str) -> Result<ConfigPairs> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("invalid JSON config: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Config("JSON config must be an object".into()))?;
    obj.iter()
        .map(|(k, v)| {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                _ => {
                    return Err(Error::Config(format!(
                        "key '{k}' must be a string, number or boolean"
                    )))
                }
            };
            Ok((k.clone(), s))
        })
        .collect()
}

pub fn load_pairs(path: &Path) -> Result<ConfigPairs> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pairs(&text)
}

/// A fully interpreted run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub rmax: f64,
    pub dt: f64,
    pub t_final: f64,
    pub output_every: usize,
    pub profile: ProfileKind,
    pub amp: f64,
    pub params: NlsParams,
    pub seed: u64,
    pub out: PathBuf,
    pub radius: Option<f64>,
    pub profile_file: Option<PathBuf>,
    pub inject_beta_flip: bool,
}

fn get<T: FromStr>(pairs: &ConfigPairs, key: &str) -> Result<Option<T>> {
    pairs
        .get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::Config(format!("invalid value '{v}' for '{key}'")))
        })
        .transpose()
}

impl RunConfig {
    pub fn from_pairs(pairs: &ConfigPairs) -> Result<Self> {
        for key in pairs.keys() {
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
        }
        let scenario: Scenario =
            get(pairs, "scenario")?.ok_or_else(|| Error::Config("missing 'scenario'".into()))?;
        let default_profile = match scenario {
            Scenario::Smap | Scenario::Compare => ProfileKind::Meridian,
            _ => ProfileKind::GaussM1,
        };
        let profile: ProfileKind = get(pairs, "profile")?.unwrap_or(default_profile);
        let default_amp = match profile {
            ProfileKind::GaussM1 => 0.2,
            ProfileKind::Meridian => 0.3,
            ProfileKind::Custom => 1.0,
        };
        let amp: f64 = get(pairs, "amp")?.unwrap_or(default_amp);
        if !amp.is_finite() {
            return Err(Error::Config(format!(
                "amplitude must be finite (got {amp})"
            )));
        }
        let k: f64 = get(pairs, "k")?.unwrap_or(1.0);
        let lambda: i32 = get(pairs, "lambda")?.unwrap_or(1);
        let params = if scenario == Scenario::Compare {
            // the map picture only corresponds to K = λ = 1
            if (pairs.contains_key("k") && k != 1.0)
                || (pairs.contains_key("lambda") && lambda != 1)
            {
                return Err(Error::Config(
                    "compare runs use K = 1 and lambda = 1".into(),
                ));
            }
            NlsParams::schrodinger_map()
        } else {
            NlsParams::new(k, lambda).map_err(|e| Error::Config(e.to_string()))?
        };
        let profile_file: Option<PathBuf> = get(pairs, "profile-file")?;
        if profile == ProfileKind::Custom && profile_file.is_none() {
            return Err(Error::Config(
                "profile 'custom' requires 'profile-file'".into(),
            ));
        }
        let cfg = Self {
            scenario,
            n: get(pairs, "n")?.unwrap_or(1024),
            rmax: get(pairs, "rmax")?.unwrap_or(16.0),
            dt: get(pairs, "dt")?.unwrap_or(1e-3),
            t_final: get(pairs, "t-final")?.unwrap_or(1.0),
            output_every: get(pairs, "output-every")?.unwrap_or(10),
            profile,
            amp,
            params,
            seed: get(pairs, "seed")?.unwrap_or(0),
            out: get(pairs, "out")?.unwrap_or_else(|| PathBuf::from("smaplab-out")),
            radius: get(pairs, "radius")?,
            profile_file,
            inject_beta_flip: get(pairs, "inject-beta-flip")?.unwrap_or(false),
        };
        if cfg.n < 8 || !(cfg.rmax > 0.0) || !cfg.rmax.is_finite() {
            return Err(Error::Config(format!(
                "degenerate grid n = {}, rmax = {}",
                cfg.n, cfg.rmax
            )));
        }
        if !(cfg.dt > 0.0)
            || !cfg.dt.is_finite()
            || !(cfg.t_final >= 0.0)
            || !cfg.t_final.is_finite()
        {
            return Err(Error::Config(format!(
                "need dt > 0 and t-final >= 0 (got {}, {})",
                cfg.dt, cfg.t_final
            )));
        }
        if cfg.output_every == 0 {
            return Err(Error::Config("output-every must be positive".into()));
        }
        if let Some(r) = cfg.radius {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Config(format!("radius must be positive (got {r})")));
            }
        }
        Ok(cfg)
    }

    /// The pairs this config was built from, with defaults filled in.
    pub fn echo(&self) -> ConfigPairs {
        let mut m = ConfigPairs::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("scenario", self.scenario.name().into());
        put("n", self.n.to_string());
        put("rmax", self.rmax.to_string());
        put("dt", self.dt.to_string());
        put("t-final", self.t_final.to_string());
        put("output-every", self.output_every.to_string());
        put("profile", self.profile.name().into());
        put("amp", self.amp.to_string());
        put("k", self.params.coupling.to_string());
        put("lambda", self.params.lambda.to_string());
        put("seed", self.seed.to_string());
        put("out", self.out.display().to_string());
        if let Some(r) = self.radius {
            put("radius", r.to_string());
        }
        if let Some(p) = &self.profile_file {
            put("profile-file", p.display().to_string());
        }
        put("inject-beta-flip", self.inject_beta_flip.to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_and_json_agree() {
        let a = parse_pairs("# comment\nscenario = nls\nn = 256\ndt=1e-3\n").unwrap();
        let b = parse_pairs(r#"{"scenario": "nls", "n": 256, "dt": 0.001}"#).unwrap();
        let ca = RunConfig::from_pairs(&a).unwrap();
        let cb = RunConfig::from_pairs(&b).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(ca.n, 256);
        assert_eq!(ca.profile, ProfileKind::GaussM1);
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(parse_pairs("scenario nls").is_err());
        assert!(parse_pairs("bogus = 1").is_err());
        assert!(parse_pairs("n = 1\nn = 2").is_err());
        assert!(parse_pairs("[1, 2]").is_err());
        let p = parse_pairs("n = 64").unwrap();
        assert!(RunConfig::from_pairs(&p).is_err());
        let p = parse_pairs("scenario = nls\nlambda = 2").unwrap();
        assert!(RunConfig::from_pairs(&p).is_err());
        let p = parse_pairs("scenario = nls\nprofile = custom").unwrap();
        assert!(RunConfig::from_pairs(&p).is_err());
        let p = parse_pairs("scenario = compare\nk = 0.5").unwrap();
        assert!(RunConfig::from_pairs(&p).is_err());
        let p = parse_pairs("scenario = nls\nn = 4").unwrap();
        assert!(RunConfig::from_pairs(&p).is_err());
        let p = parse_pairs("scenario = nls\namp = inf").unwrap();
        assert!(RunConfig::from_pairs(&p).is_err());
    }

    #[test]
    fn echo_roundtrips() {
        let p = parse_pairs("scenario = smap\nn = 128\nradius = 3").unwrap();
        let c = RunConfig::from_pairs(&p).unwrap();
        assert_eq!(RunConfig::from_pairs(&c.echo()).unwrap(), c);
    }
}
