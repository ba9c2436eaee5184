//! Parameter resolution: built-in defaults, then a TOML config file, then
//! explicit flags, then `--param key=value` overrides.
//!
//! A config file holds flat `key = value` pairs applying to every variant
//! and optional `[as]`, `[mmas]`, `[acs]` tables applying to one.

use std::path::Path;

use mwsrpdt_core::aco::{AcoParams, Variant};

use crate::error::{CliError, Result};

fn scalar(value: &toml::Value) -> Option<String> {
    match value {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(b) => Some(b.to_string()),
        _ => None,
    }
}

pub fn apply_config_text(params: &mut AcoParams, text: &str) -> Result<()> {
    let table: toml::Table = text.parse().map_err(|e| CliError::Usage(format!("config: {e}")))?;
    let mut section = None;
    for (key, value) in &table {
        if let Some(s) = scalar(value) {
            params.set(key, &s)?;
        } else if let toml::Value::Table(t) = value {
            key.parse::<Variant>()?;
            if key.eq_ignore_ascii_case(params.variant.as_str()) {
                section = Some(t);
            }
        } else {
            return Err(CliError::Usage(format!("config: unsupported value for `{key}`")));
        }
    }
    if let Some(t) = section {
        for (key, value) in t {
            let s = scalar(value).ok_or_else(|| CliError::Usage(format!("config: unsupported value for `{key}`")))?;
            params.set(key, &s)?;
        }
    }
    Ok(())
}

pub fn apply_config_file(params: &mut AcoParams, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    apply_config_text(params, &text)
}

/// Applies `key=value` overrides.
pub fn apply_overrides(params: &mut AcoParams, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key, value) =
            item.split_once('=').ok_or_else(|| CliError::Usage(format!("--param expects key=value, got `{item}`")))?;
        params.set(key, value)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct ParamSources<'a> {
    pub config: Option<&'a Path>,
    pub ants: Option<usize>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
    pub overrides: &'a [String],
}

pub fn resolve(variant: Variant, sources: &ParamSources<'_>) -> Result<AcoParams> {
    let mut params = AcoParams::defaults(variant);
    if let Some(path) = sources.config {
        apply_config_file(&mut params, path)?;
    }
    if let Some(a) = sources.ants {
        params.num_ants = a;
    }
    if let Some(i) = sources.iters {
        params.max_iter = i;
    }
    if let Some(s) = sources.seed {
        params.seed = s;
    }
    apply_overrides(&mut params, sources.overrides)?;
    params.validate()?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mwsrpdt_core::aco::Encoding;

    #[test]
    fn precedence_defaults_config_params() {
        let mut p = AcoParams::defaults(Variant::MaxMin);
        apply_config_text(&mut p, "alpha = 2\nbeta = 3.5\n[mmas]\nalpha = 4\nencoding = \"ct1\"\n[as]\nalpha = 9\n")
            .unwrap();
        assert_eq!((p.alpha, p.beta, p.encoding), (4.0, 3.5, Encoding::Ct1));
        apply_overrides(&mut p, &["alpha=1.5".to_string()]).unwrap();
        assert_eq!(p.alpha, 1.5);
    }

    #[test]
    fn bad_inputs_are_usage_errors() {
        let mut p = AcoParams::defaults(Variant::AntSystem);
        assert_eq!(apply_overrides(&mut p, &["alpha".to_string()]).unwrap_err().exit_code(), 2);
        assert_eq!(apply_config_text(&mut p, "[xyz]\na = 1\n").unwrap_err().exit_code(), 2);
        assert_eq!(apply_config_text(&mut p, "alpha = [1, 2]\n").unwrap_err().exit_code(), 2);
    }
}
