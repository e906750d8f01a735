//! Flat key=value configuration, merged from an optional config file and
//! command-line flags (later entries override earlier ones).

use dtrans_core::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: Vec<(String, String)>,
}

impl RawConfig {
    pub fn from_args(args: &[String]) -> Result<Self> {
        let mut cfg = RawConfig::default();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let key = arg
                .strip_prefix("--")
                .ok_or_else(|| Error::parameter(format!("expected a --flag, got '{arg}'")))?;
            let value = args
                .get(i + 1)
                .ok_or_else(|| Error::parameter(format!("flag --{key} needs a value")))?;
            if key == "config" {
                cfg.load_file(value)?;
            } else {
                cfg.set(key, value);
            }
            i += 2;
        }
        Ok(cfg)
    }

    pub fn load_file(&mut self, path: &str) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::parameter(format!("cannot read config '{path}': {e}")))?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parameter(format!("config line without '=': '{line}'")))?;
            self.set(k.trim(), v.trim());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Last occurrence wins.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_or(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    pub fn usize_or(&self, key: &str, default: usize, errors: &mut Vec<String>) -> usize {
        match self.get(key) {
            None => default,
            Some(v) => match v.parse::<usize>() {
                Ok(x) if x > 0 => x,
                _ => {
                    errors.push(format!("{key}: expected a positive integer, got '{v}'"));
                    default
                }
            },
        }
    }

    pub fn u64_or(&self, key: &str, default: u64, errors: &mut Vec<String>) -> u64 {
        match self.get(key) {
            None => default,
            Some(v) => match v.parse::<u64>() {
                Ok(x) => x,
                _ => {
                    errors.push(format!("{key}: expected an integer, got '{v}'"));
                    default
                }
            },
        }
    }

    pub fn f64_or(&self, key: &str, default: f64, errors: &mut Vec<String>) -> f64 {
        match self.get(key) {
            None => default,
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() && x > 0.0 => x,
                _ => {
                    errors.push(format!("{key}: expected a positive number, got '{v}'"));
                    default
                }
            },
        }
    }

    pub fn usize_list_or(
        &self,
        key: &str,
        default: &[usize],
        errors: &mut Vec<String>,
    ) -> Vec<usize> {
        match self.get(key) {
            None => default.to_vec(),
            Some(v) => {
                let parsed: std::result::Result<Vec<usize>, _> =
                    v.split(',').map(|s| s.trim().parse::<usize>()).collect();
                match parsed {
                    Ok(xs) if !xs.is_empty() && xs.iter().all(|&x| x > 0) => xs,
                    _ => {
                        errors.push(format!("{key}: expected positive integers, got '{v}'"));
                        default.to_vec()
                    }
                }
            }
        }
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64], errors: &mut Vec<String>) -> Vec<f64> {
        match self.get(key) {
            None => default.to_vec(),
            Some(v) => {
                let parsed: std::result::Result<Vec<f64>, _> =
                    v.split(',').map(|s| s.trim().parse::<f64>()).collect();
                match parsed {
                    Ok(xs) if !xs.is_empty() && xs.iter().all(|&x| x > 0.0) => xs,
                    _ => {
                        errors.push(format!("{key}: expected positive numbers, got '{v}'"));
                        default.to_vec()
                    }
                }
            }
        }
    }

    /// Simplex coordinates like "0.5,0.5".
    pub fn point(&self, key: &str, errors: &mut Vec<String>) -> Option<Vec<f64>> {
        match self.get(key) {
            None => {
                errors.push(format!("{key}: required"));
                None
            }
            Some(v) => {
                let parsed: std::result::Result<Vec<f64>, _> =
                    v.split(',').map(|s| s.trim().parse::<f64>()).collect();
                match parsed {
                    Ok(xs) if xs.len() >= 2 => Some(xs),
                    _ => {
                        errors.push(format!("{key}: expected comma-separated coordinates"));
                        None
                    }
                }
            }
        }
    }
}
