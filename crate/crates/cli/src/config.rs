//! Flat `key = value` config files with optional `[section]` headers.
//!
//! Keys before the first header apply to every subcommand; keys under
//! `[name]` apply only to subcommand `name`. Command-line flags win.

use std::collections::BTreeMap;

use crate::cli::Params;

pub const SECTIONS: [&str; 10] = [
    "family", "mt", "bm", "sweep", "legendre", "laplace", "thermo", "mfe", "constants", "reproduce",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    pub global: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn parse(text: &str) -> Result<ConfigFile, String> {
    let mut cfg = ConfigFile::default();
    let mut section: Option<String> = None;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(format!("line {}: unknown section [{name}]", no + 1));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value", no + 1));
        };
        let key = k.trim().replace('_', "-");
        if !Params::KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key `{}`", no + 1, k.trim()));
        }
        let map = match &section {
            Some(s) => cfg.sections.entry(s.clone()).or_default(),
            None => &mut cfg.global,
        };
        map.insert(key, v.trim().to_string());
    }
    Ok(cfg)
}

impl ConfigFile {
    /// Fills unset fields of `params`, section values taking precedence over
    /// global ones.
    pub fn apply(&self, command: &str, params: &mut Params) -> Result<(), String> {
        if let Some(sec) = self.sections.get(command) {
            for (k, v) in sec {
                params.set_default(k, v)?;
            }
        }
        for (k, v) in &self.global {
            params.set_default(k, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_rejections() {
        let cfg = parse("n = 3\n# note\n[mfe]\na = 4\n").unwrap();
        assert_eq!(cfg.global["n"], "3");
        assert_eq!(cfg.sections["mfe"]["a"], "4");
        assert!(parse("bogus = 1").unwrap_err().contains("unknown key"));
        assert!(parse("[nope]").unwrap_err().contains("unknown section"));
        assert!(parse("n 3").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let cfg = parse("n = 3\neps = 0.5,1\n[mt]\nn = 1\n").unwrap();
        let mut p = Params {
            n: Some(2),
            ..Params::default()
        };
        cfg.apply("mt", &mut p).unwrap();
        assert_eq!(p.n, Some(2));
        assert_eq!(p.eps, Some(vec![0.5, 1.0]));
        let mut q = Params::default();
        cfg.apply("mt", &mut q).unwrap();
        assert_eq!(q.n, Some(1));
    }
}
