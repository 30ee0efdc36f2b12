//! Flat `key = value` run configuration.
//!
//! Values are resolved in order: schema default, config file, command-line
//! flag. Every value is checked against its key's kind before anything
//! runs, so a bad value is reported with the line (or flag) it came from.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Invalid configuration. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Seed,
    /// Integer `≥ 1`.
    Count,
    /// Integer `≥ 0`.
    Index,
    /// Any finite float.
    Real,
    /// Finite float `> 0`.
    Positive,
    /// Finite float `≥ 0`.
    NonNegative,
    /// Float in `(0, 1)`.
    Probability,
    /// Float in `[0, 1]`.
    Fraction,
    Bool,
    Path,
    Choice(&'static [&'static str]),
}

impl Kind {
    fn check(self, raw: &str) -> Result<(), String> {
        fn float(raw: &str) -> Result<f64, String> {
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("expected a finite number, got `{raw}`")),
            }
        }
        match self {
            Kind::Seed => {
                raw.parse::<u64>().map(drop).map_err(|_| format!("expected a 64-bit unsigned seed, got `{raw}`"))
            }
            Kind::Index => raw.parse::<usize>().map(drop).map_err(|_| format!("expected an integer ≥ 0, got `{raw}`")),
            Kind::Count => match raw.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(()),
                _ => Err(format!("expected an integer ≥ 1, got `{raw}`")),
            },
            Kind::Real => float(raw).map(drop),
            Kind::Positive => match float(raw)? {
                v if v > 0.0 => Ok(()),
                _ => Err(format!("expected a number > 0, got `{raw}`")),
            },
            Kind::NonNegative => match float(raw)? {
                v if v >= 0.0 => Ok(()),
                _ => Err(format!("expected a number ≥ 0, got `{raw}`")),
            },
            Kind::Probability => match float(raw)? {
                v if v > 0.0 && v < 1.0 => Ok(()),
                _ => Err(format!("expected a number in (0, 1), got `{raw}`")),
            },
            Kind::Fraction => match float(raw)? {
                v if (0.0..=1.0).contains(&v) => Ok(()),
                _ => Err(format!("expected a number in [0, 1], got `{raw}`")),
            },
            Kind::Bool => raw.parse::<bool>().map(drop).map_err(|_| format!("expected true or false, got `{raw}`")),
            Kind::Path => {
                if raw.is_empty() {
                    Err("expected a nonempty path".into())
                } else {
                    Ok(())
                }
            }
            Kind::Choice(options) => {
                if options.contains(&raw) {
                    Ok(())
                } else {
                    Err(format!("expected one of {}, got `{raw}`", options.join(", ")))
                }
            }
        }
    }
}

/// One documented configuration key.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

/// Keys every subcommand accepts. They do not enter the manifest hash:
/// `seed` is hashed separately and the other two only say where and how
/// outputs are written.
pub const COMMON_KEYS: &[Key] = &[
    Key { name: "seed", kind: Kind::Seed, default: "0", help: "master seed for every random stream" },
    Key { name: "out", kind: Kind::Path, default: "genlab-out", help: "output directory" },
    Key { name: "svg", kind: Kind::Bool, default: "false", help: "also write SVG plots" },
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { path: PathBuf, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => f.write_str("default"),
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    values: BTreeMap<&'static str, (String, Origin)>,
}

fn lookup(keys: &[Key], name: &str) -> Option<Key> {
    COMMON_KEYS.iter().chain(keys).find(|k| k.name == name).copied()
}

impl RunConfig {
    /// Defaults from `keys` and [`COMMON_KEYS`], then `file` as `(path,
    /// contents)`, then `flags`.
    pub fn resolve(
        command: &'static str,
        keys: &'static [Key],
        file: Option<(&Path, &str)>,
        flags: &[(&'static str, String)],
    ) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for k in COMMON_KEYS.iter().chain(keys) {
            values.insert(k.name, (k.default.to_string(), Origin::Default));
        }
        if let Some((path, text)) = file {
            let mut seen: BTreeMap<&'static str, usize> = BTreeMap::new();
            for (i, line) in text.lines().enumerate() {
                let line_no = i + 1;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let at = || format!("{}:{line_no}", path.display());
                let Some((name, value)) = trimmed.split_once('=') else {
                    return Err(ConfigError(format!("{}: expected `key = value`, got `{trimmed}`", at())));
                };
                let (name, value) = (name.trim(), value.trim());
                let Some(key) = lookup(keys, name) else {
                    let known: Vec<&str> = COMMON_KEYS.iter().chain(keys).map(|k| k.name).collect();
                    return Err(ConfigError(format!(
                        "{}: unknown key `{name}` for {command} (known keys: {})",
                        at(),
                        known.join(", ")
                    )));
                };
                if let Some(first) = seen.insert(key.name, line_no) {
                    return Err(ConfigError(format!("{}: key `{name}` already set on line {first}", at())));
                }
                key.kind.check(value).map_err(|e| ConfigError(format!("{}: key `{name}`: {e}", at())))?;
                values.insert(key.name, (value.to_string(), Origin::File { path: path.to_path_buf(), line: line_no }));
            }
        }
        for (name, value) in flags {
            let key = lookup(keys, name).ok_or_else(|| ConfigError(format!("unknown flag --{name}")))?;
            key.kind.check(value).map_err(|e| ConfigError(format!("flag --{}: {e}", name.replace('_', "-"))))?;
            values.insert(key.name, (value.clone(), Origin::Flag));
        }
        Ok(Self { command, values })
    }

    pub fn raw(&self, key: &str) -> &str {
        match self.values.get(key) {
            Some((v, _)) => v,
            None => panic!("{} has no key `{key}`", self.command),
        }
    }

    #[cfg(test)]
    pub fn origin(&self, key: &str) -> Option<&Origin> {
        self.values.get(key).map(|(_, o)| o)
    }

    /// Typed value. Kinds are checked during [`RunConfig::resolve`], so a
    /// parse failure here means the caller asked for the wrong type.
    pub fn get<T: FromStr>(&self, key: &str) -> T {
        match self.raw(key).parse() {
            Ok(v) => v,
            Err(_) => panic!("key `{key}` of {} read as {}", self.command, std::any::type_name::<T>()),
        }
    }

    pub fn seed(&self) -> u64 {
        self.get("seed")
    }

    pub fn out(&self) -> PathBuf {
        PathBuf::from(self.raw("out"))
    }

    pub fn svg(&self) -> bool {
        self.get("svg")
    }

    /// Subcommand keys with their resolved values, sorted by key.
    pub fn parameters(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| !COMMON_KEYS.iter().any(|c| c.name == **k))
            .map(|(k, (v, _))| (k.to_string(), v.clone()))
            .collect()
    }
}
