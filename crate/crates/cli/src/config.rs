//! `key = value` code configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use zigzag_core::construct::{
    build_code, build_code_with_table, BuildError, CodeParams, CodeSpec, FamilyKind, Scheme,
};
use zigzag_core::gf::{Field, FieldError};
use zigzag_core::perms::{Family, PermError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("missing key {0:?}")]
    Missing(&'static str),
    #[error("bad value for {key}: {value:?}")]
    BadValue { key: &'static str, value: String },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Build(#[from] BuildError),
}

const KEYS: [&str; 9] = ["family", "vectors", "m", "r", "s", "w", "scheme", "field", "table"];

/// A parsed configuration: code parameters plus an optional coefficient table.
#[derive(Debug, Clone)]
pub struct Config {
    pub params: CodeParams,
    pub table: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = read(path)?;
        Config::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// `base` resolves a relative `table` path.
    pub fn parse(text: &str, base: &Path) -> Result<Config, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
            map.insert(key.to_string(), value.trim().to_string());
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let r: u32 = number(get("r").unwrap_or("2"), "r")?;
        let s: usize = number(get("s").unwrap_or("1"), "s")?;
        let scheme: Scheme = get("scheme").ok_or(ConfigError::Missing("scheme"))?.parse()?;
        let field = get("field").map(str::parse::<Field>).transpose()?;
        let (family, m) = match get("family").unwrap_or("standard") {
            "standard" => (FamilyKind::Standard, number(need(&map, "m")?, "m")?),
            "weightw" => (
                FamilyKind::WeightW {
                    w: number(need(&map, "w")?, "w")?,
                },
                number(need(&map, "m")?, "m")?,
            ),
            "explicit" => {
                let family = Family::parse(r, need(&map, "vectors")?)?;
                let m = family.m();
                (FamilyKind::Explicit(family.vectors().to_vec()), m)
            }
            other => {
                return Err(ConfigError::BadValue {
                    key: "family",
                    value: other.to_string(),
                })
            }
        };
        let table = match get("table") {
            Some(p) => Some(read(&base.join(p))?),
            None => None,
        };
        Ok(Config {
            params: CodeParams {
                family,
                m,
                r,
                s,
                scheme,
                field,
            },
            table,
        })
    }

    pub fn build(&self) -> Result<CodeSpec, ConfigError> {
        Ok(match (&self.table, self.params.scheme) {
            (Some(t), Scheme::Table) => build_code_with_table(&self.params, t)?,
            (None, Scheme::Table) => return Err(ConfigError::Missing("table")),
            _ => build_code(&self.params)?,
        })
    }
}

/// Recovers the family kind from its digit strings.
pub fn family_kind(family: &Family) -> FamilyKind {
    if family.is_standard_basis() {
        return FamilyKind::Standard;
    }
    if family.radix() == 2 {
        for w in 2..=family.m() {
            if Family::weight_w(family.m(), w).is_ok_and(|f| f.vectors() == family.vectors()) {
                return FamilyKind::WeightW { w };
            }
        }
    }
    FamilyKind::Explicit(family.vectors().to_vec())
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn need<'a>(map: &'a BTreeMap<String, String>, key: &'static str) -> Result<&'a str, ConfigError> {
    map.get(key).map(String::as_str).ok_or(ConfigError::Missing(key))
}

fn number<T: std::str::FromStr>(value: &str, key: &'static str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key,
        value: value.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure2_config() {
        let c = Config::parse("scheme = cons3\nm = 2 # rows 4\n", Path::new(".")).unwrap();
        let spec = c.build().unwrap();
        assert_eq!((spec.n(), spec.k(), spec.p()), (5, 3, 4));
        assert_eq!(spec.field().token(), "gf(3)");
    }

    #[test]
    fn explicit_and_weight_families() {
        let c = Config::parse("family=explicit\nvectors=100,010\nscheme=table\n", Path::new(".")).unwrap();
        assert_eq!(c.params.m, 3);
        assert!(matches!(c.build(), Err(ConfigError::Missing("table"))));
        let w = Config::parse("family=weightw\nm=6\nw=3\nscheme=weightw\n", Path::new(".")).unwrap();
        let spec = w.build().unwrap();
        assert_eq!(family_kind(spec.family()), FamilyKind::WeightW { w: 3 });
    }

    #[test]
    fn rejects_bad_input() {
        let base = Path::new(".");
        assert!(matches!(Config::parse("m 2", base), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(Config::parse("colour=red", base), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(Config::parse("m=2", base), Err(ConfigError::Missing("scheme"))));
        assert!(matches!(
            Config::parse("scheme=cons3\nm=two", base),
            Err(ConfigError::BadValue { key: "m", .. })
        ));
        assert!(matches!(Config::parse("scheme=cons3\nm=2\nfield=gf(6)", base), Err(ConfigError::Field(_))));
        let c = Config::parse("scheme=cons3\nm=2\nr=3", base).unwrap();
        assert!(matches!(c.build(), Err(ConfigError::Build(_))));
    }
}
