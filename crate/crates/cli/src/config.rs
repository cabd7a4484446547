use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// A failure and the exit status it maps to.
pub enum Failure {
    /// Bad invocation or configuration; exit status 2.
    Usage(String),
    /// Unreadable or invalid input data; exit status 1.
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Data(e) => write!(f, "{e:#}"),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Keys naming files; relative values resolve against the config file.
const PATH_KEYS: &[&str] = &["inventory", "data_dir", "tagset", "punctuation", "confusion"];

const VALUE_KEYS: &[&str] = &[
    "seed",
    "jobs",
    "qa.apostrophe_min_count",
    "qa.low_freq_max",
    "qa.neighbor_min_count",
    "qa.pointed_rate",
    "qa.pointed_min_letters",
    "embed.dim",
    "embed.window",
    "embed.min_count",
    "embed.iterations",
    "embed.x_max",
    "embed.alpha",
    "embed.learning_rate",
    "neighbors.k",
    "variants.min_cosine",
    "variants.max_edit",
    "tagger.hidden",
    "tagger.optimizer",
    "tagger.learning_rate",
    "tagger.batch_size",
    "tagger.epochs",
    "tagger.warmup",
    "tagger.weight_decay",
    "folds.seed",
    "align.match",
    "align.mismatch",
    "align.gap",
    "align.soft_threshold",
];

/// Flat `key = value` settings. Command-line flags take precedence.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    origin: Option<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = Self::parse(&text, base).map_err(|(line, msg)| usage(format!("{}:{line}: {msg}", path.display())))?;
        cfg.origin = Some(path.to_path_buf());
        Ok(cfg)
    }

    /// Errors carry the 1-based line number.
    pub fn parse(text: &str, base: &Path) -> Result<Self, (usize, String)> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| (n + 1, "expected key = value".to_string()))?;
            let (k, v) = (k.trim(), v.trim());
            let value = if PATH_KEYS.contains(&k) {
                let p = base.join(v);
                if !p.exists() {
                    return Err((n + 1, format!("{k}: {} does not exist", p.display())));
                }
                p.display().to_string()
            } else if VALUE_KEYS.contains(&k) {
                v.to_string()
            } else {
                return Err((n + 1, format!("unknown key {k:?}")));
            };
            if values.insert(k.to_string(), value).is_some() {
                return Err((n + 1, format!("duplicate key {k:?}")));
            }
        }
        Ok(Config { values, origin: None })
    }

    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.values.get(key).map(PathBuf::from))
    }

    /// The flag if given, else the config value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Failure> {
        Ok(self.pick_opt(flag, key)?.unwrap_or(default))
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                let from = self.origin.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
                usage(format!("{from}: bad value {v:?} for {key}"))
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win() {
        let c = Config::parse("seed = 7\n# note\nembed.dim=50\n", Path::new("")).unwrap();
        assert_eq!(c.pick(None, "seed", 1u64).ok(), Some(7));
        assert_eq!(c.pick(Some(3u64), "seed", 1).ok(), Some(3));
        assert_eq!(c.pick(None, "embed.window", 2usize).ok(), Some(2));
    }

    #[test]
    fn rejects_unknown_and_missing() {
        assert_eq!(Config::parse("color = red", Path::new("")).unwrap_err().0, 1);
        let e = Config::parse("\ntagset = /no/such/file", Path::new("")).unwrap_err();
        assert_eq!(e.0, 2);
        assert!(Config::parse("seed 3", Path::new("")).is_err());
        assert!(Config::parse("seed=1\nseed=2", Path::new("")).is_err());
    }

    #[test]
    fn bad_value_is_a_usage_error() {
        let c = Config::parse("jobs = many", Path::new("")).unwrap();
        assert!(matches!(c.pick(None, "jobs", 1usize), Err(Failure::Usage(_))));
    }
}
